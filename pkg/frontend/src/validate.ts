// Client-side validation mirroring the server's rules, so an edit that
// would be rejected server-side is never sent in the first place.

import type {
  CameraConfig,
  SamplingConfig,
  ShadingConfig,
  TfPoint,
} from "./protocol";

const SHADING_MODELS = new Set(["phong", "cel", "none"]);

function finite(...values: number[]): boolean {
  return values.every((v) => typeof v === "number" && Number.isFinite(v));
}

function inUnit(...values: number[]): boolean {
  return values.every((v) => v >= 0 && v <= 1);
}

export function validateTf(points: TfPoint[]): string | null {
  if (!Array.isArray(points) || points.length < 1) {
    return "transfer function needs at least one control point";
  }
  let previous = -Infinity;
  for (const p of points) {
    if (!finite(p.intensity, p.r, p.g, p.b, p.a)) {
      return "control point has non-finite channels";
    }
    if (p.intensity <= previous) {
      return "control point intensities must strictly increase";
    }
    if (p.intensity < 0 || p.intensity > 1) {
      return "control point intensities must lie in [0, 1]";
    }
    if (!inUnit(p.r, p.g, p.b, p.a)) {
      return "channels must lie in [0, 1]";
    }
    previous = p.intensity;
  }
  return null;
}

function norm3(v: [number, number, number]): number {
  return Math.hypot(v[0], v[1], v[2]);
}

function sub3(
  a: [number, number, number],
  b: [number, number, number],
): [number, number, number] {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function cross3(
  a: [number, number, number],
  b: [number, number, number],
): [number, number, number] {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function validateCamera(cam: CameraConfig): string | null {
  if (!finite(...cam.eye, ...cam.target, ...cam.up, cam.fov)) {
    return "camera fields must be finite numbers";
  }
  if (!(cam.width >= 1) || !(cam.height >= 1)) {
    return "image size must be positive";
  }
  if (!(cam.fov > 0 && cam.fov < 180)) {
    return "fov must lie in (0, 180)";
  }
  const view = sub3(cam.target, cam.eye);
  const viewNorm = norm3(view);
  if (viewNorm === 0) {
    return "camera eye and target coincide";
  }
  const forward: [number, number, number] = [
    view[0] / viewNorm,
    view[1] / viewNorm,
    view[2] / viewNorm,
  ];
  if (norm3(cross3(forward, cam.up)) < 1e-12) {
    return "up vector is parallel to the view direction";
  }
  return null;
}

export function validateShading(cfg: ShadingConfig): string | null {
  if (!SHADING_MODELS.has(cfg.model)) {
    return `unknown shading model ${String(cfg.model)}`;
  }
  if (!finite(cfg.ambient, cfg.diffuse, cfg.specular, cfg.shininess)) {
    return "shading terms must be finite numbers";
  }
  if (!inUnit(cfg.ambient, cfg.diffuse, cfg.specular)) {
    return "light components must lie in [0, 1]";
  }
  if (!(cfg.shininess > 0)) {
    return "shininess must be positive";
  }
  if (!(Number.isInteger(cfg.cel_bands) && cfg.cel_bands >= 2)) {
    return "cel_bands must be an integer >= 2";
  }
  if (cfg.light_dir !== null) {
    if (!finite(...cfg.light_dir) || norm3(cfg.light_dir) < 1e-9) {
      return "light_dir must be a non-zero vector";
    }
  }
  return null;
}

export function validateSampling(cfg: SamplingConfig): string | null {
  if (cfg.step !== null && !(cfg.step > 0)) {
    return "step must be positive";
  }
  if (!(cfg.early_termination_alpha > 0 && cfg.early_termination_alpha <= 1)) {
    return "early_termination_alpha must lie in (0, 1]";
  }
  if (!finite(...cfg.background) || !inUnit(...cfg.background)) {
    return "background must be an rgb triple in [0, 1]";
  }
  return null;
}
