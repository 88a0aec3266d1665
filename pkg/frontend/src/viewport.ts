// Camera state for the viewer: an orbit rig around the volume plus the
// axis-aligned presets that mirror the CLI's axial/coronal/sagittal views.

import type { CameraConfig } from "./protocol";

export type PresetView = "axial" | "coronal" | "sagittal";

/** Vertical FOV of the near-orthographic presets (matches the CLI). */
export const PRESET_FOV = 3.0;

// tan(PRESET_FOV/2 in radians) as the render service computes it. The last
// bit of Math.tan differs from the server's libm here, which would break
// byte-identical preset parity, so the service's value is pinned.
const PRESET_TAN_HALF_FOV = 0.02618592156918693;

const PRESET_MARGIN = 1.05;

interface PresetFrame {
  axis: [number, number, number];
  up: [number, number, number];
  planeAxes: [number, number];
}

const PRESET_FRAMES: Record<PresetView, PresetFrame> = {
  axial: { axis: [0, 0, 1], up: [0, 1, 0], planeAxes: [0, 1] },
  coronal: { axis: [0, 1, 0], up: [0, 0, -1], planeAxes: [0, 2] },
  sagittal: { axis: [1, 0, 0], up: [0, 0, 1], planeAxes: [1, 2] },
};

/**
 * Replicates the service's preset placement exactly: a distant narrow-FOV
 * camera on the +axis side, framing the volume with a 5% margin.
 */
export function presetCamera(
  view: PresetView,
  dims: [number, number, number],
  spacing: [number, number, number],
  width = 512,
  height = 512,
): CameraConfig {
  const frame = PRESET_FRAMES[view];
  const ext: [number, number, number] = [
    (dims[0] - 1) * spacing[0],
    (dims[1] - 1) * spacing[1],
    (dims[2] - 1) * spacing[2],
  ];
  const center: [number, number, number] = [
    ext[0] / 2.0,
    ext[1] / 2.0,
    ext[2] / 2.0,
  ];
  const tanY = PRESET_TAN_HALF_FOV;
  const tanX = (tanY * width) / height;
  const [axU, axV] = frame.planeAxes;
  const dist =
    PRESET_MARGIN * Math.max(ext[axU] / 2.0 / tanX, ext[axV] / 2.0 / tanY) +
    Math.max(ext[0], ext[1], ext[2]);
  const eye: [number, number, number] = [
    center[0] + frame.axis[0] * dist,
    center[1] + frame.axis[1] * dist,
    center[2] + frame.axis[2] * dist,
  ];
  return {
    eye,
    target: center,
    up: frame.up,
    fov: PRESET_FOV,
    width,
    height,
  };
}

/** Elevation limit keeping the orbit camera's up vector non-degenerate. */
export const ELEVATION_LIMIT = Math.PI / 2 - 0.05;

const MIN_DISTANCE = 0.1;
const MAX_DISTANCE = 1e7;

export class ViewportModel {
  azimuth = 0;
  elevation = 0;
  distance = 100;
  target: [number, number, number] = [0, 0, 0];
  width = 512;
  height = 512;
  fov = 40;

  displayedRevision = 0;
  lastFrame: Uint8Array | null = null;

  /** Aim the rig at a volume's center at a comfortable distance. */
  fitTo(
    dims: [number, number, number],
    spacing: [number, number, number],
  ): void {
    const ext = [
      (dims[0] - 1) * spacing[0],
      (dims[1] - 1) * spacing[1],
      (dims[2] - 1) * spacing[2],
    ];
    this.target = [ext[0] / 2, ext[1] / 2, ext[2] / 2];
    this.distance = Math.max(ext[0], ext[1], ext[2]) * 2.5;
  }

  orbit(deltaAzimuth: number, deltaElevation: number): void {
    this.azimuth = (this.azimuth + deltaAzimuth) % (2 * Math.PI);
    this.elevation = Math.min(
      ELEVATION_LIMIT,
      Math.max(-ELEVATION_LIMIT, this.elevation + deltaElevation),
    );
  }

  zoom(factor: number): void {
    if (!(factor > 0)) {
      return;
    }
    this.distance = Math.min(
      MAX_DISTANCE,
      Math.max(MIN_DISTANCE, this.distance * factor),
    );
  }

  camera(): CameraConfig {
    const ce = Math.cos(this.elevation);
    const dir = [
      ce * Math.sin(this.azimuth),
      Math.sin(this.elevation),
      ce * Math.cos(this.azimuth),
    ];
    return {
      eye: [
        this.target[0] + dir[0] * this.distance,
        this.target[1] + dir[1] * this.distance,
        this.target[2] + dir[2] * this.distance,
      ],
      target: [...this.target],
      up: [0, 1, 0],
      fov: this.fov,
      width: this.width,
      height: this.height,
    };
  }

  /**
   * Accept a frame only if it is at least as new as what is on screen, so
   * the displayed revision never decreases (a refinement shares its
   * preview's revision and replaces it).
   */
  applyFrame(revision: number, png: Uint8Array): boolean {
    if (revision < this.displayedRevision) {
      return false;
    }
    this.displayedRevision = revision;
    this.lastFrame = png;
    return true;
  }
}
