// Wire types for the render service. These mirror the server's JSON file
// schemas exactly; the UI is a thin protocol client and never invents fields.

export interface TfPoint {
  intensity: number;
  r: number;
  g: number;
  b: number;
  a: number;
}

export interface CameraConfig {
  eye: [number, number, number];
  target: [number, number, number];
  up: [number, number, number];
  fov: number;
  width: number;
  height: number;
}

export type ShadingModel = "phong" | "cel" | "none";

export interface ShadingConfig {
  model: ShadingModel;
  ambient: number;
  diffuse: number;
  specular: number;
  light_dir: [number, number, number] | null;
  shininess: number;
  cel_bands: number;
}

export interface SamplingConfig {
  step: number | null;
  early_termination_alpha: number;
  background: [number, number, number];
}

export interface VolumeEntry {
  id: string;
  dims: [number, number, number];
  spacing_mm: [number, number, number];
  histogram: number[];
}

export type EditType =
  | "select_volume"
  | "set_tf"
  | "set_camera"
  | "set_shading"
  | "set_sampling";

export interface EditMessage {
  type: EditType;
  payload: unknown;
  client_echo: number;
}

export interface FrameHeader {
  revision: number;
  width: number;
  height: number;
  encoding: string;
}

export interface ServerError {
  type: "error";
  field: string;
  message: string;
}

export const DEFAULT_SHADING: ShadingConfig = {
  model: "phong",
  ambient: 0.1,
  diffuse: 0.6,
  specular: 0.3,
  light_dir: null,
  shininess: 60,
  cel_bands: 3,
};

export const DEFAULT_SAMPLING: SamplingConfig = {
  step: null,
  early_termination_alpha: 0.99,
  background: [0, 0, 0],
};

export const DEFAULT_TF: TfPoint[] = [
  { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
  { intensity: 1, r: 1, g: 1, b: 1, a: 1 },
];

const NEWLINE = 0x0a;

/** Split a binary frame into its JSON header and the PNG payload. */
export function parseFrame(data: ArrayBuffer | Uint8Array): {
  header: FrameHeader;
  png: Uint8Array;
} {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  const cut = bytes.indexOf(NEWLINE);
  if (cut < 0) {
    throw new Error("malformed frame: missing header delimiter");
  }
  const header = JSON.parse(
    new TextDecoder().decode(bytes.subarray(0, cut)),
  ) as FrameHeader;
  if (
    typeof header.revision !== "number" ||
    typeof header.width !== "number" ||
    typeof header.height !== "number"
  ) {
    throw new Error("malformed frame header");
  }
  return { header, png: bytes.subarray(cut + 1) };
}

export function encodeEdit(
  type: EditType,
  payload: unknown,
  clientEcho: number,
): string {
  const message: EditMessage = { type, payload, client_echo: clientEcho };
  return JSON.stringify(message);
}
