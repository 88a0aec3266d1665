// WebSocket session client: serializes outgoing edits, debounces
// transfer-function drags, validates every payload before it leaves the
// browser, and applies incoming frames in revision order (latest wins).

import type {
  CameraConfig,
  EditType,
  FrameHeader,
  SamplingConfig,
  ServerError,
  ShadingConfig,
  TfPoint,
} from "./protocol";
import { encodeEdit, parseFrame } from "./protocol";
import {
  validateCamera,
  validateSampling,
  validateShading,
  validateTf,
} from "./validate";

/** The subset of the WebSocket interface the client relies on; handler
 * parameter types are loose so both browser and node implementations fit. */
export interface WsLike {
  binaryType: string;
  send(data: string): void;
  close(): void;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onopen: ((ev: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onmessage: ((ev: { data: any }) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onclose: ((ev: any) => void) | null;
  // eslint-disable-next-line @typescript-eslint/no-explicit-any
  onerror: ((ev: any) => void) | null;
}

export interface SessionOptions {
  url: string;
  webSocketFactory: (url: string) => WsLike;
  onFrame?: (header: FrameHeader, png: Uint8Array) => void;
  onServerError?: (error: ServerError) => void;
  onLocalReject?: (editType: EditType, message: string) => void;
  onOpen?: () => void;
  onClose?: () => void;
  /** Minimum spacing between transfer-function edits (<= 30 edits/s). */
  minTfIntervalMs?: number;
  now?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

interface SessionState {
  volumeId: string | null;
  tf: TfPoint[] | null;
  camera: CameraConfig | null;
  shading: ShadingConfig | null;
  sampling: SamplingConfig | null;
}

export class SessionClient {
  readonly sendTimestamps: number[] = [];
  sentCount = 0;
  displayedRevision = 0;
  lastFrame: { header: FrameHeader; png: Uint8Array } | null = null;

  private readonly opts: Required<
    Pick<SessionOptions, "minTfIntervalMs" | "now" | "schedule" | "cancel">
  > &
    SessionOptions;
  private ws: WsLike | null = null;
  private seq = 0;
  private lastTfSentAt = -Infinity;
  private pendingTf: TfPoint[] | null = null;
  private pendingHandle: unknown = null;
  private readonly state: SessionState = {
    volumeId: null,
    tf: null,
    camera: null,
    shading: null,
    sampling: null,
  };

  constructor(options: SessionOptions) {
    this.opts = {
      minTfIntervalMs: 34,
      now: () => Date.now(),
      schedule: (fn, ms) => setTimeout(fn, ms),
      cancel: (h) => clearTimeout(h as Parameters<typeof clearTimeout>[0]),
      ...options,
    };
  }

  connect(): void {
    const ws = this.opts.webSocketFactory(this.opts.url);
    ws.binaryType = "arraybuffer";
    ws.onopen = () => {
      this.replayState();
      this.opts.onOpen?.();
    };
    ws.onmessage = (ev) => this.handleMessage(ev.data);
    ws.onclose = () => {
      this.opts.onClose?.();
    };
    ws.onerror = () => undefined;
    this.ws = ws;
  }

  close(): void {
    this.cancelPendingTf();
    this.ws?.close();
    this.ws = null;
  }

  /** Reconnect and restore the last known state by replaying it as edits. */
  reconnect(): void {
    this.close();
    this.connect();
  }

  selectVolume(volumeId: string): boolean {
    if (!volumeId) {
      this.opts.onLocalReject?.("select_volume", "volume id must be non-empty");
      return false;
    }
    this.state.volumeId = volumeId;
    this.transmit("select_volume", { volume_id: volumeId });
    return true;
  }

  setCamera(camera: CameraConfig): boolean {
    const problem = validateCamera(camera);
    if (problem) {
      this.opts.onLocalReject?.("set_camera", problem);
      return false;
    }
    this.state.camera = camera;
    this.transmit("set_camera", camera);
    return true;
  }

  setShading(shading: ShadingConfig): boolean {
    const problem = validateShading(shading);
    if (problem) {
      this.opts.onLocalReject?.("set_shading", problem);
      return false;
    }
    this.state.shading = shading;
    this.transmit("set_shading", shading);
    return true;
  }

  setSampling(sampling: SamplingConfig): boolean {
    const problem = validateSampling(sampling);
    if (problem) {
      this.opts.onLocalReject?.("set_sampling", problem);
      return false;
    }
    this.state.sampling = sampling;
    this.transmit("set_sampling", sampling);
    return true;
  }

  /**
   * Debounced transfer-function edit: the first drag goes out immediately,
   * later drags within the interval coalesce into one trailing send (the
   * newest state wins).
   */
  setTf(points: TfPoint[]): boolean {
    const problem = validateTf(points);
    if (problem) {
      this.opts.onLocalReject?.("set_tf", problem);
      return false;
    }
    this.state.tf = points;
    const now = this.opts.now();
    const waited = now - this.lastTfSentAt;
    if (waited >= this.opts.minTfIntervalMs) {
      // a scheduled flush would resend older state after this newer edit
      this.cancelPendingTf();
      this.sendTf(points, now);
    } else {
      this.pendingTf = points;
      if (this.pendingHandle === null) {
        this.pendingHandle = this.opts.schedule(
          () => this.flushPendingTf(),
          this.opts.minTfIntervalMs - waited,
        );
      }
    }
    return true;
  }

  /** Number of set_tf messages actually sent (after debouncing). */
  get tfSendCount(): number {
    return this.sendTimestamps.length;
  }

  private flushPendingTf(): void {
    this.pendingHandle = null;
    if (this.pendingTf !== null) {
      const points = this.pendingTf;
      this.pendingTf = null;
      this.sendTf(points, this.opts.now());
    }
  }

  private cancelPendingTf(): void {
    if (this.pendingHandle !== null) {
      this.opts.cancel(this.pendingHandle);
      this.pendingHandle = null;
    }
    this.pendingTf = null;
  }

  private sendTf(points: TfPoint[], at: number): void {
    this.lastTfSentAt = at;
    this.sendTimestamps.push(at);
    this.transmit("set_tf", points);
  }

  private transmit(type: EditType, payload: unknown): void {
    if (!this.ws) {
      return;
    }
    this.seq += 1;
    this.sentCount += 1;
    this.ws.send(encodeEdit(type, payload, this.seq));
  }

  private replayState(): void {
    if (this.state.volumeId) {
      this.transmit("select_volume", { volume_id: this.state.volumeId });
    }
    if (this.state.camera) {
      this.transmit("set_camera", this.state.camera);
    }
    if (this.state.shading) {
      this.transmit("set_shading", this.state.shading);
    }
    if (this.state.sampling) {
      this.transmit("set_sampling", this.state.sampling);
    }
    if (this.state.tf) {
      this.transmit("set_tf", this.state.tf);
    }
  }

  private handleMessage(data: unknown): void {
    if (typeof data === "string") {
      let parsed: ServerError;
      try {
        parsed = JSON.parse(data) as ServerError;
      } catch {
        return;
      }
      if (parsed.type === "error") {
        this.opts.onServerError?.(parsed);
      }
      return;
    }
    const bytes =
      data instanceof ArrayBuffer
        ? new Uint8Array(data)
        : (data as Uint8Array);
    const { header, png } = parseFrame(bytes);
    if (header.revision < this.displayedRevision) {
      return; // stale frame; a newer one is already displayed
    }
    this.displayedRevision = header.revision;
    this.lastFrame = { header, png };
    this.opts.onFrame?.(header, png);
  }
}
