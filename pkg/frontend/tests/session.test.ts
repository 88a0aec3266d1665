import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { EditMessage, TfPoint } from "../src/protocol";
import { SessionClient, WsLike } from "../src/session";

class FakeSocket implements WsLike {
  binaryType = "blob";
  sent: EditMessage[] = [];
  onopen: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  closed = false;

  send(data: string): void {
    this.sent.push(JSON.parse(data) as EditMessage);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.(undefined);
  }

  deliverFrame(revision: number, png: number[]): void {
    const header = JSON.stringify({
      revision,
      width: 2,
      height: 2,
      encoding: "png",
    });
    const bytes = new TextEncoder().encode(header + "\n");
    const blob = new Uint8Array(bytes.length + png.length);
    blob.set(bytes);
    blob.set(png, bytes.length);
    this.onmessage?.({ data: blob.buffer });
  }

  deliverError(field: string, message: string): void {
    this.onmessage?.({
      data: JSON.stringify({ type: "error", field, message }),
    });
  }
}

function rampTf(alpha: number): TfPoint[] {
  return [
    { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
    { intensity: 1, r: 1, g: 1, b: 1, a: alpha },
  ];
}

describe("SessionClient", () => {
  let sockets: FakeSocket[];
  let client: SessionClient;
  let frames: number[];
  let serverErrors: string[];
  let localRejects: string[];

  beforeEach(() => {
    vi.useFakeTimers();
    sockets = [];
    frames = [];
    serverErrors = [];
    localRejects = [];
    client = new SessionClient({
      url: "ws://test/session",
      webSocketFactory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
      onFrame: (header) => frames.push(header.revision),
      onServerError: (err) => serverErrors.push(err.field),
      onLocalReject: (_kind, message) => localRejects.push(message),
      now: () => Date.now(),
    });
    client.connect();
    sockets[0].open();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("sends schema-valid edits with increasing client_echo", () => {
    client.selectVolume("ball");
    client.setTf(rampTf(0.5));
    const sent = sockets[0].sent;
    expect(sent.map((m) => m.type)).toEqual(["select_volume", "set_tf"]);
    expect(sent[0].client_echo).toBeLessThan(sent[1].client_echo);
  });

  it("never sends a payload that fails client validation", () => {
    const bad: TfPoint[] = [
      { intensity: 0.9, r: 0, g: 0, b: 0, a: 1 },
      { intensity: 0.1, r: 0, g: 0, b: 0, a: 1 },
    ];
    expect(client.setTf(bad)).toBe(false);
    expect(sockets[0].sent).toHaveLength(0);
    expect(localRejects).toHaveLength(1);

    expect(
      client.setCamera({
        eye: [1, 1, 1],
        target: [1, 1, 1],
        up: [0, 1, 0],
        fov: 40,
        width: 64,
        height: 64,
      }),
    ).toBe(false);
    expect(sockets[0].sent).toHaveLength(0);
  });

  it("debounces transfer-function drags to at most 30 per second", () => {
    for (let i = 0; i < 100; i += 1) {
      client.setTf(rampTf(i / 100));
      vi.advanceTimersByTime(2); // 100 drags over 200 ms
    }
    vi.advanceTimersByTime(100); // let the trailing send flush
    const stamps = client.sendTimestamps;
    expect(stamps.length).toBeGreaterThan(1);
    expect(stamps.length).toBeLessThanOrEqual(8); // 200 ms / 34 ms + slack
    for (let i = 1; i < stamps.length; i += 1) {
      expect(stamps[i] - stamps[i - 1]).toBeGreaterThanOrEqual(34);
    }
    // the trailing send carries the newest drag state
    const sent = sockets[0].sent;
    const lastTf = sent[sent.length - 1].payload as TfPoint[];
    expect(lastTf[1].a).toBeCloseTo(0.99, 12);
  });

  it("cancels a scheduled flush when a newer edit sends immediately", () => {
    client.setTf(rampTf(0.1)); // immediate
    vi.advanceTimersByTime(5);
    client.setTf(rampTf(0.2)); // pending flush scheduled for t=34
    // event loop stall: the wall clock passes the interval but the
    // scheduled timer has not fired yet
    vi.setSystemTime(Date.now() + 200);
    client.setTf(rampTf(0.3)); // immediate; must supersede the pending 0.2
    vi.advanceTimersByTime(300);
    const tfSends = sockets[0].sent.filter((m) => m.type === "set_tf");
    const alphas = tfSends.map((m) => (m.payload as TfPoint[])[1].a);
    // the stale 0.2 state never goes out after the newer 0.3
    expect(alphas).toEqual([0.1, 0.3]);
    const stamps = client.sendTimestamps;
    for (let i = 1; i < stamps.length; i += 1) {
      expect(stamps[i] - stamps[i - 1]).toBeGreaterThanOrEqual(34);
    }
  });

  it("applies frames in revision order and discards stale ones", () => {
    const s = sockets[0];
    s.deliverFrame(2, [1]);
    s.deliverFrame(1, [2]); // stale: must be dropped
    s.deliverFrame(2, [3]); // refinement at the same revision: accepted
    s.deliverFrame(5, [4]);
    expect(frames).toEqual([2, 2, 5]);
    expect(client.displayedRevision).toBe(5);
  });

  it("routes server errors to the handler", () => {
    sockets[0].deliverError("intensity", "must strictly increase");
    expect(serverErrors).toEqual(["intensity"]);
  });

  it("replays the full state on reconnect", () => {
    client.selectVolume("ball");
    client.setCamera({
      eye: [0, 0, 100],
      target: [0, 0, 0],
      up: [0, 1, 0],
      fov: 40,
      width: 64,
      height: 64,
    });
    client.setTf(rampTf(0.25));
    client.reconnect();
    expect(sockets).toHaveLength(2);
    sockets[1].open();
    const replayed = sockets[1].sent.map((m) => m.type);
    expect(replayed).toEqual(["select_volume", "set_camera", "set_tf"]);
    const tf = sockets[1].sent[2].payload as TfPoint[];
    expect(tf[1].a).toBe(0.25);
  });
});
