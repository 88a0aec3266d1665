// End-to-end parity against the real render service: frames produced for
// UI-driven sessions must be byte-identical to CLI renders of the same
// configs, presets included, and revision tags must stay monotone under a
// scripted drag storm. Requires the `voxray` CLI on PATH.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import type { FrameHeader, TfPoint } from "../src/protocol";
import { DEFAULT_SAMPLING, DEFAULT_SHADING } from "../src/protocol";
import { SessionClient, type WsLike } from "../src/session";
import { TfEditorModel } from "../src/tfEditor";
import { presetCamera, ViewportModel } from "../src/viewport";

const PORT = 18931;
const BASE = `http://127.0.0.1:${PORT}`;
const DIMS: [number, number, number] = [48, 48, 48];
const SPACING: [number, number, number] = [1, 1, 1];

const PHANTOM_SPEC = {
  dims: DIMS,
  background: 0.0,
  shapes: [
    {
      type: "pyramid",
      base_lo: [5, 26],
      base_hi: [21, 42],
      base_z: 8,
      apex: [13, 34, 40],
      intensity: 0.4,
    },
    { type: "sphere", center: [33, 15, 24], radius: 8, intensity: 0.8 },
  ],
};

const BAND_TF: TfPoint[] = [
  { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
  { intensity: 0.7, r: 1, g: 0, b: 0, a: 0 },
  { intensity: 0.75, r: 1, g: 0, b: 0, a: 1 },
  { intensity: 0.85, r: 1, g: 0, b: 0, a: 1 },
  { intensity: 0.9, r: 1, g: 0, b: 0, a: 0 },
  { intensity: 1, r: 1, g: 0, b: 0, a: 0 },
];

let dir: string;
let server: ChildProcess | null = null;

function cli(args: string[]): void {
  execFileSync("voxray", args, { stdio: ["ignore", "pipe", "pipe"] });
}

async function waitHealthy(timeoutMs = 120_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) {
        return;
      }
    } catch (err) {
      lastError = err;
    }
    await sleep(250);
  }
  throw new Error(`service did not become healthy: ${lastError}`);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeAll(async () => {
  dir = mkdtempSync(join(tmpdir(), "voxray-e2e-"));
  writeFileSync(join(dir, "spec.json"), JSON.stringify(PHANTOM_SPEC));
  cli([
    "phantom", "--spec", join(dir, "spec.json"), "--out-dir", dir,
    "--name", "demo",
  ]);
  writeFileSync(join(dir, "tf.json"), JSON.stringify(BAND_TF));
  server = spawn(
    "voxray",
    ["serve", "--data-dir", dir, "--port", String(PORT)],
    { stdio: "ignore" },
  );
  await waitHealthy();
});

afterAll(() => {
  server?.kill();
});

interface Harness {
  client: SessionClient;
  frames: FrameHeader[];
  errors: string[];
  waitForRevision(revision: number, timeoutMs?: number): Promise<Uint8Array>;
  close(): void;
}

function connect(): Promise<Harness> {
  return new Promise((resolveOpen, rejectOpen) => {
    const frames: FrameHeader[] = [];
    const errors: string[] = [];
    const waiters: Array<{
      revision: number;
      resolve: (png: Uint8Array) => void;
    }> = [];
    const openTimer = setTimeout(
      () => rejectOpen(new Error("websocket open timed out")),
      30_000,
    );
    const client = new SessionClient({
      url: `ws://127.0.0.1:${PORT}/session?preview=0`,
      webSocketFactory: (url) => new WebSocket(url) as unknown as WsLike,
      onFrame: (header, png) => {
        frames.push(header);
        for (let i = waiters.length - 1; i >= 0; i -= 1) {
          if (header.revision >= waiters[i].revision) {
            waiters[i].resolve(png);
            waiters.splice(i, 1);
          }
        }
      },
      onServerError: (err) => errors.push(`${err.field}: ${err.message}`),
      onOpen: () => {
        clearTimeout(openTimer);
        resolveOpen(harness);
      },
    });
    const harness: Harness = {
      client,
      frames,
      errors,
      waitForRevision(revision, timeoutMs = 60_000) {
        return new Promise((resolve, reject) => {
          const last = client.lastFrame;
          if (last && last.header.revision >= revision) {
            resolve(last.png);
            return;
          }
          waiters.push({ revision, resolve });
          setTimeout(
            () => reject(new Error(`no frame for revision ${revision}`)),
            timeoutMs,
          );
        });
      },
      close: () => client.close(),
    };
    client.connect();
  });
}

describe("service/UI parity", () => {
  it("a UI-configured session matches the CLI render byte for byte", async () => {
    const vp = new ViewportModel();
    vp.fitTo(DIMS, SPACING);
    vp.orbit(0.7, 0.35);
    vp.zoom(0.8);
    vp.width = 96;
    vp.height = 96;
    const camera = vp.camera();
    const shading = { ...DEFAULT_SHADING, shininess: 60 };

    const ui = await connect();
    try {
      ui.client.selectVolume("demo");
      ui.client.setCamera(camera);
      ui.client.setShading(shading);
      ui.client.setSampling({ ...DEFAULT_SAMPLING });
      ui.client.setTf(BAND_TF);
      const png = await ui.waitForRevision(5);

      writeFileSync(join(dir, "cam.json"), JSON.stringify(camera));
      writeFileSync(join(dir, "sh.json"), JSON.stringify(shading));
      cli([
        "render", "--volume", join(dir, "demo.raw"),
        "--tf", join(dir, "tf.json"), "--shading", join(dir, "sh.json"),
        "--camera", join(dir, "cam.json"), "--out", join(dir, "cli.png"),
      ]);
      const cliBytes = readFileSync(join(dir, "cli.png"));
      expect(Buffer.from(png).equals(cliBytes)).toBe(true);
      expect(ui.errors).toEqual([]);
    } finally {
      ui.close();
    }
  });

  it("all three view presets match CLI preset renders", async () => {
    for (const view of ["axial", "coronal", "sagittal"] as const) {
      const ui = await connect();
      try {
        ui.client.selectVolume("demo");
        ui.client.setCamera(presetCamera(view, DIMS, SPACING, 64, 64));
        ui.client.setTf(BAND_TF);
        const png = await ui.waitForRevision(3);

        const out = join(dir, `preset_${view}.png`);
        cli([
          "render", "--volume", join(dir, "demo.raw"),
          "--tf", join(dir, "tf.json"), "--view", view,
          "--width", "64", "--height", "64", "--out", out,
        ]);
        expect(Buffer.from(png).equals(readFileSync(out))).toBe(true);
        expect(ui.errors).toEqual([]);
      } finally {
        ui.close();
      }
    }
  });

  it("keeps revisions monotone through a 100-edit drag storm", async () => {
    const ui = await connect();
    try {
      ui.client.selectVolume("demo");
      const camera = presetCamera("axial", DIMS, SPACING, 32, 32);
      ui.client.setCamera(camera);
      ui.client.setTf(BAND_TF);
      await ui.waitForRevision(3);

      // scripted storm: 100 random drags through the editor model
      const editor = new TfEditorModel(BAND_TF);
      let seed = 1234567;
      const rand = () => {
        seed = (seed * 1103515245 + 12345) % 2 ** 31;
        return seed / 2 ** 31;
      };
      for (let i = 0; i < 100; i += 1) {
        const index = Math.floor(rand() * editor.points.length);
        editor.dragPoint(index, rand() * 1.4 - 0.2, rand() * 1.4 - 0.2);
        ui.client.setTf(editor.toPayload());
        await sleep(4);
      }
      await sleep(120); // allow the trailing debounced edit to flush

      // the final slider state: everything transparent
      const zeroTf: TfPoint[] = [
        { intensity: 0, r: 1, g: 1, b: 1, a: 0 },
        { intensity: 1, r: 1, g: 1, b: 1, a: 0 },
      ];
      ui.client.setTf(zeroTf);
      await sleep(80);
      const finalRevision = ui.client.sentCount;
      const png = await ui.waitForRevision(finalRevision);

      // throttle: wire edits spaced >= 34 ms, far fewer than 100 sends
      const stamps = ui.client.sendTimestamps;
      for (let i = 1; i < stamps.length; i += 1) {
        expect(stamps[i] - stamps[i - 1]).toBeGreaterThanOrEqual(34);
      }
      expect(stamps.length).toBeLessThan(40);

      // revision tags delivered in non-decreasing order, ending at the
      // newest state; the service rejected nothing the UI sent
      const revisions = ui.frames.map((f) => f.revision);
      const sorted = [...revisions].sort((a, b) => a - b);
      expect(revisions).toEqual(sorted);
      expect(revisions[revisions.length - 1]).toBe(finalRevision);
      expect(ui.errors).toEqual([]);

      // the displayed frame corresponds to the final slider state
      writeFileSync(join(dir, "zero_tf.json"), JSON.stringify(zeroTf));
      writeFileSync(join(dir, "storm_cam.json"), JSON.stringify(camera));
      cli([
        "render", "--volume", join(dir, "demo.raw"),
        "--tf", join(dir, "zero_tf.json"),
        "--camera", join(dir, "storm_cam.json"),
        "--out", join(dir, "storm.png"),
      ]);
      expect(Buffer.from(png).equals(readFileSync(join(dir, "storm.png"))))
        .toBe(true);
    } finally {
      ui.close();
    }
  });
});
