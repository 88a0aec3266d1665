// Browser wiring: connects the models to the DOM and the render service.
// All rendering happens server-side; this file only routes edits out and
// frames in.

import type { FrameHeader, ShadingConfig, VolumeEntry } from "./protocol";
import { DEFAULT_SHADING } from "./protocol";
import { SessionClient, WsLike } from "./session";
import { TfEditorModel } from "./tfEditor";
import { presetCamera, PresetView, ViewportModel } from "./viewport";

const params = new URLSearchParams(location.search);
const server = params.get("server") ?? location.host;
const httpBase = `${location.protocol === "https:" ? "https" : "http"}://${server}`;
const wsBase = `${location.protocol === "https:" ? "wss" : "ws"}://${server}`;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

const frameImg = $<HTMLImageElement>("frame");
const statusLine = $<HTMLElement>("status");
const volumeSelect = $<HTMLSelectElement>("volume");
const tfCanvas = $<HTMLCanvasElement>("tf-editor");

const tfModel = new TfEditorModel([
  { intensity: 0, r: 0, g: 0, b: 0, a: 0 },
  { intensity: 0.3, r: 0.2, g: 0.5, b: 1, a: 0.05 },
  { intensity: 0.7, r: 1, g: 0.4, b: 0.2, a: 0.6 },
  { intensity: 1, r: 1, g: 1, b: 1, a: 1 },
]);
const viewport = new ViewportModel();
let volumes: VolumeEntry[] = [];
let shading: ShadingConfig = { ...DEFAULT_SHADING };
let frameUrl: string | null = null;

const session = new SessionClient({
  url: `${wsBase}/session`,
  webSocketFactory: (url) => new WebSocket(url) as unknown as WsLike,
  onFrame: showFrame,
  onServerError: (err) =>
    setStatus(`server rejected ${err.field}: ${err.message}`),
  onLocalReject: (kind, message) => setStatus(`${kind} blocked: ${message}`),
  onOpen: () => setStatus("connected"),
  onClose: () => {
    setStatus("disconnected; reconnecting…");
    setTimeout(() => session.reconnect(), 1000);
  },
});

function setStatus(text: string): void {
  statusLine.textContent = text;
}

function showFrame(header: FrameHeader, png: Uint8Array): void {
  viewport.applyFrame(header.revision, png);
  const blob = new Blob([png.slice()], { type: "image/png" });
  if (frameUrl) {
    URL.revokeObjectURL(frameUrl);
  }
  frameUrl = URL.createObjectURL(blob);
  frameImg.src = frameUrl;
  setStatus(`frame r${header.revision} (${header.width}x${header.height})`);
}

// -- transfer function editor ------------------------------------------------

function drawTf(): void {
  const ctx = tfCanvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const { width: w, height: h } = tfCanvas;
  ctx.clearRect(0, 0, w, h);
  const bins = tfModel.histogram;
  if (bins.length > 0) {
    const peak = Math.log1p(Math.max(...bins));
    ctx.fillStyle = "#2a3550";
    for (let i = 0; i < bins.length; i += 1) {
      const barH = peak > 0 ? (Math.log1p(bins[i]) / peak) * h : 0;
      ctx.fillRect((i / bins.length) * w, h - barH, w / bins.length + 1, barH);
    }
  }
  ctx.strokeStyle = "#e8e8e8";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  tfModel.points.forEach((p, i) => {
    const x = p.intensity * w;
    const y = h - p.a * h;
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
  tfModel.points.forEach((p, i) => {
    ctx.fillStyle = `rgb(${p.r * 255},${p.g * 255},${p.b * 255})`;
    ctx.strokeStyle = i === tfModel.selected ? "#ffd84d" : "#ffffff";
    ctx.beginPath();
    ctx.arc(p.intensity * w, h - p.a * h, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.stroke();
  });
}

function canvasToTf(ev: PointerEvent): { intensity: number; alpha: number } {
  const rect = tfCanvas.getBoundingClientRect();
  return {
    intensity: (ev.clientX - rect.left) / rect.width,
    alpha: 1 - (ev.clientY - rect.top) / rect.height,
  };
}

function hitPoint(ev: PointerEvent): number | null {
  const rect = tfCanvas.getBoundingClientRect();
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  for (let i = 0; i < tfModel.points.length; i += 1) {
    const p = tfModel.points[i];
    const dx = p.intensity * rect.width - px;
    const dy = (1 - p.a) * rect.height - py;
    if (dx * dx + dy * dy <= 100) {
      return i;
    }
  }
  return null;
}

let dragging: number | null = null;

tfCanvas.addEventListener("pointerdown", (ev) => {
  const hit = hitPoint(ev);
  if (hit !== null) {
    dragging = hit;
    tfModel.selected = hit;
  } else {
    const { intensity } = canvasToTf(ev);
    dragging = tfModel.addPoint(intensity);
  }
  drawTf();
  tfCanvas.setPointerCapture(ev.pointerId);
});

tfCanvas.addEventListener("pointermove", (ev) => {
  if (dragging === null) {
    return;
  }
  const { intensity, alpha } = canvasToTf(ev);
  tfModel.dragPoint(dragging, intensity, alpha);
  drawTf();
  session.setTf(tfModel.toPayload());
});

tfCanvas.addEventListener("pointerup", () => {
  dragging = null;
});

tfCanvas.addEventListener("contextmenu", (ev) => {
  ev.preventDefault();
  const hit = hitPoint(ev as unknown as PointerEvent);
  if (hit !== null && tfModel.removePoint(hit)) {
    drawTf();
    session.setTf(tfModel.toPayload());
  }
});

// -- viewport ----------------------------------------------------------------

let orbiting = false;
let lastX = 0;
let lastY = 0;

frameImg.addEventListener("pointerdown", (ev) => {
  orbiting = true;
  lastX = ev.clientX;
  lastY = ev.clientY;
  frameImg.setPointerCapture(ev.pointerId);
});

frameImg.addEventListener("pointermove", (ev) => {
  if (!orbiting) {
    return;
  }
  viewport.orbit((ev.clientX - lastX) * 0.01, (ev.clientY - lastY) * 0.01);
  lastX = ev.clientX;
  lastY = ev.clientY;
  session.setCamera(viewport.camera());
});

frameImg.addEventListener("pointerup", () => {
  orbiting = false;
});

frameImg.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  viewport.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
  session.setCamera(viewport.camera());
});

function currentVolume(): VolumeEntry | null {
  return volumes.find((v) => v.id === volumeSelect.value) ?? null;
}

for (const view of ["axial", "coronal", "sagittal"] as PresetView[]) {
  $(`preset-${view}`).addEventListener("click", () => {
    const vol = currentVolume();
    if (!vol) {
      return;
    }
    session.setCamera(
      presetCamera(view, vol.dims, vol.spacing_mm, viewport.width,
                   viewport.height),
    );
  });
}

// -- shading panel -----------------------------------------------------------

function bindSlider(id: string, apply: (value: number) => void): void {
  const input = $<HTMLInputElement>(id);
  input.addEventListener("input", () => {
    apply(Number(input.value));
    $(`${id}-value`).textContent = input.value;
    session.setShading(shading);
  });
}

$<HTMLSelectElement>("shading-model").addEventListener("change", (ev) => {
  shading = { ...shading, model: (ev.target as HTMLSelectElement).value as
              ShadingConfig["model"] };
  session.setShading(shading);
});
bindSlider("ambient", (v) => (shading = { ...shading, ambient: v }));
bindSlider("diffuse", (v) => (shading = { ...shading, diffuse: v }));
bindSlider("specular", (v) => (shading = { ...shading, specular: v }));
bindSlider("shininess", (v) => (shading = { ...shading, shininess: v }));
bindSlider("cel-bands", (v) => (shading = { ...shading, cel_bands: v }));

// -- bootstrap ---------------------------------------------------------------

volumeSelect.addEventListener("change", () => {
  const vol = currentVolume();
  if (!vol) {
    return;
  }
  tfModel.setHistogram(vol.histogram);
  viewport.fitTo(vol.dims, vol.spacing_mm);
  drawTf();
  session.selectVolume(vol.id);
  session.setCamera(
    presetCamera("axial", vol.dims, vol.spacing_mm, viewport.width,
                 viewport.height),
  );
  session.setTf(tfModel.toPayload());
});

async function boot(): Promise<void> {
  setStatus("loading volumes…");
  const res = await fetch(`${httpBase}/volumes`);
  volumes = (await res.json()) as VolumeEntry[];
  volumeSelect.replaceChildren(
    ...volumes.map((v) => {
      const opt = document.createElement("option");
      opt.value = v.id;
      opt.textContent = `${v.id} (${v.dims.join("x")})`;
      return opt;
    }),
  );
  session.connect();
  if (volumes.length > 0) {
    volumeSelect.value = volumes[0].id;
    volumeSelect.dispatchEvent(new Event("change"));
  } else {
    setStatus("no volumes in the server's data directory");
  }
  drawTf();
}

boot().catch((err) => setStatus(`failed to start: ${err}`));
