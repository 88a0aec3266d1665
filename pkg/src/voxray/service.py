"""Interactive render service: volume catalog, stateless renders, sessions.

HTTP surface:
    GET  /volumes  -> JSON catalog [{id, dims, spacing_mm, histogram}]
    POST /render   -> PNG bytes for a {volume_id, camera, sampling, tf, shading}
    GET  /healthz  -> liveness probe

WebSocket /session: clients send JSON edits
    {"type": "select_volume"|"set_tf"|"set_camera"|"set_shading"|"set_sampling",
     "payload": ..., "client_echo": ...}
and receive binary frames (one JSON header line {revision, width, height,
encoding} followed by PNG bytes) or JSON errors {type, field, message}.
Frame scheduling is latest-wins: edits arriving during a render supersede
it, and a full-resolution refinement follows once the session goes idle.
"""

from __future__ import annotations

import asyncio
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from .camera import Camera, preset_camera
from .errors import VoxrayError
from .grid import VolumeGrid
from .ingest import load_volume_file
from .raycast import SamplingConfig, render
from .shading import ShadingConfig
from .transfer import TransferFunction, grayscale_ramp

DEFAULT_PREVIEW_PX = 384
DEFAULT_REFINE_MS = 300
DEFAULT_IDLE_TIMEOUT_S = 600.0


class VolumeCatalog:
    """Read-only catalog of RAW volumes in a directory; loads are cached."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self._cache: dict[str, VolumeGrid] = {}
        self._lock = threading.Lock()

    def ids(self) -> list[str]:
        if not self.data_dir.is_dir():
            return []
        return sorted(
            p.stem
            for p in self.data_dir.glob("*.raw")
            if p.with_suffix(".json").exists()
        )

    def get(self, volume_id: str) -> VolumeGrid:
        with self._lock:
            if volume_id not in self._cache:
                path = self.data_dir / f"{volume_id}.raw"
                if volume_id not in self.ids():
                    raise KeyError(volume_id)
                self._cache[volume_id] = load_volume_file(path)[0]
            return self._cache[volume_id]

    def entries(self) -> list[dict]:
        out = []
        for vid in self.ids():
            grid = self.get(vid)
            out.append(
                {
                    "id": vid,
                    "dims": list(grid.dims),
                    "spacing_mm": list(grid.spacing),
                    "histogram": grid.histogram(256).tolist(),
                }
            )
        return out


@dataclass(frozen=True)
class SceneSnapshot:
    """Immutable view of a session's state at one revision."""

    revision: int
    volume_id: Optional[str]
    tf: TransferFunction
    camera: Optional[Camera]
    shading: ShadingConfig
    sampling: SamplingConfig


class Session:
    """Per-connection state; edits are applied atomically on the event loop."""

    def __init__(self):
        self.revision = 0
        self.volume_id: Optional[str] = None
        self.tf = grayscale_ramp()
        self.camera: Optional[Camera] = None
        self.shading = ShadingConfig()
        self.sampling = SamplingConfig()

    def snapshot(self) -> SceneSnapshot:
        return SceneSnapshot(
            revision=self.revision,
            volume_id=self.volume_id,
            tf=self.tf,
            camera=self.camera,
            shading=self.shading,
            sampling=self.sampling,
        )


def _parse_scene(body: dict, catalog: VolumeCatalog):
    volume_id = body.get("volume_id")
    if not volume_id:
        raise VoxrayError("volume_id is required")
    try:
        grid = catalog.get(volume_id)
    except KeyError:
        raise LookupError(volume_id)
    tf = (
        TransferFunction.from_obj(body["tf"]) if body.get("tf") is not None
        else grayscale_ramp()
    )
    shading_cfg = (
        ShadingConfig.from_obj(body["shading"]) if body.get("shading") is not None
        else ShadingConfig()
    )
    sampling = (
        SamplingConfig.from_obj(body["sampling"]) if body.get("sampling") is not None
        else SamplingConfig()
    )
    camera = (
        Camera.from_obj(body["camera"]) if body.get("camera") is not None
        else preset_camera("axial", grid)
    )
    return grid, tf, shading_cfg, sampling, camera


def create_app(
    data_dir: Path,
    preview_px: Optional[int] = DEFAULT_PREVIEW_PX,
    refine_ms: int = DEFAULT_REFINE_MS,
    idle_timeout_s: float = DEFAULT_IDLE_TIMEOUT_S,
) -> FastAPI:
    app = FastAPI(title="voxray render service")
    catalog = VolumeCatalog(Path(data_dir))
    app.state.catalog = catalog

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/volumes")
    def volumes():
        return catalog.entries()

    @app.post("/render")
    async def render_once(body: dict):
        try:
            grid, tf, shading_cfg, sampling, camera = _parse_scene(body, catalog)
        except LookupError as exc:
            return JSONResponse(
                status_code=404,
                content={"type": "error", "field": "volume_id",
                         "message": f"unknown volume {exc}"},
            )
        except VoxrayError as exc:
            return JSONResponse(
                status_code=400,
                content={"type": "error", "field": _guess_field(exc),
                         "message": str(exc)},
            )
        frame = await asyncio.to_thread(
            render, grid, tf, shading_cfg, sampling, camera
        )
        return Response(content=frame.to_png_bytes(), media_type="image/png")

    @app.websocket("/session")
    async def session_socket(ws: WebSocket):
        await ws.accept()
        use_preview = preview_px
        if ws.query_params.get("preview") is not None:
            value = int(ws.query_params["preview"])
            use_preview = value if value > 0 else None
        refine = refine_ms
        if ws.query_params.get("refine_ms") is not None:
            refine = int(ws.query_params["refine_ms"])
        session = Session()
        edited = asyncio.Event()
        worker = asyncio.create_task(
            _render_worker(ws, session, catalog, edited, use_preview, refine)
        )
        try:
            while True:
                raw = await asyncio.wait_for(
                    ws.receive_text(), timeout=idle_timeout_s
                )
                await _apply_edit(ws, session, catalog, raw)
                edited.set()
        except (WebSocketDisconnect, asyncio.TimeoutError, RuntimeError):
            pass
        finally:
            worker.cancel()

    return app


def _guess_field(exc: VoxrayError) -> str:
    """Best-effort field name from a validation message for error payloads."""
    text = str(exc)
    patterns = (
        ("intensit", "intensity"),
        ("early_termination_alpha", "early_termination_alpha"),
        ("step", "step"),
        ("background", "background"),
        ("model", "model"),
        ("ambient", "ambient"),
        ("diffuse", "diffuse"),
        ("specular", "specular"),
        ("shininess", "shininess"),
        ("cel_bands", "cel_bands"),
        ("light_dir", "light_dir"),
        ("vertical_fov", "fov"),
        ("eye", "eye"),
        ("up vector", "up"),
        ("image size", "width"),
        ("channel", "channels"),
    )
    for needle, field in patterns:
        if needle in text:
            return field
    return "payload"


_EDIT_TYPES = ("select_volume", "set_tf", "set_camera", "set_shading",
               "set_sampling")


async def _apply_edit(
    ws: WebSocket, session: Session, catalog: VolumeCatalog, raw: str
) -> None:
    """Validate one edit message; mutate the session only if it is valid."""
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        await _send_error(ws, "message", f"not valid JSON: {exc}")
        return
    kind = obj.get("type")
    payload = obj.get("payload")
    try:
        if kind == "select_volume":
            vid = payload.get("volume_id") if isinstance(payload, dict) else None
            try:
                grid = catalog.get(vid)
            except KeyError:
                raise VoxrayError(f"unknown volume {vid!r}")
            session.volume_id = vid
            if session.camera is None:
                session.camera = preset_camera("axial", grid)
        elif kind == "set_tf":
            session.tf = TransferFunction.from_obj(payload)
        elif kind == "set_camera":
            session.camera = Camera.from_obj(payload)
        elif kind == "set_shading":
            session.shading = ShadingConfig.from_obj(payload)
        elif kind == "set_sampling":
            session.sampling = SamplingConfig.from_obj(payload)
        else:
            await _send_error(
                ws, "type", f"unknown edit type {kind!r}; expected {_EDIT_TYPES}"
            )
            return
    except VoxrayError as exc:
        await _send_error(ws, _guess_field(exc), str(exc))
        return
    session.revision += 1


async def _send_error(ws: WebSocket, field: str, message: str) -> None:
    await ws.send_text(
        json.dumps({"type": "error", "field": field, "message": message})
    )


def _preview_camera(camera: Camera, preview_px: int) -> Camera:
    scale = preview_px / max(camera.width, camera.height)
    return Camera(
        eye=camera.eye,
        target=camera.target,
        up=camera.up,
        vertical_fov=camera.vertical_fov,
        width=max(1, round(camera.width * scale)),
        height=max(1, round(camera.height * scale)),
    )


def _render_snapshot(
    catalog: VolumeCatalog, snap: SceneSnapshot, preview_px: Optional[int]
) -> tuple[bytes, int, int]:
    grid = catalog.get(snap.volume_id)
    camera = snap.camera or preset_camera("axial", grid)
    if preview_px is not None and max(camera.width, camera.height) > preview_px:
        camera = _preview_camera(camera, preview_px)
    frame = render(grid, snap.tf, snap.shading, snap.sampling, camera)
    return frame.to_png_bytes(), camera.width, camera.height


async def _send_frame(
    ws: WebSocket, revision: int, width: int, height: int, png: bytes
) -> None:
    header = json.dumps(
        {"revision": revision, "width": width, "height": height, "encoding": "png"}
    ).encode("utf-8")
    await ws.send_bytes(header + b"\n" + png)


async def _wait_edit(edited: asyncio.Event, timeout_s: float) -> bool:
    try:
        await asyncio.wait_for(edited.wait(), timeout=timeout_s)
        edited.clear()
        return True
    except asyncio.TimeoutError:
        return False


async def _render_worker(
    ws: WebSocket,
    session: Session,
    catalog: VolumeCatalog,
    edited: asyncio.Event,
    preview_px: Optional[int],
    refine_ms: int,
) -> None:
    """Latest-wins frame producer for one session.

    Renders the newest snapshot (at preview resolution when configured),
    then refines to full resolution once no edit arrives within the idle
    window. Superseded full-resolution renders are re-snapshotted instead
    of being delivered stale.
    """
    try:
        while True:
            await edited.wait()
            while True:
                edited.clear()
                snap = session.snapshot()
                if snap.volume_id is None:
                    break
                camera = snap.camera
                wants_preview = (
                    preview_px is not None
                    and camera is not None
                    and max(camera.width, camera.height) > preview_px
                )
                if wants_preview:
                    png, w, h = await asyncio.to_thread(
                        _render_snapshot, catalog, snap, preview_px
                    )
                    await _send_frame(ws, snap.revision, w, h, png)
                    if await _wait_edit(edited, refine_ms / 1000.0):
                        continue  # newer state; restart with it
                png, w, h = await asyncio.to_thread(
                    _render_snapshot, catalog, snap, None
                )
                if session.revision != snap.revision:
                    continue  # superseded during the render; redo latest
                await _send_frame(ws, snap.revision, w, h, png)
                break
    except asyncio.CancelledError:
        raise
    except (WebSocketDisconnect, RuntimeError):
        pass
