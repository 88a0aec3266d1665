"""Volume ingestion: RAW files with JSON sidecar metadata, and slice stacks.

RAW layout is x-fastest, y next, z slowest; u16 samples are little-endian.
The sidecar JSON schema is::

    {"dims": [nx, ny, nz], "spacing_mm": [dx, dy, dz],
     "sample_type": "u8" | "u16le", "source_range": [lo, hi]}

``source_range`` is optional; when absent, the observed min/max normalize
the data so the stored intensities span exactly [0, 1].
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, FormatError
from .grid import VolumeGrid
from .image_io import load_gray_png

SAMPLE_TYPES = {"u8": np.dtype(np.uint8), "u16le": np.dtype("<u2")}

_META_KEYS = {"dims", "spacing_mm", "sample_type", "source_range"}


@dataclass(frozen=True)
class VolumeMeta:
    dims: tuple[int, int, int]
    spacing_mm: tuple[float, float, float] = (1.0, 1.0, 1.0)
    sample_type: str = "u8"
    source_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ConfigError(f"dims must be three positive integers: {self.dims}")
        if len(self.spacing_mm) != 3 or min(self.spacing_mm) <= 0:
            raise ConfigError(f"spacing_mm must be positive: {self.spacing_mm}")
        if self.sample_type not in SAMPLE_TYPES:
            raise FormatError(
                f"unsupported sample_type {self.sample_type!r}; "
                f"supported: {sorted(SAMPLE_TYPES)}"
            )
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(
            self, "spacing_mm", tuple(float(s) for s in self.spacing_mm)
        )
        if self.source_range is not None:
            lo, hi = (float(v) for v in self.source_range)
            if hi <= lo:
                raise ConfigError(f"source_range must satisfy lo < hi: {(lo, hi)}")
            object.__setattr__(self, "source_range", (lo, hi))

    def to_obj(self) -> dict:
        obj = {
            "dims": list(self.dims),
            "spacing_mm": list(self.spacing_mm),
            "sample_type": self.sample_type,
        }
        if self.source_range is not None:
            obj["source_range"] = list(self.source_range)
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "VolumeMeta":
        if not isinstance(obj, dict):
            raise FormatError("volume metadata must be a JSON object")
        unknown = set(obj) - _META_KEYS
        if unknown:
            warnings.warn(f"ignoring unknown metadata keys: {sorted(unknown)}")
        if "dims" not in obj:
            raise FormatError("volume metadata missing required key 'dims'")
        return cls(
            dims=tuple(obj["dims"]),
            spacing_mm=tuple(obj.get("spacing_mm", (1.0, 1.0, 1.0))),
            sample_type=obj.get("sample_type", "u8"),
            source_range=(
                tuple(obj["source_range"]) if obj.get("source_range") else None
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "VolumeMeta":
        return cls.from_obj(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2)


def load_raw_volume(data: bytes, meta: VolumeMeta) -> VolumeGrid:
    """Decode raw sample bytes into a normalized VolumeGrid."""
    dtype = SAMPLE_TYPES[meta.sample_type]
    nx, ny, nz = meta.dims
    expected = nx * ny * nz * dtype.itemsize
    if len(data) != expected:
        raise FormatError(
            f"raw volume is {len(data)} bytes, expected {expected} "
            f"({nx}x{ny}x{nz} {meta.sample_type} samples)"
        )
    raw = np.frombuffer(data, dtype=dtype).astype(np.float64)
    if meta.source_range is not None:
        lo, hi = meta.source_range
    else:
        lo, hi = float(raw.min()), float(raw.max())
    if hi > lo:
        values = np.clip((raw - lo) / (hi - lo), 0.0, 1.0)
    else:
        values = np.zeros_like(raw)
    return VolumeGrid(
        values, meta.dims, spacing=meta.spacing_mm, intensity_range=(lo, hi)
    )


def write_raw_volume(
    grid: VolumeGrid,
    sample_type: str = "u8",
    out_range: Optional[tuple[float, float]] = None,
) -> bytes:
    """Denormalize a grid back to raw sample bytes (x-fastest order).

    ``out_range`` is the source range the bytes encode against; it defaults
    to the grid's own intensity_range, which makes load -> write an exact
    byte round-trip. Pass the dtype's full range (e.g. (0, 255)) to store a
    synthetic float volume at full integer precision.
    """
    if sample_type not in SAMPLE_TYPES:
        raise FormatError(f"unsupported sample_type {sample_type!r}")
    dtype = SAMPLE_TYPES[sample_type]
    lo, hi = out_range if out_range is not None else grid.intensity_range
    scaled = grid.values * (hi - lo) + lo
    limit = 255 if sample_type == "u8" else 65535
    return (
        np.clip(np.floor(scaled + 0.5), 0, limit).astype(dtype).tobytes()
    )


def load_volume_file(path, meta_path=None) -> tuple[VolumeGrid, VolumeMeta]:
    """Load a RAW volume with its JSON sidecar (default: <volume>.json)."""
    path = Path(path)
    if meta_path is None:
        meta_path = path.with_suffix(".json")
    meta_path = Path(meta_path)
    if not path.exists():
        raise FormatError(f"volume file not found: {path}")
    if not meta_path.exists():
        raise FormatError(f"volume metadata file not found: {meta_path}")
    meta = VolumeMeta.from_json(meta_path.read_text())
    return load_raw_volume(path.read_bytes(), meta), meta


def save_volume_file(
    grid: VolumeGrid,
    path,
    sample_type: str = "u8",
    out_range: Optional[tuple[float, float]] = None,
) -> Path:
    """Write <path> raw bytes plus the <path>.json sidecar; returns meta path."""
    path = Path(path)
    lo, hi = out_range if out_range is not None else grid.intensity_range
    path.write_bytes(write_raw_volume(grid, sample_type, out_range=(lo, hi)))
    meta = VolumeMeta(
        dims=grid.dims,
        spacing_mm=grid.spacing,
        sample_type=sample_type,
        source_range=(lo, hi),
    )
    meta_path = path.with_suffix(".json")
    meta_path.write_text(meta.to_json())
    return meta_path


def load_slice_stack(
    slices: Sequence[np.ndarray],
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
) -> VolumeGrid:
    """Stack ordered 2D grayscale images into a volume (slice index -> z).

    Image pixel (col, row) becomes voxel (x, y); values may be uint8 (scaled
    by 255) or floats already in [0, 1].
    """
    if len(slices) < 2:
        raise FormatError(f"slice stack needs >= 2 slices, got {len(slices)}")
    arrays = []
    shape0 = None
    for idx, s in enumerate(slices):
        arr = np.asarray(s)
        if arr.ndim != 2:
            raise FormatError(f"slice {idx} is not 2D grayscale: shape {arr.shape}")
        if arr.dtype == np.uint8:
            arr = arr.astype(np.float64) / 255.0
        else:
            arr = arr.astype(np.float64)
        if shape0 is None:
            shape0 = arr.shape
        elif arr.shape != shape0:
            raise FormatError(
                f"slice {idx} has shape {arr.shape}, expected {shape0}"
            )
        arrays.append(arr)
    data = np.stack(arrays)  # (nz, ny, nx)
    ny, nx = shape0
    return VolumeGrid(data, (nx, ny, len(arrays)), spacing=spacing)


def load_slice_stack_pngs(paths, spacing=(1.0, 1.0, 1.0)) -> VolumeGrid:
    """Load ordered grayscale PNG files as a slice stack."""
    return load_slice_stack([load_gray_png(p) for p in paths], spacing=spacing)
