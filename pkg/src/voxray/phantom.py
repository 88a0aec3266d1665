"""Synthetic test volumes with analytically known geometry.

Phantoms stand in for clinical scans: every primitive has a closed-form
containment test, so the voxel masks that come out of generation double as
exact ground truth for rendering and Dice experiments. Coordinates are in
voxel-index units (voxel centers sit at integer coordinates).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError
from .grid import VolumeGrid


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float
    intensity: float

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        return (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2 <= self.radius**2

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    intensity: float

    def contains(self, x, y, z):
        return (
            (x >= self.lo[0]) & (x <= self.hi[0])
            & (y >= self.lo[1]) & (y <= self.hi[1])
            & (z >= self.lo[2]) & (z <= self.hi[2])
        )

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)


@dataclass(frozen=True)
class Pyramid:
    """Axis-aligned pyramid: rectangular base in a z-plane tapering to an apex."""

    base_lo: tuple[float, float]
    base_hi: tuple[float, float]
    base_z: float
    apex: tuple[float, float, float]
    intensity: float

    def __post_init__(self):
        if self.apex[2] == self.base_z:
            raise ConfigError("pyramid apex must lie off the base plane")

    def contains(self, x, y, z):
        t = (z - self.base_z) / (self.apex[2] - self.base_z)
        inside_t = (t >= 0.0) & (t <= 1.0)
        lo_x = self.base_lo[0] + t * (self.apex[0] - self.base_lo[0])
        hi_x = self.base_hi[0] + t * (self.apex[0] - self.base_hi[0])
        lo_y = self.base_lo[1] + t * (self.apex[1] - self.base_lo[1])
        hi_y = self.base_hi[1] + t * (self.apex[1] - self.base_hi[1])
        return inside_t & (x >= lo_x) & (x <= hi_x) & (y >= lo_y) & (y <= hi_y)

    def bounds(self):
        zs = sorted((self.base_z, self.apex[2]))
        lo = np.asarray(
            [min(self.base_lo[0], self.apex[0]),
             min(self.base_lo[1], self.apex[1]), zs[0]]
        )
        hi = np.asarray(
            [max(self.base_hi[0], self.apex[0]),
             max(self.base_hi[1], self.apex[1]), zs[1]]
        )
        return lo, hi


@dataclass(frozen=True)
class Shell:
    """Hollow sphere: material between the inner and outer radii."""

    center: tuple[float, float, float]
    inner_radius: float
    outer_radius: float
    intensity: float

    def __post_init__(self):
        if not 0.0 <= self.inner_radius < self.outer_radius:
            raise ConfigError(
                f"shell radii must satisfy 0 <= inner < outer, got "
                f"({self.inner_radius}, {self.outer_radius})"
            )

    def contains(self, x, y, z):
        cx, cy, cz = self.center
        d2 = (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2
        return (d2 >= self.inner_radius**2) & (d2 <= self.outer_radius**2)

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.outer_radius, c + self.outer_radius


Primitive = Union[Sphere, Box, Pyramid, Shell]

_SHAPE_TYPES = {"sphere": Sphere, "box": Box, "pyramid": Pyramid, "shell": Shell}


@dataclass(frozen=True)
class PhantomSpec:
    """Dims plus an ordered list of primitives; later primitives win overlaps."""

    dims: tuple[int, int, int]
    shapes: tuple[Primitive, ...] = ()
    background: float = 0.0
    spacing_mm: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "shapes", tuple(self.shapes))
        if min(self.dims) < 2:
            raise ConfigError(f"phantom dims must each be >= 2: {self.dims}")
        if not 0.0 <= self.background < 1.0:
            raise ConfigError(f"background must lie in [0, 1): {self.background}")
        intensities = [s.intensity for s in self.shapes]
        if len(set(intensities)) != len(intensities):
            raise ConfigError(f"primitive intensities must be distinct: {intensities}")
        for s in self.shapes:
            if not 0.0 < s.intensity <= 1.0:
                raise ConfigError(
                    f"primitive intensity must lie in (0, 1]: {s.intensity}"
                )
            lo, hi = s.bounds()
            limit = np.asarray(self.dims) - 1
            if np.any(lo < 0.0) or np.any(hi > limit):
                raise ConfigError(
                    f"primitive {s} extends outside the grid [0, {limit.tolist()}]"
                )


def generate_phantom(spec: PhantomSpec) -> tuple[VolumeGrid, list[np.ndarray]]:
    """Rasterize a phantom; returns the grid and one boolean mask per primitive.

    A voxel takes the intensity of the last listed primitive containing its
    center; masks mark exactly the voxels each primitive ended up owning, so
    they are pairwise disjoint by construction.
    """
    nx, ny, nz = spec.dims
    z, y, x = np.meshgrid(
        np.arange(nz, dtype=np.float64),
        np.arange(ny, dtype=np.float64),
        np.arange(nx, dtype=np.float64),
        indexing="ij",
    )
    values = np.full((nz, ny, nx), spec.background)
    owner = np.full((nz, ny, nx), -1, dtype=np.int64)
    for m, shape in enumerate(spec.shapes):
        inside = shape.contains(x, y, z)
        values[inside] = shape.intensity
        owner[inside] = m
    masks = [owner == m for m in range(len(spec.shapes))]
    return (
        VolumeGrid(values, spec.dims, spacing=spec.spacing_mm),
        masks,
    )


# -- JSON phantom spec files ------------------------------------------------

def spec_from_obj(obj: dict) -> PhantomSpec:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ConfigError("phantom spec must be a JSON object with 'dims'")
    shapes = []
    for entry in obj.get("shapes", []):
        kind = entry.get("type")
        if kind not in _SHAPE_TYPES:
            raise ConfigError(
                f"unknown shape type {kind!r}; supported: {sorted(_SHAPE_TYPES)}"
            )
        kwargs = {k: _tupled(v) for k, v in entry.items() if k != "type"}
        try:
            shapes.append(_SHAPE_TYPES[kind](**kwargs))
        except TypeError as exc:
            raise ConfigError(f"bad {kind} entry {entry}: {exc}") from exc
    return PhantomSpec(
        dims=tuple(obj["dims"]),
        shapes=tuple(shapes),
        background=obj.get("background", 0.0),
        spacing_mm=tuple(obj.get("spacing_mm", (1.0, 1.0, 1.0))),
    )


def _tupled(v):
    return tuple(v) if isinstance(v, list) else v


def load_phantom_spec(path) -> PhantomSpec:
    return spec_from_obj(json.loads(Path(path).read_text()))


def two_object_phantom(dims: int = 64) -> PhantomSpec:
    """A red-sphere / blue-pyramid style scene: two disjoint materials whose
    opacities can be raised or lowered independently to hide either object."""
    n = dims
    return PhantomSpec(
        dims=(n, n, n),
        shapes=(
            Pyramid(
                base_lo=(n * 0.1, n * 0.55),
                base_hi=(n * 0.45, n * 0.9),
                base_z=n * 0.15,
                apex=(n * 0.275, n * 0.725, n * 0.85),
                intensity=0.4,
            ),
            Sphere(center=(n * 0.7, n * 0.3, n * 0.5), radius=n * 0.18,
                   intensity=0.8),
        ),
    )
