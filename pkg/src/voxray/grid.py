"""Voxel grid storage, trilinear reconstruction, and gradient estimation.

A :class:`VolumeGrid` is an immutable scalar field sampled on a regular grid.
Values are normalized to [0, 1] at construction; continuous values anywhere
inside the grid's bounding box come from trilinear interpolation over the
eight corners of the enclosing cell, and gradients from central differences
of that reconstruction.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ConfigError

# Largest double strictly below 1.0; used to keep cell fractions in [0, 1)
# when a point lands exactly on the upper boundary face.
_ONE_BELOW = float(np.nextafter(1.0, 0.0))


class CellCoords(NamedTuple):
    """Cell index of the lower-left-rear corner plus fractional offsets."""

    base: tuple[int, int, int]
    frac: tuple[float, float, float]


class VolumeGrid:
    """Immutable 3D scalar field with physical spacing.

    Parameters
    ----------
    values:
        Flat array of ``nx*ny*nz`` intensities in x-fastest order, or an
        array already shaped ``(nz, ny, nx)``. Values must lie in [0, 1].
    dims:
        Grid dimensions ``(nx, ny, nz)``; each must be >= 2 so that every
        point is inside a complete cell.
    spacing:
        Physical voxel spacing ``(dx, dy, dz)`` in millimeters.
    intensity_range:
        The (min, max) of the raw source values before normalization, kept
        so transfer functions can be authored in source units.
    """

    __slots__ = ("_data", "_dims", "_spacing", "_intensity_range")

    def __init__(
        self,
        values,
        dims: Sequence[int],
        spacing: Sequence[float] = (1.0, 1.0, 1.0),
        intensity_range: tuple[float, float] = (0.0, 1.0),
    ):
        nx, ny, nz = (int(d) for d in dims)
        if min(nx, ny, nz) < 2:
            raise ConfigError(f"grid dims must each be >= 2, got {(nx, ny, nz)}")
        arr = np.asarray(values, dtype=np.float64)
        if arr.size != nx * ny * nz:
            raise ConfigError(
                f"values length {arr.size} != nx*ny*nz = {nx * ny * nz}"
            )
        data = arr.reshape(nz, ny, nx).copy()
        if not np.all(np.isfinite(data)):
            raise ConfigError("grid values must be finite")
        lo, hi = float(data.min()), float(data.max())
        if lo < 0.0 or hi > 1.0:
            raise ConfigError(f"grid values must lie in [0, 1], got [{lo}, {hi}]")
        sp = tuple(float(s) for s in spacing)
        if len(sp) != 3 or min(sp) <= 0.0:
            raise ConfigError(f"spacing components must be > 0, got {spacing}")
        data.setflags(write=False)
        self._data = data
        self._dims = (nx, ny, nz)
        self._spacing = sp
        self._intensity_range = (float(intensity_range[0]), float(intensity_range[1]))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self._dims

    @property
    def spacing(self) -> tuple[float, float, float]:
        return self._spacing

    @property
    def intensity_range(self) -> tuple[float, float]:
        return self._intensity_range

    @property
    def data(self) -> np.ndarray:
        """Read-only view shaped ``(nz, ny, nx)``: ``data[k, j, i]``."""
        return self._data

    @property
    def values(self) -> np.ndarray:
        """Read-only flat view, x-fastest order."""
        return self._data.reshape(-1)

    @property
    def extent(self) -> tuple[float, float, float]:
        """World size of the interpolable box: ``(n - 1) * spacing`` per axis."""
        nx, ny, nz = self._dims
        dx, dy, dz = self._spacing
        return ((nx - 1) * dx, (ny - 1) * dy, (nz - 1) * dz)

    def __repr__(self) -> str:
        return f"VolumeGrid(dims={self._dims}, spacing={self._spacing})"

    def histogram(self, bins: int = 256) -> np.ndarray:
        """Intensity histogram over [0, 1]; counts sum to the voxel count."""
        idx = np.minimum((self.values * bins).astype(np.int64), bins - 1)
        return np.bincount(idx, minlength=bins)

    # -- point operations ---------------------------------------------------

    def value_at(self, i: int, j: int, k: int) -> float:
        """Stored intensity at grid index (i, j, k)."""
        nx, ny, nz = self._dims
        if not (0 <= i < nx and 0 <= j < ny and 0 <= k < nz):
            raise IndexError(f"index {(i, j, k)} outside dims {self._dims}")
        return float(self._data[k, j, i])

    def contains(self, p) -> bool:
        """True if world point ``p`` lies inside the (closed) bounding box."""
        ex, ey, ez = self.extent
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        return 0.0 <= x <= ex and 0.0 <= y <= ey and 0.0 <= z <= ez

    def locate_cell(self, p) -> Optional[CellCoords]:
        """Map a world point to its enclosing cell, or None if outside.

        Points exactly on the upper boundary map to the last cell with the
        fraction clamped just below 1, so the box is closed on all faces.
        """
        base = [0, 0, 0]
        frac = [0.0, 0.0, 0.0]
        for a in range(3):
            n = self._dims[a]
            q = float(p[a]) / self._spacing[a]
            if q < 0.0 or q > n - 1:
                return None
            b = int(np.floor(q))
            if b > n - 2:
                b = n - 2
            u = q - b
            if u > _ONE_BELOW:
                u = _ONE_BELOW
            base[a] = b
            frac[a] = u
        return CellCoords((base[0], base[1], base[2]), (frac[0], frac[1], frac[2]))

    def trilinear_sample(self, p) -> Optional[float]:
        """Trilinear interpolation at world point ``p``; None if outside.

        Three stages of linear interpolation: four along x, two along y,
        one along z, over the eight corners of the enclosing cell.
        """
        cell = self.locate_cell(p)
        if cell is None:
            return None
        (i, j, k), (u, v, w) = cell
        d = self._data
        c00 = d[k, j, i] * (1.0 - u) + d[k, j, i + 1] * u
        c10 = d[k, j + 1, i] * (1.0 - u) + d[k, j + 1, i + 1] * u
        c01 = d[k + 1, j, i] * (1.0 - u) + d[k + 1, j, i + 1] * u
        c11 = d[k + 1, j + 1, i] * (1.0 - u) + d[k + 1, j + 1, i + 1] * u
        c0 = c00 * (1.0 - v) + c10 * v
        c1 = c01 * (1.0 - v) + c11 * v
        return float(c0 * (1.0 - w) + c1 * w)

    def gradient_at(self, p) -> Optional[np.ndarray]:
        """Central-difference gradient of the reconstruction, per mm.

        The probe step is half the voxel spacing on each axis; probes are
        clamped to the bounding box, degrading to one-sided differences at
        the faces. Returns None if ``p`` is outside.
        """
        if not self.contains(p):
            return None
        ext = self.extent
        pos = [float(p[0]), float(p[1]), float(p[2])]
        grad = np.zeros(3)
        for a in range(3):
            h = 0.5 * self._spacing[a]
            lo = max(pos[a] - h, 0.0)
            hi = min(pos[a] + h, ext[a])
            p_lo = list(pos)
            p_hi = list(pos)
            p_lo[a] = lo
            p_hi[a] = hi
            grad[a] = (self.trilinear_sample(p_hi) - self.trilinear_sample(p_lo)) / (
                hi - lo
            )
        return grad

    # -- batched sampling (positions must already be clamped in-box) --------

    def sample_many(self, pts: np.ndarray) -> np.ndarray:
        """Trilinear samples for an (N, 3) array of in-box world points.

        Positions are clamped componentwise to the bounding box, so callers
        that have already clipped against the box never see an out-of-range
        failure from boundary rounding.
        """
        pts = np.asarray(pts, dtype=np.float64)
        nx, ny, nz = self._dims
        q = pts / np.asarray(self._spacing)
        q = np.clip(q, 0.0, np.asarray([nx - 1, ny - 1, nz - 1], dtype=np.float64))
        base = np.floor(q).astype(np.int64)
        base = np.minimum(base, np.asarray([nx - 2, ny - 2, nz - 2]))
        frac = np.minimum(q - base, _ONE_BELOW)
        i, j, k = base[:, 0], base[:, 1], base[:, 2]
        u, v, w = frac[:, 0], frac[:, 1], frac[:, 2]
        d = self._data
        c00 = d[k, j, i] * (1.0 - u) + d[k, j, i + 1] * u
        c10 = d[k, j + 1, i] * (1.0 - u) + d[k, j + 1, i + 1] * u
        c01 = d[k + 1, j, i] * (1.0 - u) + d[k + 1, j, i + 1] * u
        c11 = d[k + 1, j + 1, i] * (1.0 - u) + d[k + 1, j + 1, i + 1] * u
        c0 = c00 * (1.0 - v) + c10 * v
        c1 = c01 * (1.0 - v) + c11 * v
        return c0 * (1.0 - w) + c1 * w

    def gradient_many(self, pts: np.ndarray) -> np.ndarray:
        """Central-difference gradients for an (N, 3) array of in-box points."""
        pts = np.asarray(pts, dtype=np.float64)
        ext = np.asarray(self.extent)
        out = np.empty_like(pts)
        for a in range(3):
            h = 0.5 * self._spacing[a]
            lo = pts.copy()
            hi = pts.copy()
            lo[:, a] = np.maximum(pts[:, a] - h, 0.0)
            hi[:, a] = np.minimum(pts[:, a] + h, ext[a])
            out[:, a] = (self.sample_many(hi) - self.sample_many(lo)) / (
                hi[:, a] - lo[:, a]
            )
        return out
