"""Transfer functions: piecewise-linear maps from intensity to color and opacity.

The transfer function is the user's lever for exploring a volume: raising the
opacity of one intensity range makes that material visible, lowering it hides
the material. Control points are (intensity, rgba) pairs with strictly
increasing intensities; evaluation interpolates linearly between them.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


class TransferFunction:
    """Piecewise-linear intensity -> (r, g, b, alpha) map on [0, 1].

    Control points must have strictly increasing intensities and channel
    values in [0, 1]. If the first point is not at intensity 0 (or the last
    not at 1), a clamped copy of the boundary point is synthesized so the
    function is total on [0, 1].
    """

    __slots__ = ("_x", "_rgba")

    def __init__(self, points: Iterable[tuple[float, Sequence[float]]]):
        pts = [(float(x), tuple(float(c) for c in rgba)) for x, rgba in points]
        if len(pts) < 1:
            raise ConfigError("transfer function needs at least one control point")
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ConfigError(f"control point intensities must strictly increase: {xs}")
        if xs[0] < 0.0 or xs[-1] > 1.0:
            raise ConfigError(f"control point intensities must lie in [0, 1]: {xs}")
        for x, rgba in pts:
            if len(rgba) != 4:
                raise ConfigError(f"control point at {x} needs 4 channels, got {rgba}")
            if min(rgba) < 0.0 or max(rgba) > 1.0:
                raise ConfigError(f"channels at {x} must lie in [0, 1], got {rgba}")
        if pts[0][0] > 0.0:
            pts.insert(0, (0.0, pts[0][1]))
        if pts[-1][0] < 1.0:
            pts.append((1.0, pts[-1][1]))
        self._x = np.asarray([p[0] for p in pts], dtype=np.float64)
        self._rgba = np.asarray([p[1] for p in pts], dtype=np.float64)
        self._x.setflags(write=False)
        self._rgba.setflags(write=False)

    @property
    def control_points(self) -> list[tuple[float, tuple[float, float, float, float]]]:
        return [(float(x), tuple(c)) for x, c in zip(self._x, self._rgba)]

    @property
    def knots(self) -> np.ndarray:
        return self._x

    @property
    def rgba_table(self) -> np.ndarray:
        return self._rgba

    def _segments(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = np.clip(s, 0.0, 1.0)
        idx = np.searchsorted(self._x, s, side="right") - 1
        idx = np.clip(idx, 0, len(self._x) - 2)
        return s, idx

    def evaluate(self, s) -> np.ndarray:
        """RGBA at intensity ``s`` (scalar or array); s is clamped to [0, 1]."""
        arr = np.asarray(s, dtype=np.float64)
        sc, idx = self._segments(arr.reshape(-1))
        x0 = self._x[idx]
        x1 = self._x[idx + 1]
        t = ((sc - x0) / (x1 - x0))[:, None]
        y0 = self._rgba[idx]
        y1 = self._rgba[idx + 1]
        out = y0 + t * (y1 - y0)
        return out.reshape(arr.shape + (4,))

    def opacity_at(self, s) -> float | np.ndarray:
        """Alpha channel at intensity ``s``."""
        out = self.evaluate(s)[..., 3]
        return float(out) if np.ndim(s) == 0 else out

    def color_at(self, s) -> np.ndarray:
        """RGB channels at intensity ``s``."""
        return self.evaluate(s)[..., :3]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransferFunction):
            return NotImplemented
        return np.array_equal(self._x, other._x) and np.array_equal(
            self._rgba, other._rgba
        )

    def __hash__(self):
        return hash((self._x.tobytes(), self._rgba.tobytes()))

    # -- serialization: JSON array of {intensity, r, g, b, a} ---------------

    def to_obj(self) -> list[dict]:
        return [
            {"intensity": float(x), "r": c[0], "g": c[1], "b": c[2], "a": c[3]}
            for x, c in zip(self._x.tolist(), self._rgba.tolist())
        ]

    @classmethod
    def from_obj(cls, obj) -> "TransferFunction":
        if not isinstance(obj, list):
            raise ConfigError("transfer function document must be a JSON array")
        pts = []
        for entry in obj:
            try:
                pts.append(
                    (
                        entry["intensity"],
                        (entry["r"], entry["g"], entry["b"], entry["a"]),
                    )
                )
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"bad transfer function entry {entry!r}") from exc
        return cls(pts)

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "TransferFunction":
        return cls.from_obj(json.loads(text))


def grayscale_ramp(max_alpha: float = 1.0) -> TransferFunction:
    """Black-transparent to white-opaque ramp; a sane default for new scenes."""
    return TransferFunction(
        [(0.0, (0.0, 0.0, 0.0, 0.0)), (1.0, (1.0, 1.0, 1.0, max_alpha))]
    )


def isolate_band(
    tf: TransferFunction, center: float, width: float, alpha_peak: float
) -> TransferFunction:
    """Replace the opacity curve with a trapezoid band, keeping colors.

    Opacity is ``alpha_peak`` on the inner plateau, ramps linearly over
    ``width / 4`` at each edge, and is zero outside the band. Colors are
    taken from ``tf`` unchanged, so the band exposes one material in the
    colors the user already assigned.
    """
    if width <= 0.0:
        raise ConfigError(f"band width must be > 0, got {width}")
    if not 0.0 <= alpha_peak <= 1.0:
        raise ConfigError(f"alpha_peak must lie in [0, 1], got {alpha_peak}")
    lo = center - width / 2.0
    hi = center + width / 2.0
    if lo < 0.0 or hi > 1.0:
        raise ConfigError(f"band [{lo}, {hi}] must lie within [0, 1]")
    ramp = width / 4.0
    knots = [lo, lo + ramp, hi - ramp, hi]

    def band_alpha(x: float) -> float:
        if x <= lo or x >= hi:
            return 0.0
        if x < lo + ramp:
            return alpha_peak * (x - lo) / ramp
        if x > hi - ramp:
            return alpha_peak * (hi - x) / ramp
        return alpha_peak

    xs = sorted(set([0.0, 1.0] + [float(x) for x in tf.knots] + knots))
    pts = []
    for x in xs:
        r, g, b = tf.color_at(x)
        pts.append((x, (float(r), float(g), float(b), band_alpha(x))))
    return TransferFunction(pts)
