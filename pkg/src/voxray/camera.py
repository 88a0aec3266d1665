"""Pinhole camera, ray generation, and axis-aligned view presets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .grid import VolumeGrid


@dataclass(frozen=True)
class Ray:
    """Origin plus unit direction in world space."""

    origin: np.ndarray
    direction: np.ndarray


class Camera:
    """Pinhole camera defined by eye, target, up hint, and vertical FOV.

    The orthonormal basis is computed once at construction; a degenerate
    configuration (eye == target, up parallel to the view direction, FOV
    out of (0, 180)) fails here rather than during per-ray work.
    """

    __slots__ = ("eye", "target", "up", "vertical_fov", "width", "height",
                 "_right", "_up_v", "_forward", "_tan_x", "_tan_y")

    def __init__(
        self,
        eye: Sequence[float],
        target: Sequence[float],
        up: Sequence[float] = (0.0, 1.0, 0.0),
        vertical_fov: float = 40.0,
        width: int = 512,
        height: int = 512,
    ):
        self.eye = np.asarray(eye, dtype=np.float64)
        self.target = np.asarray(target, dtype=np.float64)
        self.up = np.asarray(up, dtype=np.float64)
        self.vertical_fov = float(vertical_fov)
        self.width = int(width)
        self.height = int(height)
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"image size must be positive, got {width}x{height}")
        if not 0.0 < self.vertical_fov < 180.0:
            raise ConfigError(f"vertical_fov must be in (0, 180), got {vertical_fov}")
        view = self.target - self.eye
        norm = float(np.linalg.norm(view))
        if norm == 0.0:
            raise ConfigError("camera eye and target coincide")
        forward = view / norm
        right = np.cross(forward, self.up)
        r_norm = float(np.linalg.norm(right))
        if r_norm < 1e-12:
            raise ConfigError("camera up vector is parallel to the view direction")
        right = right / r_norm
        self._forward = forward
        self._right = right
        self._up_v = np.cross(right, forward)
        self._tan_y = math.tan(math.radians(self.vertical_fov) / 2.0)
        self._tan_x = self._tan_y * self.width / self.height

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(right, up, forward) orthonormal camera basis."""
        return self._right, self._up_v, self._forward

    @property
    def tangents(self) -> tuple[float, float]:
        """(tan_x, tan_y): half-extents of the image plane at unit depth."""
        return self._tan_x, self._tan_y

    def generate_ray(self, px: int, py: int) -> Ray:
        """Ray through the center of pixel (px, py); origin is top-left."""
        if not (0 <= px < self.width and 0 <= py < self.height):
            raise IndexError(f"pixel {(px, py)} outside {self.width}x{self.height}")
        u = (2.0 * (px + 0.5) / self.width - 1.0) * self._tan_x
        v = (1.0 - 2.0 * (py + 0.5) / self.height) * self._tan_y
        d = self._forward + u * self._right + v * self._up_v
        d = d / np.linalg.norm(d)
        return Ray(origin=self.eye.copy(), direction=d)

    def to_obj(self) -> dict:
        return {
            "eye": self.eye.tolist(),
            "target": self.target.tolist(),
            "up": self.up.tolist(),
            "fov": self.vertical_fov,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "Camera":
        if not isinstance(obj, dict):
            raise ConfigError("camera document must be a JSON object")
        try:
            return cls(
                eye=obj["eye"],
                target=obj["target"],
                up=obj.get("up", (0.0, 1.0, 0.0)),
                vertical_fov=obj.get("fov", 40.0),
                width=obj.get("width", 512),
                height=obj.get("height", 512),
            )
        except KeyError as exc:
            raise ConfigError(f"camera document missing field {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Camera":
        return cls.from_obj(json.loads(text))


VIEW_PRESETS = ("axial", "coronal", "sagittal")

# Eye axis direction and up hint per preset; view plane axes are chosen so
# image columns map to +x (axial, coronal) or +y (sagittal).
_PRESET_FRAME = {
    "axial": (np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0]), (0, 1)),
    "coronal": (np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, -1.0]), (0, 2)),
    "sagittal": (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]), (1, 2)),
}


def preset_camera(
    view: str,
    grid: VolumeGrid,
    width: int = 512,
    height: int = 512,
    fov: float = 3.0,
) -> Camera:
    """Near-orthographic camera on the +z / +y / +x axis, framing the volume.

    The eye sits far enough along the axis that the volume's cross-section
    fills the frame with a small margin; the shallow FOV keeps perspective
    distortion negligible so renders line up with extracted slices.
    """
    if view not in VIEW_PRESETS:
        raise ConfigError(f"view must be one of {VIEW_PRESETS}, got {view!r}")
    axis, up, (ax_u, ax_v) = _PRESET_FRAME[view]
    ext = np.asarray(grid.extent)
    center = ext / 2.0
    tan_y = math.tan(math.radians(fov) / 2.0)
    tan_x = tan_y * width / height
    margin = 1.05
    dist = margin * max(
        (ext[ax_u] / 2.0) / tan_x, (ext[ax_v] / 2.0) / tan_y
    ) + ext.max()
    eye = center + axis * dist
    return Camera(eye=eye, target=center, up=up,
                  vertical_fov=fov, width=width, height=height)
