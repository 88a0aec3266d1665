"""Ray casting: volume clipping, front-to-back compositing, and rendering.

Two integrators cover every ray. The production path accumulates color and
opacity front to back with the recurrence

    C_out = C_in + g * alpha * (1 - alpha_in)
    a_out = a_in + alpha * (1 - alpha_in)

stopping once the accumulated opacity saturates. The reference path collects
all samples first and evaluates the closed-form sum

    I = I_0 * prod(1 - a_i) + sum_i g_i * prod_{j>i}(1 - a_j)

with samples indexed from the far end, where g_i folds the sample opacity
into the shaded color. The two must agree to float tolerance; the closed
form is the testing oracle for the recurrence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .camera import Camera, Ray
from .errors import ConfigError
from .grid import VolumeGrid
from .shading import ShadingConfig
from .transfer import TransferFunction


@dataclass(frozen=True)
class SamplingConfig:
    """Ray-march parameters.

    ``step`` of None resolves to half the smallest spacing component of the
    grid being rendered. ``early_termination_alpha`` of 1.0 effectively
    disables early exit: a ray only stops once fully opaque, which cannot
    change the result.
    """

    step: Optional[float] = None
    early_termination_alpha: float = 0.99
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.step is not None and self.step <= 0.0:
            raise ConfigError(f"step must be > 0, got {self.step}")
        if not 0.0 < self.early_termination_alpha <= 1.0:
            raise ConfigError(
                f"early_termination_alpha must be in (0, 1], got "
                f"{self.early_termination_alpha}"
            )
        bg = tuple(float(c) for c in self.background)
        if len(bg) != 3 or min(bg) < 0.0 or max(bg) > 1.0:
            raise ConfigError(f"background must be an rgb triple in [0,1]: {bg}")
        object.__setattr__(self, "background", bg)

    def resolve_step(self, grid: VolumeGrid) -> float:
        return self.step if self.step is not None else 0.5 * min(grid.spacing)

    def to_obj(self) -> dict:
        return {
            "step": self.step,
            "early_termination_alpha": self.early_termination_alpha,
            "background": list(self.background),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "SamplingConfig":
        if not isinstance(obj, dict):
            raise ConfigError("sampling document must be a JSON object")
        known = {"step", "early_termination_alpha", "background"}
        kwargs = {k: v for k, v in obj.items() if k in known}
        if "background" in kwargs:
            kwargs["background"] = tuple(kwargs["background"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "SamplingConfig":
        return cls.from_obj(json.loads(text))


class CompositeState(NamedTuple):
    """Running front-to-back accumulator: premultiplied color and opacity."""

    color: np.ndarray
    alpha: float


def empty_state() -> CompositeState:
    return CompositeState(np.zeros(3), 0.0)


def composite_step(
    state: CompositeState, sample_color: np.ndarray, sample_alpha: float
) -> CompositeState:
    """One front-to-back step; ``sample_color`` is the shaded, unweighted color."""
    if not 0.0 <= sample_alpha <= 1.0:
        raise ValueError(f"sample alpha must lie in [0, 1], got {sample_alpha}")
    w = sample_alpha * (1.0 - state.alpha)
    return CompositeState(state.color + np.asarray(sample_color) * w, state.alpha + w)


@dataclass
class FrameImage:
    """Floating-point RGBA image plane, row-major from the top-left."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 4) float64 in [0, 1]

    def to_u8(self) -> np.ndarray:
        from .image_io import quantize_u8

        return quantize_u8(self.pixels)

    def to_ppm_bytes(self) -> bytes:
        from .image_io import encode_ppm

        return encode_ppm(self.to_u8()[..., :3])

    def to_png_bytes(self) -> bytes:
        from .image_io import encode_png

        return encode_png(self.to_u8())

    def save(self, path) -> None:
        from .image_io import save_image

        save_image(self, path)


@dataclass(frozen=True)
class RenderStats:
    rays: int
    samples: int
    early_terminations: int


def clip_to_volume(ray: Ray, grid: VolumeGrid) -> Optional[tuple[float, float]]:
    """Intersect a ray with the grid's bounding box; None on a miss.

    Returns the parameter interval [t_near, t_far] with t_near >= 0. Slab
    intersection per axis; rays parallel to a slab either miss outright or
    inherit the other axes' interval.
    """
    ext = grid.extent
    t0, t1 = 0.0, math.inf
    for a in range(3):
        o = float(ray.origin[a])
        d = float(ray.direction[a])
        if d == 0.0:
            if o < 0.0 or o > ext[a]:
                return None
        else:
            ta = (0.0 - o) / d
            tb = (ext[a] - o) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
    if t0 > t1:
        return None
    return t0, t1


def _march_count(t0: float, t1: float, step: float) -> int:
    return int(math.ceil((t1 - t0) / step))


def _collect_samples(
    ray: Ray,
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    t0: float,
    t1: float,
    step: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Shaded colors (n, 3) and opacities (n,) at every march position."""
    n = _march_count(t0, t1, step)
    if n <= 0:
        return np.zeros((0, 3)), np.zeros(0)
    ts = t0 + step * np.arange(n)
    pts = ray.origin[None, :] + ts[:, None] * ray.direction[None, :]
    pts = np.clip(pts, 0.0, np.asarray(grid.extent))
    intensities = grid.sample_many(pts)
    rgba = tf.evaluate(intensities)
    colors = rgba[:, :3]
    alphas = rgba[:, 3]
    view = -ray.direction
    light = (
        view
        if shading_cfg.light_dir is None
        else np.asarray(shading_cfg.light_dir, dtype=np.float64)
    )
    shaded = np.clip(colors, 0.0, 1.0)
    if shading_cfg.model != "none":
        shaded = shaded.copy()
        lit = alphas > 0.0
        if np.any(lit):
            grads = grid.gradient_many(pts[lit])
            shaded[lit] = _shade_batch(colors[lit], grads, view, light, shading_cfg)
    return shaded, alphas


def _shade_batch(
    colors: np.ndarray,
    gradients: np.ndarray,
    view: np.ndarray,
    light: np.ndarray,
    cfg: ShadingConfig,
) -> np.ndarray:
    """Vectorized Phong/Cel over rows; normals are -grad/|grad|."""
    norms = np.sqrt(np.sum(gradients * gradients, axis=1))
    flat = norms < 1e-12
    safe = np.where(flat, 1.0, norms)
    normals = -gradients / safe[:, None]
    ndl_raw = normals @ light
    ndl = np.maximum(ndl_raw, 0.0)
    if cfg.model == "phong":
        refl = 2.0 * ndl_raw[:, None] * normals - light[None, :]
        rdv = np.maximum(refl @ view, 0.0)
        spec = rdv ** cfg.shininess
        out = (
            colors * cfg.ambient
            + colors * (cfg.diffuse * ndl)[:, None]
            + colors * (cfg.specular * spec)[:, None]
        )
    else:  # cel
        k = cfg.cel_bands
        band = np.minimum((ndl * k).astype(np.int64), k - 1)
        q = np.where(ndl > 0.0, (band + 0.5) / k, 0.0)
        out = colors * cfg.ambient + colors * (cfg.diffuse * q)[:, None]
    out[flat] = colors[flat] * cfg.ambient
    return np.clip(out, 0.0, 1.0)


def integrate_ray_front_to_back(
    ray: Ray,
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    sampling: SamplingConfig,
) -> np.ndarray:
    """March a ray front to back; returns RGBA with background composited.

    A miss returns the pure background with alpha 0. Marching stops as soon
    as accumulated opacity reaches the termination threshold.
    """
    bg = np.asarray(sampling.background)
    hit = clip_to_volume(ray, grid)
    if hit is None:
        return np.concatenate([bg, [0.0]])
    t0, t1 = hit
    step = sampling.resolve_step(grid)
    shaded, alphas = _collect_samples(ray, grid, tf, shading_cfg, t0, t1, step)
    state = empty_state()
    for i in range(len(alphas)):
        a = float(alphas[i])
        if a > 0.0:
            state = composite_step(state, shaded[i], a)
        if state.alpha >= sampling.early_termination_alpha:
            break
    rgb = state.color + bg * (1.0 - state.alpha)
    return np.concatenate([rgb, [state.alpha]])


def integrate_ray_reference(
    ray: Ray,
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    sampling: SamplingConfig,
) -> np.ndarray:
    """Closed-form evaluation over all samples; no recursion, no early exit.

    Samples are indexed from the far end of the ray: each contributes its
    opacity-folded color attenuated by the transparency of everything in
    front of it, and the background is attenuated by the whole ray.
    """
    bg = np.asarray(sampling.background)
    hit = clip_to_volume(ray, grid)
    if hit is None:
        return np.concatenate([bg, [0.0]])
    t0, t1 = hit
    step = sampling.resolve_step(grid)
    shaded, alphas = _collect_samples(ray, grid, tf, shading_cfg, t0, t1, step)
    n = len(alphas)
    g = (shaded * alphas[:, None])[::-1]  # far-to-near, opacity folded in
    a = alphas[::-1]
    suffix = np.ones(n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * (1.0 - a[i])
    rgb = bg * suffix[0]
    for i in range(n):
        rgb = rgb + g[i] * suffix[i + 1]
    return np.concatenate([rgb, [1.0 - suffix[0]]])


def render(
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    sampling: SamplingConfig,
    camera: Camera,
    threads: Optional[int] = None,
) -> FrameImage:
    return render_with_stats(grid, tf, shading_cfg, sampling, camera, threads)[0]


def render_with_stats(
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    sampling: SamplingConfig,
    camera: Camera,
    threads: Optional[int] = None,
) -> tuple[FrameImage, RenderStats]:
    """Render every pixel of the camera's image plane.

    The pixel loop runs on the compiled kernel, parallel over image rows;
    rows write disjoint output so the image is bit-identical for any thread
    count. ``threads`` caps the worker count for this call (None leaves the
    current setting untouched).
    """
    from . import _kernel

    out = np.zeros((camera.height, camera.width, 4))
    stats = np.zeros((camera.height, 2), dtype=np.int64)
    _kernel.run_render(
        grid, tf, shading_cfg, sampling, camera, out, stats, threads
    )
    frame = FrameImage(width=camera.width, height=camera.height, pixels=out)
    return frame, RenderStats(
        rays=camera.width * camera.height,
        samples=int(stats[:, 0].sum()),
        early_terminations=int(stats[:, 1].sum()),
    )


def render_scalar(
    grid: VolumeGrid,
    tf: TransferFunction,
    shading_cfg: ShadingConfig,
    sampling: SamplingConfig,
    camera: Camera,
) -> FrameImage:
    """Pure-Python per-pixel render; small images only. Used to cross-check
    the compiled kernel against the scalar integrator contract."""
    out = np.zeros((camera.height, camera.width, 4))
    for py in range(camera.height):
        for px in range(camera.width):
            ray = camera.generate_ray(px, py)
            out[py, px] = integrate_ray_front_to_back(
                ray, grid, tf, shading_cfg, sampling
            )
    return FrameImage(width=camera.width, height=camera.height, pixels=out)
