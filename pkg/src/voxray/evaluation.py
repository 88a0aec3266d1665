"""Quantitative evaluation: slice extraction, thresholding, and Dice scoring.

The default pathway scores volume slices directly: a slice is mapped through
the transfer function's opacity curve (isolating the material of interest)
and thresholded into a binary segmentation, which is then compared with
per-slice ground-truth masks via the Dice coefficient

    d = 2 |seg & gt| / (|seg| + |gt|)

A second pathway scores a rendered axis-aligned view against each slice's
ground truth, for image-based experiments.
"""

from __future__ import annotations

import io
from typing import Optional, Sequence

import numpy as np

from .camera import preset_camera
from .errors import ConfigError
from .grid import VolumeGrid
from .raycast import SamplingConfig, render
from .shading import ShadingConfig
from .transfer import TransferFunction

SLICE_AXES = ("axial", "coronal", "sagittal")

_AXIS_INDEX = {"axial": 2, "coronal": 1, "sagittal": 0}  # z, y, x


def axis_extent(grid: VolumeGrid, axis: str) -> int:
    _check_axis(axis)
    return grid.dims[_AXIS_INDEX[axis]]


def _check_axis(axis: str) -> None:
    if axis not in SLICE_AXES:
        raise ConfigError(f"axis must be one of {SLICE_AXES}, got {axis!r}")


def extract_slice(grid: VolumeGrid, axis: str, index: int) -> np.ndarray:
    """Orthogonal slice as a 2D intensity image.

    Orientation: axial -> (rows=y, cols=x); coronal -> (rows=z, cols=x);
    sagittal -> (rows=z, cols=y). Row/col indices increase with the axis
    coordinate.
    """
    _check_axis(axis)
    n = axis_extent(grid, axis)
    if not 0 <= index < n:
        raise IndexError(f"{axis} slice index {index} outside [0, {n})")
    if axis == "axial":
        return grid.data[index, :, :].copy()
    if axis == "coronal":
        return grid.data[:, index, :].copy()
    return grid.data[:, :, index].copy()


def threshold_mask(image: np.ndarray, threshold: float) -> np.ndarray:
    """Binary mask: pixel set iff intensity >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold}")
    return np.asarray(image) >= threshold


def dice(seg: np.ndarray, gt: np.ndarray) -> float:
    """Dice overlap of two binary masks; two empty masks score 1.0."""
    seg = np.asarray(seg, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if seg.shape != gt.shape:
        raise ConfigError(f"mask shapes differ: {seg.shape} vs {gt.shape}")
    total = int(seg.sum()) + int(gt.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((seg & gt).sum()) / total


def opacity_image(image: np.ndarray, tf: TransferFunction) -> np.ndarray:
    """Map a 2D intensity image through the transfer function's opacity."""
    return tf.opacity_at(np.asarray(image))


def dice_curve(
    grid: VolumeGrid,
    gt_masks: Sequence[np.ndarray],
    axis: str,
    threshold: float,
    tf: Optional[TransferFunction] = None,
) -> tuple[list[tuple[int, float]], float]:
    """Per-slice Dice of thresholded volume slices against ground truth.

    With a transfer function, each slice is first mapped through the opacity
    curve so only the isolated material survives the threshold. Returns the
    per-slice scores and their mean.
    """
    _check_axis(axis)
    n = axis_extent(grid, axis)
    if len(gt_masks) != n:
        raise ConfigError(
            f"got {len(gt_masks)} ground-truth masks for {n} {axis} slices"
        )
    scores = []
    for idx in range(n):
        img = extract_slice(grid, axis, idx)
        if tf is not None:
            img = opacity_image(img, tf)
        seg = threshold_mask(img, threshold)
        try:
            scores.append((idx, dice(seg, gt_masks[idx])))
        except ConfigError as exc:
            raise ConfigError(f"slice {idx}: {exc}") from exc
    mean = float(np.mean([d for _, d in scores])) if scores else 1.0
    return scores, mean


def rendered_axis_mask(
    grid: VolumeGrid,
    tf: TransferFunction,
    axis: str,
    threshold: float,
    shading_cfg: Optional[ShadingConfig] = None,
    sampling: Optional[SamplingConfig] = None,
) -> np.ndarray:
    """Segmentation mask from a rendered axis-aligned view.

    Renders the preset view at the slice resolution, thresholds accumulated
    opacity, and reorients the image into the slice frame (axial and
    sagittal presets view the slice plane from the +axis side, which flips
    rows relative to extract_slice).
    """
    _check_axis(axis)
    if axis == "axial":
        w, h = grid.dims[0], grid.dims[1]
    elif axis == "coronal":
        w, h = grid.dims[0], grid.dims[2]
    else:
        w, h = grid.dims[1], grid.dims[2]
    cam = preset_camera(axis, grid, width=w, height=h)
    shading_cfg = shading_cfg or ShadingConfig(model="none")
    sampling = sampling or SamplingConfig()
    frame = render(grid, tf, shading_cfg, sampling, cam)
    alpha = frame.pixels[:, :, 3]
    if axis in ("axial", "sagittal"):
        alpha = alpha[::-1, :]
    return alpha >= threshold


def rendered_dice_curve(
    grid: VolumeGrid,
    gt_masks: Sequence[np.ndarray],
    axis: str,
    threshold: float,
    tf: TransferFunction,
    shading_cfg: Optional[ShadingConfig] = None,
    sampling: Optional[SamplingConfig] = None,
) -> tuple[list[tuple[int, float]], float]:
    """Score one rendered axis view against every slice's ground truth.

    The volume is rendered once; the resulting segmentation is compared with
    each slice's mask in turn, mirroring per-slice evaluation of a rendered
    projection.
    """
    n = axis_extent(grid, axis)
    if len(gt_masks) != n:
        raise ConfigError(
            f"got {len(gt_masks)} ground-truth masks for {n} {axis} slices"
        )
    seg = rendered_axis_mask(grid, tf, axis, threshold, shading_cfg, sampling)
    scores = []
    for idx in range(n):
        try:
            scores.append((idx, dice(seg, gt_masks[idx])))
        except ConfigError as exc:
            raise ConfigError(f"slice {idx}: {exc}") from exc
    mean = float(np.mean([d for _, d in scores])) if scores else 1.0
    return scores, mean


def dice_csv(scores: list[tuple[int, float]], mean: float) -> str:
    """CSV rendering: one slice per row plus a trailing mean row."""
    buf = io.StringIO()
    buf.write("slice_index,dice\n")
    for idx, d in scores:
        buf.write(f"{idx},{d:.6f}\n")
    buf.write(f"mean,{mean:.6f}\n")
    return buf.getvalue()
