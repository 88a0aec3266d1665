"""Shared helpers for building random scenes and rays."""

import numpy as np

from voxray import Ray, TransferFunction, VolumeGrid


def make_random_grid(rng, dims=(16, 16, 16), spacing=(1.0, 1.0, 1.0)):
    nx, ny, nz = dims
    return VolumeGrid(rng.random(nx * ny * nz), dims, spacing=spacing)


def make_random_tf(rng, n_points=6, max_alpha=1.0):
    xs = np.unique(np.concatenate([[0.0, 1.0], rng.random(n_points - 2)]))
    points = []
    for x in xs:
        rgba = rng.random(4)
        rgba[3] *= max_alpha
        points.append((float(x), tuple(rgba)))
    return TransferFunction(points)


def make_random_rays(rng, grid, count):
    """Rays from a shell around the volume, aimed near the volume center."""
    ext = np.asarray(grid.extent)
    center = ext / 2.0
    radius = float(np.linalg.norm(ext)) * 1.5
    rays = []
    for _ in range(count):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        origin = center + direction * radius
        aim = center + (rng.random(3) - 0.5) * ext * 1.2 - origin
        aim /= np.linalg.norm(aim)
        rays.append(Ray(origin=origin, direction=aim))
    return rays
