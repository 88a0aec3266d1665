"""Compiled per-pixel render kernel.

Mirrors the scalar integrator formula-for-formula: same cell location and
clamping, same three-stage trilinear form, same transfer-function segment
lookup, same shading terms, same compositing order. Rows are rendered in
parallel and write disjoint slices of the output, so the image does not
depend on the thread count or schedule.
"""

from __future__ import annotations

import math
import threading
from typing import Optional

import numpy as np
import numba
from numba import njit, prange

_ONE_BELOW = float(np.nextafter(1.0, 0.0))
_ZERO_NORMAL_EPS = 1e-12

_MODEL_IDS = {"phong": 0, "cel": 1, "none": 2}

_thread_lock = threading.Lock()


@njit(cache=True, inline="always")
def _tri(vol, nx, ny, nz, ix, iy, iz, x, y, z):
    # ix/iy/iz are reciprocal spacings; positions arrive already clamped.
    qx = x * ix
    qy = y * iy
    qz = z * iz
    if qx < 0.0:
        qx = 0.0
    if qy < 0.0:
        qy = 0.0
    if qz < 0.0:
        qz = 0.0
    i = int(qx)
    j = int(qy)
    k = int(qz)
    if i > nx - 2:
        i = nx - 2
    if j > ny - 2:
        j = ny - 2
    if k > nz - 2:
        k = nz - 2
    u = qx - i
    v = qy - j
    w = qz - k
    if u > _ONE_BELOW:
        u = _ONE_BELOW
    if v > _ONE_BELOW:
        v = _ONE_BELOW
    if w > _ONE_BELOW:
        w = _ONE_BELOW
    c00 = vol[k, j, i] * (1.0 - u) + vol[k, j, i + 1] * u
    c10 = vol[k, j + 1, i] * (1.0 - u) + vol[k, j + 1, i + 1] * u
    c01 = vol[k + 1, j, i] * (1.0 - u) + vol[k + 1, j, i + 1] * u
    c11 = vol[k + 1, j + 1, i] * (1.0 - u) + vol[k + 1, j + 1, i + 1] * u
    c0 = c00 * (1.0 - v) + c10 * v
    c1 = c01 * (1.0 - v) + c11 * v
    return c0 * (1.0 - w) + c1 * w


@njit(cache=True, inline="always")
def _tf_segment(tf_x, s):
    if s < 0.0:
        s = 0.0
    if s > 1.0:
        s = 1.0
    lo = 0
    hi = tf_x.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tf_x[mid] <= s:
            lo = mid
        else:
            hi = mid
    t = (s - tf_x[lo]) / (tf_x[lo + 1] - tf_x[lo])
    return lo, t


@njit(cache=True, inline="always")
def _clamp01(x):
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@njit(cache=True)
def _shade_sample(
    vol, nx, ny, nz, ix, iy, iz, dx, dy, dz, ex, ey, ez,
    x, y, z, cr, cg, cb,
    vx, vy, vz, lx, ly, lz,
    model, amb, dif, spe, shin, bands,
):
    # central-difference gradient, probes clamped to the box
    hx = 0.5 * dx
    x_lo = x - hx
    if x_lo < 0.0:
        x_lo = 0.0
    x_hi = x + hx
    if x_hi > ex:
        x_hi = ex
    gx = (
        _tri(vol, nx, ny, nz, ix, iy, iz, x_hi, y, z)
        - _tri(vol, nx, ny, nz, ix, iy, iz, x_lo, y, z)
    ) / (x_hi - x_lo)
    hy = 0.5 * dy
    y_lo = y - hy
    if y_lo < 0.0:
        y_lo = 0.0
    y_hi = y + hy
    if y_hi > ey:
        y_hi = ey
    gy = (
        _tri(vol, nx, ny, nz, ix, iy, iz, x, y_hi, z)
        - _tri(vol, nx, ny, nz, ix, iy, iz, x, y_lo, z)
    ) / (y_hi - y_lo)
    hz = 0.5 * dz
    z_lo = z - hz
    if z_lo < 0.0:
        z_lo = 0.0
    z_hi = z + hz
    if z_hi > ez:
        z_hi = ez
    gz = (
        _tri(vol, nx, ny, nz, ix, iy, iz, x, y, z_hi)
        - _tri(vol, nx, ny, nz, ix, iy, iz, x, y, z_lo)
    ) / (z_hi - z_lo)

    gn = math.sqrt(gx * gx + gy * gy + gz * gz)
    if gn < _ZERO_NORMAL_EPS:
        return _clamp01(cr * amb), _clamp01(cg * amb), _clamp01(cb * amb)
    nxv = -gx / gn
    nyv = -gy / gn
    nzv = -gz / gn
    ndl_raw = nxv * lx + nyv * ly + nzv * lz
    ndl = ndl_raw if ndl_raw > 0.0 else 0.0
    if model == 0:  # phong
        rx = 2.0 * ndl_raw * nxv - lx
        ry = 2.0 * ndl_raw * nyv - ly
        rz = 2.0 * ndl_raw * nzv - lz
        rdv = rx * vx + ry * vy + rz * vz
        if rdv < 0.0:
            rdv = 0.0
        spec = rdv ** shin
        sr = cr * amb + cr * (dif * ndl) + cr * (spe * spec)
        sg = cg * amb + cg * (dif * ndl) + cg * (spe * spec)
        sb = cb * amb + cb * (dif * ndl) + cb * (spe * spec)
    else:  # cel
        if ndl > 0.0:
            band = int(ndl * bands)
            if band > bands - 1:
                band = bands - 1
            q = (band + 0.5) / bands
        else:
            q = 0.0
        sr = cr * amb + cr * (dif * q)
        sg = cg * amb + cg * (dif * q)
        sb = cb * amb + cb * (dif * q)
    return _clamp01(sr), _clamp01(sg), _clamp01(sb)


@njit(cache=True, parallel=True)
def _render_rows(
    vol, dx, dy, dz, ex, ey, ez,
    eye0, eye1, eye2,
    rx, ry, rz, ux, uy, uz, fx, fy, fz, tanx, tany,
    width, height,
    tf_x, tf_rgba,
    model, amb, dif, spe, shin, bands,
    headlight, wlx, wly, wlz,
    step, term, bg0, bg1, bg2,
    out, stats,
):
    nz, ny, nx = vol.shape
    ix = 1.0 / dx
    iy = 1.0 / dy
    iz = 1.0 / dz
    for py in prange(height):
        row_samples = 0
        row_terms = 0
        for px in range(width):
            u = (2.0 * (px + 0.5) / width - 1.0) * tanx
            v = (1.0 - 2.0 * (py + 0.5) / height) * tany
            ddx = fx + u * rx + v * ux
            ddy = fy + u * ry + v * uy
            ddz = fz + u * rz + v * uz
            dn = math.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
            ddx /= dn
            ddy /= dn
            ddz /= dn

            # slab clip against [0, extent]
            t0 = 0.0
            t1 = math.inf
            miss = False
            for a in range(3):
                if a == 0:
                    o = eye0
                    d = ddx
                    hi = ex
                elif a == 1:
                    o = eye1
                    d = ddy
                    hi = ey
                else:
                    o = eye2
                    d = ddz
                    hi = ez
                if d == 0.0:
                    if o < 0.0 or o > hi:
                        miss = True
                else:
                    ta = (0.0 - o) / d
                    tb = (hi - o) / d
                    if ta > tb:
                        ta, tb = tb, ta
                    if ta > t0:
                        t0 = ta
                    if tb < t1:
                        t1 = tb
            if miss or t0 > t1:
                out[py, px, 0] = bg0
                out[py, px, 1] = bg1
                out[py, px, 2] = bg2
                out[py, px, 3] = 0.0
                continue

            n = int(math.ceil((t1 - t0) / step))
            cr = 0.0
            cg = 0.0
            cb = 0.0
            al = 0.0
            vx = -ddx
            vy = -ddy
            vz = -ddz
            if headlight:
                lx = vx
                ly = vy
                lz = vz
            else:
                lx = wlx
                ly = wly
                lz = wlz
            for k in range(n):
                t = t0 + k * step
                x = eye0 + t * ddx
                y = eye1 + t * ddy
                z = eye2 + t * ddz
                if x < 0.0:
                    x = 0.0
                elif x > ex:
                    x = ex
                if y < 0.0:
                    y = 0.0
                elif y > ey:
                    y = ey
                if z < 0.0:
                    z = 0.0
                elif z > ez:
                    z = ez
                s = _tri(vol, nx, ny, nz, ix, iy, iz, x, y, z)
                seg, tseg = _tf_segment(tf_x, s)
                ta = tf_rgba[seg, 3] + tseg * (tf_rgba[seg + 1, 3] - tf_rgba[seg, 3])
                row_samples += 1
                if ta > 0.0:
                    tr = tf_rgba[seg, 0] + tseg * (
                        tf_rgba[seg + 1, 0] - tf_rgba[seg, 0]
                    )
                    tg = tf_rgba[seg, 1] + tseg * (
                        tf_rgba[seg + 1, 1] - tf_rgba[seg, 1]
                    )
                    tb = tf_rgba[seg, 2] + tseg * (
                        tf_rgba[seg + 1, 2] - tf_rgba[seg, 2]
                    )
                    if model == 2:
                        sr = _clamp01(tr)
                        sg = _clamp01(tg)
                        sb = _clamp01(tb)
                    else:
                        sr, sg, sb = _shade_sample(
                            vol, nx, ny, nz, ix, iy, iz, dx, dy, dz, ex, ey, ez,
                            x, y, z, tr, tg, tb,
                            vx, vy, vz, lx, ly, lz,
                            model, amb, dif, spe, shin, bands,
                        )
                    w = ta * (1.0 - al)
                    cr += sr * w
                    cg += sg * w
                    cb += sb * w
                    al += w
                if al >= term:
                    if k < n - 1:
                        row_terms += 1
                    break
            out[py, px, 0] = cr + bg0 * (1.0 - al)
            out[py, px, 1] = cg + bg1 * (1.0 - al)
            out[py, px, 2] = cb + bg2 * (1.0 - al)
            out[py, px, 3] = al
        stats[py, 0] = row_samples
        stats[py, 1] = row_terms


def run_render(grid, tf, shading_cfg, sampling, camera, out, stats,
               threads: Optional[int] = None) -> None:
    """Marshal scene objects into primitives and invoke the compiled kernel."""
    right, up_v, forward = camera.basis
    tan_x, tan_y = camera.tangents
    ext = grid.extent
    headlight = shading_cfg.light_dir is None
    light = shading_cfg.light_dir or (0.0, 0.0, 1.0)
    args = (
        grid.data,
        grid.spacing[0], grid.spacing[1], grid.spacing[2],
        ext[0], ext[1], ext[2],
        float(camera.eye[0]), float(camera.eye[1]), float(camera.eye[2]),
        float(right[0]), float(right[1]), float(right[2]),
        float(up_v[0]), float(up_v[1]), float(up_v[2]),
        float(forward[0]), float(forward[1]), float(forward[2]),
        tan_x, tan_y,
        camera.width, camera.height,
        tf.knots, tf.rgba_table,
        _MODEL_IDS[shading_cfg.model],
        shading_cfg.ambient, shading_cfg.diffuse, shading_cfg.specular,
        shading_cfg.shininess, shading_cfg.cel_bands,
        headlight, light[0], light[1], light[2],
        sampling.resolve_step(grid), sampling.early_termination_alpha,
        sampling.background[0], sampling.background[1], sampling.background[2],
        out, stats,
    )
    if threads is None:
        _render_rows(*args)
        return
    capped = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    with _thread_lock:
        previous = numba.get_num_threads()
        numba.set_num_threads(capped)
        try:
            _render_rows(*args)
        finally:
            numba.set_num_threads(previous)
