"""Independent reference computations of the triangle overlap area.

Two oracles, both implemented without touching the barycentric production
code: successive half-plane clipping, and seeded Monte Carlo sampling.
They exist to cross-check `geometry.triangle_intersection_area` in the
self-test corpus; keep them independent of it.
"""

from __future__ import annotations

import numba as nb
import numpy as np


def _shoelace(poly) -> float:
    if len(poly) < 3:
        return 0.0
    x = np.asarray([p[0] for p in poly])
    y = np.asarray([p[1] for p in poly])
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def clip_oracle_area(t1, t2) -> float:
    """Overlap area via Sutherland-Hodgman clipping of t1 by the edges of t2."""
    t1 = np.asarray(t1, dtype=np.float64)
    t2 = np.asarray(t2, dtype=np.float64)
    # orient the clip triangle counterclockwise so "inside" is the left side
    cross = ((t2[1, 0] - t2[0, 0]) * (t2[2, 1] - t2[0, 1])
             - (t2[2, 0] - t2[0, 0]) * (t2[1, 1] - t2[0, 1]))
    clip = t2 if cross > 0 else t2[::-1]

    output = [tuple(p) for p in t1]
    for e in range(3):
        ax, ay = clip[e]
        bx, by = clip[(e + 1) % 3]
        input_list = output
        output = []
        if not input_list:
            break
        sx, sy = input_list[-1]
        s_in = (bx - ax) * (sy - ay) - (by - ay) * (sx - ax) >= 0.0
        for ex, ey in input_list:
            e_in = (bx - ax) * (ey - ay) - (by - ay) * (ex - ax) >= 0.0
            if e_in != s_in:
                dx, dy = bx - ax, by - ay
                px, py = ex - sx, ey - sy
                denom = dx * py - dy * px
                if denom != 0.0:
                    t = (dx * (ay - sy) - dy * (ax - sx)) / denom
                    output.append((sx + t * px, sy + t * py))
            if e_in:
                output.append((ex, ey))
            sx, sy, s_in = ex, ey, e_in
    return _shoelace(output)


@nb.njit(cache=True)
def _splitmix64(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return state, z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def _mc_single(t1, t2, n_samples, seed):
    # bounding box of t1
    xmin = min(t1[0, 0], min(t1[1, 0], t1[2, 0]))
    xmax = max(t1[0, 0], max(t1[1, 0], t1[2, 0]))
    ymin = min(t1[0, 1], min(t1[1, 1], t1[2, 1]))
    ymax = max(t1[0, 1], max(t1[1, 1], t1[2, 1]))
    box = (xmax - xmin) * (ymax - ymin)
    if box <= 0.0:
        return 0.0, 0.0

    # precompute edge half-plane coefficients, oriented by each winding
    e1 = np.empty((3, 3))
    e2 = np.empty((3, 3))
    for tri_idx in range(2):
        t = t1 if tri_idx == 0 else t2
        e = e1 if tri_idx == 0 else e2
        s = ((t[1, 0] - t[0, 0]) * (t[2, 1] - t[0, 1])
             - (t[2, 0] - t[0, 0]) * (t[1, 1] - t[0, 1]))
        sgn = 1.0 if s >= 0 else -1.0
        for k in range(3):
            ax, ay = t[k, 0], t[k, 1]
            bx, by = t[(k + 1) % 3, 0], t[(k + 1) % 3, 1]
            e[k, 0] = sgn * (ay - by)
            e[k, 1] = sgn * (bx - ax)
            e[k, 2] = sgn * (by * ax - bx * ay)

    state = np.uint64(seed) ^ np.uint64(0xD1B54A32D192ED03)
    inv = 1.0 / 18446744073709551616.0  # 2**-64
    hits = 0
    for _ in range(n_samples):
        state, r1 = _splitmix64(state)
        state, r2 = _splitmix64(state)
        px = xmin + (xmax - xmin) * (r1 * inv)
        py = ymin + (ymax - ymin) * (r2 * inv)
        inside = True
        for k in range(3):
            if e1[k, 0] * px + e1[k, 1] * py + e1[k, 2] < 0.0:
                inside = False
                break
        if inside:
            for k in range(3):
                if e2[k, 0] * px + e2[k, 1] * py + e2[k, 2] < 0.0:
                    inside = False
                    break
        if inside:
            hits += 1

    p = hits / n_samples
    est = box * p
    # plus-one smoothing keeps the error bar meaningful at 0 or n hits
    p_err = (hits + 1.0) / (n_samples + 2.0)
    stderr = box * np.sqrt(p_err * (1.0 - p_err) / n_samples)
    return est, stderr


@nb.njit(cache=True, parallel=True)
def mc_area_batch(tris1, tris2, n_samples, seeds):
    """Monte Carlo overlap estimates for a batch of triangle pairs."""
    n = tris1.shape[0]
    est = np.empty(n)
    err = np.empty(n)
    for i in nb.prange(n):
        est[i], err[i] = _mc_single(tris1[i], tris2[i], n_samples, seeds[i])
    return est, err


def mc_oracle_area(t1, t2, n_samples: int = 1_000_000, seed: int = 0):
    """Monte Carlo overlap estimate over the bounding box of t1.

    Returns (estimate, stderr). Deterministic for a fixed seed; the sampler
    is a self-contained splitmix64 stream, independent of numpy's RNG.
    """
    t1 = np.ascontiguousarray(t1, dtype=np.float64)
    t2 = np.ascontiguousarray(t2, dtype=np.float64)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    est, err = _mc_single(t1, t2, n_samples, seed)
    return float(est), float(err)
