"""Robust planar triangle geometry.

Triangles are (3, 2) float arrays of vertices (u, v, w), either winding.
Points are length-2 sequences. All predicates run on *unscaled* barycentric
coordinates (b1, b2, b3): they sum to twice the unsigned triangle area, are
all nonnegative exactly when the point is inside or on the triangle, and
b_k vanishes on the side opposite vertex k. Working in this system keeps
every decision a sign test on well-conditioned cross products.

The triangle/triangle intersection area is computed by over-collecting
candidate polygon vertices (contained vertices of either triangle plus all
proper side crossings), merging near-duplicates within a tolerance, and
evaluating the area of the resulting convex polygon. Near-degenerate
configurations therefore cost at most a near-zero area sliver instead of
requiring case analysis.

The scalar kernels are numba-compiled and shared verbatim with the sparse
warp builder, so the geometry exercised by the tests is the geometry that
runs in production.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .errors import DegenerateTriangleError, NoCrossingError

# A triangle counts as degenerate when |area| <= AREA_EPS_FACTOR * diameter^2.
AREA_EPS_FACTOR = 1e-14
# A point is "on a side" when |b_k| <= ON_SIDE_BAND * 2|A| of the reference.
ON_SIDE_BAND = 1e-12
# Default duplicate-merge tolerance: DUP_TOL_FACTOR * max triangle diameter.
DUP_TOL_FACTOR = 1e-9


# ---------------------------------------------------------------------------
# scalar numba kernels (shared with the warp builder)
# ---------------------------------------------------------------------------

@nb.njit(cache=True)
def _two_area(ux, uy, vx, vy, wx, wy):
    # twice the signed area; sign encodes winding
    return (vy - wy) * (ux - wx) - (vx - wx) * (uy - wy)


@nb.njit(cache=True)
def _diameter_sq(ux, uy, vx, vy, wx, wy):
    d1 = (ux - vx) ** 2 + (uy - vy) ** 2
    d2 = (vx - wx) ** 2 + (vy - wy) ** 2
    d3 = (wx - ux) ** 2 + (wy - uy) ** 2
    return max(d1, max(d2, d3))


@nb.njit(cache=True)
def _bary(ux, uy, vx, vy, wx, wy, px, py):
    """Unscaled barycentric coordinates of (px, py); returns (b1, b2, b3, 2|A|)."""
    two_a = _two_area(ux, uy, vx, vy, wx, wy)
    s = (px - wx) * (vy - wy) - (py - wy) * (vx - wx)
    t = (ux - wx) * (py - wy) - (uy - wy) * (px - wx)
    if two_a < 0.0:
        return -s, -t, -(two_a - s - t), -two_a
    return s, t, two_a - s - t, two_a


@nb.njit(cache=True)
def _collect_candidates(ax0, ay0, ax1, ay1, ax2, ay2,
                        bx0, by0, bx1, by1, bx2, by2,
                        qx, qy):
    """Fill qx/qy (length >= 16) with candidate intersection-polygon vertices.

    Candidates: vertices of either triangle inside-or-on the other, plus
    every proper crossing between a side of one and a side of the other.
    Returns the number of points written.

    Conditioning: callers shift both triangles so the smaller one sits near
    the origin, and each crossing is evaluated parametrically along a side
    of the smaller triangle. Candidate coordinates are then bounded by the
    smaller diameter, which keeps absolute rounding errors at the scale of
    the intersection instead of the scale of the larger operand.
    """
    ax = (ax0, ax1, ax2)
    ay = (ay0, ay1, ay2)
    bx = (bx0, bx1, bx2)
    by = (by0, by1, by2)

    # barycentric coordinates of each a-vertex wrt triangle b, and vice versa
    b1 = np.empty((3, 3))
    b2 = np.empty((3, 3))
    two_abs_b = 0.0
    two_abs_a = 0.0
    for v in range(3):
        c0, c1, c2, two_abs_b = _bary(bx0, by0, bx1, by1, bx2, by2, ax[v], ay[v])
        b1[v, 0] = c0
        b1[v, 1] = c1
        b1[v, 2] = c2
        c0, c1, c2, two_abs_a = _bary(ax0, ay0, ax1, ay1, ax2, ay2, bx[v], by[v])
        b2[v, 0] = c0
        b2[v, 1] = c1
        b2[v, 2] = c2

    band_b = ON_SIDE_BAND * two_abs_b
    band_a = ON_SIDE_BAND * two_abs_a

    n = 0
    for v in range(3):
        if b1[v, 0] >= -band_b and b1[v, 1] >= -band_b and b1[v, 2] >= -band_b:
            qx[n] = ax[v]
            qy[n] = ay[v]
            n += 1
        if b2[v, 0] >= -band_a and b2[v, 1] >= -band_a and b2[v, 2] >= -band_a:
            qx[n] = bx[v]
            qy[n] = by[v]
            n += 1

    a_smaller = (_diameter_sq(ax0, ay0, ax1, ay1, ax2, ay2)
                 < _diameter_sq(bx0, by0, bx1, by1, bx2, by2))

    # side crossings: sides of a are vertex pairs (0,1), (1,2), (2,0); a side
    # crosses the k-th side line of b only when the endpoint b_k straddle zero
    for e in range(3):
        va = e
        vb = (e + 1) % 3
        for k in range(3):
            p = b1[va, k]
            q = b1[vb, k]
            if (p < 0.0 and q > 0.0) or (p > 0.0 and q < 0.0):
                # side k of b runs from vertex k+1 to k+2; locate the crossing
                # on it through the b-endpoint coordinates wrt a's side line
                wa = (k + 1) % 3
                wb = (k + 2) % 3
                ke = (e + 2) % 3
                pa = b2[wa, ke]
                pb = b2[wb, ke]
                if pa == pb:
                    continue  # parallel within rounding; vertex passes cover it
                s = pa / (pa - pb)
                if not (-ON_SIDE_BAND <= s <= 1.0 + ON_SIDE_BAND):
                    continue  # on the side line but outside the segment
                if a_smaller:
                    t = p / (p - q)
                    qx[n] = ax[va] + t * (ax[vb] - ax[va])
                    qy[n] = ay[va] + t * (ay[vb] - ay[va])
                else:
                    qx[n] = bx[wa] + s * (bx[wb] - bx[wa])
                    qy[n] = by[wa] + s * (by[wb] - by[wa])
                n += 1
    return n


@nb.njit(cache=True)
def _prune_duplicates(qx, qy, n, tol):
    """In-place first-kept duplicate merge; returns the pruned count."""
    tol2 = tol * tol
    m = 0
    for i in range(n):
        keep = True
        for j in range(m):
            dx = qx[i] - qx[j]
            dy = qy[i] - qy[j]
            if dx * dx + dy * dy <= tol2:
                keep = False
                break
        if keep:
            qx[m] = qx[i]
            qy[m] = qy[i]
            m += 1
    return m


@nb.njit(cache=True)
def _polygon_area(qx, qy, n):
    """Area of the convex polygon on the first n (unordered) points.

    n < 3 -> 0; n == 3 -> direct triangle formula; otherwise the points are
    sorted by ray angle about their centroid (ties broken by radius) and the
    fan of n-2 trianglet areas from the first sorted vertex is summed.
    """
    if n < 3:
        return 0.0
    if n == 3:
        return abs((qx[2] - qx[0]) * (qy[1] - qy[0])
                   - (qx[1] - qx[0]) * (qy[2] - qy[0])) * 0.5

    mx = 0.0
    my = 0.0
    for i in range(n):
        mx += qx[i]
        my += qy[i]
    mx /= n
    my /= n

    ang = np.empty(n)
    rad = np.empty(n)
    sx = np.empty(n)
    sy = np.empty(n)
    for i in range(n):
        dx = qx[i] - mx
        dy = qy[i] - my
        ang[i] = math.atan2(dy, dx)
        rad[i] = dx * dx + dy * dy
        sx[i] = qx[i]
        sy[i] = qy[i]

    # insertion sort on (angle, radius); n <= 12
    for i in range(1, n):
        ka = ang[i]
        kr = rad[i]
        kx = sx[i]
        ky = sy[i]
        j = i - 1
        while j >= 0 and (ang[j] > ka or (ang[j] == ka and rad[j] > kr)):
            ang[j + 1] = ang[j]
            rad[j + 1] = rad[j]
            sx[j + 1] = sx[j]
            sy[j + 1] = sy[j]
            j -= 1
        ang[j + 1] = ka
        rad[j + 1] = kr
        sx[j + 1] = kx
        sy[j + 1] = ky

    total = 0.0
    for k in range(2, n):
        total += ((sx[k] - sx[0]) * (sy[k - 1] - sy[0])
                  - (sx[k - 1] - sx[0]) * (sy[k] - sy[0]))
    return abs(total) * 0.5


@nb.njit(cache=True)
def _tri_intersection_area(ax0, ay0, ax1, ay1, ax2, ay2,
                           bx0, by0, bx1, by1, bx2, by2,
                           dup_tol, qx, qy):
    # local frame anchored at the smaller triangle's first vertex: candidates
    # all lie inside the smaller triangle, so their local coordinates stay at
    # its scale; the area is shift invariant and exact input coincidences
    # survive the common shift
    if (_diameter_sq(ax0, ay0, ax1, ay1, ax2, ay2)
            < _diameter_sq(bx0, by0, bx1, by1, bx2, by2)):
        sx = ax0
        sy = ay0
    else:
        sx = bx0
        sy = by0
    n = _collect_candidates(ax0 - sx, ay0 - sy, ax1 - sx, ay1 - sy,
                            ax2 - sx, ay2 - sy,
                            bx0 - sx, by0 - sy, bx1 - sx, by1 - sy,
                            bx2 - sx, by2 - sy, qx, qy)
    n = _prune_duplicates(qx, qy, n, dup_tol)
    return _polygon_area(qx, qy, n)


# ---------------------------------------------------------------------------
# array-facing API
# ---------------------------------------------------------------------------

def _as_triangle(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (3, 2):
        raise ValueError(f"triangle must have shape (3, 2), got {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("triangle vertices must be finite")
    return t


def triangle_diameter(t) -> float:
    """Longest side length of the triangle."""
    t = _as_triangle(t)
    return math.sqrt(_diameter_sq(t[0, 0], t[0, 1], t[1, 0], t[1, 1],
                                  t[2, 0], t[2, 1]))


def signed_area(t) -> float:
    """Signed area; positive for counterclockwise winding in a y-up frame."""
    t = _as_triangle(t)
    return 0.5 * _two_area(t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1])


def is_degenerate(t) -> bool:
    t = _as_triangle(t)
    two_a = _two_area(t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1])
    d2 = _diameter_sq(t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1])
    return abs(0.5 * two_a) <= AREA_EPS_FACTOR * d2


def _require_nondegenerate(t, who: str):
    if is_degenerate(t):
        raise DegenerateTriangleError(f"{who}: reference triangle is degenerate")


def barycentric(t, p) -> np.ndarray:
    """Unscaled barycentric coordinates of point p; components sum to 2|A|."""
    t = _as_triangle(t)
    _require_nondegenerate(t, "barycentric")
    b1, b2, b3, _ = _bary(t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1],
                          float(p[0]), float(p[1]))
    return np.array([b1, b2, b3])


def bary_to_point(t, b) -> np.ndarray:
    """Invert barycentric coordinates back to the Cartesian point."""
    t = _as_triangle(t)
    _require_nondegenerate(t, "bary_to_point")
    b = np.asarray(b, dtype=np.float64)
    two_abs = abs(_two_area(t[0, 0], t[0, 1], t[1, 0], t[1, 1], t[2, 0], t[2, 1]))
    return (b[0] * t[0] + b[1] * t[1] + b[2] * t[2]) / two_abs


def side_crossing(b_start, b_end, k: int) -> np.ndarray:
    """Barycentric coordinates of the segment's crossing with side k.

    The endpoints' k-th components must have strictly opposite signs.
    """
    b_start = np.asarray(b_start, dtype=np.float64)
    b_end = np.asarray(b_end, dtype=np.float64)
    p = b_start[k]
    q = b_end[k]
    if not ((p < 0.0 < q) or (q < 0.0 < p)):
        raise NoCrossingError(
            f"side {k}: endpoint coordinates {p} and {q} do not straddle zero")
    return (q * b_start - p * b_end) / (q - p)


def default_dup_tol(t1, t2) -> float:
    return DUP_TOL_FACTOR * max(triangle_diameter(t1), triangle_diameter(t2))


def intersection_vertices(t1, t2, dup_tol: float | None = None) -> np.ndarray:
    """Pruned candidate vertex list of t1 ∩ t2 as an (n, 2) array, unordered."""
    t1 = _as_triangle(t1)
    t2 = _as_triangle(t2)
    _require_nondegenerate(t1, "intersection_vertices")
    _require_nondegenerate(t2, "intersection_vertices")
    if dup_tol is None:
        dup_tol = default_dup_tol(t1, t2)
    qx = np.empty(16)
    qy = np.empty(16)
    anchor = t1[0] if triangle_diameter(t1) < triangle_diameter(t2) else t2[0]
    sx, sy = anchor[0], anchor[1]
    n = _collect_candidates(t1[0, 0] - sx, t1[0, 1] - sy,
                            t1[1, 0] - sx, t1[1, 1] - sy,
                            t1[2, 0] - sx, t1[2, 1] - sy,
                            t2[0, 0] - sx, t2[0, 1] - sy,
                            t2[1, 0] - sx, t2[1, 1] - sy,
                            t2[2, 0] - sx, t2[2, 1] - sy, qx, qy)
    n = _prune_duplicates(qx, qy, n, dup_tol)
    return np.column_stack((qx[:n] + sx, qy[:n] + sy))


def convex_polygon_area(points) -> float:
    """Area of a convex polygon given by an (n, 2) point list in any order."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or (points.size and points.shape[1] != 2):
        raise ValueError("polygon must be an (n, 2) array")
    n = len(points)
    qx = np.ascontiguousarray(points[:, 0]) if n else np.empty(0)
    qy = np.ascontiguousarray(points[:, 1]) if n else np.empty(0)
    return _polygon_area(qx, qy, n)


def triangle_intersection_area(t1, t2, dup_tol: float | None = None) -> float:
    """Overlap area of two triangles; zero when they are disjoint."""
    t1 = _as_triangle(t1)
    t2 = _as_triangle(t2)
    _require_nondegenerate(t1, "triangle_intersection_area")
    _require_nondegenerate(t2, "triangle_intersection_area")
    if dup_tol is None:
        dup_tol = default_dup_tol(t1, t2)
    qx = np.empty(16)
    qy = np.empty(16)
    return _tri_intersection_area(
        t1[0, 0], t1[0, 1], t1[1, 0], t1[1, 1], t1[2, 0], t1[2, 1],
        t2[0, 0], t2[0, 1], t2[1, 0], t2[1, 1], t2[2, 0], t2[2, 1],
        dup_tol, qx, qy)
