"""Parallel kernel assembling the sparse warp matrix.

The outer loop runs over source pixels. Each pixel owns a private slice of
the preallocated output arrays (capacity = its candidate window size), so
any number of threads produces bit-identical results; the only reduction
is a fixed-order concatenation done by the caller.

Stage 1 computes per-pixel candidate windows from the bounding box of the
four transformed corners (floor/ceil in index space, widened by one pixel,
clamped to the raster). Stage 2 transforms both hemipixels, intersects them
against every destination hemipixel in the window, applies the weighting
rule, and emits nonzero entries.

Degenerate transformed hemipixels (area below the geometry epsilon) cannot
be normalized away: under the intensity-conserving rules their share is
deposited on the destination pixel containing their vertex centroid, or
recorded as lost when that falls off the raster.
"""

import numba as nb
import numpy as np

from .geometry import (AREA_EPS_FACTOR, DUP_TOL_FACTOR, _diameter_sq,
                       _tri_intersection_area, _two_area)

RULE_HEMIPIXEL = 0
RULE_PIXEL_UNIFORM = 1
RULE_WEIGHTED_AREA = 2


@nb.njit(cache=True, parallel=True)
def compute_windows(CX, CY, p0, p1, nx, X0, Y0, dX, dY, NX, NY,
                    win, caps):
    """Stage 1: candidate window (l0, l1, m0, m1) and capacity per pixel."""
    n = p1 - p0
    for q in nb.prange(n):
        p = p0 + q
        j = p // nx
        i = p - j * nx
        x00 = CX[j, i]
        x10 = CX[j, i + 1]
        x01 = CX[j + 1, i]
        x11 = CX[j + 1, i + 1]
        y00 = CY[j, i]
        y10 = CY[j, i + 1]
        y01 = CY[j + 1, i]
        y11 = CY[j + 1, i + 1]
        bx0 = min(min(x00, x10), min(x01, x11))
        bx1 = max(max(x00, x10), max(x01, x11))
        by0 = min(min(y00, y10), min(y01, y11))
        by1 = max(max(y00, y10), max(y01, y11))

        l0 = int(np.floor((bx0 - X0) / dX)) - 1
        l1 = int(np.floor((bx1 - X0) / dX)) + 1
        m0 = int(np.floor((by0 - Y0) / dY)) - 1
        m1 = int(np.floor((by1 - Y0) / dY)) + 1
        if l0 < 0:
            l0 = 0
        if m0 < 0:
            m0 = 0
        if l1 > NX - 1:
            l1 = NX - 1
        if m1 > NY - 1:
            m1 = NY - 1
        if l0 > l1 or m0 > m1:
            win[q, 0] = 0
            win[q, 1] = -1
            win[q, 2] = 0
            win[q, 3] = -1
            caps[q] = 0
        else:
            win[q, 0] = l0
            win[q, 1] = l1
            win[q, 2] = m0
            win[q, 3] = m1
            caps[q] = (l1 - l0 + 1) * (m1 - m0 + 1)


@nb.njit(cache=True, parallel=True)
def fill_entries(CX, CY, p0, p1, nx, X0, Y0, dX, dY, NX, NY,
                 rule, dup_tol_abs, prune_threshold,
                 win, offsets,
                 out_l, out_m, out_w, counts,
                 covered_area, total_area, n_degenerate, lost_deposit):
    """Stage 2: intersect, weight, and emit entries into private slices."""
    n = p1 - p0
    dst_diam = np.sqrt(dX * dX + dY * dY)
    dst_pixel_area = dX * dY
    for q in nb.prange(n):
        p = p0 + q
        j = p // nx
        i = p - j * nx
        l0 = win[q, 0]
        l1 = win[q, 1]
        m0 = win[q, 2]
        m1 = win[q, 3]

        x00 = CX[j, i]
        x10 = CX[j, i + 1]
        x01 = CX[j + 1, i]
        x11 = CX[j + 1, i + 1]
        y00 = CY[j, i]
        y10 = CY[j, i + 1]
        y01 = CY[j + 1, i]
        y11 = CY[j + 1, i + 1]

        # transformed hemipixels: U = (c00, c11, c01), L = (c00, c10, c11)
        two_u = _two_area(x00, y00, x11, y11, x01, y01)
        two_l = _two_area(x00, y00, x10, y10, x11, y11)
        area_u = abs(two_u) * 0.5
        area_l = abs(two_l) * 0.5
        diam_u = np.sqrt(_diameter_sq(x00, y00, x11, y11, x01, y01))
        diam_l = np.sqrt(_diameter_sq(x00, y00, x10, y10, x11, y11))
        deg_u = area_u <= AREA_EPS_FACTOR * diam_u * diam_u
        deg_l = area_l <= AREA_EPS_FACTOR * diam_l * diam_l

        total_area[q] = area_u + area_l
        n_degenerate[q] = (1 if deg_u else 0) + (1 if deg_l else 0)
        counts[q] = 0
        covered_area[q] = 0.0
        lost_deposit[q] = 0.0

        wl = l1 - l0 + 1
        wm = m1 - m0 + 1
        ncells = wl * wm
        if ncells <= 0:
            # whole window off raster; conserving rules lose the deposit too
            if rule == RULE_HEMIPIXEL:
                lost_deposit[q] = (0.5 if deg_u else 0.0) + (0.5 if deg_l else 0.0)
            elif rule == RULE_PIXEL_UNIFORM and deg_u and deg_l:
                lost_deposit[q] = 1.0
            continue

        acc_u = np.zeros(ncells)
        acc_l = np.zeros(ncells)
        dep = np.zeros(ncells)
        qx = np.empty(16)
        qy = np.empty(16)

        for hemi in range(2):
            if hemi == 0:
                if deg_u:
                    continue
                ax0, ay0, ax1, ay1, ax2, ay2 = x00, y00, x11, y11, x01, y01
                acc = acc_u
                dup = dup_tol_abs if dup_tol_abs > 0.0 else \
                    DUP_TOL_FACTOR * max(dst_diam, diam_u)
            else:
                if deg_l:
                    continue
                ax0, ay0, ax1, ay1, ax2, ay2 = x00, y00, x10, y10, x11, y11
                acc = acc_l
                dup = dup_tol_abs if dup_tol_abs > 0.0 else \
                    DUP_TOL_FACTOR * max(dst_diam, diam_l)
            for m in range(m0, m1 + 1):
                ya = Y0 + m * dY
                yb = Y0 + (m + 1) * dY
                for l in range(l0, l1 + 1):
                    xa = X0 + l * dX
                    xb = X0 + (l + 1) * dX
                    cell = (m - m0) * wl + (l - l0)
                    # destination U hemipixel
                    o = _tri_intersection_area(xa, ya, xb, yb, xa, yb,
                                               ax0, ay0, ax1, ay1, ax2, ay2,
                                               dup, qx, qy)
                    # destination L hemipixel
                    o += _tri_intersection_area(xa, ya, xb, ya, xb, yb,
                                                ax0, ay0, ax1, ay1, ax2, ay2,
                                                dup, qx, qy)
                    acc[cell] += o

        # centroid deposits for degenerate hemipixels (conserving rules)
        do_dep_u = deg_u and (rule == RULE_HEMIPIXEL
                              or (rule == RULE_PIXEL_UNIFORM and deg_l))
        do_dep_l = deg_l and (rule == RULE_HEMIPIXEL
                              or (rule == RULE_PIXEL_UNIFORM and deg_u))
        for hemi in range(2):
            if hemi == 0:
                if not do_dep_u:
                    continue
                cx = (x00 + x11 + x01) / 3.0
                cy = (y00 + y11 + y01) / 3.0
            else:
                if not do_dep_l:
                    continue
                cx = (x00 + x10 + x11) / 3.0
                cy = (y00 + y10 + y11) / 3.0
            lc = int(np.floor((cx - X0) / dX))
            mc = int(np.floor((cy - Y0) / dY))
            if l0 <= lc <= l1 and m0 <= mc <= m1:
                dep[(mc - m0) * wl + (lc - l0)] += 0.5
            else:
                lost_deposit[q] += 0.5

        cov = 0.0
        base = offsets[q]
        cnt = 0
        inv_quad = 0.0
        if rule == RULE_PIXEL_UNIFORM and area_u + area_l > 0.0:
            inv_quad = 1.0 / (area_u + area_l)
        for m in range(m0, m1 + 1):
            for l in range(l0, l1 + 1):
                cell = (m - m0) * wl + (l - l0)
                ou = acc_u[cell]
                ol = acc_l[cell]
                cov += ou + ol
                if rule == RULE_HEMIPIXEL:
                    wgt = 0.0
                    if not deg_u and area_u > 0.0:
                        wgt += ou / (2.0 * area_u)
                    if not deg_l and area_l > 0.0:
                        wgt += ol / (2.0 * area_l)
                elif rule == RULE_PIXEL_UNIFORM:
                    wgt = (ou + ol) * inv_quad
                else:
                    wgt = (ou + ol) / dst_pixel_area
                wgt += dep[cell]
                if wgt > prune_threshold:
                    out_l[base + cnt] = l
                    out_m[base + cnt] = m
                    out_w[base + cnt] = wgt
                    cnt += 1
        covered_area[q] = cov
        counts[q] = cnt
