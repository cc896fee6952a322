"""Sparse warp-matrix construction, application and diagnostics.

`build_matrix` implements the forward-mapping pipeline: transform the
corner grid of the source raster, select candidate destination hemipixels
per source pixel by bounding box, accumulate triangle-overlap areas and
normalize them under one of three weighting rules:

* ``HEMIPIXEL``      each transformed half pixel carries half the pixel
                     intensity, normalized by its own transformed area;
* ``PIXEL_UNIFORM``  both halves share the whole-quadrilateral denominator,
                     preserving the rectangular pixel identity;
* ``WEIGHTED_AREA``  normalization by the destination pixel area, a
                     value-preserving (interpolation-like) variant.

The first two conserve total intensity to rounding for fully covered
sources; the third reproduces source values under oversampling.

Entries are emitted per source pixel into private buffers and merged in a
fixed order, so the matrix is bit-identical for any thread count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _kernel
from .errors import FormatError
from .grid import GridFrame, IntensityImage, check_same_frame
from .mappings import CoordinateMap

_ROW_CHUNK_CELLS = 8_000_000  # entry-capacity budget per kernel chunk


class WeightingRule(enum.Enum):
    HEMIPIXEL = "hemi"
    PIXEL_UNIFORM = "pixel"
    WEIGHTED_AREA = "area"

    @classmethod
    def from_name(cls, name) -> "WeightingRule":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_")
        aliases = {
            "hemi": cls.HEMIPIXEL, "hemipixel": cls.HEMIPIXEL,
            "pixel": cls.PIXEL_UNIFORM, "pixel_uniform": cls.PIXEL_UNIFORM,
            "pixeluniform": cls.PIXEL_UNIFORM,
            "area": cls.WEIGHTED_AREA, "weighted_area": cls.WEIGHTED_AREA,
            "weightedarea": cls.WEIGHTED_AREA,
        }
        if key not in aliases:
            raise ValueError(f"unknown weighting rule {name!r}")
        return aliases[key]

    @property
    def code(self) -> int:
        return {"hemi": _kernel.RULE_HEMIPIXEL,
                "pixel": _kernel.RULE_PIXEL_UNIFORM,
                "area": _kernel.RULE_WEIGHTED_AREA}[self.value]


@dataclass
class WarpMatrix:
    """Sparse (dst pixel, src pixel, weight) operator in COO layout.

    Entries are unique per (l, m, i, j) and sorted lexicographically by that
    key; all weights are positive.
    """

    src_frame: GridFrame
    dst_frame: GridFrame
    rule: WeightingRule
    l: np.ndarray = field(repr=False)
    m: np.ndarray = field(repr=False)
    i: np.ndarray = field(repr=False)
    j: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    skipped_degenerate: int = 0
    lost_area_fraction: float = 0.0
    lost_deposit_weight: float = 0.0

    @property
    def nnz(self) -> int:
        return len(self.w)

    def column_sums(self) -> np.ndarray:
        """Per-source-pixel total weight, shaped (ny, nx)."""
        flat = np.bincount(self.j.astype(np.int64) * self.src_frame.nx + self.i,
                           weights=self.w,
                           minlength=self.src_frame.nx * self.src_frame.ny)
        return flat.reshape(self.src_frame.ny, self.src_frame.nx)

    def row_sums(self) -> np.ndarray:
        """Per-destination-pixel total weight, shaped (NY, NX)."""
        flat = np.bincount(self.m.astype(np.int64) * self.dst_frame.nx + self.l,
                           weights=self.w,
                           minlength=self.dst_frame.nx * self.dst_frame.ny)
        return flat.reshape(self.dst_frame.ny, self.dst_frame.nx)


def transformed_corners(mapping: CoordinateMap, frame: GridFrame):
    """Forward-map every pixel corner of the frame; (ny+1, nx+1) arrays."""
    gx, gy = np.meshgrid(frame.x_edges, frame.y_edges)
    CX, CY = mapping.forward(gx, gy)
    CX = np.ascontiguousarray(CX, dtype=np.float64)
    CY = np.ascontiguousarray(CY, dtype=np.float64)
    if CX.shape != gx.shape or CY.shape != gx.shape:
        raise ValueError("map forward() must preserve the input array shape")
    if not (np.all(np.isfinite(CX)) and np.all(np.isfinite(CY))):
        raise ValueError("map evaluation failed (non-finite) at a pixel corner")
    return CX, CY


def destination_frame(mapping: CoordinateMap, src: GridFrame,
                      nx: int, ny: int) -> GridFrame:
    """Destination frame covering the transformed source: corner bbox, nx x ny."""
    CX, CY = transformed_corners(mapping, src)
    return GridFrame.from_box(CX.min(), CY.min(), CX.max(), CY.max(), nx, ny)


def build_matrix(mapping: CoordinateMap, src: GridFrame, dst: GridFrame,
                 rule: WeightingRule | str = WeightingRule.PIXEL_UNIFORM,
                 dup_tol: float | None = None,
                 prune_threshold: float = 1e-300,
                 n_threads: int | None = None) -> WarpMatrix:
    """Build the sparse reweighting matrix for one map and raster pair.

    ``dup_tol`` overrides the scale-relative duplicate-merge tolerance with
    an absolute one. ``n_threads`` caps the worker count; results do not
    depend on it.
    """
    rule = WeightingRule.from_name(rule)
    CX, CY = transformed_corners(mapping, src)

    old_threads = numba.get_num_threads()
    if n_threads is not None:
        numba.set_num_threads(max(1, min(int(n_threads), old_threads)))
    try:
        parts = _build_parts(CX, CY, src, dst, rule, dup_tol, prune_threshold)
    finally:
        if n_threads is not None:
            numba.set_num_threads(old_threads)

    l, m, i, j, w, covered, total, ndeg, lostdep = parts
    order = np.lexsort((j, i, m, l))
    lost_fraction = max(0.0, 1.0 - covered / total) if total > 0 else 0.0
    return WarpMatrix(src_frame=src, dst_frame=dst, rule=rule,
                      l=l[order], m=m[order], i=i[order], j=j[order],
                      w=w[order],
                      skipped_degenerate=int(ndeg),
                      lost_area_fraction=float(lost_fraction),
                      lost_deposit_weight=float(lostdep))


def _build_parts(CX, CY, src, dst, rule, dup_tol, prune_threshold):
    nx, ny = src.nx, src.ny
    n_pixels = nx * ny
    dup_abs = float(dup_tol) if dup_tol is not None else 0.0

    ls, ms, iis, js, ws = [], [], [], [], []
    covered = 0.0
    total = 0.0
    ndeg = 0
    lostdep = 0.0

    # chunk so the worst-case capacity stays within the memory budget
    p0 = 0
    while p0 < n_pixels:
        p1 = min(n_pixels, p0 + max(nx, 4096))
        while True:
            count = p1 - p0
            win = np.empty((count, 4), dtype=np.int64)
            caps = np.empty(count, dtype=np.int64)
            _kernel.compute_windows(CX, CY, p0, p1, nx,
                                    dst.x0, dst.y0, dst.dx, dst.dy,
                                    dst.nx, dst.ny, win, caps)
            total_cap = int(caps.sum())
            if total_cap <= _ROW_CHUNK_CELLS or count <= nx:
                break
            p1 = p0 + max(nx, count // 2)  # shrink chunk and retry

        offsets = np.zeros(count, dtype=np.int64)
        np.cumsum(caps[:-1], out=offsets[1:])
        out_l = np.empty(total_cap, dtype=np.int32)
        out_m = np.empty(total_cap, dtype=np.int32)
        out_w = np.empty(total_cap, dtype=np.float64)
        counts = np.zeros(count, dtype=np.int64)
        cov = np.zeros(count)
        tot = np.zeros(count)
        deg = np.zeros(count, dtype=np.int64)
        lost = np.zeros(count)
        _kernel.fill_entries(CX, CY, p0, p1, nx,
                             dst.x0, dst.y0, dst.dx, dst.dy, dst.nx, dst.ny,
                             rule.code, dup_abs, prune_threshold,
                             win, offsets,
                             out_l, out_m, out_w, counts,
                             cov, tot, deg, lost)

        keep = np.zeros(total_cap, dtype=bool)
        for q in range(count):
            keep[offsets[q]:offsets[q] + counts[q]] = True
        pix = p0 + np.arange(count, dtype=np.int64)
        ls.append(out_l[keep])
        ms.append(out_m[keep])
        iis.append(np.repeat((pix % nx).astype(np.int32), counts))
        js.append(np.repeat((pix // nx).astype(np.int32), counts))
        ws.append(out_w[keep])
        covered += float(cov.sum())
        total += float(tot.sum())
        ndeg += int(deg.sum())
        lostdep += float(lost.sum())
        p0 = p1

    return (np.concatenate(ls), np.concatenate(ms), np.concatenate(iis),
            np.concatenate(js), np.concatenate(ws), covered, total, ndeg,
            lostdep)


def apply(B: WarpMatrix, img: IntensityImage) -> IntensityImage:
    """Apply the warp: I2(l, m) = sum_ij B * I1(i, j), channelwise."""
    check_same_frame(img.frame, B.src_frame, "input image")
    src_idx = B.j.astype(np.int64) * B.src_frame.nx + B.i
    dst_idx = B.m.astype(np.int64) * B.dst_frame.nx + B.l
    n_out = B.dst_frame.nx * B.dst_frame.ny

    def one(channel):
        contrib = B.w * channel.ravel()[src_idx]
        flat = np.bincount(dst_idx, weights=contrib, minlength=n_out)
        return flat.reshape(B.dst_frame.ny, B.dst_frame.nx)

    if img.values.ndim == 2:
        out = one(img.values)
    else:
        out = np.stack([one(img.values[:, :, c])
                        for c in range(img.values.shape[2])], axis=2)
    return IntensityImage(B.dst_frame, out)


@dataclass
class WarpReport:
    delta: float
    colsum_min: float | None
    colsum_max: float | None
    row_rel_err_median: float | None
    nnz: int
    skipped_degenerate: int
    lost_area_fraction: float

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "nnz": self.nnz,
            "colsum_min": self.colsum_min,
            "colsum_max": self.colsum_max,
            "lost_fraction": self.lost_area_fraction,
            "skipped_degenerate": self.skipped_degenerate,
        }


def fully_covered_mask(mapping: CoordinateMap, B: WarpMatrix) -> np.ndarray:
    """Source pixels whose transformed quadrilateral lies inside the raster."""
    CX, CY = transformed_corners(mapping, B.src_frame)
    xmin, ymin, xmax, ymax = B.dst_frame.bounds()
    cx_ok = (CX >= xmin) & (CX <= xmax)
    cy_ok = (CY >= ymin) & (CY <= ymax)
    ok = cx_ok & cy_ok
    return ok[:-1, :-1] & ok[:-1, 1:] & ok[1:, :-1] & ok[1:, 1:]


def report(B: WarpMatrix, mapping: CoordinateMap, img_src: IntensityImage,
           img_dst: IntensityImage) -> WarpReport:
    """Conservation diagnostics: intensity discrepancy, column and row sums."""
    check_same_frame(img_src.frame, B.src_frame, "source image")
    check_same_frame(img_dst.frame, B.dst_frame, "destination image")
    s1 = float(np.sum(img_src.values))
    s2 = float(np.sum(img_dst.values))
    delta = (s1 - s2) / s1 if s1 != 0.0 else 0.0

    covered = fully_covered_mask(mapping, B)
    colsum_min = colsum_max = None
    if covered.any():
        colsums = B.column_sums()[covered]
        colsum_min = float(colsums.min())
        colsum_max = float(colsums.max())

    # row sums approximate (dst pixel area / src pixel area) * J_f^{-1}
    row_rel_err = None
    try:
        Xc, Yc = np.meshgrid(B.dst_frame.x_centers, B.dst_frame.y_centers)
        inv_j = np.abs(B.dst_frame.pixel_area / B.src_frame.pixel_area
                       * np.asarray(mapping.inverse_jacobian_at(Xc, Yc)))
        rows = B.row_sums()
        valid = (rows > 0) & np.isfinite(inv_j) & (inv_j > 0)
        if valid.any():
            rel = np.abs(rows[valid] - inv_j[valid]) / inv_j[valid]
            row_rel_err = float(np.median(rel))
    except Exception:
        row_rel_err = None

    return WarpReport(delta=delta, colsum_min=colsum_min, colsum_max=colsum_max,
                      row_rel_err_median=row_rel_err, nnz=B.nnz,
                      skipped_degenerate=B.skipped_degenerate,
                      lost_area_fraction=B.lost_area_fraction)


def write_matrix(B: WarpMatrix, path):
    """Serialize to the AWM1 text format, weights at 17 significant digits."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"AWM1 {B.dst_frame.nx} {B.dst_frame.ny} "
                 f"{B.src_frame.nx} {B.src_frame.ny} {B.nnz}\n")
        for l, m, i, j, w in zip(B.l, B.m, B.i, B.j, B.w):
            fh.write(f"{l} {m} {i} {j} {w:.16e}\n")


def read_matrix(path, src_frame: GridFrame | None = None,
                dst_frame: GridFrame | None = None,
                rule: WeightingRule = WeightingRule.PIXEL_UNIFORM) -> WarpMatrix:
    """Parse an AWM1 file; frames default to unit squares of the stored sizes."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "AWM1":
            raise FormatError(f"malformed AWM1 header {header!r}")
        try:
            N2, M2, N1, M1, nnz = (int(v) for v in header[1:])
        except ValueError as exc:
            raise FormatError("malformed AWM1 header") from exc
        if min(N2, M2, N1, M1) < 1 or nnz < 0:
            raise FormatError("bad AWM1 dimensions")
        l = np.empty(nnz, dtype=np.int32)
        m = np.empty(nnz, dtype=np.int32)
        i = np.empty(nnz, dtype=np.int32)
        j = np.empty(nnz, dtype=np.int32)
        w = np.empty(nnz, dtype=np.float64)
        for k in range(nnz):
            parts = fh.readline().split()
            if len(parts) != 5:
                raise FormatError(f"truncated AWM1 entry list at row {k}")
            l[k] = int(parts[0])
            m[k] = int(parts[1])
            i[k] = int(parts[2])
            j[k] = int(parts[3])
            w[k] = float(parts[4])
    if (np.any(l < 0) or np.any(l >= N2) or np.any(m < 0) or np.any(m >= M2)
            or np.any(i < 0) or np.any(i >= N1) or np.any(j < 0) or np.any(j >= M1)):
        raise FormatError("AWM1 indices out of range")
    return WarpMatrix(src_frame=src_frame or GridFrame.unit(N1, M1),
                      dst_frame=dst_frame or GridFrame.unit(N2, M2),
                      rule=rule, l=l, m=m, i=i, j=j, w=w)
