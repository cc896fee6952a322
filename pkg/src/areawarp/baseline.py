"""Comparison resampler: inverse-map lookup with bilinear interpolation.

Deliberately unfiltered, as the reference point the area methods are
compared against. Pixel values are attached to pixel centers; lookups
inside the source frame but within the outer half-pixel ring clamp to the
border cell, lookups outside the frame (or where the inverse map is
undefined) produce zero.
"""

from __future__ import annotations

import numpy as np

from .grid import GridFrame, IntensityImage


def resample_bilinear(map_inverse, src: IntensityImage,
                      dst_frame: GridFrame) -> IntensityImage:
    """Evaluate src at map_inverse(destination pixel centers), bilinearly."""
    Xc, Yc = np.meshgrid(dst_frame.x_centers, dst_frame.y_centers)
    with np.errstate(invalid="ignore"):
        x, y = map_inverse(Xc, Yc)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    f = src.frame
    xmin, ymin, xmax, ymax = f.bounds()
    valid = np.isfinite(x) & np.isfinite(y) \
        & (x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax)
    x = np.where(valid, x, f.x0)  # placeholder lookups, masked out below
    y = np.where(valid, y, f.y0)

    u = np.clip((x - f.x0) / f.dx - 0.5, 0.0, f.nx - 1.0)
    v = np.clip((y - f.y0) / f.dy - 0.5, 0.0, f.ny - 1.0)
    i0 = np.minimum(np.floor(u).astype(np.int64), f.nx - 2) if f.nx > 1 \
        else np.zeros_like(u, dtype=np.int64)
    j0 = np.minimum(np.floor(v).astype(np.int64), f.ny - 2) if f.ny > 1 \
        else np.zeros_like(v, dtype=np.int64)
    i1 = np.minimum(i0 + 1, f.nx - 1)
    j1 = np.minimum(j0 + 1, f.ny - 1)
    fu = u - i0
    fv = v - j0

    def gather(channel):
        out = ((1 - fu) * (1 - fv) * channel[j0, i0]
               + fu * (1 - fv) * channel[j0, i1]
               + (1 - fu) * fv * channel[j1, i0]
               + fu * fv * channel[j1, i1])
        return np.where(valid, out, 0.0)

    if src.values.ndim == 2:
        out = gather(src.values)
    else:
        out = np.stack([gather(src.values[:, :, c])
                        for c in range(src.values.shape[2])], axis=2)
    return IntensityImage(dst_frame, out)
