"""Synthetic test patterns: checkerboards and sinusoidal bar gratings."""

from __future__ import annotations

import numpy as np

from .grid import GridFrame, IntensityImage

BAR_PERIODS = (20, 12, 6, 4, 2)


def checker(nx: int, ny: int, cell: int = 1, low: float = 0.0,
            high: float = 255.0) -> IntensityImage:
    """Checkerboard of cell x cell pixel squares alternating low/high."""
    if nx < 1 or ny < 1 or cell < 1:
        raise ValueError("checker dimensions and cell size must be positive")
    jj, ii = np.mgrid[0:ny, 0:nx]
    values = np.where(((ii // cell) + (jj // cell)) % 2 == 1, high, low)
    return IntensityImage(GridFrame.unit(nx, ny), values.astype(np.float64))


def bars(nx: int = 512, ny: int = 100,
         periods: tuple[int, ...] = BAR_PERIODS) -> IntensityImage:
    """Horizontal concatenation of equal-width vertical sinusoidal gratings.

    Each band spans the full 0..255 range; the listed period is in pixels
    of this raster. Band boundaries are rounded when nx is not divisible.
    """
    if nx < len(periods):
        raise ValueError("image too narrow for the requested bands")
    edges = [round(b * nx / len(periods)) for b in range(len(periods) + 1)]
    values = np.empty((ny, nx))
    for b, period in enumerate(periods):
        cols = np.arange(edges[b], edges[b + 1])
        profile = 127.5 * (1.0 - np.cos(2.0 * np.pi * (cols - edges[b]) / period))
        values[:, cols] = np.rint(profile)[None, :]
    return IntensityImage(GridFrame.unit(nx, ny), values)


def band_columns(nx: int, band: int,
                 n_bands: int = len(BAR_PERIODS)) -> slice:
    """Column range of one grating band (0-based), matching `bars` edges."""
    edges = [round(b * nx / n_bands) for b in range(n_bands + 1)]
    return slice(edges[band], edges[band + 1])
