"""Image grids, pixel/hemipixel indexing and intensity buffers.

Pixel (i, j) of a frame spans the half-open box
``[x0 + i*dx, x0 + (i+1)*dx) x [y0 + j*dy, y0 + (j+1)*dy)`` with zero-based
indices. Each pixel is split along its main diagonal into an upper ("U")
and a lower ("L") triangular hemipixel; the fixed vertex conventions are

    U: (x_i, y_j), (x_{i+1}, y_{j+1}), (x_i, y_{j+1})
    L: (x_i, y_j), (x_{i+1}, y_j), (x_{i+1}, y_{j+1})

both counterclockwise in a y-up frame. Index conventions never leak into
geometry code: everything downstream works on the real coordinates.

Image values are stored row-major as (ny, nx) or (ny, nx, channels) with
``values[j, i]`` belonging to pixel (i, j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FrameMismatchError


@dataclass(frozen=True)
class GridFrame:
    """Raster coordinate frame: origin of the first pixel edge, spacing, counts."""

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise ValueError("pixel spacing must be positive")
        if not (self.nx >= 1 and self.ny >= 1):
            raise ValueError("pixel counts must be at least 1")
        if not all(math.isfinite(v) for v in (self.x0, self.y0, self.dx, self.dy)):
            raise ValueError("frame parameters must be finite")

    @classmethod
    def unit(cls, nx: int, ny: int) -> "GridFrame":
        """Frame covering the unit square with nx x ny pixels."""
        return cls(0.0, 0.0, 1.0 / nx, 1.0 / ny, nx, ny)

    @classmethod
    def from_box(cls, xmin, ymin, xmax, ymax, nx, ny) -> "GridFrame":
        return cls(float(xmin), float(ymin),
                   (float(xmax) - float(xmin)) / nx,
                   (float(ymax) - float(ymin)) / ny, nx, ny)

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (ny, nx)."""
        return (self.ny, self.nx)

    @property
    def x_edges(self) -> np.ndarray:
        return self.x0 + np.arange(self.nx + 1) * self.dx

    @property
    def y_edges(self) -> np.ndarray:
        return self.y0 + np.arange(self.ny + 1) * self.dy

    @property
    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    @property
    def pixel_area(self) -> float:
        return self.dx * self.dy

    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0,
                self.x0 + self.nx * self.dx, self.y0 + self.ny * self.dy)


@dataclass
class IntensityImage:
    """Dense real-valued raster bound to its coordinate frame."""

    frame: GridFrame
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim not in (2, 3):
            raise ValueError("values must be (ny, nx) or (ny, nx, channels)")
        if v.shape[:2] != (self.frame.ny, self.frame.nx):
            raise ValueError(
                f"values shape {v.shape[:2]} does not match frame {self.frame.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("image values must be finite")
        self.values = v

    @property
    def channels(self) -> int:
        return 1 if self.values.ndim == 2 else self.values.shape[2]


def total_intensity(img: IntensityImage):
    """Sum of all pixel values; per-channel array for multichannel images."""
    if img.values.ndim == 2:
        return float(img.values.sum())
    return img.values.sum(axis=(0, 1))


@dataclass(frozen=True)
class HemipixelId:
    i: int
    j: int
    half: str  # "U" or "L"

    def __post_init__(self):
        if self.half not in ("U", "L"):
            raise ValueError("half must be 'U' or 'L'")


def hemipixel_triangle(frame: GridFrame, hid: HemipixelId) -> np.ndarray:
    """Vertex coordinates of one hemipixel as a (3, 2) array."""
    i, j = hid.i, hid.j
    if not (0 <= i < frame.nx and 0 <= j < frame.ny):
        raise IndexError(f"hemipixel {hid} outside {frame.nx}x{frame.ny} raster")
    xa = frame.x0 + i * frame.dx
    xb = frame.x0 + (i + 1) * frame.dx
    ya = frame.y0 + j * frame.dy
    yb = frame.y0 + (j + 1) * frame.dy
    if hid.half == "U":
        return np.array([[xa, ya], [xb, yb], [xa, yb]])
    return np.array([[xa, ya], [xb, ya], [xb, yb]])


def candidate_window(frame: GridFrame, bbox) -> tuple[int, int, int, int]:
    """Index window (i0, i1, j0, j1), inclusive, of pixels near a bounding box.

    Floor/ceil of the box in index space widened by one pixel per side and
    clamped to the raster; (0, -1, 0, -1) when the box misses the raster.
    """
    xmin, ymin, xmax, ymax = (float(v) for v in bbox)
    i0 = int(math.floor((xmin - frame.x0) / frame.dx)) - 1
    i1 = int(math.floor((xmax - frame.x0) / frame.dx)) + 1
    j0 = int(math.floor((ymin - frame.y0) / frame.dy)) - 1
    j1 = int(math.floor((ymax - frame.y0) / frame.dy)) + 1
    i0 = max(i0, 0)
    j0 = max(j0, 0)
    i1 = min(i1, frame.nx - 1)
    j1 = min(j1, frame.ny - 1)
    if i0 > i1 or j0 > j1:
        return (0, -1, 0, -1)
    return (i0, i1, j0, j1)


def candidate_hemipixels(frame: GridFrame, bbox) -> list[HemipixelId]:
    """Hemipixels of every pixel whose widened index window meets the bbox.

    A cheap superset of the true overlap set: false positives only cost a
    zero-area intersection downstream.
    """
    i0, i1, j0, j1 = candidate_window(frame, bbox)
    out = []
    for j in range(j0, j1 + 1):
        for i in range(i0, i1 + 1):
            out.append(HemipixelId(i, j, "U"))
            out.append(HemipixelId(i, j, "L"))
    return out


def check_same_frame(a: GridFrame, b: GridFrame, what: str = "image"):
    if a != b:
        raise FrameMismatchError(f"{what} frame {a} does not match expected {b}")
