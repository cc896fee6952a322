"""Intensity-conserving image warping by triangulated area resampling."""

from .baseline import resample_bilinear
from .estimators import AreaWarp, BilinearResample
from .grid import GridFrame, HemipixelId, IntensityImage, total_intensity
from .mappings import (CoordinateMap, map_arcsin, map_from_grid, map_identity,
                       map_perspective, map_sin, map_wavy, parse_map_spec)
from .warp import (WarpMatrix, WarpReport, WeightingRule, apply, build_matrix,
                   destination_frame, read_matrix, report, write_matrix)

__version__ = "0.1.0"

__all__ = [
    "AreaWarp",
    "BilinearResample",
    "CoordinateMap",
    "GridFrame",
    "HemipixelId",
    "IntensityImage",
    "WarpMatrix",
    "WarpReport",
    "WeightingRule",
    "apply",
    "build_matrix",
    "destination_frame",
    "map_arcsin",
    "map_from_grid",
    "map_identity",
    "map_perspective",
    "map_sin",
    "map_wavy",
    "parse_map_spec",
    "read_matrix",
    "report",
    "resample_bilinear",
    "total_intensity",
    "write_matrix",
]
