"""scikit-learn style transformers wrapping the warp operators.

`AreaWarp` is fit/transform shaped: `fit` builds the sparse reweighting
matrix for the configured map and rasters (the operator depends only on
the geometry, so `fit` uses X just to infer the source raster shape), and
`transform` applies it to single images or stacks. `BilinearResample` wraps
the inverse-lookup comparison resampler behind the same interface. Both
compose with sklearn pipelines and honor get_params/set_params/clone.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import warp
from .baseline import resample_bilinear
from .errors import SingularMapError
from .grid import GridFrame, IntensityImage
from .mappings import CoordinateMap, parse_map_spec


def _resolve_map(mapping) -> CoordinateMap:
    if isinstance(mapping, CoordinateMap):
        return mapping
    return parse_map_spec(str(mapping))


def validate_image_stack(X) -> tuple[np.ndarray, bool]:
    """Coerce X to a (n, ny, nx) float stack; returns (stack, was_single)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        return X[None, :, :], True
    if X.ndim == 3:
        return X, False
    raise ValueError(f"expected a 2-D image or 3-D image stack, got ndim={X.ndim}")


def _infer_frames(X, mapping, src_frame, dst_frame, dst_shape):
    ny, nx = X.shape[1:]
    src = src_frame or GridFrame.unit(nx, ny)
    if (ny, nx) != src.shape:
        raise ValueError(f"image shape {(ny, nx)} does not match "
                         f"source frame {src.shape}")
    if dst_frame is not None:
        return src, dst_frame
    if dst_shape is None:
        shape = (src.nx, src.ny)
    else:
        shape = tuple(dst_shape)
    return src, warp.destination_frame(mapping, src, shape[0], shape[1])


class AreaWarp(TransformerMixin, BaseEstimator):
    """Intensity-redistributing image warp as a linear transformer.

    Parameters
    ----------
    mapping : CoordinateMap or map-spec string, default "identity()"
    rule : {"hemi", "pixel", "area"}, default "pixel"
        Weighting rule; "hemi" and "pixel" conserve total intensity,
        "area" preserves local values.
    dst_shape : (nx, ny) or None
        Destination raster size; defaults to the source size.
    src_frame, dst_frame : GridFrame or None
        Explicit coordinate frames. By default the source image spans the
        unit square and the destination covers the transformed bounding box.
    dup_tol : float or None
        Absolute override of the duplicate-merge tolerance.
    n_threads : int or None
        Worker cap for the build; the result never depends on it.
    """

    def __init__(self, mapping="identity()", rule="pixel", dst_shape=None,
                 src_frame=None, dst_frame=None, dup_tol=None, n_threads=None):
        self.mapping = mapping
        self.rule = rule
        self.dst_shape = dst_shape
        self.src_frame = src_frame
        self.dst_frame = dst_frame
        self.dup_tol = dup_tol
        self.n_threads = n_threads

    def fit(self, X, y=None):
        X, _ = validate_image_stack(X)
        m = _resolve_map(self.mapping)
        src, dst = _infer_frames(X, m, self.src_frame, self.dst_frame,
                                 self.dst_shape)
        self.map_ = m
        self.matrix_ = warp.build_matrix(
            m, src, dst, warp.WeightingRule.from_name(self.rule),
            dup_tol=self.dup_tol, n_threads=self.n_threads)
        return self

    def transform(self, X):
        if not hasattr(self, "matrix_"):
            raise NotFittedError("AreaWarp must be fitted before transform")
        X, single = validate_image_stack(X)
        B = self.matrix_
        out = np.stack([
            warp.apply(B, IntensityImage(B.src_frame, img)).values
            for img in X])
        return out[0] if single else out

    def report_for(self, X):
        """Conservation diagnostics for one input image."""
        if not hasattr(self, "matrix_"):
            raise NotFittedError("AreaWarp must be fitted first")
        img = IntensityImage(self.matrix_.src_frame, np.asarray(X, float))
        out = warp.apply(self.matrix_, img)
        return warp.report(self.matrix_, self.map_, img, out)


class BilinearResample(TransformerMixin, BaseEstimator):
    """Unfiltered inverse-lookup bilinear resampler (the comparison baseline)."""

    def __init__(self, mapping="identity()", dst_shape=None, src_frame=None,
                 dst_frame=None):
        self.mapping = mapping
        self.dst_shape = dst_shape
        self.src_frame = src_frame
        self.dst_frame = dst_frame

    def fit(self, X, y=None):
        X, _ = validate_image_stack(X)
        m = _resolve_map(self.mapping)
        if m.inverse is None:
            raise SingularMapError(
                f"map {m.name!r} has no inverse; bilinear resampling needs one")
        self.map_ = m
        self.src_frame_, self.dst_frame_ = _infer_frames(
            X, m, self.src_frame, self.dst_frame, self.dst_shape)
        return self

    def transform(self, X):
        if not hasattr(self, "map_"):
            raise NotFittedError("BilinearResample must be fitted before transform")
        X, single = validate_image_stack(X)
        out = np.stack([
            resample_bilinear(self.map_.inverse,
                              IntensityImage(self.src_frame_, img),
                              self.dst_frame_).values
            for img in X])
        return out[0] if single else out
