"""Coordinate transformations (x, y) -> (X, Y).

A `CoordinateMap` bundles a vectorized forward function with whatever else
is analytically available: the inverse, the Jacobian determinant (as a
function of source coordinates), the Jacobian of the inverse (as a function
of destination coordinates), and the gradient of the Jacobian. All callables
accept and return numpy arrays elementwise.

Built-ins:

* ``identity``
* ``wavy``         sinusoidal warp of the unit square; no closed inverse
* ``perspective``  projection with parameters (a, b, c, d); analytic inverse
* ``sin``          cosine stretch of the unit square; closed inverse
* ``arcsin``       the inverse of ``sin`` packaged as a forward map
* node-grid maps   bilinear interpolation of corner node tables

The perspective inverse is derived from the forward equations rather than
transcribed: solve Y = c*(1 + (d-b)/(y-b)) for y, then substitute into X.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MapSpecError, SingularMapError
from .grid import GridFrame

_SINGULAR_GUARD = 1e-300


@dataclass(frozen=True)
class CoordinateMap:
    forward: Callable
    inverse: Callable | None = None
    jacobian: Callable | None = None
    jacobian_gradient: Callable | None = None
    inverse_jacobian: Callable | None = None
    domain: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    name: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.forward(x, y)

    def inverse_jacobian_at(self, X, Y):
        """J_f^{-1} at destination coordinates, composed from parts if needed."""
        if self.inverse_jacobian is not None:
            return self.inverse_jacobian(X, Y)
        if self.inverse is not None and self.jacobian is not None:
            x, y = self.inverse(X, Y)
            J = self.jacobian(x, y)
            return 1.0 / J
        raise SingularMapError(
            f"map {self.name!r} provides no inverse Jacobian")


def map_identity() -> CoordinateMap:
    return CoordinateMap(
        forward=lambda x, y: (np.asarray(x, dtype=np.float64) + 0.0,
                              np.asarray(y, dtype=np.float64) + 0.0),
        inverse=lambda X, Y: (np.asarray(X, dtype=np.float64) + 0.0,
                              np.asarray(Y, dtype=np.float64) + 0.0),
        jacobian=lambda x, y: np.ones_like(np.asarray(x, dtype=np.float64)),
        jacobian_gradient=lambda x, y: (np.zeros_like(np.asarray(x, dtype=np.float64)),
                                        np.zeros_like(np.asarray(y, dtype=np.float64))),
        inverse_jacobian=lambda X, Y: np.ones_like(np.asarray(X, dtype=np.float64)),
        name="identity")


def map_wavy() -> CoordinateMap:
    """Sinusoidal warp X = x + 3 sin(2 pi y)/20, Y = y - 3 sin(pi x)/20."""
    def forward(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return (x + 3.0 * np.sin(2.0 * np.pi * y) / 20.0,
                y - 3.0 * np.sin(np.pi * x) / 20.0)

    def jacobian(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        # dX/dx = 1, dX/dy = (3 pi/10) cos(2 pi y)
        # dY/dx = -(3 pi/20) cos(pi x), dY/dy = 1
        return 1.0 + (9.0 * np.pi ** 2 / 200.0) * np.cos(2.0 * np.pi * y) * np.cos(np.pi * x)

    def jacobian_gradient(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        c = 9.0 * np.pi ** 2 / 200.0
        return (-c * np.pi * np.cos(2.0 * np.pi * y) * np.sin(np.pi * x),
                -2.0 * np.pi * c * np.sin(2.0 * np.pi * y) * np.cos(np.pi * x))

    return CoordinateMap(forward=forward, jacobian=jacobian,
                         jacobian_gradient=jacobian_gradient, name="wavy")


def map_perspective(a: float = 0.25, b: float = -0.1, c: float = 0.5,
                    d: float = 0.0) -> CoordinateMap:
    """Projection of the xy plane seen from (a, b, c) onto the plane y = d."""
    span = d - b

    def forward(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        den = y - b
        if np.any(np.abs(den) < _SINGULAR_GUARD):
            raise SingularMapError(f"perspective map evaluated at y = b = {b}")
        r = span / den
        return a + (x - a) * r, c * (1.0 + r)

    def inverse(X, Y):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        den = Y - c
        if np.any(np.abs(den) < _SINGULAR_GUARD):
            raise SingularMapError("perspective inverse evaluated at Y = c")
        return a + c * (X - a) / den, b + c * span / den

    def jacobian(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        den = y - b
        if np.any(np.abs(den) < _SINGULAR_GUARD):
            raise SingularMapError(f"perspective Jacobian at y = b = {b}")
        return -c * span * span / den ** 3

    def jacobian_gradient(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        den = y - b
        return (np.zeros_like(x), 3.0 * c * span * span / den ** 4)

    return CoordinateMap(forward=forward, inverse=inverse, jacobian=jacobian,
                         jacobian_gradient=jacobian_gradient,
                         name="perspective", params={"a": a, "b": b, "c": c, "d": d})


def map_sin() -> CoordinateMap:
    """X = (1 - cos(pi x))/2, Y = (1 - cos(pi y))/2 on the unit square."""
    def forward(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return (1.0 - np.cos(np.pi * x)) / 2.0, (1.0 - np.cos(np.pi * y)) / 2.0

    def inverse(X, Y):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        return (0.5 - np.arcsin(1.0 - 2.0 * X) / np.pi,
                0.5 - np.arcsin(1.0 - 2.0 * Y) / np.pi)

    def jacobian(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return 0.25 * np.pi ** 2 * np.sin(np.pi * x) * np.sin(np.pi * y)

    def jacobian_gradient(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return (0.25 * np.pi ** 3 * np.cos(np.pi * x) * np.sin(np.pi * y),
                0.25 * np.pi ** 3 * np.sin(np.pi * x) * np.cos(np.pi * y))

    def inverse_jacobian(X, Y):
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        prod = X * (1.0 - X) * Y * (1.0 - Y)
        if np.any(prod <= 0.0):
            raise SingularMapError(
                "inverse Jacobian of the sin map is singular on the square edges")
        return 1.0 / (np.pi ** 2 * np.sqrt(prod))

    return CoordinateMap(forward=forward, inverse=inverse, jacobian=jacobian,
                         jacobian_gradient=jacobian_gradient,
                         inverse_jacobian=inverse_jacobian, name="sin")


def map_arcsin() -> CoordinateMap:
    """The closed-form inverse of the sin map, packaged as a forward map."""
    s = map_sin()

    def jacobian(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        prod = x * (1.0 - x) * y * (1.0 - y)
        if np.any(prod <= 0.0):
            raise SingularMapError("arcsin map Jacobian singular on the square edges")
        return 1.0 / (np.pi ** 2 * np.sqrt(prod))

    return CoordinateMap(forward=s.inverse, inverse=s.forward, jacobian=jacobian,
                         inverse_jacobian=s.jacobian, name="arcsin")


def map_from_grid(nodes_x: np.ndarray, nodes_y: np.ndarray,
                  frame: GridFrame) -> CoordinateMap:
    """Map sampled on pixel corners, evaluated bilinearly in between.

    ``nodes_x``/``nodes_y`` hold the destination coordinates of every pixel
    corner of ``frame`` as (ny+1, nx+1) arrays. Corner evaluations reproduce
    the node values exactly (index snapping guards against rounding), which
    is all the matrix builder ever asks of a map.
    """
    nodes_x = np.asarray(nodes_x, dtype=np.float64)
    nodes_y = np.asarray(nodes_y, dtype=np.float64)
    want = (frame.ny + 1, frame.nx + 1)
    if nodes_x.shape != want or nodes_y.shape != want:
        raise ValueError(f"node arrays must have shape {want}, "
                         f"got {nodes_x.shape} and {nodes_y.shape}")

    def forward(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        u = (x - frame.x0) / frame.dx
        v = (y - frame.y0) / frame.dy
        # snap to exact corners so corner evaluation is bit-exact
        ur = np.rint(u)
        vr = np.rint(v)
        u = np.where(np.abs(u - ur) < 1e-9, ur, u)
        v = np.where(np.abs(v - vr) < 1e-9, vr, v)
        i0 = np.clip(np.floor(u).astype(np.int64), 0, frame.nx - 1)
        j0 = np.clip(np.floor(v).astype(np.int64), 0, frame.ny - 1)
        fu = u - i0
        fv = v - j0
        w00 = (1.0 - fu) * (1.0 - fv)
        w10 = fu * (1.0 - fv)
        w01 = (1.0 - fu) * fv
        w11 = fu * fv
        X = (w00 * nodes_x[j0, i0] + w10 * nodes_x[j0, i0 + 1]
             + w01 * nodes_x[j0 + 1, i0] + w11 * nodes_x[j0 + 1, i0 + 1])
        Y = (w00 * nodes_y[j0, i0] + w10 * nodes_y[j0, i0 + 1]
             + w01 * nodes_y[j0 + 1, i0] + w11 * nodes_y[j0 + 1, i0 + 1])
        return X, Y

    domain = frame.bounds()
    return CoordinateMap(forward=forward, domain=domain, name="grid")


def numeric_jacobian(m: CoordinateMap, x: float, y: float, h: float = 1e-5) -> float:
    """Central-difference Jacobian determinant, O(h^2) accurate."""
    xmin, ymin, xmax, ymax = m.domain
    if not (xmin + h <= x <= xmax - h and ymin + h <= y <= ymax - h):
        raise ValueError(f"stencil around ({x}, {y}) leaves the map domain")
    Xp, Yp = m.forward(x + h, y)
    Xm, Ym = m.forward(x - h, y)
    dXdx = (Xp - Xm) / (2 * h)
    dYdx = (Yp - Ym) / (2 * h)
    Xp, Yp = m.forward(x, y + h)
    Xm, Ym = m.forward(x, y - h)
    dXdy = (Xp - Xm) / (2 * h)
    dYdy = (Yp - Ym) / (2 * h)
    return float(dXdx * dYdy - dXdy * dYdx)


def numeric_jacobian_gradient(m: CoordinateMap, x: float, y: float,
                              h: float = 1e-5) -> tuple[float, float]:
    """Central differences of the Jacobian determinant."""
    if m.jacobian is not None:
        J = lambda px, py: float(m.jacobian(px, py))
    else:
        J = lambda px, py: numeric_jacobian(m, px, py, h)
    return ((J(x + h, y) - J(x - h, y)) / (2 * h),
            (J(x, y + h) - J(x, y - h)) / (2 * h))


# --- map spec grammar: name(k=v,...) -----------------------------------------

_BUILTINS = {
    "identity": map_identity,
    "wavy": map_wavy,
    "perspective": map_perspective,
    "sin": map_sin,
    "arcsin": map_arcsin,
}

_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\((.*)\))?\s*$")


def parse_map_spec(spec: str, grid_reader=None) -> CoordinateMap:
    """Parse a map spec like ``wavy()``, ``perspective(a=0.25,b=-0.1)`` or
    ``grid(x=nodes_x.awf,y=nodes_y.awf)``."""
    match = _SPEC_RE.match(spec)
    if not match:
        raise MapSpecError(f"cannot parse map spec {spec!r}")
    name, argstr = match.group(1), match.group(2) or ""
    kwargs = {}
    for item in filter(None, (s.strip() for s in argstr.split(","))):
        if "=" not in item:
            raise MapSpecError(f"map argument {item!r} is not of the form k=v")
        key, value = (s.strip() for s in item.split("=", 1))
        kwargs[key] = value

    if name == "grid":
        if grid_reader is None:
            from .formats import read_awf
            grid_reader = read_awf
        if set(kwargs) != {"x", "y"}:
            raise MapSpecError("grid map needs exactly x=<file> and y=<file>")
        gx = grid_reader(kwargs["x"])
        gy = grid_reader(kwargs["y"])
        if gx.frame.shape != gy.frame.shape:
            raise MapSpecError("grid node rasters disagree in size")
        ny1, nx1 = gx.values.shape
        frame = GridFrame.unit(nx1 - 1, ny1 - 1)
        return map_from_grid(gx.values, gy.values, frame)

    if name not in _BUILTINS:
        raise MapSpecError(f"unknown map {name!r}; "
                           f"choose from {sorted(_BUILTINS)} or grid(...)")
    try:
        numeric = {k: float(v) for k, v in kwargs.items()}
    except ValueError as exc:
        raise MapSpecError(f"non-numeric map argument in {spec!r}") from exc
    try:
        return _BUILTINS[name](**numeric)
    except TypeError as exc:
        raise MapSpecError(f"bad arguments for map {name!r}: {exc}") from exc
