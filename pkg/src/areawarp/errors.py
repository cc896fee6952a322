"""Exception types shared across the package."""


class AreaWarpError(Exception):
    """Base class for all package-specific errors."""


class DegenerateTriangleError(AreaWarpError, ValueError):
    """A reference triangle has (near) zero area where a finite one is required."""


class NoCrossingError(AreaWarpError, ValueError):
    """Segment endpoints do not straddle the requested triangle side."""


class SingularMapError(AreaWarpError, ArithmeticError):
    """Coordinate map (or its Jacobian) evaluated at a singular point."""


class FrameMismatchError(AreaWarpError, ValueError):
    """Image frame does not match the operator's expected frame."""


class FormatError(AreaWarpError, IOError):
    """Malformed or truncated image/matrix file."""


class MapSpecError(AreaWarpError, ValueError):
    """Unparseable coordinate-map specification string."""
