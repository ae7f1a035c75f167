"""Error types raised by the geometry and I/O layers."""


class IsonetsError(Exception):
    """Base class for all package errors."""


class GeometryError(IsonetsError):
    """Degenerate configuration detected by a geometric operation."""


class QuaternionZeroDivision(GeometryError, ZeroDivisionError):
    """Inverse of a quaternion whose norm is below the zero gate."""


class DegeneratePoint(GeometryError):
    """Homogeneous coordinates are (numerically) zero."""


class PointAtInfinity(GeometryError):
    """Stereographic projection requested for the chart's infinity point."""


class CoincidentPoints(GeometryError):
    """Cross ratio of a configuration with coinciding consecutive points."""


class SingularMatrix(GeometryError):
    """2x2 quaternionic matrix is not invertible."""


class DegenerateQuad(GeometryError):
    """Elementary quadrilateral with coinciding points."""


class NotFactorizable(GeometryError):
    """Real cross-ratio grid does not split as a_m / b_n."""


class NotIsothermic(GeometryError):
    """Operation requires an isothermic net."""


class NotChristoffelPair(GeometryError):
    """The two nets do not satisfy the dual relations."""


class ClosureFailure(GeometryError):
    """Discrete 1-form failed the face-closure (path independence) test."""


class SingularLambda(GeometryError):
    """Spectral parameter hits 1/a_m or 1/b_n."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateImage(GeometryError):
    """Transform image violates net regularity."""


class BadInitialPoint(GeometryError):
    """Initial point coincides with the net value at the origin."""


class DegenerateConfiguration(GeometryError):
    """Permutability construction hit a non-generic configuration."""


class DegenerateDifference(GeometryError):
    """A required difference of nets is not invertible."""


class BadBasePoint(GeometryError):
    """Base point for a horospherical net lies on the boundary sphere."""


class BoundaryHit(GeometryError):
    """Horospherical net touches the boundary sphere."""


class ZeroDenominator(GeometryError):
    """Model-coordinate formula met a vanishing denominator."""


class NetFileError(IsonetsError):
    """Base class for net-file problems."""


class ParseError(NetFileError):
    """Malformed net file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class KindMismatch(NetFileError):
    """Net file kind does not match the value arity or the expected kind."""
