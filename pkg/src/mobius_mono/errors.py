"""Exception types shared across the package."""


class MobiusMonoError(Exception):
    """Base class for all errors raised by this package."""


class RankDeficient(MobiusMonoError):
    """Columns supplied for a tangent frame are (numerically) dependent."""


class Degenerate(MobiusMonoError):
    """A geometric fit is singular (e.g. sphere fit to coplanar points)."""


class PoleEncountered(MobiusMonoError):
    """A point hit the pole of a reflection mid-word.

    Attributes
    ----------
    word_index : index of the offending reflection in the word.
    """

    def __init__(self, message, word_index=None):
        super().__init__(message)
        self.word_index = word_index


class FixesInfinity(MobiusMonoError):
    """The map fixes infinity (a Euclidean similarity); no isometric sphere."""


class OriginIsPole(MobiusMonoError):
    """The pole of the map is the origin (excluded hypothesis b != 0)."""


class ValidationFailed(MobiusMonoError):
    """A numerically validated identity failed beyond tolerance."""


class InvalidPrescribedPoint(MobiusMonoError):
    """Prescribed point outside the admissible range (|a| >= 1, or a = 0)."""


class InvalidParameter(MobiusMonoError):
    """Invalid parameter for a catalog surface constructor."""


class StepTooLarge(MobiusMonoError):
    """Finite-difference extrapolation disagreement exceeded its threshold."""


class NonFiniteIntegrand(MobiusMonoError):
    """The integrand evaluated to a non-finite value.

    Attributes
    ----------
    param : the offending parameter point, when known.
    """

    def __init__(self, message, param=None):
        super().__init__(message)
        self.param = param


class NonRegularLevel(MobiusMonoError):
    """The requested level is not a regular value of f on the surface."""


class OutsideHalfSpace(MobiusMonoError):
    """Point lies outside the half-space on which the weight f is defined."""


class OutsideDomain(MobiusMonoError):
    """Point lies outside the domain of the weight (|phi^-1(x)| >= |b|)."""


class PointNotOnSurface(MobiusMonoError):
    """The prescribed point is not (numerically) on the surface."""


class ConfigError(MobiusMonoError):
    """Invalid or unparseable configuration file."""


class TolNotMetWarning(UserWarning):
    """Quadrature hit its depth limit with error estimate above tolerance."""
