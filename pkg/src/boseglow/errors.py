"""Exception hierarchy shared by all boseglow modules."""


class BoseglowError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(BoseglowError, ValueError):
    """A physical parameter violates its precondition.

    Carries the offending field name in ``field``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DivergentMean(BoseglowError):
    """Inclusive quantity requested at or above the critical seed multiplicity.

    The divergence of the mean multiplicity is physical (condensation into
    the zero-momentum packet state), so summation is refused rather than
    truncated.
    """


class UnderflowRegime(BoseglowError):
    """The fixed-multiplicity weight underflowed even in log space."""


class InvalidOrder(BoseglowError):
    """Operation requested at a multiplicity order it is not defined for."""


class DegenerateDenominator(BoseglowError):
    """A normalizing spectrum value underflowed at the requested momentum."""


class ZeroMeanMomentum(BoseglowError):
    """Side/out decomposition requested at K = 0, where it is undefined."""


class NumericalBreakdown(BoseglowError):
    """A recursion invariant failed, signalling a wrong composition rule."""


class SizeLimit(BoseglowError):
    """Permanent evaluation requested above the supported matrix size."""


class SeedRequired(BoseglowError):
    """Monte Carlo sampling without an explicit seed is not reproducible."""


class InsufficientSamples(BoseglowError):
    """Bootstrap error exceeds the requested statistical tolerance."""


class ConfigError(BoseglowError):
    """A run configuration failed to parse or validate."""
