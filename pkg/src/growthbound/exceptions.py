"""Exception types raised by the growth/spectral bound engines."""


class GrowthBoundError(Exception):
    """Base class for all errors raised by this package."""


class LevelExceedsTruncation(GrowthBoundError, ValueError):
    """A seminorm level reads coordinates beyond the stored prefix."""


class UnsupportedFamily(GrowthBoundError, TypeError):
    """The seminorm family has no closed-form operator norm."""


class HorizonTooShort(GrowthBoundError):
    """The time grid ends before the orbit has started to decay."""


class OrbitDivergent(GrowthBoundError):
    """A power orbit is still growing at the power cap."""


class LevelCapTooSmall(GrowthBoundError):
    """No Gamma-norm stabilised in the level cap at any grid time."""


class SlopeFitUnstable(GrowthBoundError):
    """The asymptotic slope fit did not settle below its thresholds."""


class Singular(GrowthBoundError, ZeroDivisionError):
    """lambda - A is not invertible on some truncation."""

    def __init__(self, lam, level, message=None):
        self.lam = lam
        self.level = level
        super().__init__(message or f"lambda={lam!r} is singular at truncation level {level}")


class NonCausalGenerator(GrowthBoundError, ValueError):
    """Semigroup evaluation requires a lower-triangular generator."""


class HypothesisViolated(GrowthBoundError):
    """The generator is not Allan-bounded, so the s(A)=log r(T(1)) check does not apply."""


class ConfigError(GrowthBoundError, ValueError):
    """Malformed run configuration or override."""
