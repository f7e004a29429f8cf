"""Exception types shared across the package."""


class HhpmeError(Exception):
    """Base class for all package-specific errors."""


class OutOfRangeError(HhpmeError):
    """A problem parameter violates its admissible range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class WrongRegimeError(HhpmeError):
    """The requested construction is not defined for these exponents."""


class RegimeMismatchError(HhpmeError):
    """A profile kind or diagnostic was requested outside its regime."""


class IndexBelowCriticalError(HhpmeError):
    """An integrability index r1 below the critical index r_c."""


class WeightNotIntegrableError(HhpmeError):
    """A radial weight exponent s <= -N, whose integral diverges at 0."""


class UnstableStepError(HhpmeError):
    """An explicit step was requested with dt above the stability bound."""


class DomainEscapeError(HhpmeError):
    """Numerical support reached the truncation radius; result invalid."""

    def __init__(self, t, r_max):
        self.t = t
        self.r_max = r_max
        super().__init__(f"support reached r_max={r_max:g} at t={t:g}; enlarge the domain")


class NoSignChangeError(HhpmeError):
    """A shooting scan found no bracket for the target behavior."""


class EmptyWindowError(HhpmeError):
    """A fit window selects no data points."""


class PreconditionViolatedError(HhpmeError):
    """A diagnostic was called on data violating its hypotheses."""


class ConditionsFailError(HhpmeError):
    """The CKN admissibility conditions reject the given parameters."""


class ConfigError(HhpmeError):
    """A run configuration is missing or malformed."""

    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"config error: {key}")


class MismatchedArtifactsError(HhpmeError):
    """Artifacts produced under different configurations were compared."""
