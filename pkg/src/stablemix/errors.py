"""Exception hierarchy shared across the package."""


class StableMixError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(StableMixError, ValueError):
    """A distribution or model parameter is outside its valid range."""


class DegenerateLawError(StableMixError, ValueError):
    """Operation undefined for the degenerate (alpha = 1) stable law."""


class SupportError(StableMixError, ValueError):
    """Evaluation point lies outside the distribution support."""


class DataError(StableMixError, ValueError):
    """Input data is malformed or degenerate (e.g. constant sample)."""


class IdentifiabilityError(StableMixError, ValueError):
    """Data configuration does not identify the model parameters."""


class ConvergenceError(StableMixError, RuntimeError):
    """Numerical optimization failed to converge."""


class CapacityError(StableMixError, OverflowError):
    """A recursion or quadrature exceeded its numeric capacity."""
