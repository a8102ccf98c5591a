"""Exception types raised across the package."""


class VortexPropError(Exception):
    """Base class for all package errors."""


class ConfigError(VortexPropError, ValueError):
    pass


class ZeroFrequency(VortexPropError, ValueError):
    """Raised when a quantity needs a nonzero cyclotron frequency."""


class NonPositiveInterval(VortexPropError, ValueError):
    pass


class CausticSingular(VortexPropError, ValueError):
    """The magnetic kernel prefactor diverges (T close to a multiple of the period)."""


class TimeTooSmall(VortexPropError, ValueError):
    pass


class NonFinite(VortexPropError, ValueError):
    pass


class ZeroNorm(VortexPropError, ValueError):
    pass


class ResolutionTooCoarse(VortexPropError, ValueError):
    pass


class AmplitudeTooSmall(VortexPropError, ValueError):
    pass


class CostExceeded(VortexPropError, RuntimeError):
    pass


class AliasingDetected(VortexPropError, RuntimeError):
    pass


class StepTooLarge(VortexPropError, ValueError):
    pass


class NoNodeFound(VortexPropError, RuntimeError):
    pass


class InsufficientSamples(VortexPropError, ValueError):
    pass


class MissingFrames(VortexPropError, FileNotFoundError):
    pass


class ManifestMismatch(VortexPropError, RuntimeError):
    pass
