"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not agree with the waveform grid."""


class UndefinedMetricError(ValueError):
    """A metric was requested for an all-zero signal."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""


class NumericalError(ArithmeticError):
    """A solver or estimator produced non-finite output."""
