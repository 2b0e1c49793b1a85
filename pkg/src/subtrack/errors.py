"""Exception hierarchy shared across the package.

Every runtime failure raised by the library derives from :class:`SubtrackError`
so the CLI can map library failures to a single exit code; configuration
problems use :class:`ConfigError` and map to a different one.
"""


class SubtrackError(Exception):
    """Base class for runtime failures inside the library."""


class InvalidInputError(SubtrackError, ValueError):
    """An argument violates a documented precondition (shape, range, finiteness)."""


class DegenerateInputError(SubtrackError):
    """Input data is degenerate (e.g. a nonpositive zero-lag autocorrelation)."""


class DivergenceError(SubtrackError):
    """An adaptive recursion left its stability envelope."""


class TrackerStallError(SubtrackError):
    """A subspace tracker power estimate underflowed; the tracker cannot proceed."""


class SingularModelError(SubtrackError):
    """A transition model is not invertible where inversion is required."""


class FusionError(SubtrackError):
    """Forward/backward covariances cannot be combined (both singular)."""


class UndefinedMetricError(SubtrackError):
    """A metric is undefined for the given data (e.g. zero reference power)."""


class NumericError(SubtrackError):
    """Non-finite values reached a numerical core routine."""


class ConfigError(Exception):
    """Invalid experiment configuration (unknown key, bad value, missing file)."""
