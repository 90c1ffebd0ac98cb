"""Exception types shared across the package."""


class GchError(Exception):
    """Base class for all errors raised by gchlab."""


class ConfigError(GchError, ValueError):
    """Invalid simulation or CLI configuration."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class NonFinite(GchError, FloatingPointError):
    """A Runge-Kutta stage produced NaN or inf."""


class BlowUpSuspected(GchError):
    """Integration stopped because the solution appears to break down.

    Carries the last valid state, its time, the reason (``"dt_collapse"``
    or ``"non_finite"``) and the partial trajectory recorded so far.
    """

    def __init__(self, message, *, state=None, t=None, reason=None, trajectory=None):
        super().__init__(message)
        self.state = state
        self.t = t
        self.reason = reason
        self.trajectory = trajectory


class IterateDiverged(GchError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class DegenerateParams(GchError, ValueError):
    """k1 = k2 = 0: the coefficient equation has no peakon family."""


class ComplexPeakonUnsupported(GchError, ValueError):
    """A real-analysis routine was handed a complex-coefficient peakon."""


class BlockOutOfRange(GchError, IndexError):
    """Dyadic block index above what the grid resolves."""
