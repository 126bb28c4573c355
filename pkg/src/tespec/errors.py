"""Exception hierarchy shared by all solver modules."""


class TespecError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TespecError, ValueError):
    """Arguments violate a documented precondition."""


class GridMismatchError(InvalidInputError):
    """Sampled data lives on a grid incompatible with the requested one."""


class InvalidStateError(TespecError):
    """Operation requires state that has not been computed yet."""


class IterationLimitError(TespecError):
    """Fixed-point iteration hit its iteration cap before reaching tolerance."""

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = list(history) if history is not None else []


class DivergenceError(TespecError):
    """Iterative scheme diverged; carries the residual history."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class DegenerateSpectrumError(TespecError):
    """Characteristic function vanishes identically on the probe set."""


class MissedZeroError(TespecError):
    """Argument-principle audit found a different zero count than expected."""

    def __init__(self, message, expected=None, counted=None, rectangle=None):
        super().__init__(message)
        self.expected = expected
        self.counted = counted
        self.rectangle = rectangle


class RootConvergenceError(TespecError):
    """A single zero search failed to converge; carries the index."""

    def __init__(self, message, index=None, last_value=None):
        super().__init__(message)
        self.index = index
        self.last_value = last_value


class ValidationError(TespecError):
    """Input data failed a structural check (asymptotics, realness, ...)."""


class NearPoleError(TespecError):
    """Evaluation requested too close to a zero of the characteristic function."""


class OverflowShootError(TespecError):
    """ODE integration overflowed (|Im rho| too large for the window)."""
