"""Exception hierarchy shared by every stochwaves module."""


class StochWavesError(Exception):
    """Base class for all errors raised by stochwaves."""


class ConfigurationError(StochWavesError, ValueError):
    """Invalid parameters: grid sizes, signs of dispersion terms, noise levels."""


class UsageError(StochWavesError, ValueError):
    """An operation was called with inputs of the wrong shape or model."""


class InternalError(StochWavesError, RuntimeError):
    """A numerical invariant that should hold by construction was violated."""


class SolverError(StochWavesError, RuntimeError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BlowUpError(StochWavesError, FloatingPointError):
    """A time stepper produced a non-finite or exploding state.

    ``step`` is the index of the step that failed and ``last_state`` the last
    finite state (at step ``step``), so callers can flush partial output.
    """

    def __init__(self, message, step, last_state=None, time=None):
        super().__init__(message)
        self.step = step
        self.last_state = last_state
        self.time = time
