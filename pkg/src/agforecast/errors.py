"""Exception types shared across the toolkit."""


class AgForecastError(Exception):
    """Base class for toolkit-specific failures."""


class ConvergenceError(AgForecastError):
    """An optimizer ran out of iterations without meeting its tolerance.

    Carries the best parameter vector and objective value reached so callers
    can decide whether the partial result is still usable.
    """

    def __init__(self, message, best_params=None, best_objective=None):
        super().__init__(message)
        self.best_params = best_params
        self.best_objective = best_objective


class ZeroVarianceError(AgForecastError):
    """Input is constant (or degenerate) where variation is required."""


class DivergenceError(AgForecastError):
    """Training produced a non-finite loss. ``epoch`` names the first bad epoch."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class SelectionError(AgForecastError):
    """Every candidate in a model-order search failed to fit.

    ``failures`` holds ``(candidate, exception)`` pairs in grid order.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
