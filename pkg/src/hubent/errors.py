"""Exception hierarchy shared by all hubent modules.

The CLI maps these onto process exit codes: invalid input -> 2,
numerical failure -> 3, capacity exceeded -> 4.
"""


class HubentError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(HubentError):
    """A chain, potential or run specification violates its invariants."""


class UnsupportedRegimeError(InvalidSpecError):
    """Parameters fall in a regime the functional does not support (e.g. 0 < U < 0.05)."""


class InvalidOrderError(InvalidSpecError):
    """A Taylor expansion order outside the supported range was requested."""


class ProbabilityDomainError(HubentError):
    """Occupation probabilities are inconsistent beyond the clamping tolerance."""


class NumericalFailureError(HubentError):
    """A quadrature, root solve or eigensolve failed to reach its target accuracy."""


class ConvergenceError(NumericalFailureError):
    """Self-consistency iteration exhausted max_iter.

    Carries the residual history so failed runs can be diagnosed.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history) if residual_history is not None else []


class OrderNotFoundError(NumericalFailureError):
    """No expansion order within the cap satisfied the monotonicity condition.

    ``best_order`` is the order that came closest (fewest violations).
    """

    def __init__(self, message, best_order=None):
        super().__init__(message)
        self.best_order = best_order


class CapacityError(HubentError):
    """A basis dimension exceeds the configured cap."""

    def __init__(self, message, dimension=None):
        super().__init__(message)
        self.dimension = dimension
