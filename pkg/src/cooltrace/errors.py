"""Exception hierarchy shared by all cooltrace modules."""


class CooltraceError(Exception):
    """Base class for all errors raised by cooltrace."""


class DomainError(CooltraceError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularityError(DomainError):
    """A formula has a removable or genuine singularity at the given input."""


class InconsistentEstimateError(CooltraceError):
    """Estimated quantities cannot be reconciled with the SPAM model."""


class UnreachableBranchError(CooltraceError):
    """A post-selected branch has zero probability, so its state is undefined."""


class CapacityError(CooltraceError):
    """A register is larger (or smaller) than the simulator supports."""


class EstimationFailureError(CooltraceError):
    """A Monte Carlo estimate is undefined, e.g. because no shot was accepted.

    Attributes:
        n_samples: number of shots drawn.
        n_accepted: number of shots that passed post-selection.
    """

    def __init__(self, message, n_samples=0, n_accepted=0):
        super().__init__(message)
        self.n_samples = n_samples
        self.n_accepted = n_accepted


class DivergenceError(CooltraceError):
    """An expected run count is infinite because success is impossible."""
