"""Measurement-based algorithmic cooling and SPAM-error separation.

Submodules:
    noise       SPAM parameter types and composition algebra
    analytic    closed-form error evolution and run-count bounds
    simulator   exact diagonal-state circuit simulation
    montecarlo  seeded shot-level sampling (compiled or numpy kernels)
    spam_char   twirling reduction and the characterization workflow
    cli         the ``cooltrace`` command
"""
__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CapacityError,
    CooltraceError,
    DivergenceError,
    DomainError,
    EstimationFailureError,
    InconsistentEstimateError,
    SingularityError,
    UnreachableBranchError,
)
from .noise import (  # noqa: F401
    BlochState,
    Povm1Q,
    SpamParams,
    ThermalScale,
    compose_spam,
    delta_from_temperature,
    effective_temperature,
    invert_spam_for_sp,
    spam_error,
)
