"""Closed-form error evolution for BCS and MBAC cooling, and run-count bounds.

All errors are probabilities of finding a qubit in |1>.  Formulas assume the
cooling regime ``0 <= delta < 1/2`` and reject inputs outside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, UnreachableBranchError
from .noise import compose_spam


@dataclass(frozen=True)
class NoisyStepResult:
    delta_out: float
    success_prob: float

    def __post_init__(self):
        for name in ("delta_out", "success_prob"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name}={v} outside [0, 1]")


@dataclass(frozen=True)
class TrialBound:
    """Upper bound on the expected number of MBAC-k runs to reach a cooling ratio.

    Attributes:
        ancillas_needed: integer ancilla count guaranteeing the ratio.
        exponent: ``ln(A) / ln(B)``, the power of the ratio.  It lies in
            [0, 1) exactly when ``A > B``; very noisy ancillas push it above 1.
        n_upper: ``r ** exponent``; ``math.inf`` if that overflows.
        r: the requested cooling ratio.
    """

    ancillas_needed: int
    exponent: float
    n_upper: float
    r: float


def _cooling_domain(**kwargs):
    for name, v in kwargs.items():
        if not (0.0 <= v < 0.5):
            raise DomainError(f"{name}={v} outside [0, 1/2)")


def bcs_step(delta_1: float, delta_t: float, delta_2: float) -> float:
    """Target error after one round of the 3-qubit basic compression subroutine."""
    _cooling_domain(delta_1=delta_1, delta_t=delta_t, delta_2=delta_2)
    return (
        delta_1 * delta_t
        + delta_2 * delta_t
        + delta_1 * delta_2
        - 2.0 * delta_1 * delta_t * delta_2
    )


def bcs_iterate(delta_1: float, delta_2: float, delta_t0: float, rounds: int) -> float:
    """Repeat BCS with refreshed ancillas ``rounds`` times."""
    if rounds < 0:
        raise DomainError(f"rounds must be nonnegative, got {rounds}")
    _cooling_domain(delta_1=delta_1, delta_2=delta_2, delta_t0=delta_t0)
    d = delta_t0
    for _ in range(rounds):
        d = bcs_step(delta_1, d, delta_2)
    return d


def bcs_fixed_point(delta_1: float, delta_2: float) -> float:
    """Steady-state target error of infinitely repeated BCS."""
    _cooling_domain(delta_1=delta_1, delta_2=delta_2)
    return delta_1 * delta_2 / (1.0 - delta_1 - delta_2 + 2.0 * delta_1 * delta_2)


def mbac2_step(delta_1: float, delta_t: float) -> float:
    """Target error after CNOT onto one ancilla and post-selecting its ideal readout on 0."""
    _cooling_domain(delta_1=delta_1, delta_t=delta_t)
    return delta_1 * delta_t / (1.0 - delta_1 - delta_t + 2.0 * delta_1 * delta_t)


def mbac2_failure(delta_1: float, delta_t: float) -> NoisyStepResult:
    """Outcome-1 branch of MBAC-2 with ideal readout.

    ``success_prob`` carries the probability of the failure branch itself.

    Raises:
        UnreachableBranchError: if both qubits are pure, so outcome 1 never occurs.
    """
    _cooling_domain(delta_1=delta_1, delta_t=delta_t)
    p_fail = delta_1 + delta_t - 2.0 * delta_1 * delta_t
    if p_fail == 0.0:
        raise UnreachableBranchError("outcome 1 has zero probability for pure qubits")
    return NoisyStepResult(delta_out=delta_t * (1.0 - delta_1) / p_fail, success_prob=p_fail)


def mbac_k_closed(delta: float, k: int) -> float:
    """Target error after MBAC-k with k-1 ideal ancillas all at the target's error."""
    _cooling_domain(delta=delta)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if delta == 0.0:
        return 0.0
    # ratio form avoids underflow of both powers at large k
    q = (delta / (1.0 - delta)) ** k
    return q / (1.0 + q)


def mbac2_noisy_step(delta_sp_t: float, delta_sp_1: float, delta_m_1: float) -> float:
    """Target preparation error after one MBAC round with a noisy ancilla readout."""
    _cooling_domain(delta_sp_t=delta_sp_t, delta_sp_1=delta_sp_1, delta_m_1=delta_m_1)
    spam_1 = compose_spam(delta_sp_1, delta_m_1)
    denom = 1.0 + (1.0 - 2.0 * delta_sp_1) * (1.0 - 2.0 * delta_sp_t) * (1.0 - 2.0 * delta_m_1)
    return delta_sp_t * 2.0 * spam_1 / denom


def improvement_ratio(delta_sp_t: float, delta_sp_1: float, delta_m_1: float) -> float:
    """``delta_sp_t`` divided by its value after one noisy MBAC round.

    Returns ``math.inf`` when the ancilla is noiseless.
    """
    _cooling_domain(delta_sp_t=delta_sp_t, delta_sp_1=delta_sp_1, delta_m_1=delta_m_1)
    spam_1 = compose_spam(delta_sp_1, delta_m_1)
    if spam_1 == 0.0:
        return math.inf
    num = 1.0 + (1.0 - 2.0 * delta_sp_1) * (1.0 - 2.0 * delta_sp_t) * (1.0 - 2.0 * delta_m_1)
    return num / (2.0 * spam_1)


def improvement_lower_bound(delta_spam_1: float) -> float:
    if delta_spam_1 == 0.0:
        return math.inf
    if not (0.0 < delta_spam_1 <= 0.5):
        raise DomainError(f"delta_spam_1={delta_spam_1} outside (0, 1/2]")
    return 1.0 / (2.0 * delta_spam_1)


def mbac_k_noisy_bound(delta_sp_t: float, delta_spam_ancillas: Sequence[float]) -> float:
    """Guaranteed upper bound on the target error after MBAC with the given ancillas."""
    _cooling_domain(delta_sp_t=delta_sp_t)
    bound = delta_sp_t
    for i, s in enumerate(delta_spam_ancillas):
        # 1/2 is allowed: the factor is then 1, a valid but vacuous bound
        if not (0.0 <= s <= 0.5):
            raise DomainError(f"delta_spam_ancillas[{i}]={s} outside [0, 1/2]")
        bound *= 2.0 * s
    return bound


def ancillas_for_ratio(r: float, delta_spam_a: float) -> int:
    """Smallest ancilla count whose guaranteed cooling ratio reaches ``r``.

    Rounds up: an ancilla count at the real-valued solution or above is
    what guarantees ``(2 delta_spam_a) ** -(k-1) >= r``.
    """
    if not r >= 1.0:
        raise DomainError(f"cooling ratio must be >= 1, got {r}")
    if not (0.0 < delta_spam_a < 0.5):
        raise DomainError(f"delta_spam_a={delta_spam_a} outside (0, 1/2)")
    if r == 1.0:
        return 0
    x = math.log(r) / -math.log(2.0 * delta_spam_a)
    # slack absorbs rounding when x is an integer in exact arithmetic
    return max(math.ceil(x - 1e-12), 0)


def step_success_prob(delta_sp_t_i: float, delta_sp_a: float, delta_m_a: float) -> float:
    """Probability that the ancilla is in |0> after the CNOT and reads 0 correctly.

    This is the run-count bound's per-step success probability.  With a
    noisy readout it omits ancillas in |1> misread as 0, so it is a lower
    bound on :func:`step_acceptance_prob`, with equality when
    ``delta_m_a == 0``.
    """
    _cooling_domain(delta_sp_t_i=delta_sp_t_i, delta_sp_a=delta_sp_a, delta_m_a=delta_m_a)
    return (1.0 - delta_sp_t_i - delta_sp_a + 2.0 * delta_sp_t_i * delta_sp_a) * (1.0 - delta_m_a)


def step_acceptance_prob(delta_sp_t_i: float, delta_sp_a: float, delta_m_a: float) -> float:
    """Exact probability that the ancilla reads 0 in one MBAC step.

    Equals ``(1 + (1-2dt)(1-2da)(1-2dm)) / 2``, the normalization of the
    post-selected state in :func:`mbac2_noisy_step`.
    """
    _cooling_domain(delta_sp_t_i=delta_sp_t_i, delta_sp_a=delta_sp_a, delta_m_a=delta_m_a)
    return 0.5 * (1.0 + (1.0 - 2.0 * delta_sp_t_i) * (1.0 - 2.0 * delta_sp_a) * (1.0 - 2.0 * delta_m_a))


def n_upper(r: float, delta_sp_t1: float, delta_sp_a: float, delta_m_a: float) -> TrialBound:
    """Bound on the expected number of MBAC-k runs before one succeeds.

    The ancilla count is kept continuous inside the bound, which makes it a
    pure power law ``r ** (ln A / ln B)`` with ``A`` the first-step success
    probability and ``B = 2 delta_spam_a``.
    """
    if not r >= 1.0:
        raise DomainError(f"cooling ratio must be >= 1, got {r}")
    a = step_success_prob(delta_sp_t1, delta_sp_a, delta_m_a)
    b = 2.0 * compose_spam(delta_sp_a, delta_m_a)
    if b == 0.0:
        raise DomainError("noiseless ancillas: delta_spam_a must be > 0")
    if b >= 1.0:
        raise DomainError(f"2*delta_spam_a={b} >= 1: no cooling guarantee")
    exponent = math.log(a) / math.log(b)
    # exponent is exactly 0.0 for a == 1; avoid -0.0
    exponent = exponent + 0.0
    try:
        bound = math.exp(exponent * math.log(r))
    except OverflowError:
        bound = math.inf
    return TrialBound(
        ancillas_needed=ancillas_for_ratio(r, b / 2.0),
        exponent=exponent,
        n_upper=bound,
        r=r,
    )
