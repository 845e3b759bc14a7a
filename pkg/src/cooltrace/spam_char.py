"""Separate estimation of state-preparation and measurement errors.

Arbitrary single-qubit SPAM operators are first averaged onto the diagonal
family by inserting Pauli gates (twirling) and relabelling outcomes.  The
preparation error is then removed with MBAC so the readout error can be
measured directly, and the preparation error follows from the total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from . import analytic
from ._rng import STREAM_CALIBRATION, STREAM_DIRECT, STREAM_MBAC
from .errors import DomainError, EstimationFailureError, InconsistentEstimateError
from .montecarlo import binomial_std_err, mc_mbac_counts
from .noise import BlochState, Povm1Q, SpamParams, compose_spam, invert_spam_for_sp

DEFAULT_MAX_BIAS = 5e-4
CLIP_SIGMAS = 4.0


def z_twirl_state(rho: BlochState) -> BlochState:
    """Average of ``rho`` and ``Z rho Z``: keeps only the z component."""
    return BlochState(0.0, 0.0, rho.sz)


def z_twirl_measurement(m0: Povm1Q) -> Povm1Q:
    return Povm1Q(m0.mi, 0.0, 0.0, m0.mz)


def x_relabel_measurement(m0: Povm1Q) -> Povm1Q:
    """Average ``M_0`` with ``X (I - M_0) X``, the effect of an X gate plus relabelling.

    ``I - M_0`` has coefficients ``(2 - mi, -mx, -my, -mz)``; conjugating by X
    flips the y and z signs, so the average is ``(1, 0, my, mz)``.
    """
    return Povm1Q(1.0, 0.0, m0.my, m0.mz)


class ReducedSpam(NamedTuple):
    delta_sp: float
    delta_m: float

    @property
    def protocol_valid(self) -> bool:
        return self.delta_sp < 0.5 and self.delta_m < 0.5

    def as_params(self) -> SpamParams:
        return SpamParams(self.delta_sp, self.delta_m)


def reduce_to_diagonal(rho: BlochState, m0: Povm1Q) -> ReducedSpam:
    """Diagonal (delta_sp, delta_m) equivalent to a general SPAM pair.

    Values at or above 1/2 are returned as is; check ``protocol_valid``.
    """
    state = z_twirl_state(rho)
    meas = x_relabel_measurement(z_twirl_measurement(m0))
    return ReducedSpam((1.0 - state.sz) / 2.0, (1.0 - meas.mz) / 2.0)


@dataclass
class SimulatedDevice:
    """Ground-truth SPAM operators of a target qubit and a pool of ancillas.

    ``shots_used`` accumulates every shot spent by :func:`characterize`;
    a ``shot_budget`` of None means unlimited.
    """

    target: tuple[BlochState, Povm1Q]
    ancillas: Sequence[tuple[BlochState, Povm1Q]]
    shot_budget: int | None = None
    shots_used: int = field(default=0, compare=False)

    @classmethod
    def diagonal(
        cls,
        sp: float,
        m: float,
        ancilla_sp: float | Sequence[float],
        ancilla_m: float | Sequence[float],
        n_ancillas: int | None = None,
        shot_budget: int | None = None,
    ) -> "SimulatedDevice":
        """Device with diagonal operators; scalar ancilla errors are repeated ``n_ancillas`` times."""
        if isinstance(ancilla_sp, (int, float)):
            ancilla_sp = [ancilla_sp] * (n_ancillas or 1)
        if isinstance(ancilla_m, (int, float)):
            ancilla_m = [ancilla_m] * len(ancilla_sp)
        if len(ancilla_sp) != len(ancilla_m):
            raise DomainError("ancilla_sp and ancilla_m differ in length")
        return cls(
            (BlochState.diagonal(sp), Povm1Q.diagonal(m)),
            tuple((BlochState.diagonal(a), Povm1Q.diagonal(b)) for a, b in zip(ancilla_sp, ancilla_m)),
            shot_budget,
        )

    def _spend(self, shots):
        if self.shot_budget is not None and self.shots_used + shots > self.shot_budget:
            raise EstimationFailureError(
                f"shot budget {self.shot_budget} exhausted", n_samples=self.shots_used
            )
        self.shots_used += shots


@dataclass(frozen=True)
class SpamEstimate:
    """Separated SPAM error estimates for the target qubit.

    ``residual_bias_bound`` bounds the upward bias of ``delta_m_hat`` left by
    imperfect cooling; it is reported, never subtracted.  ``clipped`` marks a
    negative plug-in ``delta_sp_hat`` (within statistical noise) set to 0.
    """

    delta_spam_hat: float
    delta_m_hat: float
    delta_sp_hat: float
    std_err_spam: float
    std_err_m: float
    std_err_sp: float
    residual_bias_bound: float
    k: int
    ancilla_spam_hat: tuple[float, ...]
    n_accepted: int
    shots_mbac: int
    clipped: bool = False

    @property
    def closure_gap(self) -> float:
        return abs(compose_spam(self.delta_sp_hat, self.delta_m_hat) - self.delta_spam_hat)

    @property
    def combined_std_err(self) -> float:
        return math.hypot(self.std_err_spam, self.std_err_m)

    def closure_ok(self, n_sigma: float = 4.0) -> bool:
        return self.closure_gap <= n_sigma * self.combined_std_err + 1e-12


def _rate(count, n):
    return count / n, binomial_std_err(count, n)


def characterize(
    device: SimulatedDevice,
    k: int | None = None,
    shots_direct: int = 10**6,
    shots_mbac: int = 10**6,
    seed: int = 0,
    max_bias: float = DEFAULT_MAX_BIAS,
    threads: int | None = None,
) -> SpamEstimate:
    """Estimate the target's SPAM, readout and preparation errors by simulation.

    Experiment 1 measures the prepared target directly.  Ancillas are
    calibrated the same way.  Experiment 2 runs MBAC-k and reads out the
    target on accepted shots.  With ``k=None`` ancillas are taken from the
    pool until the calibrated bias bound ``delta_spam_t * prod(2 delta_spam_i)``
    drops to ``max_bias``.

    Raises:
        EstimationFailureError: no MBAC shot was accepted, the ancilla pool
            is too small, or the shot budget is exhausted.
        InconsistentEstimateError: the estimates imply a preparation error
            significantly outside [0, 1].
    """
    if k is not None and k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    target = reduce_to_diagonal(*device.target)
    pool = [reduce_to_diagonal(*a) for a in device.ancillas]

    device._spend(shots_direct)
    direct = mc_mbac_counts(target.as_params(), [], shots_direct, seed, STREAM_DIRECT, threads)
    spam_t, se_spam = _rate(direct.accepted_read1, shots_direct)

    used, spam_hats = [], []
    n_wanted = None if k is None else k - 1
    while n_wanted is None or len(used) < n_wanted:
        if n_wanted is None and used and spam_t * math.prod(2.0 * s for s in spam_hats) <= max_bias:
            break
        i = len(used)
        if i >= len(pool):
            raise EstimationFailureError(
                f"ancilla pool of {len(pool)} too small for the requested cooling"
            )
        if not pool[i].protocol_valid:
            raise DomainError(f"ancilla {i} has SPAM parameters {pool[i]} outside [0, 1/2)")
        device._spend(shots_direct)
        cal = mc_mbac_counts(
            pool[i].as_params(), [], shots_direct, seed, (STREAM_CALIBRATION, i), threads
        )
        spam_i = cal.accepted_read1 / shots_direct
        if spam_i >= 0.5:
            raise EstimationFailureError(f"ancilla {i} has measured SPAM error {spam_i} >= 1/2")
        used.append(pool[i])
        spam_hats.append(spam_i)

    device._spend(shots_mbac)
    exp2 = mc_mbac_counts(
        target.as_params(), [a.as_params() for a in used], shots_mbac, seed, STREAM_MBAC, threads
    )
    if exp2.accepted == 0:
        raise EstimationFailureError(
            f"no accepted MBAC shots out of {shots_mbac}",
            n_samples=shots_mbac,
            n_accepted=0,
        )
    m_hat, se_m = _rate(exp2.accepted_read1, exp2.accepted)
    if m_hat >= 0.5:
        raise InconsistentEstimateError(f"estimated readout error {m_hat} >= 1/2")

    denom = 1.0 - 2.0 * m_hat
    se_sp = math.hypot(se_spam / denom, (2.0 * spam_t - 1.0) * se_m / denom**2)
    clipped = False
    try:
        sp_hat = invert_spam_for_sp(spam_t, m_hat)
    except InconsistentEstimateError:
        sp_raw = (spam_t - m_hat) / denom
        if sp_raw < -CLIP_SIGMAS * se_sp or sp_raw > 1.0:
            raise
        sp_hat, clipped = 0.0, True
    if sp_hat >= 0.5:
        raise InconsistentEstimateError(f"estimated preparation error {sp_hat} >= 1/2")

    return SpamEstimate(
        delta_spam_hat=spam_t,
        delta_m_hat=m_hat,
        delta_sp_hat=sp_hat,
        std_err_spam=se_spam,
        std_err_m=se_m,
        std_err_sp=se_sp,
        residual_bias_bound=analytic.mbac_k_noisy_bound(sp_hat, spam_hats),
        k=len(used) + 1,
        ancilla_spam_hat=tuple(spam_hats),
        n_accepted=exp2.accepted,
        shots_mbac=shots_mbac,
        clipped=clipped,
    )
