"""Seeded shot-level Monte Carlo for MBAC protocols.

Every state in these protocols is diagonal, so a shot is a classical bit
vector: each qubit starts flipped with its preparation error, CNOTs are
XORs and every readout is flipped with its measurement error.  The sampler
is an exact stochastic realization of the circuit, not an approximation.

Shots are split into fixed blocks and may run on several threads
(``COOLTRACE_THREADS``).  Random numbers are indexed by (seed, shot), and
counts are summed as integers, so results never depend on the split.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._rng import STREAM_BCS, STREAM_MBAC, STREAM_RUNS, derive_key
from .errors import DivergenceError, DomainError, EstimationFailureError, UnreachableBranchError
from .noise import SpamParams
from .simulator import run_mbac_k_exact

BLOCK = 1 << 16
DEFAULT_MAX_RUNS = 10**7


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_err: float
    n_samples: int
    n_accepted: int
    seed: int

    def __post_init__(self):
        if self.n_accepted > self.n_samples:
            raise DomainError("n_accepted cannot exceed n_samples")
        if self.std_err < 0:
            raise DomainError("std_err must be nonnegative")

    def within(self, value: float, n_sigma: float = 4.0) -> bool:
        """True if ``value`` lies within ``n_sigma`` standard errors of the mean."""
        return abs(self.mean - value) <= n_sigma * self.std_err


@dataclass(frozen=True)
class MbacCounts:
    """Raw shot counts of one MBAC experiment.

    ``accepted_read1`` counts accepted shots whose noisy target readout was 1;
    the other target counts refer to the target's actual bit.
    """

    shots: int
    accepted: int
    accepted_target1: int
    accepted_read1: int
    rejected_target1: int
    seed: int


def worker_count() -> int:
    env = os.environ.get("COOLTRACE_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise DomainError(f"COOLTRACE_THREADS must be >= 1, got {env!r}")
        return n
    return os.cpu_count() or 1


def _blocks(n):
    return [(s, min(s + BLOCK, n)) for s in range(0, n, BLOCK)]


def _map_blocks(fn, n, threads=None):
    blocks = _blocks(n)
    threads = threads or worker_count()
    if threads == 1 or len(blocks) == 1:
        return [fn(a, b) for a, b in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), blocks))


def _params(target, ancillas):
    target = target if isinstance(target, SpamParams) else SpamParams(float(target))
    ancillas = [a if isinstance(a, SpamParams) else SpamParams(float(a)) for a in ancillas]
    sp = np.array([a.delta_sp for a in ancillas], dtype=np.float64)
    m = np.array([a.delta_m for a in ancillas], dtype=np.float64)
    return target, ancillas, sp, m


def binomial_std_err(successes: int, n: int) -> float:
    """Plug-in binomial standard error; ``1/n`` when the count is 0 or n.

    The fallback for an all-or-nothing sample is the one-sided scale of the
    unseen outcome, so a zero count never claims zero uncertainty.
    """
    if n <= 0:
        raise EstimationFailureError("no samples", n_samples=0, n_accepted=0)
    if successes in (0, n):
        return 1.0 / n
    p = successes / n
    return math.sqrt(p * (1.0 - p) / n)


def mc_mbac_counts(
    target: SpamParams | float,
    ancillas: Sequence[SpamParams | float],
    shots: int,
    seed: int,
    stream: int | tuple[int, ...] = STREAM_MBAC,
    threads: int | None = None,
) -> MbacCounts:
    """Sample ``shots`` MBAC runs and count accepted / rejected outcomes.

    ``stream`` labels independent experiments sharing one seed.  With no
    ancillas every shot is accepted and ``accepted_read1`` counts SPAM errors
    of a direct target measurement.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    target, _, sp, m = _params(target, ancillas)
    key = derive_key(seed, *(stream if isinstance(stream, tuple) else (stream,)))

    def block(a, b):
        return kernels.mbac_counts(key, a, b, target.delta_sp, target.delta_m, sp, m)

    parts = _map_blocks(block, shots, threads)
    acc, acc_t1, acc_r1, rej_t1 = (sum(col) for col in zip(*parts))
    return MbacCounts(shots, acc, acc_t1, acc_r1, rej_t1, seed)


def mc_run_mbac_k(
    target: SpamParams | float,
    ancillas: Sequence[SpamParams | float],
    shots: int,
    seed: int,
    threads: int | None = None,
) -> McEstimate:
    """Estimate the post-selected target error of MBAC.

    ``n_accepted / n_samples`` estimates the overall success probability.

    Raises:
        EstimationFailureError: if no shot was accepted.
    """
    c = mc_mbac_counts(target, ancillas, shots, seed, threads=threads)
    if c.accepted == 0:
        raise EstimationFailureError(
            f"no accepted shots out of {shots}", n_samples=shots, n_accepted=0
        )
    return McEstimate(
        c.accepted_target1 / c.accepted,
        binomial_std_err(c.accepted_target1, c.accepted),
        shots,
        c.accepted,
        seed,
    )


def mc_failure_branch(
    target: SpamParams | float,
    ancillas: Sequence[SpamParams | float],
    shots: int,
    seed: int,
    threads: int | None = None,
) -> McEstimate:
    """Estimate the target error on rejected shots (some ancilla read 1).

    Here ``n_accepted`` counts the rejected shots the mean is taken over.
    """
    c = mc_mbac_counts(target, ancillas, shots, seed, threads=threads)
    rejected = shots - c.accepted
    if rejected == 0:
        raise EstimationFailureError(
            f"no rejected shots out of {shots}", n_samples=shots, n_accepted=0
        )
    return McEstimate(
        c.rejected_target1 / rejected,
        binomial_std_err(c.rejected_target1, rejected),
        shots,
        rejected,
        seed,
    )


def acceptance_estimate(counts: MbacCounts) -> McEstimate:
    """Fraction of accepted shots, as an estimate of the overall success probability."""
    return McEstimate(
        counts.accepted / counts.shots,
        binomial_std_err(counts.accepted, counts.shots),
        counts.shots,
        counts.accepted,
        counts.seed,
    )


def mc_runs_to_success(
    target: SpamParams | float,
    ancillas: Sequence[SpamParams | float],
    trials: int,
    seed: int,
    max_runs: int = DEFAULT_MAX_RUNS,
    threads: int | None = None,
) -> McEstimate:
    """Repeat full MBAC runs until one is accepted; average the run count over trials.

    ``n_samples`` is the total number of runs simulated and ``n_accepted``
    the number of trials (each ends in exactly one accepted run).

    Raises:
        DivergenceError: if the success probability is zero or some trial
            needs more than ``max_runs`` attempts.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    target, anc, sp, m = _params(target, ancillas)
    try:
        p = run_mbac_k_exact(target, anc).success_prob if anc else 1.0
    except UnreachableBranchError as exc:
        raise DivergenceError("success probability is zero") from exc
    except DomainError:
        # outside the cooling regime; max_runs still bounds the loop
        p = None
    if p is not None and p <= 0.0:
        raise DivergenceError("success probability is zero")
    key = derive_key(seed, STREAM_RUNS)

    def block(a, b):
        return kernels.runs_to_success(key, a, b, target.delta_sp, sp, m, max_runs)

    parts = _map_blocks(block, trials, threads)
    if any(part[2] < 0 for part in parts):
        raise DivergenceError(f"a trial needed more than {max_runs} runs")
    total = sum(part[0] for part in parts)
    total_sq = sum(part[1] for part in parts)
    mean = total / trials
    if trials > 1:
        var = max(total_sq - total * total / trials, 0.0) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    return McEstimate(mean, se, total, trials, seed)


def mc_run_bcs(d1: float, dt: float, d2: float, shots: int, seed: int) -> McEstimate:
    """Shot-level BCS: CNOT target->1, then swap target and 2 when qubit 1 is set."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    key = derive_key(seed, STREAM_BCS)
    ones = 0
    for a, b in _blocks(shots):
        t = kernels.uniforms(key, a, b, 0) < dt
        s1 = (kernels.uniforms(key, a, b, 2) < d1) ^ t
        s2 = kernels.uniforms(key, a, b, 4) < d2
        ones += int(np.count_nonzero(np.where(s1, s2, t)))
    return McEstimate(ones / shots, binomial_std_err(ones, shots), shots, shots, seed)
