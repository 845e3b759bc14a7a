"""Numpy implementation of the Monte Carlo kernels (fallback backend).

Per-shot draw layout, shared with the compiled backend:
    draw 0          target preparation flip
    draw 1          target readout flip
    draw 2 + 2j     ancilla j preparation flip
    draw 3 + 2j     ancilla j readout flip
"""
import numpy as np

from ._rng import GOLDEN, GOLDEN2, GOLDEN3, INV_2_53, MASK64

_G = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))


def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _keys(key, indices):
    return _mix64(np.uint64(key) + (indices + np.uint64(1)) * _G)


def _uniform(keys, draw):
    bits = _mix64(keys + np.uint64(((draw + 1) * GOLDEN2) & MASK64))
    return (bits >> _S11).astype(np.float64) * INV_2_53


def uniforms(key, start, stop, draw):
    """Uniforms for shots ``start..stop-1`` at one draw position."""
    idx = np.arange(start, stop, dtype=np.uint64)
    return _uniform(_keys(key, idx), draw)


def _accept(keys, target_sp, anc_sp, anc_m):
    t = _uniform(keys, 0) < target_sp
    ok = np.ones(keys.shape, dtype=bool)
    for j in range(len(anc_sp)):
        a = (_uniform(keys, 2 + 2 * j) < anc_sp[j]) ^ t
        read = a ^ (_uniform(keys, 3 + 2 * j) < anc_m[j])
        ok &= ~read
    return t, ok


def mbac_counts(key, start, stop, target_sp, target_m, anc_sp, anc_m):
    """Shot counts for MBAC with post-selection on all-zero ancilla readouts.

    Returns:
        ``(n_accepted, n_accepted_target1, n_accepted_read1, n_rejected_target1)``
        where ``read1`` is the noisy readout of the target itself.
    """
    if stop <= start:
        return 0, 0, 0, 0
    keys = _keys(key, np.arange(start, stop, dtype=np.uint64))
    t, ok = _accept(keys, target_sp, anc_sp, anc_m)
    read = t ^ (_uniform(keys, 1) < target_m)
    return (
        int(np.count_nonzero(ok)),
        int(np.count_nonzero(ok & t)),
        int(np.count_nonzero(ok & read)),
        int(np.count_nonzero(~ok & t)),
    )


def runs_to_success(key, start, stop, target_sp, anc_sp, anc_m, max_runs):
    """Sum and sum of squares of attempts-until-acceptance for trials ``start..stop-1``.

    Returns ``(sum_runs, sum_runs_sq, max_seen)``; ``max_seen == -1`` flags that
    some trial exceeded ``max_runs``.
    """
    if stop <= start:
        return 0, 0, 0
    trial_keys = _keys(key, np.arange(start, stop, dtype=np.uint64))
    runs = np.zeros(stop - start, dtype=np.int64)
    active = np.arange(stop - start)
    attempt = 0
    while active.size:
        attempt += 1
        if attempt > max_runs:
            return 0, 0, -1
        keys = _mix64(trial_keys[active] + np.uint64((attempt * GOLDEN3) & MASK64))
        _, ok = _accept(keys, target_sp, anc_sp, anc_m)
        runs[active[ok]] = attempt
        active = active[~ok]
    total = int(runs.sum())
    total_sq = int((runs * runs).sum())
    return total, total_sq, int(runs.max())
