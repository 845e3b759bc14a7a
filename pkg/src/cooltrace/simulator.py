"""Exact simulation of diagonal n-qubit states under classical reversible gates.

A diagonal density matrix is a probability vector over basis states.  CNOT
and CSWAP permute it, a diagonal POVM reweights it, and post-selection
renormalizes.  Qubit 0 is the most significant bit of the basis index.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapacityError, DomainError, UnreachableBranchError
from .noise import SpamParams

MAX_QUBITS = 24
UNREACHABLE = 1e-300


@dataclass(frozen=True, eq=False)
class DiagonalState:
    n_qubits: int
    probs: np.ndarray

    def __post_init__(self):
        if not (1 <= self.n_qubits <= MAX_QUBITS):
            raise CapacityError(f"register of {self.n_qubits} qubits outside [1, {MAX_QUBITS}]")
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (1 << self.n_qubits,):
            raise DomainError(f"expected {1 << self.n_qubits} probabilities, got shape {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise DomainError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __eq__(self, other):
        if not isinstance(other, DiagonalState):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.probs, other.probs)

    def bits(self, q: int) -> np.ndarray:
        """Value of qubit ``q`` on every basis index."""
        _check_index(self, q)
        idx = np.arange(1 << self.n_qubits)
        return (idx >> (self.n_qubits - 1 - q)) & 1


@dataclass(frozen=True)
class MeasSpec:
    """Diagonal readout ``M_0 = diag(1 - delta_m, delta_m)``."""

    delta_m: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.delta_m < 1.0):
            raise DomainError(f"delta_m={self.delta_m} outside [0, 1)")


@dataclass(frozen=True)
class StepRecord:
    step: int
    acceptance_prob: float
    delta_target: float


@dataclass(frozen=True)
class ProtocolResult:
    delta_out: float
    success_prob: float
    per_step: tuple[StepRecord, ...] = ()


def _check_index(state, *qubits):
    for q in qubits:
        if not (0 <= q < state.n_qubits):
            raise DomainError(f"qubit index {q} out of range for {state.n_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise DomainError(f"qubit indices must be distinct, got {qubits}")


def _as_params(p):
    return p if isinstance(p, SpamParams) else SpamParams(float(p))


def product_state(params: Sequence[SpamParams | float]) -> DiagonalState:
    """Tensor product of single-qubit states ``(1 - delta_sp, delta_sp)``."""
    params = [_as_params(p) for p in params]
    if not params:
        raise CapacityError("product_state needs at least one qubit")
    if len(params) > MAX_QUBITS:
        raise CapacityError(f"{len(params)} qubits exceeds the cap of {MAX_QUBITS}")
    probs = np.ones(1)
    for p in params:
        probs = np.kron(probs, [1.0 - p.delta_sp, p.delta_sp])
    return DiagonalState(len(params), probs)


def _permute(state, new_index):
    out = np.empty_like(state.probs)
    out[new_index] = state.probs
    return DiagonalState(state.n_qubits, out)


def apply_cnot(state: DiagonalState, control: int, target: int) -> DiagonalState:
    _check_index(state, control, target)
    idx = np.arange(1 << state.n_qubits)
    return _permute(state, idx ^ (state.bits(control) << (state.n_qubits - 1 - target)))


def apply_cswap(state: DiagonalState, control: int, t1: int, t2: int) -> DiagonalState:
    """Swap qubits ``t1`` and ``t2`` on basis states where ``control`` is 1."""
    _check_index(state, control, t1, t2)
    n = state.n_qubits
    idx = np.arange(1 << n)
    differ = state.bits(t1) ^ state.bits(t2)
    flip = (state.bits(control) & differ) * ((1 << (n - 1 - t1)) | (1 << (n - 1 - t2)))
    return _permute(state, idx ^ flip)


def apply_x(state: DiagonalState, q: int) -> DiagonalState:
    _check_index(state, q)
    idx = np.arange(1 << state.n_qubits)
    return _permute(state, idx ^ (1 << (state.n_qubits - 1 - q)))


def measure_qubit(state: DiagonalState, q: int, meas: MeasSpec | float = MeasSpec()):
    """Apply the diagonal POVM to qubit ``q`` and return both post-measurement branches.

    The measured qubit stays in the register; call :func:`discard_qubit` to
    trace it out.

    Returns:
        ``(p0, post0, post1)``.  ``post1`` is None when outcome 1 is impossible.

    Raises:
        UnreachableBranchError: if outcome 0 has zero probability.
    """
    if not isinstance(meas, MeasSpec):
        meas = MeasSpec(float(meas))
    w0 = np.where(state.bits(q) == 0, 1.0 - meas.delta_m, meas.delta_m)
    joint0 = state.probs * w0
    joint1 = state.probs * (1.0 - w0)
    p0 = float(joint0.sum())
    p1 = float(joint1.sum())
    if p0 < UNREACHABLE:
        raise UnreachableBranchError(f"outcome 0 on qubit {q} has probability {p0}")
    post0 = DiagonalState(state.n_qubits, _normalize(joint0))
    post1 = DiagonalState(state.n_qubits, _normalize(joint1)) if p1 >= UNREACHABLE else None
    return p0, post0, post1


def _normalize(v):
    v = v / v.sum()
    return v / v.sum()


def discard_qubit(state: DiagonalState, q: int) -> DiagonalState:
    _check_index(state, q)
    if state.n_qubits < 2:
        raise CapacityError("cannot discard the last remaining qubit")
    marg = state.probs.reshape((2,) * state.n_qubits).sum(axis=q)
    return DiagonalState(state.n_qubits - 1, marg.reshape(-1))


def marginal_error(state: DiagonalState, q: int) -> float:
    """Probability that qubit ``q`` is found in |1>."""
    return float(state.probs[state.bits(q) == 1].sum())


def run_bcs_exact(d1: float, dt: float, d2: float) -> float:
    """Target error after one BCS round, simulated on the 3-qubit register (t, 1, 2)."""
    for name, v in (("d1", d1), ("dt", dt), ("d2", d2)):
        if not (0.0 <= v < 0.5):
            raise DomainError(f"{name}={v} outside [0, 1/2)")
    state = product_state([dt, d1, d2])
    state = apply_cnot(state, 0, 1)
    state = apply_cswap(state, 1, 0, 2)
    return marginal_error(state, 0)


def run_mbac_k_exact(
    target: SpamParams | float,
    ancillas: Sequence[SpamParams | float],
    all_live: bool = False,
) -> ProtocolResult:
    """Exact MBAC: CNOT from the target onto each ancilla, keep all-zero readouts.

    By default ancillas are processed one at a time (prepare, CNOT, measure,
    discard), so only two qubits are ever live.  ``all_live=True`` builds
    the whole register first; it is limited by the register cap and exists
    to cross-check the sequential route.

    Raises:
        UnreachableBranchError: if some ancilla can never read 0.
    """
    target = _as_params(target)
    ancillas = [_as_params(a) for a in ancillas]
    for p in [target, *ancillas]:
        if not p.protocol_valid:
            raise DomainError(f"{p} is outside the cooling regime (errors must be < 1/2)")
    if all_live:
        return _run_mbac_all_live(target, ancillas)

    delta = target.delta_sp
    success = 1.0
    steps = []
    for i, anc in enumerate(ancillas, start=1):
        state = product_state([delta, anc.delta_sp])
        state = apply_cnot(state, 0, 1)
        p0, post0, _ = measure_qubit(state, 1, MeasSpec(anc.delta_m))
        delta = marginal_error(discard_qubit(post0, 1), 0)
        success *= p0
        steps.append(StepRecord(i, p0, delta))
    return ProtocolResult(delta, success, tuple(steps))


def _run_mbac_all_live(target, ancillas):
    state = product_state([target, *ancillas])
    for j in range(1, len(ancillas) + 1):
        state = apply_cnot(state, 0, j)
    success = 1.0
    steps = []
    for j, anc in enumerate(ancillas, start=1):
        p0, state, _ = measure_qubit(state, j, MeasSpec(anc.delta_m))
        success *= p0
        steps.append(StepRecord(j, p0, marginal_error(state, 0)))
    delta = marginal_error(state, 0)
    return ProtocolResult(delta, success, tuple(steps))


def sv_compress(state: DiagonalState) -> DiagonalState:
    """Descending sort of the basis probabilities; index 0 receives the largest.

    Ties keep their original ascending index order.
    """
    order = np.argsort(-state.probs, kind="stable")
    return DiagonalState(state.n_qubits, state.probs[order])


def run_sv_k(delta: float, k: int) -> float:
    """Qubit-0 error after optimal reversible compression of ``k`` equal qubits."""
    if not (0.0 <= delta < 0.5):
        raise DomainError(f"delta={delta} outside [0, 1/2)")
    if not (1 <= k <= MAX_QUBITS):
        raise CapacityError(f"k={k} outside [1, {MAX_QUBITS}]")
    return marginal_error(sv_compress(product_state([delta] * k)), 0)
