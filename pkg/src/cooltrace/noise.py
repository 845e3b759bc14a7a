"""SPAM noise types, the SPAM composition algebra and the thermal picture.

A single qubit is prepared in ``(1 - d) |0><0| + d |1><1|`` and read out
with a POVM whose ``M_0 = diag(1 - m, m)``.  The probability of seeing the
wrong outcome is then ``d + m - 2 d m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, InconsistentEstimateError, SingularityError

ATOL = 1e-12


def _check_prob(name, value, *, upper_open=False):
    if not (0.0 <= value <= 1.0) or (upper_open and value >= 1.0):
        bound = "[0, 1)" if upper_open else "[0, 1]"
        raise DomainError(f"{name}={value!r} outside {bound}")


@dataclass(frozen=True)
class SpamParams:
    """Per-qubit state-preparation error and readout error."""

    delta_sp: float
    delta_m: float = 0.0

    def __post_init__(self):
        _check_prob("delta_sp", self.delta_sp, upper_open=True)
        _check_prob("delta_m", self.delta_m, upper_open=True)

    @property
    def protocol_valid(self) -> bool:
        """Both errors below 1/2, the regime where cooling formulas apply."""
        return self.delta_sp < 0.5 and self.delta_m < 0.5

    @property
    def delta_spam(self) -> float:
        return compose_spam(self.delta_sp, self.delta_m)


@dataclass(frozen=True)
class BlochState:
    """``rho = (I + sx X + sy Y + sz Z) / 2``."""

    sx: float
    sy: float
    sz: float

    def __post_init__(self):
        norm2 = self.sx**2 + self.sy**2 + self.sz**2
        if not all(math.isfinite(v) for v in (self.sx, self.sy, self.sz)) or norm2 > 1 + ATOL:
            raise DomainError(f"Bloch vector {self} has length^2 {norm2} > 1")

    @classmethod
    def diagonal(cls, delta_sp: float) -> "BlochState":
        return cls(0.0, 0.0, 1.0 - 2.0 * delta_sp)

    @property
    def is_diagonal(self) -> bool:
        return self.sx == 0.0 and self.sy == 0.0


@dataclass(frozen=True)
class Povm1Q:
    """Two-outcome POVM given by ``M_0 = (mi I + mx X + my Y + mz Z) / 2``.

    ``M_1 = I - M_0`` is implied.
    """

    mi: float
    mx: float
    my: float
    mz: float

    def __post_init__(self):
        vals = (self.mi, self.mx, self.my, self.mz)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"non-finite POVM coefficients {vals}")
        if not (0.0 <= self.mi <= 2.0):
            raise DomainError(f"mi={self.mi} outside [0, 2]")
        r = math.sqrt(self.mx**2 + self.my**2 + self.mz**2)
        if r > min(self.mi, 2.0 - self.mi) + ATOL:
            raise DomainError(f"POVM {vals} is not positive semidefinite")

    @classmethod
    def diagonal(cls, delta_m: float) -> "Povm1Q":
        return cls(1.0, 0.0, 0.0, 1.0 - 2.0 * delta_m)

    @property
    def is_diagonal(self) -> bool:
        return self.mx == 0.0 and self.my == 0.0 and self.mi == 1.0


@dataclass(frozen=True)
class ThermalScale:
    """The energy ratio hbar*omega/k_B, in temperature units."""

    energy_ratio: float

    def __post_init__(self):
        if not (self.energy_ratio > 0 and math.isfinite(self.energy_ratio)):
            raise DomainError(f"energy_ratio must be positive, got {self.energy_ratio}")


def compose_spam(delta_sp: float, delta_m: float) -> float:
    """Total SPAM error of a diagonal preparation followed by a diagonal readout."""
    _check_prob("delta_sp", delta_sp)
    _check_prob("delta_m", delta_m)
    return delta_sp + delta_m - 2.0 * delta_sp * delta_m


def invert_spam_for_sp(delta_spam: float, delta_m: float) -> float:
    """Recover the preparation error from total SPAM error and readout error.

    Raises:
        SingularityError: if ``delta_m == 1/2``; the SPAM error is then 1/2
            for every input state.
        InconsistentEstimateError: if the recovered value is not a
            probability.
    """
    _check_prob("delta_spam", delta_spam)
    _check_prob("delta_m", delta_m)
    denom = 1.0 - 2.0 * delta_m
    if denom == 0.0:
        raise SingularityError("delta_m = 1/2: preparation error is unrecoverable")
    sp = (delta_spam - delta_m) / denom
    if -ATOL <= sp < 0.0:
        sp = 0.0
    elif 1.0 < sp <= 1.0 + ATOL:
        sp = 1.0
    if not (0.0 <= sp <= 1.0):
        raise InconsistentEstimateError(
            f"delta_spam={delta_spam}, delta_m={delta_m} imply delta_sp={sp}"
        )
    return sp


def spam_error(rho: BlochState, m0: Povm1Q) -> float:
    """``1 - Tr[rho M_0]`` for general single-qubit operators."""
    overlap = 0.5 * (m0.mi + rho.sx * m0.mx + rho.sy * m0.my + rho.sz * m0.mz)
    return 1.0 - overlap


def effective_temperature(delta: float, scale: ThermalScale) -> float:
    """Temperature at which a thermal qubit has excited population ``delta``.

    Returns 0.0 for ``delta == 0`` (ground state).
    """
    if delta == 0.0:
        return 0.0
    if not (0.0 < delta < 0.5):
        raise DomainError(f"delta={delta} gives a non-positive or infinite temperature")
    return scale.energy_ratio / math.log(1.0 / delta - 1.0)


def delta_from_temperature(t: float, scale: ThermalScale) -> float:
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t}")
    x = scale.energy_ratio / t
    # 1/(e^x + 1) written to stay finite for large x
    return math.exp(-x) / (1.0 + math.exp(-x)) if x > 0 else 0.5
