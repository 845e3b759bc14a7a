import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cooltrace.errors import DomainError, InconsistentEstimateError, SingularityError
from cooltrace.noise import (
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
from oracles import sample_spam

half_open = st.floats(0.0, 0.5, exclude_max=True)
unit = st.floats(0.0, 1.0)


@pytest.mark.parametrize(
    "sp, m, expected",
    [(0.1, 0.1, 0.18), (0.1, 0.0, 0.1), (0.5, 0.5, 0.5)],
)
def test_compose_spam_examples(sp, m, expected):
    assert compose_spam(sp, m) == pytest.approx(expected, abs=1e-12)


def test_compose_spam_matches_shot_oracle():
    mean, se = sample_spam(0.1, 0.1, 10**6, seed=11)
    assert abs(mean - compose_spam(0.1, 0.1)) < 4 * se


@pytest.mark.parametrize("bad", [(-0.1, 0.0), (0.0, 1.5), (math.nan, 0.1)])
def test_compose_spam_domain(bad):
    with pytest.raises(DomainError):
        compose_spam(*bad)


@given(half_open, half_open)
def test_compose_spam_symmetric_and_stays_below_half(a, b):
    assert compose_spam(a, b) == pytest.approx(compose_spam(b, a), abs=1e-15)
    assert 0.0 <= compose_spam(a, b) <= 0.5
    if max(a, b) <= 0.49:
        # closer to 1/2 the gap below 1/2 is under half an ulp and rounds away
        assert compose_spam(a, b) < 0.5


@given(half_open, half_open, st.floats(0.0, 0.5))
def test_compose_spam_monotone(a, b, c):
    lo, hi = sorted((b, c))
    assert compose_spam(a, lo) <= compose_spam(a, hi) + 1e-15


def test_invert_examples():
    assert invert_spam_for_sp(0.18, 0.1) == pytest.approx(0.1, abs=1e-12)
    assert invert_spam_for_sp(0.3, 0.0) == pytest.approx(0.3, abs=1e-12)
    with pytest.raises(SingularityError):
        invert_spam_for_sp(0.1, 0.5)


def test_invert_rejects_incompatible_estimates():
    with pytest.raises(InconsistentEstimateError):
        invert_spam_for_sp(0.05, 0.2)


@given(unit, st.floats(0.0, 0.45))
def test_invert_undoes_compose(sp, m):
    # conditioning degrades as 1 / (1 - 2 m) near the singular point
    assert abs(invert_spam_for_sp(compose_spam(sp, m), m) - sp) < 1e-12


@pytest.mark.parametrize(
    "rho, m0, expected",
    [
        ((0, 0, 1), (1, 0, 0, 1), 0.0),
        ((0, 0, 0.8), (1, 0, 0, 0.8), 0.18),
        ((0, 0, 1), (1, 0, 0, -1), 1.0),
    ],
)
def test_spam_error_examples(rho, m0, expected):
    assert spam_error(BlochState(*rho), Povm1Q(*m0)) == pytest.approx(expected, abs=1e-12)


@given(half_open, half_open)
def test_spam_error_diagonal_is_compose(sp, m):
    got = spam_error(BlochState.diagonal(sp), Povm1Q.diagonal(m))
    assert got == pytest.approx(compose_spam(sp, m), abs=1e-12)


def test_invalid_operands_rejected():
    with pytest.raises(DomainError):
        BlochState(1.0, 0.5, 0.0)
    with pytest.raises(DomainError):
        Povm1Q(1.5, 0.0, 0.0, 0.9)
    with pytest.raises(DomainError):
        Povm1Q(-0.1, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        SpamParams(1.0, 0.0)
    with pytest.raises(DomainError):
        ThermalScale(0.0)


def test_protocol_valid():
    assert SpamParams(0.1, 0.2).protocol_valid
    assert not SpamParams(0.5, 0.0).protocol_valid
    assert SpamParams(0.1, 0.1).delta_spam == pytest.approx(0.18)


def test_effective_temperature_examples():
    one = ThermalScale(1.0)
    assert effective_temperature(1 / (math.e + 1), one) == pytest.approx(1.0, abs=1e-12)
    assert effective_temperature(0.25, one) == pytest.approx(1 / math.log(3), abs=1e-12)
    assert effective_temperature(0.0, one) == 0.0
    for bad in (0.5, 0.7):
        with pytest.raises(DomainError):
            effective_temperature(bad, one)


def test_delta_from_temperature_examples():
    one = ThermalScale(1.0)
    assert delta_from_temperature(1.0, one) == pytest.approx(1 / (math.e + 1), abs=1e-12)
    assert delta_from_temperature(1e12, one) == pytest.approx(0.5, abs=1e-9)
    s = ThermalScale(3.7)
    assert delta_from_temperature(effective_temperature(0.1, s), s) == pytest.approx(0.1, abs=1e-12)
    with pytest.raises(DomainError):
        delta_from_temperature(0.0, one)


@given(st.floats(1e-6, 0.5, exclude_max=True), st.floats(0.1, 10.0))
def test_temperature_round_trip(delta, ratio):
    s = ThermalScale(ratio)
    t = effective_temperature(delta, s)
    assert abs(delta_from_temperature(t, s) - delta) < 1e-12


@given(st.floats(1e-6, 0.49), st.floats(1e-6, 0.49))
def test_temperature_monotone(a, b):
    s = ThermalScale(1.0)
    lo, hi = sorted((a, b))
    if lo < hi:
        assert effective_temperature(lo, s) < effective_temperature(hi, s)
