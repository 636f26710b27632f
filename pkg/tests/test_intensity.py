import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from sehp import SehpParams
from sehp.intensity import IntensityContext, compensator, compensator_increments, rate


def ctx(v, alpha, beta, events=()):
    return IntensityContext(SehpParams(v, alpha, beta), np.array(events, dtype=float))


def test_rate_at_zero_is_v():
    assert rate(ctx(1.0, 0.0, 1.0), 0.0) == 1.0


def test_rate_vanishes_far_out():
    assert rate(ctx(1.0, 1.0, 1.0, [0.0]), 800.0) == 0.0
    assert rate(ctx(1.0, 1.0, 1.0, [0.0]), 40.0) < 1e-16


def test_rate_reference_value():
    # 2 e^-2 + 0.5 (e^-2 + e^-1), summed term by term in a one-off script
    assert rate(ctx(2.0, 0.5, 1.0, [0.0, 1.0]), 2.0) == pytest.approx(0.522277928677253, rel=1e-14)


def test_rate_excludes_event_at_its_own_time():
    c = ctx(1.0, 0.7, 2.0, [1.0])
    assert rate(c, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)


def test_rate_negative_time_rejected():
    with pytest.raises(ValueError):
        rate(ctx(1.0, 0.0, 1.0), -0.1)


def test_rate_vectorised():
    c = ctx(2.0, 0.5, 1.0, [0.0, 1.0])
    ts = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(rate(c, ts), [rate(c, t) for t in ts], rtol=1e-15)


def test_rate_jump_is_alpha():
    alpha = 0.8
    c = ctx(3.0, alpha, 1.5, [0.2, 0.9, 2.0])
    for tj in c.events:
        jump = rate(c, tj + 1e-9) - rate(c, tj)
        assert jump == pytest.approx(alpha, abs=1e-6 * alpha)


def test_compensator_tends_to_v_over_beta():
    assert compensator(ctx(1.0, 0.0, 1.0), 0.0, 60.0) == pytest.approx(1.0, rel=1e-15)


def test_compensator_empty_interval():
    assert compensator(ctx(2.0, 0.5, 1.0, [0.0, 1.0]), 1.3, 1.3) == 0.0


def test_compensator_reference_quadrature():
    # adaptive quadrature of the directly summed rate, frozen from a one-off script
    c = ctx(2.0, 0.5, 1.0, [0.0, 1.0])
    assert compensator(c, 0.0, 2.0) == pytest.approx(2.477722071322747, rel=1e-8)


def test_compensator_rejects_reversed_interval():
    with pytest.raises(ValueError):
        compensator(ctx(1.0, 0.0, 1.0), 2.0, 1.0)


def test_increments_sum_to_total():
    c = ctx(2.0, 0.5, 1.0, [0.3, 1.0, 1.0, 2.5])
    inc = compensator_increments(c, c.events)
    assert inc.sum() == pytest.approx(compensator(c, 0.0, 2.5), rel=1e-13)


events_st = st.lists(st.floats(0.0, 10.0), min_size=0, max_size=25).map(sorted)
param_st = st.tuples(st.floats(0.05, 10.0), st.floats(0.0, 5.0), st.floats(0.05, 4.0))


@settings(max_examples=100, deadline=None)
@given(p=param_st, events=events_st, cuts=st.lists(st.floats(0.0, 12.0), min_size=3, max_size=3))
def test_compensator_additive_and_monotone(p, events, cuts):
    c = ctx(*p, events)
    a, b, d = sorted(cuts)
    whole = compensator(c, a, d)
    parts = compensator(c, a, b) + compensator(c, b, d)
    assert parts == pytest.approx(whole, rel=1e-10, abs=1e-300)
    assert compensator(c, a, b) <= whole * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(p=param_st, events=events_st, b=st.floats(0.01, 12.0))
def test_compensator_matches_quadrature(p, events, b):
    c = ctx(*p, events)
    knots = sorted({0.0, b, *[t for t in events if t < b]})
    numeric = sum(
        integrate.quad(lambda s: rate(c, s), lo, hi, epsabs=1e-13, epsrel=1e-12)[0]
        for lo, hi in zip(knots[:-1], knots[1:])
    )
    assert compensator(c, 0.0, b) == pytest.approx(numeric, rel=1e-6, abs=1e-12)
