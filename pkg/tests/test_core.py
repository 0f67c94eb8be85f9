import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collapse_lab.core.fitting import fit_power_law
from collapse_lab.core.formal import growth_constant, quadratic_pair_roots, solve_higher_orders
from collapse_lab.core.ode import ENDPOINT, EVENT, Event, integrate_ivp
from collapse_lab.core.roots import RootBracket, refine_root, scan_brackets
from collapse_lab.core.series import SeriesF, series_pow

coef = st.floats(-3, 3, allow_nan=False)


def test_harmonic_oscillator_against_closed_form():
    res = integrate_ivp(lambda t, y: np.array([y[1], -y[0]]), 0.0, [1.0, 0.0], 10.0, 1e-11, dense=True)
    assert res.status == ENDPOINT
    tt = np.linspace(0, 10, 57)
    assert np.max(np.abs(res.dense(tt)[:, 0] - np.cos(tt))) < 1e-9


def test_backward_integration_and_terminal_event():
    ev = Event(lambda t, y: y[0] - 0.5, name="half")
    res = integrate_ivp(lambda t, y: np.array([-y[0]]), 0.0, [1.0], 5.0, 1e-12, [ev])
    assert res.status == EVENT
    assert res.t[-1] == pytest.approx(math.log(2.0), abs=1e-10)
    back = integrate_ivp(lambda t, y: np.array([-y[0]]), 1.0, [math.exp(-1)], 0.0, 1e-12)
    assert back.y[-1, 0] == pytest.approx(1.0, rel=1e-10)


def test_nonterminal_events_are_recorded():
    # detection looks at the sign at step ends, so cap the step below the root spacing
    ev = Event(lambda t, y: math.sin(t), terminal=False)
    res = integrate_ivp(lambda t, y: np.array([1.0]), 0.5, [0.0], 10.0, 1e-10, [ev], max_step=0.5)
    assert np.allclose(res.t_events[0], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-10)


def test_refine_root_and_scan():
    f = lambda x: x * x - 2.0  # noqa: E731
    r = refine_root(f, RootBracket.from_function(f, 0.0, 2.0), tol=1e-14)
    assert r == pytest.approx(math.sqrt(2.0), abs=1e-13)
    brs = scan_brackets(math.cos, np.linspace(0, 10, 41))
    assert len(brs) == 3
    with pytest.raises(ValueError):
        RootBracket.from_function(f, 2.0, 3.0)


@given(st.floats(-4, 4), st.floats(0.1, 10))
def test_power_law_fit_recovers_exact_laws(p, c):
    x = np.geomspace(1.0, 100.0, 9)
    fit = fit_power_law(x, c * x ** p)
    assert fit.exponent == pytest.approx(p, abs=1e-10)
    assert fit.prefactor == pytest.approx(c, rel=1e-9)


@given(st.lists(coef, min_size=5, max_size=5), st.lists(coef, min_size=5, max_size=5),
       st.floats(-0.3, 0.3))
def test_series_product_matches_pointwise(a, b, h):
    A, B = SeriesF(a, 1.0), SeriesF(b, 1.0)
    x = 1.0 + h
    # truncated product agrees with the product of values up to the dropped orders
    P = A * B
    full = np.polynomial.polynomial.polymul(a, b)[:5]
    assert np.allclose(P.coef, full, atol=1e-12)
    assert abs(A(x) * B(x) - np.polyval(np.polynomial.polynomial.polymul(a, b)[::-1], h)) < 1e-9


@settings(max_examples=50)
@given(st.floats(0.5, 2.0), st.floats(-1.0, 1.0), st.floats(-2.5, 2.5))
def test_series_pow_matches_binomial(a0, a1, p):
    s = SeriesF([a0, a1, 0, 0, 0, 0, 0, 0], 0.0)
    h = 0.05 * a0 / (1 + abs(a1))
    assert series_pow(s, p)(h) == pytest.approx((a0 + a1 * h) ** p, rel=1e-9)


def test_formal_series_of_a_singular_riccati_equation():
    # x u' = x u^2 is singular at 0 like a sonic point; u = 1/(1-x) has all coefficients 1
    def residual(x, states):
        (u,) = states
        return [x * u.deriv() - x * u * u]

    co = solve_higher_orders(residual, 0.0, np.array([[1.0, 1.0]]), 12)
    assert np.allclose(co[0], 1.0, atol=1e-13)
    # smallest C with N^2 <= C^N for all N >= 2 is 3^(2/3)
    assert growth_constant(co) == pytest.approx(3 ** (2 / 3), rel=1e-12)


def test_quadratic_pair_roots():
    # two unknowns with a product constraint: solutions (1, 2) and (2, 1)
    F = lambda c: np.array([c[0] + c[1] - 3.0, c[0] * c[1] - 2.0])  # noqa: E731
    roots = sorted(tuple(np.round(r, 10)) for r in quadratic_pair_roots(F))
    assert roots == [(1.0, 2.0), (2.0, 1.0)]
