import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
import oracles
from collapse_lab.core.formal import series_residual
from collapse_lab.core.ode import integrate_ivp
from collapse_lab.io import csv_text
from collapse_lab.newtonian.equations import (far_field_state, friedmann_state, h_numerator,
                                              rhs_newtonian, sonic_denominator, sonic_residual)
from collapse_lab.newtonian.params import GammaParams
from collapse_lab.newtonian.shooting import CSV_COLUMNS
from collapse_lab.newtonian.sonic import (TYPE1, TYPE2, first_order_roots, isothermal_recursion_matrix,
                                          numerator_at_sonic, probed_recursion_matrix, sonic_state,
                                          sonic_taylor)

gammas = st.floats(1.0, 4.0 / 3.0, exclude_max=True)


@given(gammas, st.floats(0.01, 100.0))
def test_friedmann_is_a_fixed_point(g, y):
    p = GammaParams(g)
    rho, w = friedmann_state(p)
    if abs(sonic_denominator(y, rho, w, p)) < 1e-6:
        return
    assert np.max(np.abs(rhs_newtonian(y, (rho, w), p, floor=0.0))) <= 1e-13 / y


@pytest.mark.parametrize("g", [1.0, 1.1, 1.2, 1.3])
@settings(max_examples=30)
@given(y=st.floats(1.0, 1e3))
def test_far_field_is_exact(g, y):
    p = GammaParams(g)
    rho, w = far_field_state(y, p)
    if abs(sonic_denominator(y, rho, w, p)) < 1e-6:
        return  # the isothermal far field meets the sonic line at y = 1
    d = rhs_newtonian(y, (float(rho), float(w)), p, floor=0.0)
    assert d[0] == pytest.approx(p.tail_exponent * rho / y, rel=1e-12)
    assert abs(d[1]) <= 1e-12 / y


def test_isothermal_far_field_in_unscaled_density():
    # rho = y^-2 per 2 pi in the unscaled system: the rescaled constant is 1
    p = GammaParams(1.0)
    assert p.far_field_constant == pytest.approx(1.0, rel=1e-15)
    assert p.convention == "rescaled_2pi"


@settings(max_examples=25)
@given(st.floats(2.0, 3.0), st.sampled_from([1.0, 1.1, 1.2, 1.3]))
def test_sonic_consistency(y_star, g):
    p = GammaParams(g)
    try:
        exp = sonic_taylor(y_star, TYPE1, p, N=6)
    except Exception:
        return  # no real Type-1 branch at this candidate
    r0, w0 = exp.coeffs[:, 0]
    assert abs(sonic_denominator(y_star, r0, w0, p)) < 1e-12
    assert abs(numerator_at_sonic(exp)) < 1e-12


@given(st.floats(2.05, 2.95))
def test_isothermal_branches_in_closed_form(y_star):
    roots = first_order_roots(y_star, GammaParams(1.0))
    assert roots[TYPE1][0] == pytest.approx(-1 / y_star ** 2, abs=1e-12)
    assert roots[TYPE1][1] == pytest.approx((1 / y_star) * (1 - 2 / y_star), abs=1e-12)
    assert roots[TYPE2][0] == pytest.approx((1 / y_star) * (1 - 3 / y_star), abs=1e-12)
    assert roots[TYPE2][1] == pytest.approx(0.0, abs=1e-12)


def test_reference_type1_sign_leaves_a_residual():
    y = 2.5
    low = [1 / y, 1 / y]
    res = sonic_residual(GammaParams(1.0))
    reference = np.array([low, [-1 / y ** 2, -(1 / y) * (1 - 2 / y)]]).T
    corrected = np.array([low, [-1 / y ** 2, (1 / y) * (1 - 2 / y)]]).T
    assert np.max(np.abs(series_residual(res, y, reference, 1))) > 1e-3
    assert np.max(np.abs(series_residual(res, y, corrected, 1))) < 1e-14


def test_recursion_matrices_invertible():
    exp = sonic_taylor(2.5, TYPE1, GammaParams(1.0), N=40)
    (r0, w0), (r1, w1) = exp.coeffs[:, 0], exp.coeffs[:, 1]
    for N in range(2, 41):
        assert abs(np.linalg.det(isothermal_recursion_matrix(w0, w1, r1, N))) > 1e-8
        assert abs(np.linalg.det(probed_recursion_matrix(exp, N))) > 1e-8


def test_polytropic_sonic_state_solves_both_conditions():
    p = GammaParams(1.2)
    r0, w0 = sonic_state(2.4, p)
    assert abs(sonic_denominator(2.4, r0, w0, p)) < 1e-12
    assert abs(h_numerator(r0, w0, p)) < 1e-12


def test_sonic_point_against_independent_oracle(lp_profile):
    yb = lp_profile.meta["y_star_bar"]
    assert abs(yb - frozen.LP_SONIC_POINT) <= frozen.LP_SONIC_POINT_TOL
    assert yb == pytest.approx(frozen.LP_SONIC_POINT_PIPELINE, abs=1e-10)


def test_oracle_reproduces_frozen_value():
    assert oracles.lp_sonic_point() == pytest.approx(frozen.LP_SONIC_POINT, abs=1e-9)


def test_profile_invariants(lp_profile):
    d = lp_profile.meta["diagnostics"]
    assert d["G_positive_left"] and d["G_negative_right"] and d["G_sign_changes"] == 1
    assert d["omega_monotone_left"] and d["omega_trapped_right"]
    assert d["max_residual"] < 1e-6
    assert d["rho_minus_omega_left_min"] > 0 and d["omega_minus_rho_right_min"] > 0


def test_profile_csv_header(lp_profile):
    cols = lp_profile.columns()
    text = csv_text({k: cols[k] for k in CSV_COLUMNS})
    assert text.split("\n", 1)[0] == "y,rho,omega,denominator,residual_rho,residual_omega"


def test_absorbing_region_below_one_third():
    # a candidate right of the sonic point dips; once below 1/3 with rho > omega it stays there
    p = GammaParams(1.0)
    exp = sonic_taylor(2.6, TYPE1, p)
    y0 = 2.6 - exp.delta_trust
    s0 = exp(y0)[:2]
    res = integrate_ivp(lambda y, u: rhs_newtonian(y, u, p, floor=0.0), y0, s0, 1e-3, 1e-11)
    rho, w = res.y[:, 0], res.y[:, 1]
    below = np.nonzero((w < 1 / 3) & (rho > w))[0]
    assert below.size > 0
    assert np.all(w[below[0]:] < 1 / 3)


def test_scaling_leaves_the_similarity_profile_unchanged(lp_profile):
    # rho(t, r) = rho_hat(r / -t) / t^2; rescaling (t, r) -> (t / lam, r / lam) by lam^-2
    lam, t = 2.0, -1.0
    r = np.geomspace(1e-2, 1e2, 25)
    snap = lambda tt, rr: lp_profile.interpolate(rr / -tt)[0] / tt ** 2  # noqa: E731
    scaled = lam ** -2 * snap(t / lam, r / lam)
    np.testing.assert_array_equal(scaled * t ** 2, lp_profile.interpolate(r / -t)[0])


@pytest.mark.parametrize("g", [1.1, 1.3])
def test_yahil_far_field_velocity(g):
    p = GammaParams(g)
    assert p.omega_far == pytest.approx(2.0 - g)
    assert p.tail_exponent == pytest.approx(-2.0 / (2.0 - g))
