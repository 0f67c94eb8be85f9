import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from collapse_lab.core.selfsim import WindowNotStraddling
from collapse_lab.relativistic.equations import (far_field_rel, ode_residual_rel, rhs_rel_eulerian,
                                                 sonic_denominator_rel, sonic_factorization,
                                                 sonic_state_rel)
from collapse_lab.relativistic.extension import chart_series, rng_roots
from collapse_lab.relativistic.params import EpsParams
from collapse_lab.relativistic.shooting import assemble_rel, shoot_rel

eps_st = st.floats(0.0, 0.05)


@given(eps_st, st.floats(0.05, 50.0), st.floats(1e-3, 10.0), st.floats(1e-3, 3.0))
def test_factorization_identity(e, x, D, W):
    fz = sonic_factorization(x, D, W, EpsParams(e))
    assert fz.identity_error <= 1e-13


def test_factorization_needs_the_leading_coefficient():
    # without the (1 - eps) factor the product misses B by a relative eps / (1 - eps)
    e = 0.01
    fz = sonic_factorization(1.7, 0.4, 0.3, EpsParams(e))
    bare = (fz.J - fz.x * fz.W) * (fz.H + fz.x * fz.W)
    assert abs(bare - fz.B) / abs(fz.B) > 1e-3
    assert abs((1 - e) * bare - fz.B) / abs(fz.B) < 1e-13


@given(eps_st, st.floats(0.01, 1e4))
def test_friedmann_values_are_exact(e, x):
    p = EpsParams(e)
    if abs(sonic_denominator_rel(x, 1 / 3, 1 / 3, p)) < 1e-6:
        return
    assert np.max(np.abs(rhs_rel_eulerian(x, (1 / 3, 1 / 3), p))) == 0.0


@given(eps_st, st.floats(0.01, 1e4))
def test_far_field_is_exact(e, x):
    p = EpsParams(e)
    D, W = far_field_rel(x, p)
    if abs(sonic_denominator_rel(x, D, W, p)) < 1e-9:
        return
    r1, r2 = ode_residual_rel(x, float(D), float(W), p.tail_exponent * float(D) / x, 0.0, p)
    assert abs(r1) * x / D <= 1e-12 and abs(r2) * x <= 1e-12


def test_reference_far_field_constant_is_not_exact():
    p = EpsParams(0.01)
    x = 10.0
    D = p.reference_far_field_constant * x ** p.tail_exponent
    _, r2 = ode_residual_rel(x, D, 1.0, p.tail_exponent * D / x, 0.0, p)
    assert abs(r2) * x > 1e-4
    assert EpsParams(0.0).reference_far_field_constant == EpsParams(0.0).far_field_constant == 1.0


@given(st.floats(1e-4, 0.05), st.floats(2.4, 3.0))
def test_sonic_state_is_on_the_sonic_line(e, xs):
    D0, W0 = sonic_state_rel(xs, EpsParams(e))
    assert D0 == W0
    assert abs(sonic_denominator_rel(xs, D0, W0, EpsParams(e))) < 1e-12


def test_sonic_point_anchor_and_newtonian_limit(rel_profile):
    assert rel_profile.meta["x_star_bar"] == pytest.approx(frozen.REL_SONIC_POINT_EPS_1E_2, abs=1e-10)
    x1, _ = shoot_rel(EpsParams(1e-3))
    assert x1 == pytest.approx(frozen.REL_SONIC_POINT_EPS_1E_3, abs=1e-10)
    assert abs(x1 - frozen.LP_SONIC_POINT) < 0.05


def test_eps_zero_reproduces_the_isothermal_profile(lp_profile):
    z = assemble_rel(EpsParams(0.0), (2.0, 3.0))
    assert z.meta["x_star_bar"] == lp_profile.meta["y_star_bar"]
    D, W = z.interpolate(lp_profile.y)
    assert np.max(np.abs(D / lp_profile.rho - 1)) < 1e-8
    assert np.max(np.abs(W / lp_profile.omega - 1)) < 1e-8


def test_profile_diagnostics(rel_profile):
    d = rel_profile.meta["diagnostics"]
    p = rel_profile.params
    assert d["sandwich_left"] and d["f_positive_left"]
    assert d["W_above_D_right"] and d["xW_above_J_right"]
    assert d["B_sign_changes"] == 1
    assert d["factorization_error"] < 1e-13
    assert abs(d["W0"] - 1 / 3) < 1e-3
    assert abs(d["W_end"] - 1) < 1e-2
    assert d["tail_exponent"] == pytest.approx(p.tail_exponent, rel=0.01)


def test_right_sandwich_fails_where_density_decays(rel_profile):
    # xD -> 0 along the far field while J stays above sqrt(eps) x: xD > J cannot hold globally
    d = rel_profile.meta["diagnostics"]
    assert not d["sandwich_right"]
    assert d["sandwich_right_violation"] > rel_profile.meta["x_star_bar"]


def test_continuity_in_eps(rel_profile):
    half = assemble_rel(EpsParams(0.005))
    zero = assemble_rel(EpsParams(0.0), (2.0, 3.0))
    x = np.geomspace(0.1, 10.0, 200)
    steps = []
    for a, b in ((rel_profile, half), (half, zero)):
        (Da, Wa), (Db, Wb) = a.interpolate(x), b.interpolate(x)
        steps.append(max(np.max(np.abs(Da - Db)), np.max(np.abs(Wa - Wb))))
    assert max(steps) <= 20 * 0.005
    assert 0.5 < steps[0] / steps[1] < 2.0  # linear in eps


def test_window_without_a_straddle_is_reported():
    with pytest.raises(WindowNotStraddling):
        shoot_rel(EpsParams(0.05))


def test_comoving_reconstruction(comoving):
    m = comoving.meta
    assert m["max_constraint_residual"] < 1e-6
    assert abs(m["sonic_S"]) < 1e-8
    S = comoving.S
    i = comoving.sonic_index
    assert np.all(S[:i] > 0) or np.all(S[:i] < 0)
    fit = comoving.lapse_tail_fit()
    assert fit.exponent == pytest.approx(comoving.params.lapse_tail_exponent, rel=0.02)


def test_chart_series_satisfies_the_chart_system():
    from collapse_lab.relativistic.extension import chart_rhs

    p = EpsParams(0.01)
    ser = chart_series(4.6, -3.5, p, order=6)
    Y, h = -1e-3, 1e-6
    s = np.array(ser(Y))
    num = (np.array(ser(Y + h)) - np.array(ser(Y - h))) / (2 * h)
    assert np.allclose(num, chart_rhs(Y, s, p), rtol=1e-5, atol=1e-8)
    assert ser(0.0)[1] == pytest.approx(1.0)
    assert ser(0.0)[2] == pytest.approx(1.0)


def test_extension_blows_up_jointly(extension):
    m = extension.meta
    assert math.isfinite(extension.Y_ms) and extension.Y_ms < 0
    assert extension.Y_ms == pytest.approx(m["Y_ms_fit"], rel=1e-3)
    assert min(m["d_end"], m["w_end"], m["inv_chi_end"]) > 1e6
    assert 0 < m["d_over_w_min"] and m["d_over_w_max"] < 1
    assert m["d_end"] / m["w_end"] == pytest.approx(0.25, abs=0.01)
    assert m["divergence_rate"] == pytest.approx(-1.0, abs=0.01)


def test_null_slope_roots(extension):
    rr = rng_roots(extension)
    assert len(rr.roots) >= 2
    assert rr.F_near_ms > 1e3 and rr.F_far > 1e3
    assert rr.negative_sample is not None and rr.negative_sample[1] < 0
    for y in rr.roots:
        assert y < rr.y_ms
        assert abs(extension.F_at_slope(y)) < 1e-8
