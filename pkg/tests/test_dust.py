import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import frozen
import oracles
from collapse_lab.dust.model import (DustModel, LabelPastCollapse, NoCollapse, blowup_exponent,
                                     collapse_map, collapse_time_quadrature, dust_trajectory,
                                     eulerian_density)
from collapse_lab.dust.neardust import (NearDustRun, gain_delta,
                                        homogeneous_residual, leading_source, neardust_phi1)


def test_mean_density_of_a_uniform_ball():
    assert DustModel.homogeneous(2.0).G(0.3) == pytest.approx(8 * math.pi / 3, rel=1e-14)


def test_mean_density_matches_the_defining_integral():
    m = DustModel.flat_top(1.0, 4)
    r = 0.7
    # (4 pi / r^3) int_0^r (1 - s^4) s^2 ds in closed form
    assert m.G(r) == pytest.approx(4 * math.pi * (1 / 3 - r ** 4 / 7), rel=1e-13)
    assert m.G(0.0) == pytest.approx(4 * math.pi / 3, rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0.5, 2.0),
       st.floats(-2.0, -1e-3) | st.just(0.0) | st.floats(1e-3, 0.5))
def test_collapse_time_against_cycloid(G, chi0, chi1):
    # tiny outward speeds put chi_max within round-off of chi0; both sides lose digits there
    if 0.5 * chi1 * chi1 - G / chi0 >= 0:
        return
    assert collapse_time_quadrature(G, chi0, chi1) == pytest.approx(
        oracles.cycloid_collapse_time(G, chi0, chi1), rel=1e-10)


def test_cycloid_oracle_is_frozen():
    assert oracles.cycloid_collapse_time(1.0, 1.0, -0.5) == pytest.approx(frozen.CYCLOID_T_STAR, rel=1e-14)
    assert collapse_time_quadrature(1.0, 1.0, -0.5) == pytest.approx(frozen.CYCLOID_T_STAR, rel=1e-10)


def test_escaping_data_is_rejected():
    with pytest.raises(NoCollapse):
        collapse_time_quadrature(1.0, 1.0, 2.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_self_similar_shell_follows_the_explicit_law(r):
    m = DustModel.flat_top()
    tr = dust_trajectory(m, r)
    g = m.g(r)
    assert tr.t_star == pytest.approx(1 / g, rel=1e-10)
    keep = tr.t <= 0.99 * tr.t_star
    assert np.max(np.abs(tr.chi[keep] - (1 - g * tr.t[keep]) ** (2 / 3))) < 1e-6
    assert tr.energy_drift() <= 10 * 1e-12


@settings(max_examples=10, deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0.5, 2.0), st.floats(-2.0, -0.1))
def test_inward_data_collapses_with_exponent_two_thirds(G, chi0, chi1):
    tr = dust_trajectory(None, 0.0, chi0, chi1, G=G)
    assert tr.status == "collapse"
    assert abs(tr.t_star - tr.t_star_quadrature) <= 1e-8 * tr.t_star_quadrature
    assert blowup_exponent(tr) == pytest.approx(2 / 3, abs=0.01)
    assert tr.energy_drift() <= 10 * 1e-12


def test_collapse_order_and_homogeneous_map():
    labels = np.linspace(0.0, 1.0, 21)
    ts = collapse_map(DustModel.flat_top(), labels)["t_star"]
    assert np.all(np.diff(ts) > 0)
    th = collapse_map(DustModel.homogeneous(), labels)["t_star"]
    assert np.ptp(th) <= 1e-12 * th[0]


def test_jacobian_stays_positive_and_shrinks_before_collapse():
    m = DustModel.flat_top()
    labels = np.linspace(0.05, 0.95, 10)
    t0 = collapse_map(m, [0.0])["t_star"][0]
    early = eulerian_density(m, 0.5 * t0, labels)
    late = eulerian_density(m, 0.999 * t0, labels)
    assert np.all(early["jacobian"] > 0) and np.all(late["jacobian"] > 0)
    assert np.all(late["jacobian"] < early["jacobian"])
    with pytest.raises(LabelPastCollapse):
        eulerian_density(m, 1.01 * t0, [0.01])


def test_homogeneous_density_is_uniform_in_space():
    m = DustModel.homogeneous()
    t = 0.5 / m.g(0.5)
    rho = eulerian_density(m, t, np.linspace(0.1, 0.9, 5))["rho"]
    assert np.ptp(rho) <= 1e-9 * rho[0]


@given(st.sampled_from([1.05, 1.1, 1.2, 1.25, 1.3]), st.integers(20, 200))
def test_gain_exponent_in_rationals(g, n):
    assert gain_delta(g, n) == float(2 * (Fraction(4, 3) - Fraction(repr(g)) - Fraction(1, n)))


def test_gain_exponent_is_one_sixth():
    assert gain_delta(1.2, 20) == 1 / 6


@given(st.sampled_from([4 / 3, -1 / 3]))
def test_homogeneous_basis(s):
    assert np.max(np.abs(homogeneous_residual(s, np.logspace(-8, 0, 50)))) <= 1e-12


@pytest.fixture(scope="module")
def small_run():
    return neardust_phi1(NearDustRun(1.2, 20, tau=np.logspace(-6, 0, 13), r=np.linspace(0, 1, 6)))


def test_phi1_is_linear_in_the_source(small_run):
    twice = neardust_phi1(NearDustRun(1.2, 20, tau=small_run.tau, r=small_run.r), scale=2.0)
    np.testing.assert_allclose(twice.phi1, 2 * small_run.phi1, rtol=1e-13, atol=1e-300)


def test_phi1_solves_its_equation():
    # second difference on a local stencil against -P
    t, h, r = 0.05, 1e-3, 0.8
    run = neardust_phi1(NearDustRun(1.2, 20, tau=np.array([t - h, t, t + h]), r=np.array([r])))
    p = run.phi1[:, 0]
    lhs = (p[2] - 2 * p[1] + p[0]) / h ** 2 - 4 / (9 * t * t) * p[1]
    assert lhs == pytest.approx(-float(leading_source(t, r, 1.2, 20)), rel=1e-4)


def test_gain_ratio_is_bounded(small_run):
    assert np.all(np.isfinite(small_run.gain_ratio))
    assert np.max(small_run.gain_ratio) < 10


def test_invalid_near_dust_parameters():
    with pytest.raises(ValueError):
        NearDustRun(1.2, 5)  # delta <= 0
    with pytest.raises(ValueError):
        NearDustRun(1.4, 20)
