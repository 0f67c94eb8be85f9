"""The acceptance matrix: one check per criterion, each returning measured values and a verdict.

Checks are pure functions of fixed seeds and defaults, so their JSON output is
byte-stable. Wall-clock limits are reported as booleans only.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .affine.lane_emden import lane_emden_shoot
from .affine.radial import SIMPLE, RadialScale, radial_scale_evolve
from .affine.sideris import AffineState, sideris_evolve
from .core.ode import integrate_ivp
from .dust.model import DustModel, blowup_exponent, collapse_map, dust_trajectory
from .dust.neardust import NearDustRun, homogeneous_residual, neardust_phi1
from .newtonian.equations import (far_field_state, friedmann_state, ode_residual,
                                  rhs_newtonian)
from .newtonian.params import GammaParams
from .newtonian.shooting import assemble_lp
from .newtonian.sonic import TYPE1, sonic_taylor
from .relativistic.comoving import reconstruct_comoving
from .relativistic.equations import far_field_rel, ode_residual_rel
from .relativistic.extension import extend_upper, rng_roots
from .relativistic.params import EpsParams
from .relativistic.shooting import assemble_rel

SEED = 20240611
YAHIL_GAMMAS = (1.1, 1.2, 1.3)


@dataclass
class CriterionResult:
    number: int
    title: str
    tolerance: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number:2d}: {self.title} ({self.tolerance})"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "tolerance": self.tolerance,
                "passed": self.passed, "measured": self.measured}


@lru_cache(maxsize=1)
def _lp_profile():
    """Shared by several criteria; the first call's wall time is the one reported."""
    t0 = time.perf_counter()
    prof = assemble_lp(GammaParams(1.0))
    return prof, time.perf_counter() - t0


def lp_sonic_point() -> CriterionResult:
    prof, elapsed = _lp_profile()
    yb = float(prof.meta["y_star_bar"])
    ok_range = 2.35 <= yb <= 2.47
    ok_time = elapsed < 30.0
    return CriterionResult(1, "LP sonic point", "y_star_bar in [2.35, 2.47], runtime < 30 s",
                           ok_range and ok_time,
                           {"y_star_bar": yb, "in_range": ok_range, "runtime_under_30s": ok_time})


def lp_boundary_data(prof=None) -> CriterionResult:
    if prof is None:
        prof, _ = _lp_profile()
    d = prof.meta["diagnostics"]
    w0, r0 = float(d["omega0"]), float(d["rho0"])
    w_end = float(prof.omega[-1])
    y_end = float(prof.y[-1])
    tail = float(d["tail_exponent"])
    checks = {
        "omega0_err": abs(w0 - 1.0 / 3.0) <= 1e-3,
        "rho0_positive": r0 > 0,
        "omega_far_err": abs(w_end - 1.0) <= 1e-3,
        "tail_rel_err": abs(tail + 2.0) <= 0.01 * 2.0,
    }
    m = {"omega0": w0, "rho0": r0, "y_end": y_end, "omega_end": w_end, "tail_exponent": tail,
         "checks": checks}
    return CriterionResult(2, "LP boundary data",
                           "|omega(0)-1/3| <= 1e-3, rho(0) > 0, |omega(1e4)-1| <= 1e-3, tail -2 within 1%",
                           all(checks.values()), m)


def yahil_runs() -> CriterionResult:
    out = {}
    ok = True
    for g in YAHIL_GAMMAS:
        p = GammaParams(g)
        try:
            prof = assemble_lp(p)
        except Exception as exc:  # a failed pipeline is a measured outcome here
            out[repr(g)] = {"completed": False, "error": f"{type(exc).__name__}: {exc}"}
            ok = False
            continue
        d = prof.meta["diagnostics"]
        checks = {
            "tail_within_1pct": abs(d["tail_exponent"] / p.tail_exponent - 1.0) <= 0.01,
            "omega0_within_2e-3": abs(d["omega0"] - p.omega_friedmann) <= 2e-3,
            "one_sonic_point": d["G_sign_changes"] == 1,
            "G_plus_then_minus": bool(d["G_positive_left"] and d["G_negative_right"]),
        }
        out[repr(g)] = {"completed": True, "y_star_bar": float(prof.meta["y_star_bar"]),
                        "tail_exponent": float(d["tail_exponent"]),
                        "tail_target": p.tail_exponent, "omega0": float(d["omega0"]),
                        "omega0_target": p.omega_friedmann, "checks": checks}
        ok &= all(checks.values())
    return CriterionResult(3, "Yahil runs at gamma in {1.1, 1.2, 1.3}",
                           "tail -2/(2-gamma) within 1%, |omega(0)-(4-3gamma)/3| <= 2e-3, one sonic point",
                           ok, out)


def sonic_series(y_star: float = 2.5, N: int = 40) -> CriterionResult:
    p = GammaParams(1.0)
    exp = sonic_taylor(y_star, TYPE1, p, N=N)
    c = exp.coeffs
    # reference values for orders 0 and 1 (the quoted omega_1 carries a leading minus)
    reference = {"rho0": 1 / y_star, "omega0": 1 / y_star, "rho1": -1 / y_star ** 2,
                 "omega1": -(1 / y_star) * (1 - 2 / y_star)}
    got = {"rho0": c[0, 0], "omega0": c[1, 0], "rho1": c[0, 1], "omega1": c[1, 1]}
    low_err = {k: float(abs(got[k] - reference[k])) for k in reference}
    low_ok = all(e <= 1e-14 for e in low_err.values())
    Cg = exp.growth_constant()
    n = np.arange(2, N + 1)
    bound = Cg ** n / n ** 2
    growth_ok = bool(np.all(np.max(np.abs(c[:, 2:]), axis=0) <= bound * (1 + 1e-12)))

    # series at y* -+ delta/2 against integration started from the series at y* -+ delta
    delta = exp.delta_trust
    match = []
    for side in (-1.0, 1.0):
        ya, yb = y_star + side * delta, y_star + side * delta / 2
        s0 = exp(ya)[:2]
        res = integrate_ivp(lambda y, u: rhs_newtonian(y, u, p, floor=0.0), ya, s0, yb, 1e-13,
                            atol=1e-16)
        ser = np.array(exp(yb)[:2])
        match.append(float(np.max(np.abs(res.y[-1] - ser))))
    match_ok = max(match) <= 1e-8
    m = {"coefficients_0_1": {k: float(v) for k, v in got.items()},
         "reference_0_1": reference, "abs_err_0_1": low_err, "growth_constant": float(Cg),
         "growth_bound_holds": growth_ok, "series_vs_integration": match,
         "checks": {"orders_0_1_exact": low_ok, "growth_bound": growth_ok,
                    "series_matches_integration": match_ok}}
    return CriterionResult(4, "Sonic series at y*=2.5",
                           "orders 0-1 equal the reference Type-1 values; |c_N| <= C^N/N^2; match 1e-8",
                           low_ok and growth_ok and match_ok, m)


def _rel_newtonian(y, rho, omega, drho, domega, p):
    r1, r2 = ode_residual(y, rho, omega, drho, domega, p)
    # residuals in units of the natural derivative scales value / y
    return np.maximum(np.abs(r1) * y / np.abs(rho), np.abs(r2) * y / np.maximum(np.abs(omega), 1.0))


def _rel_relativistic(x, D, W, dD, dW, p):
    r1, r2 = ode_residual_rel(x, D, W, dD, dW, p)
    return np.maximum(np.abs(r1) * x / np.abs(D), np.abs(r2) * x / np.maximum(np.abs(W), 1.0))


def explicit_oracles(n: int = 100, seed: int = SEED) -> CriterionResult:
    rng = np.random.default_rng(seed)
    y = 10.0 ** rng.uniform(-2, 4, n)
    gam = rng.uniform(1.0, 1.3, n)
    gam[0] = 1.0
    eps = rng.uniform(0.0, 0.05, n)
    eps[0] = 0.0
    nf, nff, rf, rff = [], [], [], []
    for yi, g, e in zip(y, gam, eps):
        p = GammaParams(float(g))
        rho, omega = friedmann_state(p)
        nf.append(float(_rel_newtonian(yi, rho, omega, 0.0, 0.0, p)))
        rho, omega = far_field_state(yi, p)
        nff.append(float(_rel_newtonian(yi, rho, omega, p.tail_exponent * rho / yi, 0.0, p)))
        q = EpsParams(float(e))
        rf.append(float(_rel_relativistic(yi, 1 / 3, 1 / 3, 0.0, 0.0, q)))
        D, W = far_field_rel(yi, q)
        rff.append(float(_rel_relativistic(yi, D, W, q.tail_exponent * D / yi, 0.0, q)))
    worst = {"newtonian_friedmann": max(nf), "newtonian_far_field": max(nff),
             "relativistic_friedmann": max(rf), "relativistic_far_field": max(rff)}
    return CriterionResult(5, "Explicit-solution oracles", "relative ODE residual <= 1e-12 at 100 points",
                           max(worst.values()) <= 1e-12,
                           {"seed": seed, "points": n, "max_relative_residual": worst})


def relativistic_reduction() -> CriterionResult:
    lp, _ = _lp_profile()
    r0 = assemble_rel(EpsParams(0.0), (2.0, 3.0))
    D, W = r0.interpolate(lp.y)
    grid_err = float(max(np.max(np.abs(D - lp.rho) / lp.rho), np.max(np.abs(W - lp.omega) / lp.omega)))
    same_grid = bool(r0.x.size == lp.y.size and np.array_equal(r0.x, lp.y))
    r1 = assemble_rel(EpsParams(1e-3))
    gap = abs(float(r1.meta["x_star_bar"]) - float(lp.meta["y_star_bar"]))
    fz = max(float(np.max(prof.factorization().identity_error)) for prof in (r0, r1))
    checks = {"eps0_matches_newtonian": grid_err <= 1e-8, "eps1e-3_gap": gap <= 0.05,
              "factorization_identity": fz <= 1e-13}
    m = {"eps0_max_relative_difference": grid_err, "eps0_same_grid": same_grid,
         "x_star_bar_eps0": float(r0.meta["x_star_bar"]),
         "x_star_bar_eps1e-3": float(r1.meta["x_star_bar"]),
         "y_star_bar": float(lp.meta["y_star_bar"]), "gap": gap,
         "factorization_error": fz, "checks": checks}
    return CriterionResult(6, "Relativistic reduction",
                           "eps=0 equals gamma=1 pointwise to 1e-8; |x*-y*| <= 0.05 at eps=1e-3; identity 1e-13",
                           all(checks.values()), m)


def relativistic_geodesics(eps: float = 0.01) -> CriterionResult:
    prof = assemble_rel(EpsParams(eps))
    ext = extend_upper(reconstruct_comoving(prof))
    rr = rng_roots(ext)
    c = float(ext.meta["d_over_w_min"])
    dw_max = float(ext.meta["d_over_w_max"])
    checks = {
        "F_diverges_near_y_ms": rr.F_near_ms > 1e3,
        "F_diverges_far": rr.F_far > 1e3,
        "negative_sample": rr.negative_sample is not None,
        "two_roots": len(rr.roots) >= 2,
        "finite_Y_ms": math.isfinite(ext.Y_ms) and ext.Y_ms < 0,
        "joint_divergence": bool(ext.meta["d_end"] > 1e6 and ext.meta["w_end"] > 1e6
                                 and ext.meta["inv_chi_end"] > 1e6),
        "d_over_w_in_c_1": c > 0 and dw_max < 1.0,
    }
    m = {"eps": eps, "x_star_bar": float(prof.meta["x_star_bar"]), "roots": [float(r) for r in rr.roots],
         "y_ms": float(rr.y_ms), "Y_ms": float(ext.Y_ms), "F_near_y_ms": float(rr.F_near_ms),
         "F_far": float(rr.F_far),
         "negative_sample": None if rr.negative_sample is None else [float(v) for v in rr.negative_sample],
         "c": c, "d_over_w_max": dw_max, "d_end": float(ext.meta["d_end"]),
         "w_end": float(ext.meta["w_end"]), "inv_chi_end": float(ext.meta["inv_chi_end"]),
         "checks": checks}
    return CriterionResult(7, "Relativistic geodesics at eps=0.01",
                           "|F| > 1e3 at both ends, a negative sample, >= 2 roots, finite Y_ms, d/w in [c, 1)",
                           all(checks.values()), m)


def dust(tol: float = 1e-12, seed: int = SEED) -> CriterionResult:
    model = DustModel.flat_top()
    labels = np.linspace(0.05, 0.95, 7)
    prof_err, tq_err, drift = [], [], []
    for r in labels:
        tr = dust_trajectory(model, float(r), tol=tol)
        g = model.g(float(r))
        m = tr.t <= 0.99 * tr.t_star
        prof_err.append(float(np.max(np.abs(tr.chi[m] - (1.0 - g * tr.t[m]) ** (2.0 / 3.0)))))
        tq_err.append(abs(tr.t_star - tr.t_star_quadrature) / tr.t_star_quadrature)
        drift.append(tr.energy_drift())
    rng = np.random.default_rng(seed)
    exps = []
    for _ in range(20):
        G = float(rng.uniform(0.5, 5.0))
        chi0 = float(rng.uniform(0.5, 2.0))
        chi1 = float(-rng.uniform(0.1, 2.0))
        tr = dust_trajectory(None, 0.0, chi0, chi1, tol=tol, G=G)
        exps.append(blowup_exponent(tr))
        tq_err.append(abs(tr.t_star - tr.t_star_quadrature) / tr.t_star_quadrature)
        drift.append(tr.energy_drift())
    cmap = collapse_map(model, np.linspace(0.01, 0.99, 50))
    increasing = bool(np.all(np.diff(cmap["t_star"]) > 0))
    exp_err = max(abs(e - 2.0 / 3.0) for e in exps)
    checks = {"explicit_profile": max(prof_err) <= 1e-6, "collapse_times": max(tq_err) <= 1e-8,
              "blowup_exponent": exp_err <= 0.01, "energy_drift": max(drift) <= 10 * tol,
              "t_star_increasing": increasing}
    m = {"max_profile_error": max(prof_err), "max_collapse_time_rel_diff": float(max(tq_err)),
         "blowup_exponents": [float(e) for e in exps], "max_exponent_error": float(exp_err),
         "max_energy_drift": float(max(drift)), "tol": tol, "checks": checks}
    return CriterionResult(8, "Dust collapse",
                           "profile 1e-6, t* agreement 1e-8, exponent 2/3 +- 0.01, drift <= 10 tol, t* increasing",
                           all(checks.values()), m)


def neardust_gain(gamma: float = 1.2, n: int = 20) -> CriterionResult:
    run = neardust_phi1(NearDustRun(gamma, n))
    rep = run.report()
    hres = max(float(np.max(np.abs(homogeneous_residual(s, run.tau)))) for s in (4 / 3, -1 / 3))
    checks = {"delta_exact": rep["delta"] == 1.0 / 6.0,
              "sup_finite": math.isfinite(rep["sup_gain_ratio"]),
              "homogeneous_residual": hres <= 1e-12}
    m = dict(rep, homogeneous_residual=hres, checks=checks)
    return CriterionResult(9, "Near-dust gain at (1.2, 20)",
                           "delta = 1/6 exactly, sup ratio finite, homogeneous residual <= 1e-12",
                           all(checks.values()), m)


def affine(seed: int = SEED) -> CriterionResult:
    rng = np.random.default_rng(seed)
    drifts = []
    for _ in range(20):
        A = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
        while np.linalg.det(A) <= 0.1:
            A = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
        st = AffineState(A, 0.5 * rng.standard_normal((3, 3)), float(rng.uniform(0.2, 2.0)))
        tr = sideris_evolve(st, float(rng.uniform(1.1, 5.0 / 3.0)), 100.0)
        drifts.append(tr.energy_drift)
    rad = radial_scale_evolve(RadialScale(1.0, 0.0, 1.0, SIMPLE), gamma=1.4, t_end=1e6)
    le = lane_emden_shoot(0.0)
    vr = le.vacuum_ratio(0.9)
    checks = {"sideris_energy": max(drifts) <= 1e-8,
              "rate_converges": rad.outcome == "expanding" and rad.meta["rate_change_last_decade"] < 1e-3,
              "vacuum_boundary": abs(le.meta["w_boundary"]) <= 1e-10,
              "w_prime_negative": le.w_prime_boundary < 0,
              "vacuum_ratio_bounded": bool(np.all(np.isfinite(vr)) and np.all(vr > 0))}
    m = {"max_sideris_drift": float(max(drifts)), "rate": float(rad.meta["rate"]),
         "rate_change_last_decade": float(rad.meta["rate_change_last_decade"]),
         "w0": float(le.w_centre), "w_boundary": float(le.meta["w_boundary"]),
         "w_prime_boundary": le.w_prime_boundary,
         "vacuum_ratio_range": [float(vr.min()), float(vr.max())], "checks": checks}
    return CriterionResult(10, "Affine flows",
                           "Sideris drift <= 1e-8, rate change < 1e-3, w(1) = 0 to 1e-10, w'(1) < 0",
                           all(checks.values()), m)


CRITERIA = {
    1: lp_sonic_point,
    2: lp_boundary_data,
    3: yahil_runs,
    4: sonic_series,
    5: explicit_oracles,
    6: relativistic_reduction,
    7: relativistic_geodesics,
    8: dust,
    9: neardust_gain,
    10: affine,
}


def run_criterion(number: int) -> CriterionResult:
    return CRITERIA[number]()
