"""``collapse-lab <subcommand> [--config FILE] [--key value ...] --out DIR``.

Exit codes: 0 when every diagnostic passes, 1 when one fails (the summary is
still written), 2 for configuration errors (one-line reason on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import filecmp
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import acceptance
from .io import (ConfigError, plot_script, read_config, write_config, write_csv, write_json,
                 write_text)
from .validation import InvalidParameter

THREADS_ENV = "COLLAPSE_LAB_THREADS"


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float, int, bool, str, floats, float?
    default: object
    help: str = ""


def _parse(key: Key, raw: str):
    s = raw.strip()
    try:
        if key.kind == "float":
            v = float(s)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key.kind == "float?":
            return None if s.lower() in ("", "auto", "none") else _parse(Key(key.name, "float", None), s)
        if key.kind == "int":
            return int(s)
        if key.kind == "bool":
            low = s.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if key.kind == "floats":
            return [_parse(Key(key.name, "float", None), t) for t in s.split(",") if t.strip()]
        return s
    except ValueError:
        raise ConfigError(f"{key.name}: cannot read {raw!r} as {key.kind}") from None


def resolve_config(keys: list[Key], file_values: dict[str, str], flag_values: dict[str, str],
                   solver: str) -> dict:
    """Defaults, then the config file, then flags."""
    table = {k.name: k for k in keys}
    cfg = {k.name: k.default for k in keys}
    for source in (file_values, flag_values):
        for name, raw in source.items():
            if name not in table:
                raise ConfigError(f"unknown key {name!r} for {solver} (known: {', '.join(sorted(table))})")
            cfg[name] = _parse(table[name], raw)
    return cfg


def _split_flags(extra: list[str]) -> dict[str, str]:
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"unexpected argument {tok!r}")
        name = tok[2:]
        if "=" in name:
            name, value = name.split("=", 1)
            i += 1
        elif i + 1 < len(extra) and not extra[i + 1].startswith("--"):
            value = extra[i + 1]
            i += 2
        else:
            value = "true"  # bare switch
            i += 1
        out[name.replace("-", "_")] = value
    return out


def threads_from_env() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {n}")
    return n


# ---------------------------------------------------------------- run bookkeeping

@dataclass
class Run:
    solver: str
    out: Path
    config: dict
    headline: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    panels: list = field(default_factory=list)

    def check(self, name: str, passed, value=None):
        self.diagnostics[name] = {"passed": bool(passed), "value": value}

    def csv(self, name: str, columns: dict):
        write_csv(self.out / name, columns)

    def plot(self, csv: str, x: str, y: list, title: str, png: str, **flags):
        self.panels.append(dict(csv=csv, x=x, y=list(y), title=title, png=png, **flags))

    @property
    def passed(self) -> bool:
        return all(d["passed"] for d in self.diagnostics.values())

    def summary(self) -> dict:
        return {"solver": self.solver, "headline": self.headline, "diagnostics": self.diagnostics,
                "all_passed": self.passed, **self.extra}

    def finish(self):
        write_config(self.out / "config.txt", self.solver, self.config)
        write_json(self.out / "summary.json", self.summary())
        if self.panels:
            write_text(self.out / "plot.py", plot_script(self.panels))


def _failed_pipeline(run: Run, exc: Exception):
    run.check("pipeline_completed", False, f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------- subcommands

SELFSIM_KEYS = [
    Key("window_lo", "float", 2.0, "left end of the sonic-point search window"),
    Key("window_hi", "float", 3.0, "right end of the sonic-point search window"),
    Key("tol", "float", 1e-12, "bisection width for the sonic point"),
    Key("y_min", "float", 1e-4, "left end of the profile"),
    Key("y_max", "float", 1e4, "right end of the profile"),
    Key("order", "int", 40, "Taylor order at the sonic point"),
    Key("ode_tol", "float", 1e-12, "integrator tolerance"),
]


def _selfsim(run: Run, gamma: float, omega0_tol: float):
    from .newtonian.params import GammaParams
    from .newtonian.shooting import CSV_COLUMNS, assemble_lp
    from .validation import check_window

    c = run.config
    p = GammaParams(gamma)
    window = check_window((c["window_lo"], c["window_hi"]))
    run.extra["density_convention"] = p.convention
    try:
        prof = assemble_lp(p, window, c["tol"], y_min=c["y_min"], y_max=c["y_max"], N=c["order"],
                           ode_tol=c["ode_tol"])
    except Exception as exc:
        _failed_pipeline(run, exc)
        return
    d = prof.meta["diagnostics"]
    run.headline.update(gamma=gamma, y_star_bar=prof.meta["y_star_bar"], rho0=d["rho0"],
                        omega0=d["omega0"], omega_end=d["omega_end"], tail_exponent=d["tail_exponent"],
                        y_trusted=d["y_trusted"])
    run.check("pipeline_completed", True)
    run.check("G_positive_left", d["G_positive_left"])
    run.check("G_negative_right", d["G_negative_right"])
    run.check("single_sonic_point", d["G_sign_changes"] == 1, d["G_sign_changes"])
    run.check("omega0_friedmann", abs(d["omega0"] - p.omega_friedmann) <= omega0_tol,
              d["omega0"] - p.omega_friedmann)
    run.check("rho0_positive", d["rho0"] > 0, d["rho0"])
    run.check("tail_exponent", abs(d["tail_exponent"] / p.tail_exponent - 1.0) <= 0.01,
              d["tail_exponent"])
    run.check("omega_trapped_right", d["omega_trapped_right"])
    run.check("omega_monotone_left", d["omega_monotone_left"])
    run.check("max_residual", d["max_residual"] <= 1e-6, d["max_residual"])
    cols = prof.columns()
    run.csv("profile.csv", {k: cols[k] for k in CSV_COLUMNS})
    run.plot("profile.csv", "y", ["rho", "omega"], "density and velocity", "profile.png", logx=True)
    run.plot("profile.csv", "y", ["rho"], "density tail", "tail.png", logx=True, logy=True)


def run_lp(run: Run):
    _selfsim(run, 1.0, 1e-3)


def run_yahil(run: Run):
    from .validation import check_gamma

    g = check_gamma(run.config["gamma"])
    if g == 1.0:
        raise ConfigError("gamma=1 is the isothermal case; use the lp subcommand")
    _selfsim(run, g, 2e-3)


REL_KEYS = [
    Key("eps", "float", 0.01, "squared sound speed"),
    Key("window_lo", "float?", None, "left end of the window (auto: 2 + min(10 eps, 0.1))"),
    Key("window_hi", "float?", None, "right end of the window (auto: 3 - min(10 eps, 0.1))"),
    Key("tol", "float", 1e-12, "bisection width for the sonic point"),
    Key("x_min", "float", 1e-4, "left end of the profile"),
    Key("x_max", "float", 1e4, "right end of the profile"),
    Key("order", "int", 40, "Taylor order at the sonic point"),
    Key("ode_tol", "float", 1e-12, "integrator tolerance"),
]


def _rel_profile(run: Run):
    from .relativistic.params import EpsParams
    from .relativistic.shooting import CSV_COLUMNS, assemble_rel
    from .validation import check_eps, check_window

    c = run.config
    p = EpsParams(check_eps(c["eps"]))
    if (c["window_lo"] is None) != (c["window_hi"] is None):
        raise ConfigError("give both window_lo and window_hi or neither")
    window = None if c["window_lo"] is None else check_window((c["window_lo"], c["window_hi"]))
    run.extra["eps"] = p.eps
    try:
        prof = assemble_rel(p, window, c["tol"], x_min=c["x_min"], x_max=c["x_max"], N=c["order"],
                            ode_tol=c["ode_tol"])
    except Exception as exc:
        _failed_pipeline(run, exc)
        return None
    d = prof.meta["diagnostics"]
    run.extra["x_star"] = d["x_star_bar"]
    run.headline.update(eps=p.eps, x_star_bar=d["x_star_bar"], D0=d["D0"], W0=d["W0"], W_end=d["W_end"],
                        tail_exponent=d["tail_exponent"], x_trusted=d["x_trusted"])
    run.check("pipeline_completed", True)
    run.check("factorization_identity", d["factorization_error"] <= 1e-13, d["factorization_error"])
    run.check("sandwich_left", d["sandwich_left"], d["sandwich_left_violation"])
    run.check("f_positive_left", d["f_positive_left"])
    run.check("sandwich_right", d["sandwich_right"], d["sandwich_right_violation"])
    run.check("W_above_D_right", d["W_above_D_right"])
    run.check("xW_above_J_right", d["xW_above_J_right"])
    run.check("single_sonic_point", d["B_sign_changes"] == 1, d["B_sign_changes"])
    run.check("W0_friedmann", abs(d["W0"] - 1.0 / 3.0) <= 1e-3, d["W0"])
    run.check("W_far_field", abs(d["W_end"] - 1.0) <= 1e-2, d["W_end"])
    run.check("tail_exponent", abs(d["tail_exponent"] / p.tail_exponent - 1.0) <= 0.01, d["tail_exponent"])
    run.check("max_residual", d["max_residual"] <= 1e-6, d["max_residual"])
    cols = prof.columns()
    run.csv("profile.csv", {k: cols[k] for k in CSV_COLUMNS})
    run.plot("profile.csv", "x", ["D", "W"], "density and velocity", "profile.png", logx=True)
    run.plot("profile.csv", "x", ["D"], "density tail", "tail.png", logx=True, logy=True)
    return prof


def _comoving(run: Run, prof):
    from .relativistic.comoving import CSV_COLUMNS, reconstruct_comoving

    try:
        com = reconstruct_comoving(prof, ode_tol=run.config["ode_tol"])
    except Exception as exc:
        run.check("comoving_completed", False, f"{type(exc).__name__}: {exc}")
        return None
    m = com.meta
    run.check("constraint_residual", m["max_constraint_residual"] <= 1e-6, m["max_constraint_residual"])
    run.check("sonic_S_zero", abs(m["sonic_S"]) <= 1e-8, m["sonic_S"])
    run.headline.update(y_star=m["y_star"], lapse_tail_exponent=com.lapse_tail_fit().exponent)
    cols = com.columns()
    run.csv("comoving.csv", {k: cols[k] for k in CSV_COLUMNS})
    run.plot("comoving.csv", "y", ["mu", "lambda"], "metric potentials", "metric.png", logx=True)
    return com


def run_rlp(run: Run):
    prof = _rel_profile(run)
    run.extra.update(roots=None, Y_ms=None)
    if prof is not None:
        _comoving(run, prof)


GEO_KEYS = REL_KEYS + [
    Key("series_order", "int", 3, "order of the chart series at Y = 0"),
    Key("Y_start", "float", -1e-3, "where the chart integration leaves the series"),
    Key("Y_floor", "float", -50.0, "integration limit in the chart"),
    Key("w_blowup", "float", 1e8, "w level that marks the blow-up"),
    Key("n_samples", "int", 400, "slopes sampled for sign changes"),
    Key("y_far", "float", 1e6, "largest |y| sampled"),
]


def run_geodesics(run: Run):
    from .relativistic.extension import CSV_COLUMNS, extend_upper, rng_roots

    c = run.config
    if c["eps"] <= 0:
        raise ConfigError("geodesics needs eps > 0")
    run.extra.update(roots=None, Y_ms=None)
    prof = _rel_profile(run)
    com = _comoving(run, prof) if prof is not None else None
    if com is None:
        return
    try:
        ext = extend_upper(com, order=c["series_order"], Y_start=c["Y_start"], Y_floor=c["Y_floor"],
                           w_blowup=c["w_blowup"], ode_tol=c["ode_tol"])
        rr = rng_roots(ext, n_samples=c["n_samples"], y_far=c["y_far"])
    except Exception as exc:
        run.check("extension_completed", False, f"{type(exc).__name__}: {exc}")
        return
    m = ext.meta
    run.extra.update(roots=list(rr.roots), Y_ms=ext.Y_ms)
    run.headline.update(roots=list(rr.roots), Y_ms=ext.Y_ms, y_ms=rr.y_ms, c=m["d_over_w_min"],
                        divergence_rate=m["divergence_rate"], dh0=m["dh0"], w1=m["w1"])
    run.check("finite_Y_ms", math.isfinite(ext.Y_ms) and ext.Y_ms < 0, ext.Y_ms)
    run.check("joint_divergence", min(m["d_end"], m["w_end"], m["inv_chi_end"]) > 1e6,
              [m["d_end"], m["w_end"], m["inv_chi_end"]])
    run.check("d_over_w_sandwich", m["d_over_w_min"] > 0 and m["d_over_w_max"] < 1.0,
              [m["d_over_w_min"], m["d_over_w_max"]])
    run.check("F_diverges_near_y_ms", rr.F_near_ms > 1e3, rr.F_near_ms)
    run.check("F_diverges_far", rr.F_far > 1e3, rr.F_far)
    run.check("negative_sample", rr.negative_sample is not None,
              None if rr.negative_sample is None else list(rr.negative_sample))
    run.check("two_roots", len(rr.roots) >= 2, len(rr.roots))
    cols = ext.columns()
    run.csv("extension.csv", {k: cols[k] for k in CSV_COLUMNS})
    run.csv("null_slope.csv", {"y": rr.table[:, 0], "F": rr.table[:, 1]})
    run.plot("extension.csv", "Y", ["d", "w"], "chart variables", "extension.png", logy=True)
    run.plot("null_slope.csv", "y", ["F"], "null-slope function", "null_slope.png", abs=True, logy=True)


DUST_KEYS = [
    Key("rho_bar", "float", 1.0, "central density"),
    Key("n", "int", 4, "flatness exponent of rho_bar (1 - r^n)"),
    Key("homogeneous", "bool", False, "use a constant density instead"),
    Key("labels", "int", 41, "number of labels in the collapse map"),
    Key("label_min", "float", 0.0, "smallest label"),
    Key("label_max", "float", 1.0, "largest label"),
    Key("trajectory_labels", "floats", [0.25, 0.5, 0.75], "labels with exported trajectories"),
    Key("tol", "float", 1e-12, "integrator tolerance"),
]


def run_dust(run: Run):
    from .dust.model import DustModel, blowup_exponent, collapse_map, dust_trajectory, eulerian_density

    c = run.config
    if c["labels"] < 2 or not (0.0 <= c["label_min"] < c["label_max"] <= 1.0):
        raise ConfigError("need labels >= 2 and 0 <= label_min < label_max <= 1")
    if any(not (0.0 <= r <= 1.0) for r in c["trajectory_labels"]):
        raise ConfigError("trajectory_labels must lie in [0, 1]")
    try:
        model = (DustModel.homogeneous(c["rho_bar"]) if c["homogeneous"]
                 else DustModel.flat_top(c["rho_bar"], c["n"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    run.extra["model"] = model.name
    labels = np.linspace(c["label_min"], c["label_max"], c["labels"])
    cmap = collapse_map(model, labels)
    ts = cmap["t_star"]
    run.csv("collapse_map.csv", cmap)
    run.plot("collapse_map.csv", "r", ["t_star"], "collapse time", "collapse_map.png")
    if c["homogeneous"]:
        spread = float((ts.max() - ts.min()) / ts.max())
        run.check("t_star_constant", spread <= 1e-12, spread)
    else:
        run.check("t_star_increasing", bool(np.all(np.diff(ts) > 0)), float(np.min(np.diff(ts))))
    drift, tdiff, prof_err, exps = [], [], [], []
    for r in c["trajectory_labels"]:
        tr = dust_trajectory(model, r, tol=c["tol"])
        g = model.g(r)
        m = tr.t <= 0.99 * tr.t_star
        prof_err.append(float(np.max(np.abs(tr.chi[m] - (1.0 - g * tr.t[m]) ** (2.0 / 3.0)))))
        drift.append(tr.energy_drift())
        tdiff.append(abs(tr.t_star - tr.t_star_quadrature) / tr.t_star_quadrature)
        exps.append(blowup_exponent(tr))
        name = f"trajectory_r{r:g}.csv"
        run.csv(name, {"t": tr.t, "chi": tr.chi, "chi_t": tr.chi_t, "energy": tr.energy})
        run.plot(name, "t", ["chi"], f"shell r={r:g}", name.replace(".csv", ".png"))
    if c["trajectory_labels"]:
        run.check("energy_drift", max(drift) <= 10 * c["tol"], max(drift))
        run.check("quadrature_agreement", max(tdiff) <= 1e-8, max(tdiff))
        run.check("explicit_profile", max(prof_err) <= 1e-6, max(prof_err))
        run.check("blowup_exponent", max(abs(e - 2 / 3) for e in exps) <= 0.01, exps)
    # density and Jacobian just before the first collapse
    t_probe = 0.99 * float(ts.min())
    inner = labels[labels > 0]
    dens = eulerian_density(model, t_probe, inner, tol=c["tol"])
    run.check("jacobian_nonnegative", bool(np.all(dens["jacobian"] >= 0)), float(np.min(dens["jacobian"])))
    run.csv("density.csv", dens)
    run.headline.update(t_star_min=float(ts.min()), t_star_max=float(ts.max()), t_probe=t_probe,
                        blowup_exponents=exps)


NEARDUST_KEYS = [
    Key("gamma", "float", 1.2, "adiabatic index in (1, 4/3)"),
    Key("n", "int", 20, "flatness exponent"),
    Key("tau_min", "float", 1e-8, "smallest time to collapse"),
    Key("n_tau", "int", 81, "number of tau samples"),
    Key("n_r", "int", 41, "number of r samples"),
]


def run_neardust(run: Run):
    from .dust.neardust import NearDustRun, homogeneous_residual, neardust_phi1

    c = run.config
    if not (0 < c["tau_min"] < 1) or c["n_tau"] < 2 or c["n_r"] < 2:
        raise ConfigError("need 0 < tau_min < 1, n_tau >= 2, n_r >= 2")
    try:
        nd = NearDustRun(c["gamma"], c["n"], np.logspace(np.log10(c["tau_min"]), 0, c["n_tau"]),
                         np.linspace(0.0, 1.0, c["n_r"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    neardust_phi1(nd)
    rep = nd.report()
    write_json(run.out / "neardust.json", rep)
    hres = max(float(np.max(np.abs(homogeneous_residual(s, nd.tau)))) for s in (4 / 3, -1 / 3))
    run.headline.update(rep)
    run.check("delta_positive", rep["delta"] > 0, rep["delta"])
    run.check("gain_ratio_finite", math.isfinite(rep["sup_gain_ratio"]), rep["sup_gain_ratio"])
    run.check("homogeneous_residual", hres <= 1e-12, hres)
    T, R = np.meshgrid(nd.tau, nd.r, indexing="ij")
    run.csv("phi1.csv", {"tau": T.ravel(), "r": R.ravel(), "phi1": nd.phi1.ravel(),
                         "gain_ratio": nd.gain_ratio.ravel()})
    sup = np.max(nd.gain_ratio, axis=1)
    run.csv("gain.csv", {"tau": nd.tau, "sup_gain_ratio": sup})
    run.plot("gain.csv", "tau", ["sup_gain_ratio"], "gain ratio over r", "gain.png", logx=True)


AFFINE_KEYS = [
    Key("model", "str", "simple", "simple, gw or sideris"),
    Key("gamma", "float", 1.4, "adiabatic index"),
    Key("delta", "float", 1.0, "pressure strength (sign matters for gw)"),
    Key("lam0", "float", 1.0, "initial scale"),
    Key("lamdot0", "float", 0.0, "initial scale velocity"),
    Key("t_end", "float", 1e6, "final time"),
    Key("seed", "int", 0, "seed for the random sideris data"),
    Key("tol", "float", 1e-12, "integrator tolerance"),
]


def run_affine(run: Run):
    from .affine.radial import GW, SIMPLE, RadialScale, radial_scale_evolve
    from .affine.sideris import AffineState, sideris_evolve

    c = run.config
    model = c["model"]
    if model == "sideris":
        if c["gamma"] <= 1 or c["delta"] <= 0:
            raise ConfigError("sideris needs gamma > 1 and delta > 0")
        rng = np.random.default_rng(c["seed"])
        A = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
        while np.linalg.det(A) <= 0.1:
            A = np.eye(3) + 0.2 * rng.standard_normal((3, 3))
        tr = sideris_evolve(AffineState(A, 0.5 * rng.standard_normal((3, 3)), c["delta"]), c["gamma"],
                            c["t_end"], tol=c["tol"])
        cols = {"t": tr.t}
        for i in range(3):
            for j in range(3):
                cols[f"A{i + 1}{j + 1}"] = tr.A[:, i, j]
        cols["energy"] = tr.energy
        run.csv("trajectory.csv", cols)
        run.plot("trajectory.csv", "t", ["A11", "A22", "A33"], "diagonal of A", "trajectory.png")
        run.check("energy_drift", tr.energy_drift <= 1e-8, tr.energy_drift)
        run.check("det_positive", bool(np.all(tr.det > 0)), float(np.min(tr.det)))
        run.headline.update(singular_values_over_t=tr.singular_values_over_t[-1], energy=tr.energy[0])
        return
    if model not in (GW, SIMPLE):
        raise ConfigError(f"model must be simple, gw or sideris, got {model!r}")
    try:
        st = RadialScale(c["lam0"], c["lamdot0"], c["delta"], model)
        tr = radial_scale_evolve(st, c["gamma"], c["t_end"], tol=c["tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    run.csv("trajectory.csv", {"t": tr.t, "lambda": tr.lam, "energy": tr.energy})
    run.plot("trajectory.csv", "t", ["lambda"], "scale factor", "trajectory.png")
    run.headline.update(outcome=tr.outcome, **{k: v for k, v in tr.meta.items()})
    run.check("energy_drift", tr.energy_drift <= 1e-8, tr.energy_drift)
    if tr.outcome == "expanding":
        run.check("rate_converges", tr.meta["rate_change_last_decade"] < 1e-3, tr.meta["rate_change_last_decade"])
    elif tr.outcome == "collapse":
        run.check("collapse_exponent", abs(tr.meta["collapse_exponent"] - 2 / 3) <= 0.01,
                  tr.meta["collapse_exponent"])
    # the energy sign decides the fate when the scale starts at rest
    expect = "expanding" if tr.meta["E0"] >= 0 and c["lamdot0"] >= 0 else None
    if expect is not None:
        run.check("energy_dichotomy", tr.outcome == expect, tr.outcome)


LE_KEYS = [
    Key("delta", "float", 0.0, "pressure strength of the confining term"),
    Key("vacuum_tol", "float", 1e-10, "tolerance on w(1) = 0"),
    Key("n_grid", "int", 401, "grid points on [0, 1]"),
]


def run_lane_emden(run: Run):
    from .affine.lane_emden import lane_emden_shoot

    c = run.config
    if c["delta"] < 0 or c["n_grid"] < 11:
        raise ConfigError("need delta >= 0 and n_grid >= 11")
    try:
        prof = lane_emden_shoot(c["delta"], vacuum_tol=c["vacuum_tol"], n_grid=c["n_grid"])
    except Exception as exc:
        _failed_pipeline(run, exc)
        return
    m = prof.meta
    vr = prof.vacuum_ratio(0.9)
    run.headline.update(w0=m["w0"], w_boundary=m["w_boundary"], w_prime_boundary=prof.w_prime_boundary,
                        sign_changes=m["sign_changes"])
    run.check("vacuum_boundary", abs(m["w_boundary"]) <= c["vacuum_tol"], m["w_boundary"])
    run.check("w_prime_negative", prof.w_prime_boundary < 0, prof.w_prime_boundary)
    run.check("positive_inside", m["positive_inside"])
    run.check("vacuum_ratio_bounded", bool(np.all(np.isfinite(vr)) and np.all(vr > 0)),
              [float(vr.min()), float(vr.max())])
    run.check("single_sign_change", len(m["sign_changes"]) == 1, len(m["sign_changes"]))
    run.csv("lane_emden.csv", {"r": prof.r, "w": prof.w, "w_prime": prof.w_prime})
    run.plot("lane_emden.csv", "r", ["w"], "enthalpy", "lane_emden.png")


VERIFY_KEYS = [
    Key("criteria", "floats", [float(k) for k in acceptance.CRITERIA], "criteria to run (1-10)"),
    Key("determinism", "bool", True, "repeat two cheap runs and compare bytes"),
]


def _criterion_job(number: int) -> dict:
    try:
        res = acceptance.run_criterion(number)
    except Exception as exc:
        res = acceptance.CriterionResult(number, "error", "", False,
                                         {"error": f"{type(exc).__name__}: {exc}"})
    return res.to_dict()


DETERMINISM_PROBES = (("lane-emden", {}), ("dust", {"homogeneous": "true", "labels": "11"}))


def _determinism_probe() -> dict:
    out = {}
    for name, flags in DETERMINISM_PROBES:
        with tempfile.TemporaryDirectory() as tmp:
            a, b = Path(tmp) / "a", Path(tmp) / "b"
            for d in (a, b):
                execute(name, {}, flags, d)
            files = sorted(p.name for p in a.iterdir())
            same = sorted(p.name for p in b.iterdir()) == files and all(
                filecmp.cmp(a / f, b / f, shallow=False) for f in files)
            out[name] = {"files": files, "identical": same}
    return out


def run_verify_all(run: Run):
    numbers = []
    for v in run.config["criteria"]:
        if v != int(v) or int(v) not in acceptance.CRITERIA:
            raise ConfigError(f"criteria must be among {sorted(acceptance.CRITERIA)}, got {v!r}")
        numbers.append(int(v))
    threads = threads_from_env()
    if threads > 1 and len(numbers) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(numbers))) as pool:
            results = list(pool.map(_criterion_job, numbers))
    else:
        results = [_criterion_job(n) for n in numbers]
    if run.config["determinism"]:
        probe = _determinism_probe()
        ok = all(v["identical"] for v in probe.values())
        results.append({"number": 11, "title": "Determinism", "passed": ok,
                        "tolerance": "repeated runs byte-identical (probe runs; full check repeats verify-all)",
                        "measured": probe})
    for r in results:
        run.check(f"criterion_{r['number']:02d}", r["passed"], r["title"])
    write_json(run.out / "acceptance.json", results)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["number", "title", "passed"])
    w.writerows([r["number"], r["title"], int(r["passed"])] for r in results)
    write_text(run.out / "acceptance.csv", buf.getvalue())
    run.plot("acceptance.csv", "number", ["passed"], "acceptance matrix", "acceptance.png")
    for r in results:
        mark = "PASS" if r["passed"] else "FAIL"
        print(f"[{mark}] criterion {r['number']:2d}: {r['title']}", file=sys.stderr)


@dataclass(frozen=True)
class Subcommand:
    keys: list
    runner: Callable
    help: str


SUBCOMMANDS = {
    "lp": Subcommand(SELFSIM_KEYS, run_lp, "isothermal self-similar collapse profile"),
    "yahil": Subcommand([Key("gamma", "float", 1.2, "adiabatic index in (1, 4/3)")] + SELFSIM_KEYS,
                        run_yahil, "polytropic self-similar collapse profile"),
    "rlp": Subcommand(REL_KEYS, run_rlp, "relativistic profile and its comoving form"),
    "dust": Subcommand(DUST_KEYS, run_dust, "pressureless collapse"),
    "neardust": Subcommand(NEARDUST_KEYS, run_neardust, "first near-dust correction and its gain"),
    "affine": Subcommand(AFFINE_KEYS, run_affine, "affine and radial-scale flows"),
    "lane-emden": Subcommand(LE_KEYS, run_lane_emden, "vacuum-boundary enthalpy profile"),
    "geodesics": Subcommand(GEO_KEYS, run_geodesics, "upper extension and radial null slopes"),
    "verify-all": Subcommand(VERIFY_KEYS, run_verify_all, "acceptance matrix"),
}


def execute(name: str, file_values: dict, flag_values: dict, out) -> Run:
    """Resolve the config, run ``name`` into ``out`` and write the summary."""
    sub = SUBCOMMANDS[name]
    cfg = resolve_config(sub.keys, file_values, flag_values, name)
    out = Path(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc.strerror or exc}") from None
    run = Run(name, out, cfg)
    try:
        sub.runner(run)
    except InvalidParameter as exc:
        raise ConfigError(str(exc)) from None
    run.finish()
    return run


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    epilog = "\n".join(
        f"  {name:<11} {sub.help}; keys: " + ", ".join(f"{k.name}={k.default}" for k in sub.keys)
        for name, sub in SUBCOMMANDS.items())
    p = _Parser(prog="collapse-lab", formatter_class=argparse.RawDescriptionHelpFormatter,
                description="Self-similar collapse laboratory.",
                epilog=f"subcommands:\n{epilog}\n\nenv: {THREADS_ENV} caps verify-all parallelism.")
    p.add_argument("subcommand", choices=sorted(SUBCOMMANDS))
    p.add_argument("--config", type=Path, help="flat key=value file; flags override it")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns, extra = build_parser().parse_known_args(argv)
        flags = _split_flags(extra)
        threads_from_env()
        file_values = {} if ns.config is None else read_config(ns.config)
        t0 = time.perf_counter()
        run = execute(ns.subcommand, file_values, flags, ns.out)
    except ConfigError as exc:
        print(f"collapse-lab: config error: {exc}", file=sys.stderr)
        return 2
    status = "all diagnostics pass" if run.passed else "diagnostic failure"
    print(f"collapse-lab {ns.subcommand}: {status}; {time.perf_counter() - t0:.1f} s; summary in "
          f"{ns.out / 'summary.json'}", file=sys.stderr)
    return 0 if run.passed else 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
