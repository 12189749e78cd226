"""Command-line front end.

    sourceflow <subcommand> --config run.json [--out DIR] [--branch B] [--mu-sweep LIST]

Exit codes: 0 ok, 1 configuration error, 2 numerical failure (a diagnostic
JSON is written to ``DIR/diagnostic.json``), 3 validation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import expansions as ex
from . import io
from .euler import (
    HIGHER,
    LOWER,
    FlowConfig,
    calibrate_vdw_relation,
    density_profile,
    euler_residual,
    existence_radius,
    existence_radius_bisect,
    make_profile,
    mass_flux,
)
from .exceptions import (
    BranchLossError,
    ConvergenceError,
    DomainError,
    ModelKindError,
    NonInvertibleError,
    NoSolutionError,
    NoStepError,
    RegimeError,
    SingularityError,
)
from .isentrope import IsentropeModel, critical_c, f_prime, invertibility
from .phases import classify, phase_profile
from .viscous import ViscousConfig, discrete_residual, solve_bvp, summary

_NUM = {"type": "number"}
_FLOW_CAL = {
    "oneOf": [
        {"type": "object", "properties": {"c0": _NUM}, "required": ["c0"], "additionalProperties": False},
        {"type": "object", "properties": {"rho_inf": _NUM}, "required": ["rho_inf"], "additionalProperties": False},
        {
            "type": "object",
            "properties": {"r_ref": _NUM, "rho_ref": _NUM},
            "required": ["r_ref", "rho_ref"],
            "additionalProperties": False,
        },
    ]
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "gas": {"enum": ["ideal", "vdw"]},
        "n": {"type": "number", "exclusiveMinimum": 0},
        "sigma0": _NUM,
        "R": {"type": "number", "exclusiveMinimum": 0},
        "intensity": {"type": "number", "exclusiveMinimum": 0},
        "calibration": _FLOW_CAL,
        "grid": {
            "type": "object",
            "properties": {
                "r_start": {"type": "number", "exclusiveMinimum": 0},
                "r_end": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 2},
                "spacing": {"enum": ["linear", "log"]},
            },
            "required": ["r_start", "r_end", "points"],
            "additionalProperties": False,
        },
        "viscosity": {
            "type": "object",
            "properties": {
                "eta": {"type": "number", "minimum": 0},
                "zeta": {"type": "number", "minimum": 0},
                "calibration_right": _FLOW_CAL,
            },
            "required": ["eta", "zeta"],
            "additionalProperties": False,
        },
        "branch": {"enum": [LOWER, HIGHER]},
        "expansion": {
            "type": "object",
            "properties": {
                "regime": {"enum": ["SmallI", "LargeI", "regular"]},
                "order": {"type": "integer", "minimum": 0, "maximum": 3},
                "k": {"type": "number", "exclusiveMinimum": 0},
                "constants": {
                    "type": "object",
                    "properties": {
                        key: _NUM for key in ("c1", "c2", "c3", "c4", "f0", "v1", "alpha1", "alpha2")
                    },
                    "additionalProperties": False,
                },
            },
            "required": ["regime"],
            "additionalProperties": False,
        },
    },
    "required": ["gas", "n", "sigma0", "intensity", "calibration", "grid"],
    "additionalProperties": False,
}


class ConfigError(Exception):
    pass


class ValidationFailure(Exception):
    pass


# --- configuration -----------------------------------------------------------

def load_config(path):
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}") from e
    g = cfg["grid"]
    if not g["r_end"] > g["r_start"]:
        raise ConfigError("grid: r_end must exceed r_start")
    return cfg


def build_model(cfg):
    return IsentropeModel(cfg["gas"], cfg["n"], cfg["sigma0"], cfg.get("R", 1.0))


def _flow(model, I, cal):
    if "c0" in cal:
        return FlowConfig(model, I, C0=cal["c0"])
    if "rho_inf" in cal:
        return FlowConfig(model, I, rho_inf=cal["rho_inf"])
    return FlowConfig.from_reference(model, I, cal["r_ref"], cal["rho_ref"])


def build_flow(cfg, model=None):
    return _flow(model or build_model(cfg), cfg["intensity"], cfg["calibration"])


def build_grid(cfg):
    g = cfg["grid"]
    if g.get("spacing", "linear") == "log":
        return np.geomspace(g["r_start"], g["r_end"], g["points"])
    return np.linspace(g["r_start"], g["r_end"], g["points"])


def build_viscous(cfg, flow):
    visc = cfg.get("viscosity")
    if visc is None:
        raise ConfigError("this subcommand needs a 'viscosity' block")
    right = visc.get("calibration_right")
    g = cfg["grid"]
    return ViscousConfig(
        flow,
        visc["eta"],
        visc["zeta"],
        g["r_start"],
        g["r_end"],
        flow_right=None if right is None else _flow(flow.model, flow.I, right),
        N=g["points"] - 1,
    )


def _coeffs(cfg):
    exp = cfg.get("expansion")
    if exp is None:
        raise ConfigError("this subcommand needs an 'expansion' block")
    return ex.SeriesCoefficients(**exp.get("constants", {}))


def _k(cfg):
    exp = cfg.get("expansion") or {}
    if "k" in exp:
        return exp["k"]
    visc = cfg.get("viscosity")
    if visc is not None:
        return visc["zeta"] + 4.0 * visc["eta"] / 3.0
    return 1.0


# --- subcommands -------------------------------------------------------------

def _euler(cfg, branch):
    flow = build_flow(cfg)
    return flow, density_profile(flow, build_grid(cfg), branch=branch)


def cmd_euler_profile(cfg, args, out):
    branch = args.branch or cfg.get("branch", HIGHER)
    flow, prof = _euler(cfg, branch)
    io.write_profile_csv(out / "euler_profile.csv", prof)
    return {"C0": flow.C0, "rho_inf": flow.rho_inf, "r_min": existence_radius(flow), "points": len(prof)}


def cmd_phases(cfg, args, out):
    model = build_model(cfg)
    if not model.is_vdw:
        raise ModelKindError("phases defined only for vdw")
    branch = args.branch or cfg.get("branch", HIGHER)
    flow, prof = _euler(cfg, branch)
    prof = phase_profile(flow, prof)
    io.write_profile_csv(out / "phases.csv", prof)
    return {"C0": flow.C0, "branch": branch}


def _mu_list(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"--mu-sweep: {e}") from e
    if not vals or any(not x > 0 for x in vals):
        raise ConfigError("--mu-sweep needs positive numbers")
    return vals


def cmd_ns_profile(cfg, args, out):
    flow = build_flow(cfg)
    vcfg = build_viscous(cfg, flow)
    if args.mu_sweep:
        runs = [(f"ns_profile_mu={mu!r}.csv", vcfg.with_mu(mu)) for mu in _mu_list(args.mu_sweep)]
    else:
        runs = [("ns_profile.csv", vcfg)]
    summaries = []
    for name, c in runs:
        sol = solve_bvp(c)
        io.write_profile_csv(out / name, sol.profile(c))
        s = summary(sol)
        s["file"] = name
        summaries.append(s)
    io.write_json(out / "ns_summary.json", summaries if args.mu_sweep else summaries[0])
    return {"runs": len(runs)}


def cmd_calibrate(cfg, args, out):
    flow = build_flow(cfg)
    print(repr(flow.C0))
    return None


def _expansion_rows(cfg, model, r):
    exp = cfg["expansion"]
    I = cfg["intensity"]
    k = _k(cfg)
    co = _coeffs(cfg)
    if exp["regime"] == "regular":
        v = ex.regular_series(model, co, I, r, order=exp.get("order", 3), k=k)
        report = ex.regular_order_check(model, co, r, k=k)
        return np.asarray(v), report
    choice = ex.scaling_exponents(model, exp["regime"])
    eps = choice.epsilon(I)
    x = r / I**choice.alpha
    w = ex.singular_series(model, choice, x, co, eps, k)
    report = ex.singular_order_check(model, choice.regime, co, x, k=k)
    return np.asarray(w) * I**choice.beta, report


def cmd_expand(cfg, args, out):
    model = build_model(cfg)
    flow = build_flow(cfg, model)
    r = build_grid(cfg)
    v, report = _expansion_rows(cfg, model, r)
    io.write_profile_csv(out / "expansion.csv", make_profile(flow, r, v, "series"))
    io.write_json(out / "order_fit.json", report)
    return report


# --- validation --------------------------------------------------------------

def _check(name, value, threshold, ok):
    return {"name": name, "value": value, "threshold": threshold, "pass": bool(ok)}


def _validate_csv(cfg, args, flow):
    try:
        cols = io.read_profile_csv(args.input)
    except (OSError, ValueError) as e:
        raise ConfigError(f"--input: {e}") from e
    r, v = cols["r"], cols["v"]
    model = flow.model
    checks = []
    if cfg.get("viscosity") is not None:
        vcfg = build_viscous(cfg, flow)
        mu = args.mu if args.mu is not None else vcfg.mu
        res = float(np.max(np.abs(discrete_residual(vcfg, r, v, mu)))) if len(r) > 2 else 0.0
        checks.append(_check("ns_residual", res, vcfg.tol * flow.scale, res <= vcfg.tol * flow.scale))
    else:
        res = float(np.max(np.abs(euler_residual(flow, r, v))))
        checks.append(_check("euler_residual", res, 1e-9 * flow.scale, res <= 1e-9 * flow.scale))
    prof = make_profile(flow, r, v, "check")
    for name in ("rho", "T", "p", "U"):
        ref = getattr(prof, name)
        err = float(np.max(np.abs(cols[name] - ref) / np.maximum(np.abs(ref), 1e-300)))
        checks.append(_check(f"{name}_consistency", err, 1e-12, err <= 1e-12))
    flux = mass_flux(flow, r, v)
    err = float(np.max(np.abs(flux / flow.J - 1.0)))
    checks.append(_check("mass_flux", err, 1e-12, err <= 1e-12))
    if cols["phase"] is not None:
        labels = np.array([classify(model, float(x)) for x in v])
        bad = int(np.sum(labels != cols["phase"]))
        checks.append(_check("phase_labels", bad, 0, bad == 0))
    return checks


def _validate_suite(cfg, args, flow):
    model = flow.model
    checks = []
    a, b = existence_radius(flow), existence_radius_bisect(flow)
    if math.isfinite(a) and a > 0:
        err = abs(a / b - 1.0)
    else:
        err = 0.0 if a == b else math.inf
    tol = 1e-5 if model.is_vdw else 1e-6
    checks.append(_check("existence_radius", err, tol, err <= tol))
    try:
        _, prof = _euler(cfg, args.branch or cfg.get("branch", HIGHER))
        res = float(np.max(np.abs(euler_residual(flow, prof.r, prof.v))))
        checks.append(_check("euler_residual", res, 1e-9 * flow.scale, res <= 1e-9 * flow.scale))
        flux = float(np.max(np.abs(mass_flux(flow, prof.r, prof.v) / flow.J - 1.0)))
        checks.append(_check("mass_flux", flux, 1e-12, flux <= 1e-12))
    except (NoSolutionError, BranchLossError) as e:
        checks.append(_check("euler_profile", str(e), None, False))
    if model.is_vdw:
        if flow.rho_inf and flow.rho_inf > 0:
            c1 = calibrate_vdw_relation(model, flow.I, flow.rho_inf)
            err = abs(c1 - flow.C0) / flow.scale
            checks.append(_check("vdw_calibration", err, 1e-10, err <= 1e-10))
        inv = invertibility(model)
        v = model.v_pole + np.geomspace(1e-9, 1e3, 100_000)
        scan = bool(np.all(f_prime(model, v) < 0))
        near = abs(model.c - critical_c(model.n)) < 1e-6
        checks.append(_check("invertibility", inv.globally_invertible, scan, near or inv.globally_invertible == scan))
    if cfg.get("expansion") is not None:
        _, report = _expansion_rows(cfg, model, build_grid(cfg))
        checks.append(_check("expansion_order", report["fitted_order"], None, report["pass"]))
    return checks


def cmd_validate(cfg, args, out):
    flow = build_flow(cfg)
    checks = _validate_csv(cfg, args, flow) if args.input else _validate_suite(cfg, args, flow)
    report = {"checks": checks, "pass": all(c["pass"] for c in checks)}
    io.write_json(out / "validation.json", report)
    if not report["pass"]:
        failed = ", ".join(c["name"] for c in checks if not c["pass"])
        raise ValidationFailure(f"failed checks: {failed}")
    return report


COMMANDS = {
    "euler-profile": cmd_euler_profile,
    "ns-profile": cmd_ns_profile,
    "phases": cmd_phases,
    "calibrate": cmd_calibrate,
    "expand": cmd_expand,
    "validate": cmd_validate,
}


def make_parser():
    p = argparse.ArgumentParser(prog="sourceflow", description="Spherical source flow of real gases.")
    p.add_argument("subcommand", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--branch", choices=[LOWER, HIGHER], help="override the configured branch")
    p.add_argument("--mu-sweep", help="comma-separated mu values for ns-profile")
    p.add_argument("--input", help="CSV to re-validate (validate only)")
    p.add_argument("--mu", type=float, help="mu used when re-validating a viscous CSV")
    return p


def _diagnostic(sub, exc):
    kind = type(exc).__name__
    d = {"subcommand": sub, "error": kind, "message": str(exc)}
    if isinstance(exc, (NoSolutionError, BranchLossError)):
        d["diagnostic"] = "no solution branch"
    for attr in ("fold_r", "residual_norm", "roots"):
        if getattr(exc, attr, None) is not None:
            d[attr] = getattr(exc, attr)
    return d


def run(argv=None):
    args = make_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.subcommand](cfg, args, out)
    except (ConfigError, DomainError, RegimeError, ModelKindError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (NoSolutionError, BranchLossError, ConvergenceError, NoStepError, NonInvertibleError,
            SingularityError, FloatingPointError) as e:
        d = _diagnostic(args.subcommand, e)
        out.mkdir(parents=True, exist_ok=True)
        io.write_json(out / "diagnostic.json", d)
        print(f"error: {d.get('diagnostic', d['error'])}: {e}", file=sys.stderr)
        return 2
    except ValidationFailure as e:
        print(f"validation failed: {e}", file=sys.stderr)
        return 3
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
