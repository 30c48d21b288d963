"""Command-line front end.

Each subcommand resolves its parameters from built-in defaults, then an
optional JSON or YAML ``--config`` file, then command-line flags, and writes
``report.json`` plus CSV tables to ``--out``. Exit status: 0 when every check
passes, 1 when a check fails, 2 for usage errors, 3 for I/O errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import yaml

from . import __version__
from .averaging import AverageSpec, verify_central_difference_identity
from .harness import (FAMILIES, TestFunctionSpec, ball_difference_profile, decay_slope,
                      default_slope_window, equivalence_study, generate, random_band_limited,
                      refinement_study, standard_family)
from .io import atomic_write, load_field, rows_to_csv, to_json
from .multipliers import KINDS, A_ell, QuadratureRule, m_ell, tabulate, trig_identity_residual
from .norms import NormParams, norm
from .torus import GridSpec, lp_norm

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def real(text) -> float:
    """Float that also accepts ``inf``."""
    if isinstance(text, bool):
        raise UsageError(f"expected a number, got {text!r}")
    try:
        return float(text)
    except (TypeError, ValueError):
        raise UsageError(f"expected a number, got {text!r}") from None


def integer(text) -> int:
    if isinstance(text, bool):
        raise UsageError(f"expected an integer, got {text!r}")
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise UsageError(f"expected an integer, got {text!r}") from None
    if not value.is_integer():
        raise UsageError(f"expected an integer, got {text!r}")
    return int(value)


def flag(value) -> bool:
    if isinstance(value, bool):
        return value
    if str(value).lower() in ("1", "true", "yes"):
        return True
    if str(value).lower() in ("0", "false", "no"):
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


def int_list(value) -> list:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    if not isinstance(value, (list, tuple)):
        raise UsageError(f"expected a list of integers, got {value!r}")
    return [integer(v) for v in value]


def optional(conv):
    return lambda v: None if v is None or v == "none" else conv(v)


def choice(*options):
    def conv(v):
        if v not in options:
            raise UsageError(f"expected one of {options}, got {v!r}")
        return v
    return conv


@dataclass(frozen=True)
class Option:
    convert: Callable
    default: object
    help: str = ""


_COMMON = {
    "out": Option(str, "ballnorm-out", "output directory"),
    "seed": Option(integer, 0, "random seed"),
}
_FIELD = {
    "family": Option(choice(*FAMILIES), "weierstrass", "test function family"),
    "family_alpha": Option(real, 1.0, "smoothness of the test function"),
    "top_level": Option(optional(integer), None, "last Weierstrass level"),
    "k0": Option(integer, 4, "band_bump centre octave"),
    "cutoff": Option(optional(integer), None, "power_spectrum frequency cap"),
    "dim": Option(integer, 1, "dimension"),
}
_NORM = {
    "space": Option(choice("besov", "tl"), "besov", "function space"),
    "alpha": Option(real, 1.0, "smoothness index of the norm"),
    "p": Option(real, 2.0, "integrability exponent (inf allowed)"),
    "q": Option(real, 2.0, "scale exponent (inf allowed)"),
    "ell": Option(integer, 1, "order of the average"),
    "inhomogeneous": Option(flag, False, "inhomogeneous norm"),
}

SCHEMAS = {
    "multiplier-table": {
        "kind": Option(choice(*KINDS), "A_ell", "multiplier to tabulate"),
        "ell": Option(integer, 1, "order of the average"),
        "dim": Option(integer, 1, "dimension"),
        "s_max": Option(real, 50.0, "largest radius"),
        "samples": Option(integer, 1001, "number of radii"),
        "nodes": Option(optional(integer), None, "Gauss-Legendre nodes (default: sized to s_max)"),
    },
    "verify-identities": {
        "ell": Option(integer, 2, "order of the average"),
        "dim": Option(integer, 1, "dimension"),
        "nodes": Option(integer, 64, "Gauss-Legendre nodes"),
        "s_max": Option(real, 50.0, "largest radius for the multiplier identity"),
        "samples": Option(integer, 10_000, "radii sampled"),
        "fields": Option(integer, 10, "random band-limited fields"),
        "probes": Option(integer, 16, "grid probes per field"),
        "n_samples": Option(integer, 64, "samples per axis for the field checks"),
    },
    "norm": {
        **_NORM, **_FIELD,
        "method": Option(choice("classical", "ball"), "classical", "classical filters or ball differences"),
        "n_samples": Option(integer, 1024, "samples per axis"),
        "input": Option(optional(str), None, "field file (.csv or .npz) instead of a generated one"),
        "stride": Option(integer, 1, "centre stride for p = inf Triebel-Lizorkin sups"),
    },
    "slope": {
        **_FIELD,
        "alpha": Option(real, 0.5, "smoothness of the test function"),
        "ell": Option(integer, 1, "order of the average"),
        "p": Option(real, float("inf"), "integrability exponent"),
        "n_samples": Option(integer, 4096, "samples per axis"),
        "window": Option(optional(int_list), None, "first and last scale of the fit"),
        "tolerance": Option(real, 0.1, "allowed slope error for Weierstrass fields"),
    },
    "equivalence": {
        **_NORM,
        "ell": Option(integer, 2, "order of the average"),
        "dim": Option(integer, 1, "dimension"),
        "grid_sizes": Option(int_list, [1024, 2048], "samples per axis to compare"),
        "tolerance": Option(real, 0.1, "allowed relative bracket drift"),
    },
    "refine": {
        **_NORM, **_FIELD,
        "family": Option(choice(*FAMILIES), "smooth_reference", "test function family"),
        "method": Option(choice("classical", "ball"), "classical", "classical filters or ball differences"),
        "grid_sizes": Option(int_list, [256, 512, 1024], "ascending samples per axis"),
    },
}
# slope takes the field smoothness as --alpha
del SCHEMAS["slope"]["family_alpha"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ballnorm", description="Ball-average norms on the torus.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON or YAML file of parameters")
        for key, opt in {**_COMMON, **schema}.items():
            flag_name = "--" + key.replace("_", "-")
            if opt.convert is flag:
                sp.add_argument(flag_name, action="store_const", const=True, default=argparse.SUPPRESS,
                                help=opt.help)
            else:
                sp.add_argument(flag_name, default=argparse.SUPPRESS, help=opt.help)
    return parser


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise UsageError(f"config {path} does not parse: {exc}") from None
    if not isinstance(data, dict) or not data:
        raise UsageError(f"config {path} must be a non-empty mapping")
    return data


def resolve(command: str, flags: dict, config: Optional[dict] = None) -> dict:
    """Defaults, then config entries, then flags; unknown keys are rejected."""
    schema = {**_COMMON, **SCHEMAS[command]}
    merged = {k: opt.default for k, opt in schema.items()}
    config = dict(config or {})
    if config.pop("command", command) != command:
        raise UsageError(f"config is for another command than {command!r}")
    config = {k.replace("-", "_"): v for k, v in config.items()}
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for source in (config, flags):
        for k, v in source.items():
            merged[k] = schema[k].convert(v)
    return merged


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def check(self, name: str, value: float, tolerance: float, passed: bool, relation: str = "<="):
        self.checks.append({"name": name, "value": float(value), "tolerance": float(tolerance),
                            "relation": relation, "passed": bool(passed)})

    def upper(self, name: str, value: float, tolerance: float):
        self.check(name, value, tolerance, bool(np.isfinite(value) and value <= tolerance))

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "checks": self.checks,
                "passed": self.passed, "result": self.result, "artifacts": self.artifacts}


def _grid(cfg: dict, n_samples: Optional[int] = None) -> GridSpec:
    return GridSpec(cfg["dim"], n_samples or cfg["n_samples"])


def _field_spec(cfg: dict, grid: GridSpec, alpha_key: str = "family_alpha") -> TestFunctionSpec:
    return TestFunctionSpec(cfg["family"], grid, alpha=cfg[alpha_key], top_level=cfg["top_level"],
                            k0=cfg["k0"], seed=cfg["seed"], cutoff=cfg["cutoff"])


def _norm_params(cfg: dict, method: str) -> NormParams:
    return NormParams(cfg["space"], cfg["alpha"], cfg["p"], cfg["q"], cfg["ell"], method,
                      not cfg["inhomogeneous"], stride=cfg.get("stride", 1))


# Each planner validates the configuration and returns a runner; nothing is
# written until every planner has succeeded.

def plan_multiplier_table(cfg):
    if cfg["samples"] < 2:
        raise UsageError("samples must be at least 2")
    rule = QuadratureRule.gauss_legendre(cfg["nodes"]) if cfg["nodes"] else None
    radii = np.linspace(0.0, cfg["s_max"], cfg["samples"])

    def run(rep):
        tab = tabulate(cfg["kind"], cfg["ell"], cfg["dim"], radii, rule)
        rep.result = {"kind": tab.kind, "gamma_n": tab.gamma_n, "node_count": tab.node_count}
        rep.upper("non_finite_entries", float((~np.isfinite(tab.values)).sum()), 0)
        if tab.kind == "A_ell":
            rep.check("min_value", tab.values.min(), -1e-12, bool(tab.values.min() >= -1e-12), ">=")
        return {"multiplier_table.csv": tab.to_csv()}
    return run


def plan_verify_identities(cfg):
    ell, n = cfg["ell"], cfg["dim"]
    grid = _grid(cfg)
    rule = QuadratureRule.gauss_legendre(cfg["nodes"])
    t = min(0.4, 3.0 / ell)

    def run(rep):
        rows = []
        s = np.linspace(0.0, cfg["s_max"], cfg["samples"])
        ident = float(np.max(np.abs(m_ell(ell, n, s, rule) - 1.0 + A_ell(ell, n, s, rule))))
        rep.upper("multiplier_identity", ident, 1e-10)
        trig = float(np.max(trig_identity_residual(ell, np.linspace(0.0, 8 * np.pi, cfg["samples"]))))
        rep.upper("trig_identity", trig, 1e-10)
        rng = np.random.default_rng(cfg["seed"])
        worst = 0.0
        for _ in range(cfg["fields"]):
            f = random_band_limited(grid, grid.nyquist // 2, rng)
            probes = [tuple(rng.integers(0, grid.n_samples, n)) for _ in range(cfg["probes"])]
            resid = verify_central_difference_identity(f, AverageSpec(ell, t), probes)
            worst = max(worst, resid / lp_norm(f, np.inf))
        rep.upper("central_difference_identity", worst, 1e-9)
        for c in rep.checks:
            rows.append((c["name"], c["value"], c["tolerance"], c["passed"]))
        return {"identities.csv": rows_to_csv(["check", "value", "tolerance", "passed"], rows)}
    return run


def plan_norm(cfg):
    params = _norm_params(cfg, cfg["method"])
    if cfg["input"] is None:
        spec = _field_spec(cfg, _grid(cfg))
    elif not Path(cfg["input"]).is_file():
        raise UsageError(f"input field {cfg['input']} does not exist")

    def run(rep):
        f = load_field(cfg["input"]) if cfg["input"] else generate(spec)
        out = norm(f, params)
        rep.result = out.to_dict()
        rep.check("aggregate_finite_nonnegative", out.aggregate, 0.0,
                  bool(np.isfinite(out.aggregate) and out.aggregate >= 0), ">=")
        return {"norm_scales.csv": out.to_csv()}
    return run


def plan_slope(cfg):
    grid = _grid(cfg)
    spec = _field_spec(cfg, grid, alpha_key="alpha")
    window = tuple(cfg["window"]) if cfg["window"] else default_slope_window(grid)
    if len(window) != 2 or window[1] - window[0] < 3:
        raise UsageError("window takes a first and last scale at least 3 apart")

    def run(rep):
        f = generate(spec)
        fit = decay_slope(f, cfg["ell"], cfg["p"], window)
        ks = np.arange(int(fit.window[0]), int(fit.window[1]) + 1)
        mags = ball_difference_profile(f, cfg["ell"], cfg["p"], ks)
        rep.result = {"slope": fit.slope, "intercept": fit.intercept, "window": list(fit.window),
                      "max_residual": fit.max_residual, "degenerate": fit.degenerate}
        if spec.family == "weierstrass":
            expected = -min(cfg["alpha"], 2 * cfg["ell"])
            rep.result["expected_slope"] = expected
            rep.upper("slope_error", abs(fit.slope - expected), cfg["tolerance"])
        return {"slope.csv": rows_to_csv(["k", "magnitude"], zip(ks, mags))}
    return run


def plan_equivalence(cfg):
    params = _norm_params(cfg, "ball")
    sizes = sorted(cfg["grid_sizes"])
    grids = [GridSpec(cfg["dim"], N) for N in sizes]

    def run(rep):
        study = equivalence_study(standard_family(grids[0]), params, sizes)
        rep.result = {"description": study.description, "drift": study.drift,
                      "brackets": {str(N): list(study.bracket(N)) for N in sizes}}
        rep.check("ratios_positive_finite", float(study.valid), 1.0, study.valid, "==")
        rep.upper("bracket_drift", study.drift, cfg["tolerance"])
        return {"ratios.csv": rows_to_csv(["n_samples", "function", "ratio"], study.rows())}
    return run


def plan_refine(cfg):
    params = _norm_params(cfg, cfg["method"])
    sizes = cfg["grid_sizes"]
    if sizes != sorted(sizes):
        raise UsageError("grid sizes must be ascending")
    spec = _field_spec(cfg, _grid(cfg, sizes[0]))

    def run(rep):
        table = refinement_study(spec, params, sizes)
        rep.result = {"values": table.values, "changes": table.changes, "growing": table.growing}
        rep.check("changes_not_growing", float(table.growing), 0.0, not table.growing, "==")
        changes = [math.nan] + table.changes
        return {"refine.csv": rows_to_csv(["n_samples", "value", "relative_change"],
                                          zip(sizes, table.values, changes))}
    return run


PLANNERS = {
    "multiplier-table": plan_multiplier_table,
    "verify-identities": plan_verify_identities,
    "norm": plan_norm,
    "slope": plan_slope,
    "equivalence": plan_equivalence,
    "refine": plan_refine,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = load_config(args.config) if args.config else None
        cfg = resolve(args.command, flags, config)
        run = PLANNERS[args.command](cfg)
    except ValueError as exc:
        print(f"ballnorm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = Report(args.command, cfg)
    try:
        tables = run(report)
    except (ValueError, ArithmeticError) as exc:
        print(f"ballnorm: computation failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    out = Path(cfg["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in tables.items():
            report.artifacts[name] = str(atomic_write(out / name, text))
        atomic_write(out / "report.json", to_json(report.to_dict()))
    except OSError as exc:
        print(f"ballnorm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for c in report.checks:
        verdict = "PASS" if c["passed"] else "FAIL"
        print(f"{verdict} {c['name']}: {c['value']:.3e} ({c['relation']} {c['tolerance']:.3e})")
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
