"""
Config-driven scenarios: initial-data profiles, TOML configuration with a
closed schema, and report writing (CSV rows plus a JSON summary).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .alpha import AKNS_GATE, alpha_akns, alpha_kdv_series, fallacy_log_det, kappa_gate
from .errors import ConfigurationError
from .evolution import FLAVORS, FlowSpec, classical_invariants, default_dt, evolve
from .norms import besov_norm, surrogate_norm, weighted_form, xy_norm, xy_surrogate
from .spectral import FourierField, TorusGrid, sobolev_norm

__all__ = [
    "CSV_COLUMNS",
    "ScenarioConfig",
    "ReportRow",
    "Report",
    "make_profile",
    "random_bandlimited",
    "load_config",
    "parse_config",
    "run_scenario",
    "write_report",
    "format_float",
]

CSV_COLUMNS = ("scenario", "t", "kappa", "alpha", "hs", "leading", "drift")
KINDS = ("conserve", "alpha", "norms", "fallacy", "gate")


# -- initial data ---------------------------------------------------------------

def random_bandlimited(grid: TorusGrid, rng: np.random.Generator, cutoff: int,
                       amplitude: float = 1.0, real: bool = True,
                       decay: float = 1.0) -> FourierField:
    """Gaussian coefficients amplitude·g_n/(1 + |n|)^decay on |n| <= cutoff."""
    if cutoff > grid.mode_cutoff or cutoff < 0:
        raise ConfigurationError(f"cutoff {cutoff} outside [0, {grid.mode_cutoff}]")
    n = np.arange(-cutoff, cutoff + 1)
    g = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) / math.sqrt(2)
    c = np.zeros(grid.size, complex)
    c[n + grid.mode_cutoff] = amplitude * g / (1.0 + np.abs(n)) ** decay
    return FourierField(grid, c, real)


_PROFILE_KEYS = {
    "zero": {},
    "cosine": {"amplitude": 2.0, "mode": 1},
    "gaussian": {"amplitude": 1.0, "width": 0.1, "center": 0.5},
    "soliton": {"kappa_sol": 1.0, "center": 0.0},
    "random_bandlimited": {"seed": None, "cutoff": 8, "amplitude": 1.0, "complex": False,
                           "decay": 1.0},
    "tanh_step": {},
    "coefficients": {"values": None, "real": None},
}


def make_profile(grid: TorusGrid, name: str, params: dict | None = None,
                 seed: int = 0) -> FourierField:
    """Built-in initial data; ``params`` override the profile defaults."""
    if name not in _PROFILE_KEYS:
        raise ConfigurationError(f"unknown profile {name!r}; choose from {sorted(_PROFILE_KEYS)}")
    p = dict(_PROFILE_KEYS[name])
    for key, value in (params or {}).items():
        if key not in p:
            raise ConfigurationError(f"profile {name!r} has no parameter {key!r}")
        p[key] = value
    L = grid.period
    if name == "zero":
        return FourierField.zeros(grid)
    if name == "cosine":
        mode = int(p["mode"])
        return FourierField.from_modes(grid, {mode: p["amplitude"] / 2, -mode: p["amplitude"] / 2}, True)
    if name == "gaussian":
        def g(x):
            d = (x - p["center"] + L / 2) % L - L / 2
            return p["amplitude"] * np.exp(-(d / p["width"]) ** 2)
        return FourierField.from_function(grid, g, real_valued=True)
    if name == "soliton":
        k = p["kappa_sol"]

        def sol(x):
            d = (x - p["center"] + L / 2) % L - L / 2
            return -2 * k ** 2 / np.cosh(k * d) ** 2
        return FourierField.from_function(grid, sol, real_valued=True)
    if name == "random_bandlimited":
        rng = np.random.default_rng(seed if p["seed"] is None else p["seed"])
        return random_bandlimited(grid, rng, int(p["cutoff"]), p["amplitude"],
                                  real=not p["complex"], decay=p["decay"])
    if name == "tanh_step":
        raise ConfigurationError("tanh_step is only available in fallacy scenarios")
    if p["values"] is None:
        raise ConfigurationError("coefficients profile needs 'values' = [[n, re, im], ...]")
    modes = {}
    for entry in p["values"]:
        if len(entry) not in (2, 3):
            raise ConfigurationError(f"coefficient entry {entry!r} must be [n, re] or [n, re, im]")
        modes[int(entry[0])] = complex(entry[1], entry[2] if len(entry) == 3 else 0.0)
    return FourierField.from_modes(grid, modes, p["real"])


# -- configuration ----------------------------------------------------------------

_SCHEMA: dict[str, dict[str, Any]] = {
    "scenario": {"name": str, "kind": str, "seed": int},
    "grid": {"period": float, "mode_cutoff": int, "sample_count": int},
    "initial": {"profile": str, "params": dict},
    "flow": {"flavor": str, "dt": float, "T": float, "scheme": str,
             "snapshot_every": int, "alpha_sign": int},
    "alpha": {"kappa": (list, str), "family": str, "tol": float, "gate": float},
    "norms": {"list": list},
    "fallacy": {"times": list, "kappa": float, "points": int, "half_width": float},
    "tolerances": {"drift": float, "fallacy_min": float},
    "output": {"dir": str},
}
_NORM_KEYS = {"kind", "s", "r", "kappa0", "family", "which", "weight", "kappa", "label"}


@dataclass
class ScenarioConfig:
    name: str
    kind: str | None = None
    seed: int = 0
    grid: TorusGrid = field(default_factory=lambda: TorusGrid(1.0, 64))
    profile: str = "cosine"
    profile_params: dict = field(default_factory=dict)
    flavor: str = "kdv"
    dt: float | None = None
    T: float = 0.1
    scheme: str = "etdrk4"
    snapshot_every: int = 1000
    alpha_sign: int = 1
    kappas: list | str = "gate"
    alpha_family: str | None = None
    series_tol: float = 1e-13
    akns_gate: float = AKNS_GATE
    norms: list = field(default_factory=list)
    fallacy_times: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    fallacy_kappa: float = 8.0
    fallacy_points: int = 2048
    fallacy_half_width: float = 40.0
    drift_tol: float = 1e-6
    fallacy_min: float = 1e-6
    out_dir: str = "out"


def _typed(section: str, key: str, value, expected):
    allowed = expected if isinstance(expected, tuple) else (expected,)
    if float in allowed and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, allowed) or isinstance(value, bool) and bool not in allowed:
        names = "/".join(t.__name__ for t in allowed)
        raise ConfigurationError(f"{section}.{key} must be {names}, got {value!r}")
    return value


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a nested mapping against the schema; unknown keys are errors."""
    for section, body in data.items():
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigurationError(f"[{section}] must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"unknown key {section}.{key}")
    get = lambda sec, key, default=None: (
        _typed(sec, key, data[sec][key], _SCHEMA[sec][key])
        if sec in data and key in data[sec] else default)

    name = get("scenario", "name")
    if not name:
        raise ConfigurationError("scenario.name is required")
    cfg = ScenarioConfig(name=name)
    cfg.kind = get("scenario", "kind", None)
    if cfg.kind is not None and cfg.kind not in KINDS:
        raise ConfigurationError(f"scenario.kind must be one of {KINDS}, got {cfg.kind!r}")
    cfg.seed = get("scenario", "seed", 0)
    cfg.grid = TorusGrid(get("grid", "period", 1.0), get("grid", "mode_cutoff", 64),
                         get("grid", "sample_count", 0))
    cfg.profile = get("initial", "profile", "cosine")
    cfg.profile_params = get("initial", "params", {})
    cfg.flavor = get("flow", "flavor", "kdv")
    if cfg.flavor not in FLAVORS:
        raise ConfigurationError(f"flow.flavor must be one of {FLAVORS}, got {cfg.flavor!r}")
    cfg.dt = get("flow", "dt", None)
    if cfg.dt is not None and not cfg.dt > 0:
        raise ConfigurationError(f"flow.dt must be positive, got {cfg.dt}")
    cfg.T = get("flow", "T", 0.1)
    if not cfg.T >= 0:
        raise ConfigurationError(f"flow.T must be nonnegative, got {cfg.T}")
    cfg.scheme = get("flow", "scheme", "etdrk4")
    cfg.snapshot_every = get("flow", "snapshot_every", 1000)
    if cfg.snapshot_every < 0:
        raise ConfigurationError("flow.snapshot_every must be nonnegative")
    cfg.alpha_sign = get("flow", "alpha_sign", 1)
    if cfg.alpha_sign not in (1, -1):
        raise ConfigurationError(f"flow.alpha_sign must be +1 or -1, got {cfg.alpha_sign}")
    kappas = get("alpha", "kappa", "gate")
    if isinstance(kappas, str):
        if kappas != "gate":
            raise ConfigurationError(f"alpha.kappa must be a list or 'gate', got {kappas!r}")
    else:
        kappas = [_typed("alpha", "kappa", k, float) for k in kappas]
        if not kappas or any(k <= 0 for k in kappas):
            raise ConfigurationError("alpha.kappa entries must be positive")
    cfg.kappas = kappas
    cfg.alpha_family = get("alpha", "family", None)
    if cfg.alpha_family not in (None, "kdv", "akns"):
        raise ConfigurationError(f"alpha.family must be 'kdv' or 'akns', got {cfg.alpha_family!r}")
    cfg.series_tol = get("alpha", "tol", 1e-13)
    cfg.akns_gate = get("alpha", "gate", AKNS_GATE)
    if not 0 < cfg.akns_gate < 1:
        raise ConfigurationError(f"alpha.gate must lie in (0, 1), got {cfg.akns_gate}")
    cfg.norms = get("norms", "list", [])
    for spec in cfg.norms:
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ConfigurationError(f"norm entry {spec!r} needs a 'kind'")
        extra = set(spec) - _NORM_KEYS
        if extra:
            raise ConfigurationError(f"unknown key(s) {sorted(extra)} in norm entry")
    cfg.fallacy_times = [_typed("fallacy", "times", t, float) for t in get("fallacy", "times", [0.25, 0.5, 1.0])]
    cfg.fallacy_kappa = get("fallacy", "kappa", 8.0)
    cfg.fallacy_points = get("fallacy", "points", 2048)
    cfg.fallacy_half_width = get("fallacy", "half_width", 40.0)
    cfg.drift_tol = get("tolerances", "drift", 1e-6)
    cfg.fallacy_min = get("tolerances", "fallacy_min", 1e-6)
    for key in ("drift_tol", "fallacy_min", "series_tol"):
        if not getattr(cfg, key) > 0:
            raise ConfigurationError(f"tolerance {key} must be positive")
    cfg.out_dir = get("output", "dir", "out")
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    return parse_config(data)


# -- reports ----------------------------------------------------------------------

@dataclass
class ReportRow:
    scenario: str
    t: float
    kappa: float
    alpha: float = math.nan
    hs: float = math.nan
    leading: float = math.nan
    drift: float = math.nan
    norms: dict = field(default_factory=dict)


@dataclass
class Report:
    scenario: str
    rows: list = field(default_factory=list)
    norm_columns: list = field(default_factory=list)
    assertions: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions.values())

    def check(self, name: str, passed: bool, measured, threshold, **extra):
        self.assertions[name] = {"passed": bool(passed), "measured": measured,
                                 "threshold": threshold, **extra}


def format_float(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_report(report: Report, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.scenario}.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(CSV_COLUMNS) + list(report.norm_columns))
    for row in report.rows:
        writer.writerow([row.scenario] + [format_float(v) for v in
                                          (row.t, row.kappa, row.alpha, row.hs, row.leading, row.drift)]
                        + [format_float(row.norms.get(c)) for c in report.norm_columns])
    csv_path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    json_path = out / f"{report.scenario}.summary.json"
    summary = {"scenario": report.scenario, "passed": report.passed,
               "assertions": report.assertions, "details": report.details}
    json_path.write_text(json.dumps(_json_ready(summary), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    return csv_path, json_path


# -- scenarios --------------------------------------------------------------------

def _is_akns(cfg: ScenarioConfig) -> bool:
    if cfg.alpha_family is not None:
        return cfg.alpha_family == "akns"
    return cfg.flavor.startswith(("nls", "hirota", "mkdv"))


def _resolve_kappas(cfg: ScenarioConfig, q0: FourierField) -> list[float]:
    if cfg.kappas != "gate":
        return list(cfg.kappas)
    if _is_akns(cfg):
        return [max(kappa_gate(q0, "akns", cfg.akns_gate), 5.0)]
    return [max(kappa_gate(q0, "kdv_conserve"), 5.0)]


def _alpha(cfg: ScenarioConfig, q: FourierField, kappa: float):
    if _is_akns(cfg):
        return alpha_akns(q, kappa, cfg.alpha_sign, tol=cfg.series_tol, gate=cfg.akns_gate)
    return alpha_kdv_series(q, kappa, tol=cfg.series_tol)


def _norm_label(spec: dict) -> str:
    if "label" in spec:
        return str(spec["label"])
    parts = [spec["kind"]] + [f"{k}={spec[k]}" for k in sorted(spec) if k not in ("kind", "label")]
    return ":".join(parts)


def _evaluate_norm(spec: dict, q: FourierField) -> float:
    kind = spec["kind"]
    r = spec.get("r", 2)
    r = math.inf if r in ("inf", "infinity") else float(r)
    try:
        if kind == "sobolev":
            return sobolev_norm(q, spec.get("s", 0.0))
        if kind == "besov":
            return besov_norm(q, spec["s"], r)
        if kind == "surrogate":
            return surrogate_norm(q, spec["s"], r, spec.get("kappa0", 1.0), spec["family"])
        if kind == "weighted":
            return weighted_form(q, spec["weight"], spec["kappa"])
        if kind == "xy":
            return xy_norm(q, spec.get("kappa0", 1.0), spec["which"])
        if kind == "xy_surrogate":
            return xy_surrogate(q, spec.get("kappa0", 1.0), spec["which"])
        if kind == "l2":
            return classical_invariants(q)[1]
    except KeyError as exc:
        raise ConfigurationError(f"norm entry {spec!r} is missing {exc.args[0]!r}") from exc
    raise ConfigurationError(f"unknown norm kind {kind!r}")


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Run one configured scenario; numerical blow-up propagates as BlowUpError."""
    report = Report(cfg.name)
    report.norm_columns = [_norm_label(s) for s in cfg.norms]
    kind = cfg.kind or "conserve"
    if kind == "fallacy":
        return _run_fallacy(cfg, report)
    q0 = make_profile(cfg.grid, cfg.profile, cfg.profile_params, seed=cfg.seed)
    if kind == "gate":
        gates = {p: kappa_gate(q0, p) for p in ("kdv_conserve", "kdv_bound", "akns")}
        report.norm_columns = list(gates)
        report.rows.append(ReportRow(cfg.name, 0.0, math.nan, norms=gates))
        report.details["gates"] = gates
        return report
    kappas = _resolve_kappas(cfg, q0)
    report.details["kappas"] = kappas
    if kind in ("alpha", "norms"):
        for kappa in kappas if kind == "alpha" else [math.nan]:
            row = ReportRow(cfg.name, 0.0, kappa)
            if kind == "alpha":
                rep = _alpha(cfg, q0, kappa)
                row.alpha, row.hs, row.leading = rep.value, rep.hs, rep.leading
                report.check(f"converged_kappa={format_float(kappa)}", rep.converged,
                             rep.tail_bound, cfg.series_tol)
            row.norms = {lab: _evaluate_norm(s, q0) for lab, s in zip(report.norm_columns, cfg.norms)}
            report.rows.append(row)
        return report

    # conserve: evolve and monitor α at every snapshot
    dt = cfg.dt if cfg.dt is not None else default_dt(cfg.grid)
    spec = FlowSpec(cfg.flavor, dt, cfg.T, cfg.grid, cfg.scheme, cfg.snapshot_every)
    traj = evolve(q0, spec)
    base = {k: _alpha(cfg, q0, k) for k in kappas}
    worst = 0.0
    for t, q in traj.snapshots:
        norms = {lab: _evaluate_norm(s, q) for lab, s in zip(report.norm_columns, cfg.norms)}
        for kappa in kappas:
            rep = _alpha(cfg, q, kappa)
            drift = abs(rep.value - base[kappa].value) / max(base[kappa].value, 1e-300)
            worst = max(worst, drift)
            report.rows.append(ReportRow(cfg.name, t, kappa, rep.value, rep.hs, rep.leading,
                                         drift, norms))
    report.check("alpha_drift", worst <= cfg.drift_tol, worst, cfg.drift_tol)
    report.details["converged"] = all(r.converged for r in base.values())
    return report


def _run_fallacy(cfg: ScenarioConfig, report: Report) -> Report:
    results = fallacy_log_det(cfg.fallacy_times, cfg.fallacy_kappa, cfg.fallacy_points,
                              cfg.fallacy_half_width)
    report.norm_columns = ["abs_log_det", "log_det_cholesky"]
    mags = []
    for res in results:
        mags.append(abs(res.log_det))
        report.rows.append(ReportRow(cfg.name, res.t, cfg.fallacy_kappa, alpha=res.log_det,
                                     norms={"abs_log_det": abs(res.log_det),
                                            "log_det_cholesky": res.log_det_cholesky}))
    increasing = all(b > a for a, b in zip(mags, mags[1:]))
    report.check("fallacy_nonzero", min(mags) > cfg.fallacy_min, min(mags), cfg.fallacy_min)
    report.check("fallacy_monotone", increasing, mags, "strictly increasing")
    report.details["sign"] = "negative" if all(r.log_det < 0 for r in results) else (
        "positive" if all(r.log_det > 0 for r in results) else "mixed")
    return report
