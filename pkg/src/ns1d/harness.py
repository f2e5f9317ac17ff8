"""Configuration ingestion, presets, experiment orchestration, and CSV/JSON output.

Config files are flat structured text: one `key = value` per line, dotted
section keys (grid.N, gas.alpha, ...), `#` comments.  Unknown keys are
rejected with the offending line number.  All emitted CSV/JSON is bitwise
deterministic for a given config.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time as _time
import warnings
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .constitutive import GasModel, HProfile, AdmissibilityReport, validate_h
from .diagnostics import (DiagnosticsCollector, DiagnosticsRecord,
                          decay_metrics, initial_data_report, theta_floor_fit)
from .errors import ConfigError, Ns1dError, NewtonDivergenceError, PositivityError
from .grid import Grid, State, apply_farfield, build_grid
from .solver import SolverConfig, advance
from .verification import convergence_study, default_case

__all__ = [
    "RunConfig", "RunSummary", "PRESETS", "load_config", "parse_value",
    "apply_overrides", "config_to_flat", "config_from_flat", "default_config",
    "make_model", "make_initial_data", "run", "sweep", "validate_h_config",
]

PRESETS = ("constant", "gauss-pulse", "two-bump", "mms", "alpha-sweep", "gamma-sweep")


@dataclass
class RunConfig:
    preset: str = "gauss-pulse"
    strict: bool = True
    # grid
    grid_L: float = 16.0
    grid_N: int = 512
    grid_ghost_depth: int = 2
    # gas
    gas_gamma: float = 5.0 / 3.0
    gas_mu_tilde: float = 1.0
    gas_kappa_tilde: float = 1.0
    gas_alpha: float = 0.0
    h_kind: str = "power-sum"
    h_ell1: float = 1.0
    h_ell2: float = 1.0
    h_c: float = 1.0
    # solver
    integrator: str = "explicit"
    cfl_advective: float = 0.4
    cfl_parabolic: float = 0.4
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    positivity_floor: float = 1e-8
    max_dt_halvings: int = 20
    dt_max: float = 0.0
    # time
    t_end: float = 5.0
    output_every: float = 0.1
    # initial data
    amplitude: float = 0.3
    width: float = 1.0
    perturb: str = "v,theta"
    # mms
    mms_levels: str = "64,128,256"
    mms_t_end: float = 0.25
    mms_L: float = 12.0
    mms_amplitude: float = 0.1
    # sweep
    sweep_param: str = "alpha"
    sweep_values: str = "-0.1,-0.05,0,0.05,0.1"
    # h validation range
    validate_v_min: float = 0.01
    validate_v_max: float = 100.0
    validate_samples: int = 100000
    # output
    out_dir: str = "out"
    out_formats: str = "csv,json"
    profile_every: float = 0.0     # 0: snapshots at t0 and t_end only


# flat config key -> RunConfig attribute, in canonical emission order
KEYMAP: Dict[str, str] = {
    "preset": "preset",
    "strict": "strict",
    "grid.L": "grid_L",
    "grid.N": "grid_N",
    "grid.ghost_depth": "grid_ghost_depth",
    "gas.gamma": "gas_gamma",
    "gas.mu_tilde": "gas_mu_tilde",
    "gas.kappa_tilde": "gas_kappa_tilde",
    "gas.alpha": "gas_alpha",
    "gas.h.kind": "h_kind",
    "gas.h.ell1": "h_ell1",
    "gas.h.ell2": "h_ell2",
    "gas.h.c": "h_c",
    "solver.integrator": "integrator",
    "solver.cfl_advective": "cfl_advective",
    "solver.cfl_parabolic": "cfl_parabolic",
    "solver.newton_tol": "newton_tol",
    "solver.newton_max_iter": "newton_max_iter",
    "solver.positivity_floor": "positivity_floor",
    "solver.max_dt_halvings": "max_dt_halvings",
    "solver.dt_max": "dt_max",
    "time.t_end": "t_end",
    "time.output_every": "output_every",
    "init.amplitude": "amplitude",
    "init.width": "width",
    "init.perturb": "perturb",
    "mms.levels": "mms_levels",
    "mms.t_end": "mms_t_end",
    "mms.L": "mms_L",
    "mms.amplitude": "mms_amplitude",
    "sweep.param": "sweep_param",
    "sweep.values": "sweep_values",
    "validate.v_min": "validate_v_min",
    "validate.v_max": "validate_v_max",
    "validate.samples": "validate_samples",
    "output.directory": "out_dir",
    "output.formats": "out_formats",
    "output.profile_every": "profile_every",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_value(attr: str, raw: str):
    ftype = _FIELD_TYPES[attr]
    raw = raw.strip()
    try:
        if ftype == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if ftype == "int":
            return int(raw)
        if ftype == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse {raw!r} for key of type {ftype}: {exc}") from exc


def validate_config(config: RunConfig) -> RunConfig:
    if config.preset not in PRESETS:
        raise ConfigError(f"unknown preset {config.preset!r}; choose from {PRESETS}")
    if not config.gas_gamma > 1.0:
        raise ConfigError("gamma must exceed 1")
    if config.gas_mu_tilde <= 0 or config.gas_kappa_tilde <= 0:
        raise ConfigError("mu_tilde and kappa_tilde must be positive")
    if config.h_kind not in ("power-sum", "constant"):
        raise ConfigError(f"unknown h kind {config.h_kind!r}")
    if config.h_kind == "constant" and config.h_c <= 0:
        raise ConfigError("constant h requires c > 0")
    if config.integrator not in ("explicit", "imex"):
        raise ConfigError(f"unknown integrator {config.integrator!r}")
    if config.output_every <= 0:
        raise ConfigError("output_every must be positive")
    if config.t_end < 0:
        raise ConfigError("t_end must be nonnegative")
    if config.strict and config.h_kind == "power-sum" and \
            (config.h_ell1 < 1.0 or config.h_ell2 < 1.0):
        warnings.warn(
            "the global-existence regime assumes ell1 >= 1 and ell2 >= 1; "
            f"got ell1={config.h_ell1}, ell2={config.h_ell2}; run proceeds",
            stacklevel=2)
    # structural invariants delegated to the component constructors
    SolverConfig(integrator=config.integrator, cfl_advective=config.cfl_advective,
                 cfl_parabolic=config.cfl_parabolic, newton_tol=config.newton_tol,
                 newton_max_iter=config.newton_max_iter,
                 positivity_floor=config.positivity_floor,
                 max_dt_halvings=config.max_dt_halvings, dt_max=config.dt_max)
    return config


def config_from_flat(raw: Dict[str, str], source: str = "<dict>") -> RunConfig:
    config = RunConfig()
    for key, value in raw.items():
        if key not in KEYMAP:
            raise ConfigError(f"{source}: unknown key {key!r}")
        setattr(config, KEYMAP[key], parse_value(KEYMAP[key], str(value)))
    return validate_config(config)


def load_config(path) -> RunConfig:
    path = Path(path)
    raw: Dict[str, str] = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in KEYMAP:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            raw[key] = parse_value(KEYMAP[key], value)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    config = RunConfig()
    for key, value in raw.items():
        setattr(config, KEYMAP[key], value)
    return validate_config(config)


def default_config(preset: str = "gauss-pulse") -> RunConfig:
    config = RunConfig(preset=preset)
    if preset == "constant":
        config.amplitude = 0.0
    return validate_config(config)


def apply_overrides(config: RunConfig, overrides: List[str]) -> RunConfig:
    """Apply `--set key=value` pairs on top of a loaded config."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in KEYMAP:
            raise ConfigError(f"unknown override key {key!r}")
        setattr(config, KEYMAP[key], parse_value(KEYMAP[key], value))
    return validate_config(config)


def config_to_flat(config: RunConfig) -> Dict[str, object]:
    """Canonical flat echo; loading it back reproduces the run."""
    return {key: getattr(config, attr) for key, attr in KEYMAP.items()}


# ---------------------------------------------------------------------------
# model and initial data
# ---------------------------------------------------------------------------

def make_model(config: RunConfig) -> GasModel:
    if config.h_kind == "constant":
        h = HProfile.constant(config.h_c)
    else:
        h = HProfile.power_sum(config.h_ell1, config.h_ell2)
    return GasModel(gamma=config.gas_gamma, mu_tilde=config.gas_mu_tilde,
                    kappa_tilde=config.gas_kappa_tilde, alpha=config.gas_alpha, h=h)


def make_solver_config(config: RunConfig) -> SolverConfig:
    return SolverConfig(
        integrator=config.integrator, cfl_advective=config.cfl_advective,
        cfl_parabolic=config.cfl_parabolic, newton_tol=config.newton_tol,
        newton_max_iter=config.newton_max_iter,
        positivity_floor=config.positivity_floor,
        max_dt_halvings=config.max_dt_halvings, dt_max=config.dt_max)


def _check_support(config: RunConfig, offset: float = 0.0):
    # perturbation must be negligible outside |x| <= L/2
    w = config.width
    reach = (config.grid_L / 2.0 - offset) / w
    if reach <= 0 or config.amplitude * math.exp(-reach ** 2) > 1e-8:
        raise ConfigError(
            f"initial perturbation (amplitude={config.amplitude}, width={w}) "
            f"is not supported inside |x| <= L/2 = {config.grid_L / 2}")


def make_initial_data(config: RunConfig, grid: Grid) -> State:
    """Preset initial data with far-field ghosts; positivity validated."""
    a, w = config.amplitude, config.width
    if a < 0 or (a >= 1.0 and config.preset != "constant"):
        raise ConfigError(f"amplitude must lie in [0, 1), got {a}")
    state = State.equilibrium(grid)
    if config.preset == "constant" or a == 0.0:
        return state
    x = grid.all_cell_centers()
    xn = grid.all_node_positions()
    if config.preset in ("gauss-pulse", "alpha-sweep", "gamma-sweep", "mms"):
        _check_support(config)
        bump = a * np.exp(-((x / w) ** 2))
        parts = {p.strip() for p in config.perturb.split(",") if p.strip()}
        unknown = parts - {"v", "u", "theta"}
        if unknown:
            raise ConfigError(f"unknown perturb fields {sorted(unknown)}")
        if "v" in parts:
            state.v = state.v + bump
        if "theta" in parts:
            state.theta = state.theta + bump
        if "u" in parts:
            state.u = state.u + a * (xn / w) * np.exp(-((xn / w) ** 2))
    elif config.preset == "two-bump":
        x0 = 2.0 * w
        _check_support(config, offset=x0)
        state.v = state.v + a * np.exp(-(((x + x0) / w) ** 2))
        state.theta = state.theta - 0.6 * a * np.exp(-(((x - x0) / w) ** 2))
        state.u = state.u + a * (xn / w) * np.exp(-((xn / w) ** 2))
    else:
        raise ConfigError(f"preset {config.preset!r} has no initial-data rule")
    apply_farfield(state, grid)
    if np.any(state.v <= 0) or np.any(state.theta <= 0):
        raise ConfigError("initial data violate positivity")
    return state


# ---------------------------------------------------------------------------
# summaries and serialization
# ---------------------------------------------------------------------------

@dataclass
class RunSummary:
    config: Dict[str, object]
    exit_status: str                      # "ok" | "error"
    error: Optional[str] = None
    initial_report: Optional[dict] = None
    final_record: Optional[dict] = None
    c4_fit: Optional[float] = None
    decay: Optional[dict] = None
    max_mass_drift: Optional[float] = None
    max_momentum_drift: Optional[float] = None
    max_energy_drift: Optional[float] = None
    order_report: Optional[dict] = None
    admissibility: Optional[dict] = None
    steps: int = 0
    wall_time: float = 0.0                # excluded from serialized output

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("wall_time")  # nondeterministic; keep emitted JSON bit-exact
        return d


def _json_dump(obj, path: Path):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_timeseries(records: List[DiagnosticsRecord], path: Path):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DiagnosticsRecord.CSV_COLUMNS)
        for rec in records:
            writer.writerow([repr(x) for x in rec.csv_row()])


def _write_profile(state: State, grid: Grid, path: Path):
    ci = grid.cell_interior
    u_cells = 0.5 * (state.u[:-1] + state.u[1:])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "v", "u", "theta"])
        for x, v, u, th in zip(grid.cell_centers, state.v[ci],
                               u_cells[ci], state.theta[ci]):
            writer.writerow([repr(state.t), repr(x), repr(v), repr(u), repr(th)])


def _resolve_out_dir(config: RunConfig) -> Path:
    env = os.environ.get("NS1D_OUT")
    return Path(env) if env else Path(config.out_dir)


# ---------------------------------------------------------------------------
# run / sweep / validate-h
# ---------------------------------------------------------------------------

def run(config: RunConfig, out_dir: Optional[Path] = None) -> RunSummary:
    """Execute one configured experiment and emit its outputs."""
    if config.preset == "mms":
        return _run_mms(config, out_dir)
    if config.preset in ("alpha-sweep", "gamma-sweep"):
        param = "alpha" if config.preset == "alpha-sweep" else "gamma"
        values = [float(v) for v in config.sweep_values.split(",") if v.strip()]
        summaries = sweep(config, param, values, out_dir=out_dir)
        return summaries[0] if summaries else RunSummary(config_to_flat(config), "ok")

    t_start = _time.perf_counter()
    out = out_dir if out_dir is not None else _resolve_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    formats = {f.strip() for f in config.out_formats.split(",") if f.strip()}

    model = make_model(config)
    grid = build_grid(config.grid_L, config.grid_N, config.grid_ghost_depth)
    solver_config = make_solver_config(config)
    state = make_initial_data(config, grid)
    init_report = initial_data_report(state, grid)
    collector = DiagnosticsCollector(model, grid)

    profiles_dir = out / "profiles"
    if "csv" in formats:
        profiles_dir.mkdir(exist_ok=True)
        _write_profile(state, grid, profiles_dir / "profile_t0.csv")

    next_profile = [config.profile_every] if config.profile_every > 0 else []

    def observer(s: State):
        collector.observe(s)
        if next_profile and s.t >= next_profile[0] - 1e-12 and "csv" in formats:
            _write_profile(s, grid, profiles_dir / f"profile_t{s.t:g}.csv")
            next_profile[0] += config.profile_every

    error = None
    stats = None
    try:
        state, stats = advance(state, model, grid, solver_config, config.t_end,
                               observer=observer, output_every=config.output_every,
                               on_step=collector.on_step)
    except Ns1dError as exc:
        error = f"{type(exc).__name__}: {exc}"

    records = collector.records
    if "csv" in formats and records:
        _write_timeseries(records, out / "timeseries.csv")
        if error is None:
            _write_profile(state, grid, profiles_dir / f"profile_t{state.t:g}.csv")

    summary = RunSummary(config=config_to_flat(config),
                         exit_status="ok" if error is None else "error",
                         error=error,
                         initial_report=init_report.to_dict(),
                         steps=stats.steps if stats else 0,
                         wall_time=_time.perf_counter() - t_start)
    if records:
        rec0 = records[0]
        summary.final_record = dict(zip(DiagnosticsRecord.CSV_COLUMNS,
                                        records[-1].csv_row()))
        scale = max(abs(rec0.mass_dev), 1.0)
        summary.max_mass_drift = max(abs(r.mass_dev - rec0.mass_dev) for r in records) / scale
        pscale = max(abs(rec0.momentum), 1.0)
        summary.max_momentum_drift = max(abs(r.momentum - rec0.momentum) for r in records) / pscale
        escale = max(abs(rec0.energy_dev), 1.0)
        summary.max_energy_drift = max(abs(r.energy_dev - rec0.energy_dev) for r in records) / escale
        if len(records) >= 3:
            summary.c4_fit = theta_floor_fit(records)
        if len(records) >= 2:
            summary.decay = decay_metrics(records).to_dict()
    if "json" in formats:
        _json_dump(summary.to_dict(), out / "summary.json")
    if error is not None:
        kind = error.split(":", 1)[0]
        if kind in ("PositivityError", "PositivityExhaustedError", "NewtonDivergenceError"):
            raise PositivityError(error) if "Positivity" in kind else NewtonDivergenceError(error)
    return summary


def _run_mms(config: RunConfig, out_dir: Optional[Path]) -> RunSummary:
    t_start = _time.perf_counter()
    out = out_dir if out_dir is not None else _resolve_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    model = make_model(config)
    case = default_case(amplitude=config.mms_amplitude)
    levels = [int(n) for n in config.mms_levels.split(",") if n.strip()]
    report = convergence_study(case, model, levels, config.mms_t_end,
                               L=config.mms_L, config=make_solver_config(config))
    summary = RunSummary(config=config_to_flat(config), exit_status="ok",
                         order_report=report.to_dict(),
                         wall_time=_time.perf_counter() - t_start)
    if "json" in config.out_formats:
        _json_dump(summary.to_dict(), out / "summary.json")
    return summary


def sweep(base_config: RunConfig, parameter: str, values: List[float],
          out_dir: Optional[Path] = None) -> List[RunSummary]:
    """Independent runs over one parameter; per-value failures do not abort."""
    attr = {"alpha": "gas_alpha", "gamma": "gas_gamma", "amplitude": "amplitude"}.get(parameter)
    if attr is None:
        raise ConfigError(f"sweep parameter must be alpha, gamma, or amplitude, got {parameter!r}")
    root = out_dir if out_dir is not None else _resolve_out_dir(base_config)
    root.mkdir(parents=True, exist_ok=True)
    summaries = []
    for value in values:
        config = dataclasses.replace(base_config, **{attr: value})
        if config.preset in ("alpha-sweep", "gamma-sweep"):
            config.preset = "gauss-pulse"
        sub = root / f"{parameter}_{value:g}"
        try:
            config = validate_config(config)
            summaries.append(run(config, out_dir=sub))
        except Ns1dError as exc:
            summaries.append(RunSummary(config=config_to_flat(config),
                                        exit_status="error",
                                        error=f"{type(exc).__name__}: {exc}"))
    _json_dump([s.to_dict() for s in summaries], root / "sweep_summary.json")
    return summaries


def validate_h_config(config: RunConfig) -> AdmissibilityReport:
    model = make_model(config)
    report = validate_h(model.h, (config.validate_v_min, config.validate_v_max),
                        config.validate_samples)
    out = _resolve_out_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    _json_dump(report.to_dict(), out / "admissibility.json")
    return report
