"""
Scenario sweeps: JSON run configs, deterministic cross-product evaluation,
CSV rows, per-scenario path files, and a manifest of everything that shaped
the numbers (parameters, conventions, tolerances).
"""

from __future__ import annotations

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .closed_form import evaluate_linear, evaluate_no_trader, linear_paths, solve_no_trader
from .errors import ConfigError, DomainError, SolverError
from .market import (
    Conventions,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    default_grid_size,
    effective_lambda,
    preset,
    uniform_grid,
)
from .nash import evaluate_nash, solve_nash
from .oracle import BC_TOL, BR_TOL, COST_RTOL, EL_TOL, verify_scenario
from .schedule import evaluate_daily_no_trader, solve_daily_no_trader
from .stackelberg import evaluate_stackelberg, solve_stackelberg
from .tables import fmt, make_tables, write_csv

log = logging.getLogger(__name__)

SCHEMA = "indexgame.run/1"
REGIMES = ("no_trader", "linear", "nash", "stackelberg")

ROW_COLUMNS = (
    "index", "regime", "lam", "lam_eff", "d_shares", "participation", "t_shares", "manager_fraction",
    "start_day", "tau", "t_n", "cost_usd", "benchmark_cost_usd", "savings_usd", "savings_bps",
    "tracking_error_bps", "trader_profit_usd", "trader_profit_bps", "alt_savings_usd", "alt_savings_bps",
    "verified", "error",
)
PATH_COLUMNS = ("time", "x_shares", "y_shares", "mid_price", "execution_price", "cumulative_return")


@dataclass(frozen=True)
class RunConfig:
    regime: str
    lambdas: Tuple[float, ...]
    demands: Tuple[float, ...]
    participations: Tuple[float, ...] = (0.0,)
    manager_fractions: Tuple[float, ...] = (1.0,)
    start_days: Tuple[float, ...] = (0.0,)
    taus: Tuple[float, ...] = (1.0,)
    name: str = "run"
    description: str = ""
    preset: str = "core"
    params: Dict[str, float] = field(default_factory=dict)
    t_n: float = 10.0
    grid_size: Optional[int] = None
    path_points: int = 101
    conventions: Conventions = Conventions()
    verify: bool = False
    workers: int = 1
    out_dir: Optional[str] = None
    tables: bool = True

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        for name in ("lambdas", "demands", "participations", "manager_fractions", "start_days", "taus"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values:
                raise ConfigError(f"{name} must be a non-empty list")
            object.__setattr__(self, name, values)
        if self.regime != "stackelberg" and self.taus != (1.0,):
            raise ConfigError("taus apply to the stackelberg regime only")
        if self.regime != "linear" and (self.start_days != (0.0,) or self.manager_fractions != (1.0,)):
            raise ConfigError("start_days and manager_fractions apply to the linear regime only")
        if self.regime == "no_trader" and self.participations != (0.0,):
            raise ConfigError("the no_trader regime has no trader; drop participations")
        if self.grid_size is not None and (self.grid_size < 5 or self.grid_size % 2 == 0):
            raise ConfigError("grid_size must be odd and >= 5")
        if self.path_points and (self.path_points < 3 or self.path_points % 2 == 0):
            raise ConfigError("path_points must be 0 or odd and >= 3")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.impact_params()
        except (DomainError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc

    def impact_params(self) -> ImpactParams:
        return replace(preset(self.preset), **self.params)

    def output_dir(self) -> Path:
        return Path(self.out_dir or f"runs/{self.name}")

    def to_dict(self) -> Dict:
        out = {"schema": SCHEMA}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Conventions):
                value = asdict(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: Dict) -> "RunConfig":
        data = dict(data)
        schema = data.pop("schema", None)
        if schema != SCHEMA:
            raise ConfigError(f"unsupported config schema {schema!r}; expected {SCHEMA!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("regime", "lambdas", "demands"):
            if key not in data:
                raise ConfigError(f"config is missing {key!r}")
        try:
            data["conventions"] = Conventions(**data.get("conventions", {}))
        except (DomainError, TypeError) as exc:
            raise ConfigError(f"bad conventions: {exc}") from exc
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


def scenarios(config: RunConfig) -> List[ScenarioParams]:
    """Cross-product in a fixed order: lambda, D, participation, manager fraction, start day, tau."""
    out = []
    for lam, d, part, frac, day, tau in itertools.product(
            config.lambdas, config.demands, config.participations, config.manager_fractions,
            config.start_days, config.taus):
        f = frac if config.regime == "linear" else part
        out.append(ScenarioParams(d_shares=d, t_shares=part * d, t_n=config.t_n, lam=lam, f=f,
                                  d_start=day, tau=tau))
    return out


# --- price paths ----------------------------------------------------------------

@dataclass(frozen=True)
class PricePathRecord:
    time: float
    mid_price: float
    execution_price: float
    cumulative_return: float


def emit_price_path(params: ImpactParams, scen: ScenarioParams, x_path: InventoryPath, y_path: InventoryPath,
                    grid=None) -> List[PricePathRecord]:
    """Mid price S0 + gamma (x + y), execution price S + eta (xdot + ydot) + eps, return S / S0 - 1."""
    if grid is not None:
        x_path, y_path = x_path.resample(grid), y_path.resample(grid)
    elif not np.array_equal(x_path.times, y_path.times):
        raise DomainError("paths must share a grid")
    mid = params.s0 + params.gamma * (x_path.shares + y_path.shares)
    execution = mid + params.eta * (x_path.derivative() + y_path.derivative()) + params.epsilon
    ret = mid / params.s0 - 1.0
    return [PricePathRecord(float(t), float(m), float(e), float(r))
            for t, m, e, r in zip(x_path.times, mid, execution, ret)]


def price_decomposition(params: ImpactParams, x_rate: float, shares: float) -> Dict[str, float]:
    """Permanent, temporary and spread parts of the execution-price return at a given holding and rate."""
    permanent = params.gamma * shares / params.s0
    temporary = params.eta * x_rate / params.s0
    spread = params.epsilon / params.s0
    return {"permanent": permanent, "temporary": temporary, "spread": spread,
            "execution": permanent + temporary + spread}


def trader_only_paths(params: ImpactParams, scen: ScenarioParams, grid):
    """Trader's optimal accumulation when the manager buys only at the event.

    With y = 0 on [0, t_N) the trader's Euler-Lagrange equation reduces to
    xdd = 0, so the best response is the straight ramp T t / t_N.
    """
    t_sh, t_n = scen.t_shares, scen.t_n

    def x_gen(t):
        t = np.asarray(t, dtype=float)
        return t_sh / t_n * t, np.full_like(t, t_sh / t_n)

    grid = np.asarray(grid, dtype=float)
    return InventoryPath.from_generator(x_gen, grid, t_sh), InventoryPath.zeros(grid)


# --- evaluation -------------------------------------------------------------------

def _solve_paths(config: RunConfig, params, scen):
    """(report, x path, y path) for one scenario; paths carry generators for resampling."""
    conv = config.conventions
    grid_size = config.grid_size or default_grid_size(scen.t_n)
    grid = uniform_grid(scen.t_n, grid_size)
    if config.regime == "no_trader":
        if conv.schedule == "daily":
            y = solve_daily_no_trader(params, scen, conv)
            return evaluate_daily_no_trader(params, scen, conv), InventoryPath.zeros(y.times), y
        y = solve_no_trader(params, scen, conv).path(grid)
        return evaluate_no_trader(params, scen, conv, grid_size), InventoryPath.zeros(grid), y
    if config.regime == "linear":
        x, y = linear_paths(params, scen, grid_size)
        return evaluate_linear(params, scen, conv, grid_size), x, y
    if config.regime == "nash":
        sol = solve_nash(params, scen, conv)
        x, y = sol.paths(grid)
        return evaluate_nash(params, scen, sol, conv, grid_size), x, y
    sol = solve_stackelberg(params, scen, conv)
    x, y = sol.paths(grid)
    return evaluate_stackelberg(params, scen, sol, conv, grid_size), x, y


def evaluate_scenario(config: RunConfig, index: int, scen: ScenarioParams):
    """One output row plus optional path records; solver failures become error rows."""
    params = config.impact_params()
    row = {"index": index, "regime": config.regime, "lam": scen.lam, "d_shares": scen.d_shares,
           "participation": scen.t_shares / scen.d_shares, "t_shares": scen.t_shares,
           "manager_fraction": scen.f if config.regime == "linear" else None,
           "start_day": scen.d_start if config.regime == "linear" else None,
           "tau": scen.tau, "t_n": scen.t_n, "verified": "", "error": ""}
    try:
        row["lam_eff"] = effective_lambda(params, scen, config.conventions)
        report, x, y = _solve_paths(config, params, scen)
    except (SolverError, DomainError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row, None
    row.update(cost_usd=report.cost_usd, benchmark_cost_usd=report.benchmark_cost_usd,
               savings_usd=report.savings_usd, savings_bps=report.savings_bps,
               tracking_error_bps=report.tracking_error_bps)
    if config.regime != "no_trader":
        row.update(trader_profit_usd=report.trader_profit_usd, trader_profit_bps=report.trader_profit_bps)
    if config.conventions.game_benchmark == "final_day_residual" and report.alt_savings_usd is not None:
        row.update(alt_savings_usd=report.alt_savings_usd, alt_savings_bps=report.alt_savings_bps)
    if config.verify:
        if config.regime == "no_trader" and config.conventions.schedule == "daily":
            row["verified"] = "skipped"
        else:
            try:
                ver = verify_scenario(params, scen, config.regime, config.conventions, config.grid_size)
                row["verified"] = "pass" if ver.all_passed else "fail"
            except (SolverError, DomainError) as exc:
                row["verified"] = "fail"
                row["error"] = f"verification {type(exc).__name__}: {exc}"
    records = None
    if config.path_points:
        if config.regime == "no_trader" and config.conventions.schedule == "daily":
            pgrid = y.times
        else:
            pgrid = uniform_grid(scen.t_n, config.path_points)
        xs, ys = x.resample(pgrid), y.resample(pgrid)
        records = [(r, xv, yv) for r, xv, yv in zip(emit_price_path(params, scen, xs, ys), xs.shares, ys.shares)]
    return row, records


def _evaluate_task(task):
    config, index, scen = task
    return evaluate_scenario(config, index, scen)


@dataclass(frozen=True)
class RunResult:
    rows: List[Dict]
    files: List[Path]
    errors: int
    verification_failures: int

    @property
    def exit_code(self) -> int:
        if self.verification_failures:
            return 4
        if self.errors:
            return 3
        return 0


def _path_csv(records) -> str:
    rows = [{"time": r.time, "x_shares": xv, "y_shares": yv, "mid_price": r.mid_price,
             "execution_price": r.execution_price, "cumulative_return": r.cumulative_return}
            for r, xv, yv in records]
    return write_csv(rows, PATH_COLUMNS)


def manifest(config: RunConfig, rows: Sequence[Dict], files: Sequence[Path]) -> Dict:
    out_dir = config.output_dir()
    return {
        "schema": SCHEMA,
        "package_version": __version__,
        "name": config.name,
        "config": config.to_dict(),
        "params": asdict(config.impact_params()),
        "conventions": asdict(config.conventions),
        "tolerances": {"cost_rel": COST_RTOL, "el_per_D_over_tN2": EL_TOL, "bc_per_D": BC_TOL, "br_per_D": BR_TOL},
        "rows": len(rows),
        "errors": sum(1 for r in rows if r.get("error")),
        "verification_failures": sum(1 for r in rows if r.get("verified") == "fail"),
        "files": sorted(str(Path(f).relative_to(out_dir)) for f in files),
    }


def run(config: RunConfig) -> RunResult:
    """Evaluate every scenario, then write rows, paths, tables and the manifest from a single collector."""
    tasks = [(config, i, s) for i, s in enumerate(scenarios(config))]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_task, tasks))
    else:
        results = [_evaluate_task(t) for t in tasks]

    out_dir = config.output_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [row for row, _ in results]
    files = []
    rows_path = out_dir / f"{config.name}.csv"
    rows_path.write_text(write_csv(rows, ROW_COLUMNS))
    files.append(rows_path)
    if config.path_points:
        path_dir = out_dir / "paths"
        path_dir.mkdir(exist_ok=True)
        for row, records in results:
            if records is None:
                continue
            p = path_dir / f"{config.name}_{row['index']:04d}.csv"
            p.write_text(_path_csv(records))
            files.append(p)
    if config.tables:
        files.extend(make_tables(rows, out_dir, f"{config.name}_table"))
    man_path = out_dir / "manifest.json"
    files.append(man_path)
    man = manifest(config, rows, files)
    man_path.write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    for row in rows:
        if row.get("error"):
            log.warning("scenario %d failed: %s", row["index"], row["error"])
    return RunResult(rows, files, man["errors"], man["verification_failures"])


def format_row(row: Dict) -> str:
    if row.get("error"):
        return f"#{row['index']} lam={fmt(row['lam'])} D={fmt(row['d_shares'])}: {row['error']}"
    parts = [f"#{row['index']}", f"lam={fmt(row['lam'])}", f"D={fmt(row['d_shares'])}"]
    if row["regime"] != "no_trader":
        parts.append(f"f={fmt(row['participation'])}")
    if row["regime"] == "stackelberg":
        parts.append(f"tau={fmt(row['tau'])}")
    if row["regime"] == "linear":
        parts.append(f"mf={fmt(row['manager_fraction'])} d={fmt(row['start_day'])}")
    parts.append(f"savings={row['savings_usd'] / 1e6:.3f}mm ({row['savings_bps']:.1f}bps)")
    parts.append(f"TE={row['tracking_error_bps']:.2f}bps")
    if row.get("trader_profit_usd") is not None:
        parts.append(f"profit={row['trader_profit_usd'] / 1e6:.3f}mm ({row['trader_profit_bps']:.1f}bps)")
    if row.get("verified"):
        parts.append(f"verify={row['verified']}")
    return " ".join(parts)
