"""
Shared market model: parameter types, inventory paths, and the price, cost,
tracking-error and profit functionals every regime is evaluated against.

Units are days for time, shares for inventory, shares/day for rates and USD
for prices and costs. The temporary impact coefficient ``eta`` is therefore
USD*day/share^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError

TRADING_DAYS = 252
BPS = 1e4

# Supply bought from other participants before t_N (D'); the benchmark buys everything at t_N.
OTHER_SUPPLY = 0.0

LAMBDA_SCALINGS = ("benchmark", "raw")
NO_TRADER_CURVATURES = ("euler_lagrange", "printed")
GAME_BENCHMARKS = ("event", "final_day_residual")
TRADER_PROCEEDS = ("post_event", "benchmark_price")
SCHEDULES = ("continuous", "daily")


def _require_finite(obj, names):
    for name in names:
        value = getattr(obj, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise DomainError(f"{name} must be a finite number, got {value!r}")


@dataclass(frozen=True)
class ImpactParams:
    s0: float = 50.0
    gamma: float = 1e-7
    eta: float = 1e-6
    epsilon: float = 0.01
    sigma_annual: float = 0.30
    w_bench: float = 0.01
    dt_bench: float = 1.0

    def __post_init__(self):
        _require_finite(self, ("s0", "gamma", "eta", "epsilon", "sigma_annual", "w_bench", "dt_bench"))
        if self.s0 <= 0:
            raise DomainError("s0 must be positive")
        if self.gamma < 0 or self.epsilon < 0 or self.sigma_annual < 0:
            raise DomainError("gamma, epsilon and sigma_annual must be non-negative")
        if self.eta <= 0:
            raise DomainError("eta must be positive")
        if not 0 <= self.w_bench <= 1:
            raise DomainError("w_bench must lie in [0, 1]")
        if self.dt_bench <= 0:
            raise DomainError("dt_bench must be positive")

    @property
    def sigma_daily(self) -> float:
        return self.sigma_annual / math.sqrt(TRADING_DAYS)


@dataclass(frozen=True)
class ScenarioParams:
    d_shares: float = 5e6
    t_shares: float = 0.0
    t_n: float = 10.0
    lam: float = 0.0
    f: float = 0.0
    d_start: float = 0.0
    tau: float = 1.0
    aum: float = 50e9

    def __post_init__(self):
        _require_finite(self, ("d_shares", "t_shares", "t_n", "lam", "f", "d_start", "tau", "aum"))
        if self.d_shares <= 0:
            raise DomainError("d_shares must be positive")
        if self.t_shares < 0:
            raise DomainError("t_shares must be non-negative")
        if self.t_n <= 0:
            raise DomainError("t_n must be positive")
        if self.lam < 0:
            raise DomainError("lam must be non-negative")
        if not 0 <= self.f <= 1:
            raise DomainError("f must lie in [0, 1]")
        if not 0 <= self.d_start < self.t_n:
            raise DomainError("d_start must lie in [0, t_n)")
        if self.tau <= 0:
            raise DomainError("tau must be positive")
        if self.aum <= 0:
            raise DomainError("aum must be positive")

    @classmethod
    def game(cls, d_shares, participation, **kw):
        """Scenario for the Nash/Stackelberg regimes, where the trader ends with T = f*D."""
        return cls(d_shares=d_shares, t_shares=participation * d_shares, f=participation, **kw)


@dataclass(frozen=True)
class Conventions:
    """Modelling choices the base model leaves open; recorded in every run manifest."""

    lambda_scaling: str = "benchmark"
    no_trader_curvature: str = "euler_lagrange"
    game_benchmark: str = "event"
    trader_proceeds: str = "post_event"
    # no-trader regime only: continuous optimum or one trading rate per day
    schedule: str = "continuous"

    def __post_init__(self):
        if self.lambda_scaling not in LAMBDA_SCALINGS:
            raise DomainError(f"lambda_scaling must be one of {LAMBDA_SCALINGS}")
        if self.no_trader_curvature not in NO_TRADER_CURVATURES:
            raise DomainError(f"no_trader_curvature must be one of {NO_TRADER_CURVATURES}")
        if self.game_benchmark not in GAME_BENCHMARKS:
            raise DomainError(f"game_benchmark must be one of {GAME_BENCHMARKS}")
        if self.trader_proceeds not in TRADER_PROCEEDS:
            raise DomainError(f"trader_proceeds must be one of {TRADER_PROCEEDS}")
        if self.schedule not in SCHEDULES:
            raise DomainError(f"schedule must be one of {SCHEDULES}")


PRESETS = {
    "core": ImpactParams(),
    "large-cap": ImpactParams(s0=100.0, gamma=1e-7, eta=1e-6, epsilon=0.005, sigma_annual=0.25, w_bench=0.01),
    "mid-cap": ImpactParams(s0=50.0, gamma=5e-7, eta=5e-6, epsilon=0.02, sigma_annual=0.35, w_bench=0.002),
    "small-cap": ImpactParams(s0=30.0, gamma=1e-6, eta=1e-5, epsilon=0.05, sigma_annual=0.50, w_bench=0.0005),
    # core values with the weaker permanent impact quoted for the no-trader results
    "low-gamma": ImpactParams(gamma=1e-8),
}

# Representative reconstitution volume per preset (midpoint of the quoted ranges).
PRESET_DEMAND = {"core": 5e6, "large-cap": 15e6, "mid-cap": 3.5e6, "small-cap": 1.25e6, "low-gamma": 5e6}


def preset(name: str) -> ImpactParams:
    try:
        return PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


@dataclass(frozen=True, eq=False)
class InventoryPath:
    """Cumulative holdings sampled on a strictly increasing grid over [0, t_N].

    ``rates`` holds the analytic time derivative when the generating formula
    provides one; ``generator`` (t -> (shares, rates)) lets consumers resample.
    ``breaks`` lists grid times where the rate jumps; quadrature treats each
    smooth piece separately.  Overshooting ``terminal`` mid-path is allowed.
    """

    times: np.ndarray
    shares: np.ndarray
    terminal: float
    rates: Optional[np.ndarray] = None
    generator: Optional[Callable] = field(default=None, repr=False)
    breaks: Tuple[float, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.shares, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "shares", s)
        if self.rates is not None:
            object.__setattr__(self, "rates", np.asarray(self.rates, dtype=float))
        if t.ndim != 1 or t.size < 2 or s.shape != t.shape:
            raise DomainError("times and shares must be 1-d arrays of equal length >= 2")
        if self.rates is not None and self.rates.shape != t.shape:
            raise DomainError("rates must match times")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(s))):
            raise DomainError("path contains non-finite values")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise DomainError("times must start at 0 and be strictly increasing")
        if abs(s[0]) > 1e-6 * max(1.0, abs(self.terminal)):
            raise DomainError("paths start from zero holdings")
        if abs(s[-1] - self.terminal) > 1e-6 * max(1.0, abs(self.terminal)):
            raise DomainError(f"path ends at {s[-1]!r}, declared terminal {self.terminal!r}")
        for b in self.breaks:
            if not np.any(t == b):
                raise DomainError(f"break {b!r} is not a grid node")

    @property
    def t_n(self) -> float:
        return float(self.times[-1])

    def derivative(self) -> np.ndarray:
        if self.rates is not None:
            return self.rates
        return np.gradient(self.shares, self.times, edge_order=2)

    def resample(self, times) -> "InventoryPath":
        times = np.asarray(times, dtype=float)
        if np.array_equal(times, self.times):
            return self
        if self.generator is None:
            raise DomainError("path has no generator and cannot be resampled onto a different grid")
        shares, rates = self.generator(times)
        return InventoryPath(times, shares, self.terminal, rates, self.generator, self.breaks)

    def one_sided_rate(self, index: int, side: int) -> float:
        """Rate at node ``index`` approached from the left (side=-1) or right (+1)."""
        if self.generator is not None:
            t = np.nextafter(self.times[index], np.inf if side > 0 else -np.inf)
            return float(np.asarray(self.generator(np.array([t]))[1])[0])
        return float(self.derivative()[index])

    def max_shares(self) -> float:
        return float(np.max(self.shares))

    @classmethod
    def from_generator(cls, generator, times, terminal, breaks=()) -> "InventoryPath":
        times = np.asarray(times, dtype=float)
        shares, rates = generator(times)
        return cls(times, shares, float(terminal), rates, generator, tuple(breaks))

    @classmethod
    def zeros(cls, times) -> "InventoryPath":
        return cls.from_generator(_zero_generator, times, 0.0)


def _zero_generator(t):
    t = np.asarray(t, dtype=float)
    return np.zeros_like(t), np.zeros_like(t)


@dataclass(frozen=True)
class EvaluationReport:
    cost_usd: float
    benchmark_cost_usd: float
    savings_usd: float
    savings_bps: float
    tracking_error_bps: float
    trader_profit_usd: float
    trader_profit_bps: float
    # final-day-residual reading of the benchmark; equal to the fields above under the event convention
    alt_benchmark_cost_usd: float = float("nan")
    alt_savings_usd: float = float("nan")
    alt_savings_bps: float = float("nan")
    trader_cost_usd: float = 0.0

    @classmethod
    def build(cls, cost, benchmark, te_bps, trader_cost=0.0, trader_profit=0.0, profit_notional=0.0,
              alt_benchmark=None):
        """``profit_notional`` is the trader's T shares valued at the benchmark execution price."""
        savings = benchmark - cost
        if alt_benchmark is None:
            alt_benchmark = benchmark
        alt_savings = alt_benchmark - cost
        profit_bps = BPS * trader_profit / profit_notional if profit_notional > 0 else 0.0
        return cls(
            cost_usd=cost,
            benchmark_cost_usd=benchmark,
            savings_usd=savings,
            savings_bps=BPS * savings / benchmark if benchmark else 0.0,
            tracking_error_bps=te_bps,
            trader_profit_usd=trader_profit,
            trader_profit_bps=profit_bps,
            alt_benchmark_cost_usd=alt_benchmark,
            alt_savings_usd=alt_savings,
            alt_savings_bps=BPS * alt_savings / alt_benchmark if alt_benchmark else 0.0,
            trader_cost_usd=trader_cost,
        )


def execution_price(params: ImpactParams, cum_flow, rate, sign=1):
    """S0 + gamma * cumulative flow + eta * rate +/- epsilon (sign +1 buys, -1 sells)."""
    if sign not in (1, -1):
        raise DomainError("sign must be +1 (buy) or -1 (sell)")
    cum_flow = np.asarray(cum_flow, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if not (np.all(np.isfinite(cum_flow)) and np.all(np.isfinite(rate))):
        raise DomainError("execution_price needs finite flow and rate")
    price = params.s0 + params.gamma * cum_flow + params.eta * rate + sign * params.epsilon
    return float(price) if np.ndim(price) == 0 else price


def benchmark_cost(params: ImpactParams, scen: ScenarioParams, trader_shares=None) -> float:
    """Cost of buying all D shares at t_N with the D - T residual executed over dt_bench days."""
    d = scen.d_shares
    t = scen.t_shares if trader_shares is None else trader_shares
    temp = params.eta * (d - t - OTHER_SUPPLY) / params.dt_bench
    return d * (params.s0 + params.gamma * d + temp + params.epsilon)


def final_day_benchmark_cost(params: ImpactParams, scen: ScenarioParams) -> float:
    """T shares taken from the trader at the post-event price, D - T bought over the final day."""
    d, t = scen.d_shares, scen.t_shares
    base = params.s0 + params.gamma * d + params.epsilon
    return d * base + params.eta * (d - t) ** 2 / params.dt_bench


def effective_lambda(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions()) -> float:
    """Tracking-error weight entering the Euler-Lagrange equations.

    Under the "benchmark" scaling the penalty is multiplied by the benchmark
    cost so that cost and tracking error compete on the same scale.
    """
    if conventions.lambda_scaling == "raw":
        return scen.lam
    return scen.lam * benchmark_cost(params, scen)


def simpson(values, times) -> float:
    """Composite Simpson rule on a (possibly non-uniform) grid with an odd number of nodes."""
    y = np.asarray(values, dtype=float)
    t = np.asarray(times, dtype=float)
    n = t.size
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Simpson quadrature needs an odd number of nodes >= 3, got {n}")
    h = np.diff(t)
    h0, h1 = h[0::2], h[1::2]
    f0, f1, f2 = y[0:-2:2], y[1:-1:2], y[2::2]
    hs = h0 + h1
    panels = hs / 6.0 * ((2.0 - h1 / h0) * f0 + hs * hs / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2)
    return float(np.sum(panels))


def merge_paths(x_path: InventoryPath, y_path: InventoryPath):
    """Bring two paths onto a common grid (the union of both grids)."""
    if np.array_equal(x_path.times, y_path.times):
        return x_path, y_path
    if not math.isclose(x_path.t_n, y_path.t_n, rel_tol=1e-12):
        raise DomainError("paths cover different horizons")
    grid = np.union1d(x_path.times, y_path.times)
    if grid.size % 2 == 0:
        raise DomainError("merged grid has an even number of nodes")
    return x_path.resample(grid), y_path.resample(grid)


def _segment_rates(path, lo, hi, cuts):
    """Rates on nodes lo..hi with one-sided limits at interior breaks."""
    if path.rates is not None or path.generator is not None:
        rates = path.derivative()[lo:hi + 1].copy()
        if lo in cuts:
            rates[0] = path.one_sided_rate(lo, +1)
        if hi in cuts:
            rates[-1] = path.one_sided_rate(hi, -1)
        return rates
    return np.gradient(path.shares[lo:hi + 1], path.times[lo:hi + 1], edge_order=2)


def cost_integral(params: ImpactParams, x_path: InventoryPath, y_path: InventoryPath, buyer: str) -> float:
    """int [S0 + gamma(x+y) + eta(xdot+ydot) + eps] * (xdot or ydot) dt, piecewise Simpson."""
    x_path, y_path = merge_paths(x_path, y_path)
    times = x_path.times
    breaks = sorted(set(x_path.breaks) | set(y_path.breaks))
    cuts = {int(np.searchsorted(times, b)) for b in breaks if 0 < b < times[-1]}
    edges = [0, *sorted(cuts), times.size - 1]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        xdot = _segment_rates(x_path, lo, hi, cuts)
        ydot = _segment_rates(y_path, lo, hi, cuts)
        sl = slice(lo, hi + 1)
        price = (params.s0 + params.gamma * (x_path.shares[sl] + y_path.shares[sl])
                 + params.eta * (xdot + ydot) + params.epsilon)
        total += simpson(price * (ydot if buyer == "manager" else xdot), times[sl])
    return total


def manager_cost(params: ImpactParams, scen: ScenarioParams, x_path: InventoryPath, y_path: InventoryPath) -> float:
    """Manager execution cost over [0, t_N] plus the terminal top-up of any shares still missing."""
    cost = cost_integral(params, x_path, y_path, "manager")
    missing = scen.d_shares - y_path.shares[-1]
    if missing > 1e-9 * scen.d_shares:
        cost += missing / scen.d_shares * benchmark_cost(params, scen)
    return cost


def trader_cost_and_profit(params: ImpactParams, scen: ScenarioParams, x_path: InventoryPath, y_path: InventoryPath,
                           conventions: Conventions = Conventions()):
    """(purchase cost, profit) for the trader; by default the sale at t_N earns S0 + gamma*D - epsilon per share."""
    t_end = x_path.shares[-1]
    if not np.any(x_path.shares):
        return 0.0, 0.0
    cost = cost_integral(params, x_path, y_path, "trader")
    return cost, trader_proceeds(params, scen, t_end, conventions) - cost


def trader_proceeds(params: ImpactParams, scen: ScenarioParams, shares=None, conventions: Conventions = Conventions()) -> float:
    """Sale of the trader's inventory at t_N.

    "post_event" omits the temporary impact of the closing trade; the
    "benchmark_price" variant pays the trader the full benchmark execution
    price, including eta (D - T) / dt_bench.
    """
    t = scen.t_shares if shares is None else shares
    price = params.s0 + params.gamma * scen.d_shares - params.epsilon
    if conventions.trader_proceeds == "benchmark_price":
        price += params.eta * (scen.d_shares - t) / params.dt_bench
    return t * price


def profit_notional(params: ImpactParams, scen: ScenarioParams) -> float:
    """T shares at the per-share benchmark price; denominator of trader profit in bps."""
    return scen.t_shares * benchmark_cost(params, scen) / scen.d_shares


def tracking_error_bps(params: ImpactParams, scen: ScenarioParams, y_path: InventoryPath) -> float:
    """Pre-reconstitution tracking error, w * daily sigma * sqrt(int (y/D)^2 dt), in bps."""
    frac = y_path.shares / scen.d_shares
    times = y_path.times
    if times.size % 2 == 1:
        integral = simpson(frac * frac, times)
    else:
        integral = float(trapezoid(frac * frac, times))
    return BPS * params.w_bench * params.sigma_daily * math.sqrt(max(integral, 0.0))


def expost_te_adjustment(te_base: float, t_n: float, mean_sq_dr: float) -> float:
    """Extra annualized tracking error from a t_N-day return difference with mean square ``mean_sq_dr``."""
    if te_base < 0:
        raise DomainError("te_base must be non-negative")
    extra = t_n / TRADING_DAYS * mean_sq_dr
    # rationalized form avoids cancellation when the added term is tiny
    return extra / (math.sqrt(te_base * te_base + extra) + te_base) if extra > 0 else 0.0


def drag_bps(savings_usd: float, aum: float) -> float:
    if aum <= 0:
        raise DomainError("aum must be positive")
    return BPS * savings_usd / aum


def uniform_grid(t_n: float, grid_size: int) -> np.ndarray:
    if grid_size < 3 or grid_size % 2 == 0:
        raise DomainError(f"grid_size must be odd and >= 3, got {grid_size}")
    return np.linspace(0.0, t_n, grid_size)


def default_grid_size(t_n: float, per_ten_days: int = 2001) -> int:
    """2,001 nodes per 10-day horizon, rounded to the next odd count."""
    n = int(math.ceil((per_ten_days - 1) * t_n / 10.0)) + 1
    n = max(n, 5)
    return n if n % 2 == 1 else n + 1


def with_lambda(scen: ScenarioParams, lam: float) -> ScenarioParams:
    return replace(scen, lam=lam)
