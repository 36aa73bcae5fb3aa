"""
Closed-form manager strategies without a strategic trader: the optimal
no-trader sinh ramp and the linear early-fraction inventories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SolverError
from .expoly import ExpPoly
from .market import (
    BPS,
    Conventions,
    EvaluationReport,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    default_grid_size,
    effective_lambda,
    manager_cost,
    profit_notional,
    tracking_error_bps,
    trader_cost_and_profit,
    uniform_grid,
)

LINEAR_LIMIT = 1e-6
# start days closer to 0 than this (relative to t_N) are treated as 0
START_FLOOR = 1e-12
OVERFLOW_LIMIT = 700.0


def tracking_penalty(params: ImpactParams, scen: ScenarioParams, conventions: Conventions, regime: str) -> float:
    """Weight w of the manager objective cost + w * int (y/D)^2 dt for a regime.

    The printed no-trader curvature sqrt(2 lambda / (eta D^2)) corresponds to
    doubling the weight; every other regime uses the effective lambda as is.
    """
    lam = effective_lambda(params, scen, conventions)
    if regime == "no_trader" and conventions.no_trader_curvature == "printed":
        return 2.0 * lam
    return lam


def sinh_ramp(d_shares: float, k: float, t_n: float) -> ExpPoly:
    """D sinh(k t) / sinh(k t_N), written with non-positive exponents."""
    if k * t_n < LINEAR_LIMIT:
        return ExpPoly.linear(d_shares / t_n)
    denom = -math.expm1(-2.0 * k * t_n)
    return (ExpPoly.exp(d_shares / denom, k, anchor=t_n)
            + ExpPoly.exp(-d_shares * math.exp(-k * t_n) / denom, -k))


@dataclass(frozen=True)
class NoTraderSolution:
    k: float
    d_shares: float
    t_n: float

    @property
    def y(self) -> ExpPoly:
        return sinh_ramp(self.d_shares, self.k, self.t_n)

    def path(self, grid) -> InventoryPath:
        return InventoryPath.from_generator(self.y.generator(), grid, self.d_shares)


def solve_no_trader(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions()) -> NoTraderSolution:
    penalty = tracking_penalty(params, scen, conventions, "no_trader")
    k = math.sqrt(penalty / (params.eta * scen.d_shares**2))
    return NoTraderSolution(k=k, d_shares=scen.d_shares, t_n=scen.t_n)


def no_trader_path(params, scen, grid_size=None, conventions=Conventions()) -> InventoryPath:
    grid = uniform_grid(scen.t_n, grid_size or default_grid_size(scen.t_n))
    return solve_no_trader(params, scen, conventions).path(grid)


def no_trader_cost_closed_form(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions()) -> float:
    """Manager cost along the optimal no-trader ramp."""
    sol = solve_no_trader(params, scen, conventions)
    d, t_n, k = scen.d_shares, scen.t_n, sol.k
    s0, gamma, eta, eps = params.s0, params.gamma, params.eta, params.epsilon
    x = k * t_n
    if x > OVERFLOW_LIMIT:
        raise SolverError(f"k*t_N = {x:.1f} overflows the closed form; rescale lambda")
    if x < LINEAR_LIMIT:
        return d * s0 + gamma * d * d / 2 + eta * d * d / t_n + eps * d
    if 1e-3 <= x <= 300.0:
        sh = math.sinh(x)
        c1 = d * k / sh
        return c1 * ((s0 + eps) / k * sh
                     + gamma * d / sh * (math.cosh(2 * x) - 1) / (4 * k)
                     + eta * d * k / sh * (t_n / 2 + math.sinh(2 * x) / (4 * k)))
    # same expression with C1 folded in: avoids sinh^2 overflow and cosh(2x)-1 cancellation
    inv_sh = 2.0 * math.exp(-x) / -math.expm1(-2.0 * x)
    coth = 1.0 / math.tanh(x)
    return (d * (s0 + eps) + gamma * d * d / 2
            + eta * d * d * (k * k * t_n / 2 * inv_sh * inv_sh + k * coth / 2))


def evaluate_no_trader(params, scen, conventions=Conventions(), grid_size=None) -> EvaluationReport:
    y_path = no_trader_path(params, scen, grid_size, conventions)
    x_path = InventoryPath.zeros(y_path.times)
    bench = benchmark_cost(params, scen, trader_shares=0.0)
    cost = manager_cost(params, _without_trader(scen), x_path, y_path)
    return EvaluationReport.build(cost, bench, tracking_error_bps(params, scen, y_path))


def _without_trader(scen):
    return scen if scen.t_shares == 0 else replace(scen, t_shares=0.0)


# --- linear inventories -----------------------------------------------------

def linear_grid(t_n: float, d_start: float, grid_size: int) -> np.ndarray:
    """Grid with d_start on a node and an even number of intervals on each side of it."""
    if d_start <= START_FLOOR * t_n:
        return uniform_grid(t_n, grid_size)
    intervals = grid_size - 1
    pre = max(2, 2 * int(round(intervals * d_start / t_n / 2)))
    post = max(2, intervals - pre)
    post += post % 2
    left = np.linspace(0.0, d_start, pre + 1)
    right = np.linspace(d_start, t_n, post + 1)
    return np.concatenate([left, right[1:]])


def linear_paths(params: ImpactParams, scen: ScenarioParams, grid_size=None):
    """Trader ramp x = T t / t_N and manager ramp y = f D (t - d) / (t_N - d) on [d, t_N]."""
    t_n, d, t_sh = scen.t_n, scen.d_start, scen.t_shares
    target = scen.f * scen.d_shares
    if d >= t_n:
        raise DomainError("manager start day must precede t_N")
    grid = linear_grid(t_n, d, grid_size or default_grid_size(t_n))
    if d <= START_FLOOR * t_n:
        d = 0.0
    slope_y = target / (t_n - d)

    def x_gen(t):
        t = np.asarray(t, dtype=float)
        return t_sh / t_n * t, np.full_like(t, t_sh / t_n)

    def y_gen(t):
        t = np.asarray(t, dtype=float)
        active = t >= d
        return np.where(active, slope_y * (t - d), 0.0), np.where(active, slope_y, 0.0)

    x_path = InventoryPath.from_generator(x_gen, grid, t_sh)
    y_path = InventoryPath.from_generator(y_gen, grid, target, breaks=(d,) if d > 0 else ())
    return x_path, y_path


def linear_savings(params: ImpactParams, scen: ScenarioParams) -> float:
    """Savings S_f of buying f*D linearly from day d versus the benchmark."""
    d_sh, t_sh, t_n, d, f = scen.d_shares, scen.t_shares, scen.t_n, scen.d_start, scen.f
    if d >= t_n:
        raise DomainError("manager start day must precede t_N")
    gamma, eta_bench = params.gamma, params.eta / params.dt_bench
    # eta(D - T) inherits the benchmark's 1/dt_bench rate; the early-trading rates do not
    early = f * d_sh * (gamma * d_sh + eta_bench * (d_sh - t_sh)
                        - params.eta * (t_sh / t_n + f * d_sh / (t_n - d)))
    return early - f * gamma * d_sh * (t_sh / 2 * (1 + d / t_n) + f * d_sh / 2)


def linear_te_bps(params: ImpactParams, scen: ScenarioParams) -> float:
    return BPS * params.w_bench * params.sigma_daily * scen.f * math.sqrt((scen.t_n - scen.d_start) / 3)


def evaluate_linear(params, scen, conventions=Conventions(), grid_size=None) -> EvaluationReport:
    x_path, y_path = linear_paths(params, scen, grid_size)
    cost = manager_cost(params, scen, x_path, y_path)
    tcost, profit = trader_cost_and_profit(params, scen, x_path, y_path, conventions)
    return EvaluationReport.build(
        cost, benchmark_cost(params, scen), tracking_error_bps(params, scen, y_path),
        trader_cost=tcost, trader_profit=profit, profit_notional=profit_notional(params, scen))


def exact_costs(params: ImpactParams, x: ExpPoly, y: ExpPoly, t_n: float):
    """(manager cost, trader cost) integrated exactly for exponential-polynomial paths."""
    xdot, ydot = x.derivative(), y.derivative()
    price = (params.s0 + params.epsilon) + params.gamma * (x + y) + params.eta * (xdot + ydot)
    return (price * ydot).integral(t_n), (price * xdot).integral(t_n)
