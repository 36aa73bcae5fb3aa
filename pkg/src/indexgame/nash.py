"""
Simultaneous-move (Nash) equilibrium of the trader and the manager.

Integrating the trader's Euler-Lagrange equation once gives
xdot = -ydot/2 - (gamma / 2 eta) y + K1; substituting into the manager's
equation leaves a constant-coefficient second-order ODE for y whose
particular solution is a constant y_p proportional to K1.  K1 is then fixed
by the trader's terminal condition x(t_N) = T, which is affine in K1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .closed_form import exact_costs, tracking_penalty
from .errors import SolverError
from .expoly import ExpPoly
from .market import (
    Conventions,
    EvaluationReport,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    default_grid_size,
    final_day_benchmark_cost,
    manager_cost,
    profit_notional,
    tracking_error_bps,
    trader_cost_and_profit,
    uniform_grid,
)


@dataclass(frozen=True)
class NashSolution:
    r1: float
    r2: float
    c1: float
    c2: float
    k1: float
    y_p: float
    b_end: float
    c_end: float
    d_shares: float
    t_shares: float
    t_n: float
    gamma: float
    eta: float
    penalty: float
    # C1 * B, finite even when B = exp(r1 t_N) overflows
    c1_scaled: float = 0.0
    kind: str = "general"  # general | linear | trader_absent

    @property
    def y(self) -> ExpPoly:
        if self.kind == "linear":
            return ExpPoly.linear(self.d_shares / self.t_n)
        return (ExpPoly.const(self.y_p) + ExpPoly.exp(self.c1_scaled, self.r1, anchor=self.t_n)
                + ExpPoly.exp(self.c2, self.r2))

    @property
    def x(self) -> ExpPoly:
        if self.kind == "linear":
            return ExpPoly.linear(self.t_shares / self.t_n)
        if self.kind == "trader_absent":
            return ExpPoly()
        g = self.gamma / (2.0 * self.eta)
        e_b = math.exp(-self.r1 * self.t_n)
        p, q = self.c1_scaled, self.c2
        integral_y = (ExpPoly.linear(self.y_p)
                      + ExpPoly.exp(p / self.r1, self.r1, anchor=self.t_n) - p * e_b / self.r1
                      + ExpPoly.exp(q / self.r2, self.r2) - q / self.r2)
        return -0.5 * (self.y - self.y_p) + (-0.5 * self.y_p) - g * integral_y + ExpPoly.linear(self.k1)

    def x_path(self, grid) -> InventoryPath:
        return InventoryPath.from_generator(self.x.generator(), grid, self.t_shares)

    def y_path(self, grid) -> InventoryPath:
        return InventoryPath.from_generator(self.y.generator(), grid, self.d_shares)

    def paths(self, grid):
        return self.x_path(grid), self.y_path(grid)


def nash_roots(gamma, eta, penalty, d_shares):
    disc = math.sqrt(4 * gamma**2 + 12 * eta * penalty / d_shares**2)
    return (gamma + disc) / (3 * eta), (gamma - disc) / (3 * eta)


def _modes(d, y_p, r1, r2, t_n):
    """Scaled amplitudes (C1*B, C2) meeting y(0) = 0, y(t_N) = D."""
    e_b, e_c = math.exp(-r1 * t_n), math.exp(r2 * t_n)
    det = 1.0 - e_b * e_c
    return (d + y_p * (e_c - 1.0)) / det, -(y_p + e_b * (d - y_p)) / det


def _terminal_x(d, y_p, k1, r1, r2, t_n, g):
    p, q = _modes(d, y_p, r1, r2, t_n)
    e_b, e_c = math.exp(-r1 * t_n), math.exp(r2 * t_n)
    integral = y_p * t_n + p / r1 * (1.0 - e_b) + q / r2 * (e_c - 1.0)
    return -0.5 * d - g * integral + k1 * t_n


def solve_nash(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions(),
               k1_method: str = "affine", trader_absent_when_zero: bool = True) -> NashSolution:
    gamma, eta = params.gamma, params.eta
    d, t_sh, t_n = scen.d_shares, scen.t_shares, scen.t_n
    penalty = tracking_penalty(params, scen, conventions, "nash")
    common = dict(d_shares=d, t_shares=t_sh, t_n=t_n, gamma=gamma, eta=eta, penalty=penalty)

    if trader_absent_when_zero and t_sh == 0.0:
        # x = 0: the manager equation reduces to 2 eta yddot = 2 (penalty / D^2) y
        k = math.sqrt(penalty / (eta * d * d))
        if k * t_n < 1e-9:
            return NashSolution(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, c1_scaled=0.0, kind="linear", **common)
        p, q = _modes(d, 0.0, k, -k, t_n)
        return NashSolution(k, -k, p * math.exp(-k * t_n), q, 0.0, 0.0, _safe_exp(k * t_n),
                            math.exp(-k * t_n), c1_scaled=p, kind="trader_absent", **common)

    if gamma == 0.0 and penalty == 0.0:
        return NashSolution(0.0, 0.0, 0.0, 0.0, t_sh / t_n, 0.0, 1.0, 1.0, kind="linear", **common)

    r1, r2 = nash_roots(gamma, eta, penalty, d)
    if t_n * abs(r1 - r2) < 1e-12:
        raise SolverError("characteristic roots coincide to working precision (B - C underflow)")
    a = gamma**2 / (2 * eta) + 2 * penalty / d**2
    u = gamma / a
    g = gamma / (2 * eta)

    if k1_method == "affine":
        e_b, e_c = math.exp(-r1 * t_n), math.exp(r2 * t_n)
        det = 1.0 - e_b * e_c
        p0, p1 = d / det, u * (e_c - 1.0) / det
        q0, q1 = -e_b * d / det, -u * (1.0 - e_b) / det
        alpha = -0.5 * d - g * (p0 / r1 * (1 - e_b) + q0 / r2 * (e_c - 1))
        beta = t_n - g * (u * t_n + p1 / r1 * (1 - e_b) + q1 / r2 * (e_c - 1))
        if abs(beta) < 1e-14 * t_n:
            raise SolverError("terminal trader inventory does not depend on K1")
        k1 = (t_sh - alpha) / beta
    elif k1_method == "bisection":
        bound = 10.0 * d / t_n
        resid = lambda k: _terminal_x(d, u * k, k, r1, r2, t_n, g) - t_sh
        if resid(-bound) * resid(bound) > 0:
            raise SolverError("K1 not bracketed by +/- 10 D / t_N")
        k1 = bisect(resid, -bound, bound, xtol=1e-12 * bound, maxiter=500)
    else:
        raise ValueError(f"unknown k1_method {k1_method!r}")

    y_p = u * k1
    p, q = _modes(d, y_p, r1, r2, t_n)
    return NashSolution(r1, r2, p * math.exp(-r1 * t_n), q, k1, y_p, _safe_exp(r1 * t_n),
                        math.exp(r2 * t_n), c1_scaled=p, **common)


def _safe_exp(z):
    return math.exp(z) if z < 709.0 else math.inf


def nash_x_path(solution: NashSolution, grid) -> InventoryPath:
    return solution.x_path(np.asarray(grid, dtype=float))


def nash_y_path(solution: NashSolution, grid) -> InventoryPath:
    return solution.y_path(np.asarray(grid, dtype=float))


def nash_closed_form_costs(params: ImpactParams, solution: NashSolution):
    """(manager cost, trader cost) integrated analytically along the equilibrium."""
    return exact_costs(params, solution.x, solution.y, solution.t_n)


def evaluate_nash(params: ImpactParams, scen: ScenarioParams, solution: NashSolution = None,
                  conventions: Conventions = Conventions(), grid_size=None) -> EvaluationReport:
    if solution is None:
        solution = solve_nash(params, scen, conventions)
    grid = uniform_grid(scen.t_n, grid_size or default_grid_size(scen.t_n))
    x_path, y_path = solution.paths(grid)
    cost = manager_cost(params, scen, x_path, y_path)
    tcost, profit = trader_cost_and_profit(params, scen, x_path, y_path, conventions)
    return EvaluationReport.build(
        cost, benchmark_cost(params, scen), tracking_error_bps(params, scen, y_path),
        trader_cost=tcost, trader_profit=profit, profit_notional=profit_notional(params, scen),
        alt_benchmark=final_day_benchmark_cost(params, scen))
