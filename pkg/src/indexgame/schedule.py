"""
Daily-rate schedules: the manager picks one constant trading rate per day.

Inventories are then piecewise linear with knots at day boundaries.  The
execution cost is integrated exactly; tracking accrues on end-of-day holdings
(trapezoid weights on the knots).  Both are quadratic in the knot values, so
the optimum solves a tridiagonal system.  As lambda grows the schedule
concentrates into the final day, so savings shrink towards gamma D^2 / 2
instead of turning sharply negative as the continuous optimum does.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import trapezoid

from .closed_form import tracking_penalty
from .errors import DomainError
from .linalg import solve_spd_tridiagonal
from .market import (
    BPS,
    Conventions,
    EvaluationReport,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    manager_cost,
)

STEPS_PER_PIECE = 8


def knot_times(t_n: float, step: float = 1.0) -> np.ndarray:
    pieces = int(round(t_n / step))
    if pieces < 1 or abs(pieces * step - t_n) > 1e-9 * t_n:
        raise DomainError(f"t_N = {t_n} is not a whole number of {step}-day steps")
    return np.linspace(0.0, t_n, pieces + 1)


def piecewise_linear_path(knots, values, terminal, steps_per_piece: int = STEPS_PER_PIECE) -> InventoryPath:
    """Sample a piecewise-linear inventory on a grid that has every knot as a node."""
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    slopes = np.diff(values) / np.diff(knots)

    def gen(t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, slopes.size - 1)
        return np.interp(t, knots, values), slopes[idx]

    grid = np.concatenate([np.linspace(a, b, steps_per_piece + 1)[:-1] for a, b in zip(knots[:-1], knots[1:])]
                          + [knots[-1:]])
    return InventoryPath.from_generator(gen, grid, terminal, breaks=tuple(knots[1:-1]))


def solve_daily_no_trader(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions(),
                          step: float = 1.0) -> InventoryPath:
    """Optimal piecewise-linear manager inventory without a trader.

    Per piece of length h: cost (S0 + eps) dy + gamma (y_{j+1}^2 - y_j^2)/2 + eta dy^2 / h,
    tracking h (y_j^2 + y_{j+1}^2) / (2 D^2).
    """
    knots = knot_times(scen.t_n, step)
    d = scen.d_shares
    w = tracking_penalty(params, scen, conventions, "no_trader")
    eta = params.eta
    interior = knots.size - 2
    if interior == 0:
        return piecewise_linear_path(knots, [0.0, d], d)
    diag = np.full(interior, 4 * eta / step + 2 * w * step / (d * d))
    off = np.full(interior - 1, -2 * eta / step)
    rhs = np.zeros(interior)
    rhs[-1] = 2 * eta / step * d
    shares = np.concatenate([[0.0], solve_spd_tridiagonal(diag, off, rhs), [d]])
    return piecewise_linear_path(knots, shares, d)


def daily_tracking_error_bps(params: ImpactParams, scen: ScenarioParams, y_path: InventoryPath, step: float = 1.0) -> float:
    """Tracking error from end-of-day holdings, trapezoid weights."""
    knots = knot_times(scen.t_n, step)
    frac = np.interp(knots, y_path.times, y_path.shares) / scen.d_shares
    integral = float(trapezoid(frac * frac, knots))
    return BPS * params.w_bench * params.sigma_daily * math.sqrt(integral)


def evaluate_daily_no_trader(params: ImpactParams, scen: ScenarioParams, conventions: Conventions = Conventions(),
                             step: float = 1.0) -> EvaluationReport:
    y_path = solve_daily_no_trader(params, scen, conventions, step)
    x_path = InventoryPath.zeros(y_path.times)
    bench = benchmark_cost(params, scen, trader_shares=0.0)
    cost = manager_cost(params, scen, x_path, y_path)
    return EvaluationReport.build(cost, bench, daily_tracking_error_bps(params, scen, y_path, step))
