"""
Independent numerical checks for the closed-form solvers.

Everything here works from sampled inventory paths: Simpson quadrature of the
cost integrands, finite-difference Euler-Lagrange residuals, and a direct
discretized best-response solve.  No closed-form coefficient (roots, C1, K,
...) is ever read, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .closed_form import (
    linear_paths,
    linear_savings,
    no_trader_cost_closed_form,
    solve_no_trader,
    tracking_penalty,
)
from .errors import DomainError
from .linalg import solve_spd_tridiagonal
from .market import (
    Conventions,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    cost_integral,
    default_grid_size,
    manager_cost,
    uniform_grid,
)
from .nash import nash_closed_form_costs, solve_nash
from .stackelberg import manager_cost_terms, solve_stackelberg, trader_cost_terms

REGIMES = ("no_trader", "linear", "nash", "stackelberg")
EL_REGIMES = ("trader", "manager", "no_trader", "stackelberg_follower")

COST_RTOL = 1e-6
EL_TOL = 1e-4  # times D / t_N^2
BC_TOL = 1e-8  # times D
BR_TOL = 1e-3  # times D


# --- quadrature ---------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    richardson: float
    coarse: float

    def __float__(self):
        return self.value


def _every_other(path: InventoryPath) -> Optional[InventoryPath]:
    times = path.times[::2]
    if any(not np.any(times == b) for b in path.breaks):
        return None
    rates = None if path.rates is None else path.rates[::2]
    return InventoryPath(times, path.shares[::2], path.terminal, rates, path.generator, path.breaks)


def quadrature_cost(params: ImpactParams, integrand: str, x_path: InventoryPath, y_path: InventoryPath,
                    grid_size: Optional[int] = None) -> QuadratureResult:
    """Composite Simpson cost of the manager or trader, with a Richardson estimate from the half grid.

    When ``grid_size`` is given both paths are resampled on a uniform grid of
    that many nodes, which must be odd.
    """
    if integrand not in ("manager", "trader"):
        raise DomainError(f"integrand must be 'manager' or 'trader', got {integrand!r}")
    if grid_size is not None:
        grid = uniform_grid(x_path.t_n, grid_size)
        x_path, y_path = x_path.resample(grid), y_path.resample(grid)
    elif x_path.times.size % 2 == 0:
        raise DomainError("Simpson quadrature needs an odd number of nodes")
    fine = cost_integral(params, x_path, y_path, integrand)
    coarse = richardson = float("nan")
    if np.array_equal(x_path.times, y_path.times) and (x_path.times.size - 1) % 4 == 0:
        xc, yc = _every_other(x_path), _every_other(y_path)
        if xc is not None and yc is not None:
            coarse = cost_integral(params, xc, yc, integrand)
            richardson = fine + (fine - coarse) / 15.0
    return QuadratureResult(fine, richardson, coarse)


# --- finite differences -------------------------------------------------------

def fornberg_weights(z: float, nodes, max_order: int) -> np.ndarray:
    """Finite-difference weights at ``z`` for derivatives 0..max_order on arbitrary ``nodes``.

    Returns an array of shape (max_order + 1, len(nodes)).
    """
    x = np.asarray(nodes, dtype=float)
    n = x.size
    c = np.zeros((max_order + 1, n))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, max_order)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def fd_derivatives(values, h: float, order: int = 6) -> Tuple[np.ndarray, np.ndarray]:
    """First and second derivatives of uniformly sampled values, accurate to O(h^order).

    Interior nodes use centered stencils of order + 1 points; nodes near the
    ends use the order + 2 nearest nodes, off-centre.
    """
    if order < 2 or order % 2:
        raise DomainError("order must be an even integer >= 2")
    v = np.asarray(values, dtype=float)
    n = v.size
    half = order // 2
    if n < order + 2:
        raise DomainError(f"{n} nodes are too few for an order-{order} stencil")
    w = fornberg_weights(0.0, np.arange(-half, half + 1), 2)
    d1, d2 = np.empty(n), np.empty(n)
    inner = slice(half, n - half)
    d1[inner] = sum(w[1, j] * v[j:n - 2 * half + j] for j in range(2 * half + 1)) / h
    d2[inner] = sum(w[2, j] * v[j:n - 2 * half + j] for j in range(2 * half + 1)) / h**2
    width = order + 2
    for i in list(range(half)) + list(range(n - half, n)):
        lo = 0 if i < half else n - width
        we = fornberg_weights(float(i - lo), np.arange(width), 2)
        seg = v[lo:lo + width]
        d1[i] = we[1] @ seg / h
        d2[i] = we[2] @ seg / h**2
    return d1, d2


def _uniform_step(times) -> float:
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise DomainError("EL residuals need a uniform grid")
    return float(h[0])


@dataclass(frozen=True)
class ELResidual:
    times: np.ndarray
    residual: np.ndarray  # shares / day^2 at interior nodes
    sup: float
    l2: float


def el_residual(params: ImpactParams, scen: ScenarioParams, regime: str, x_path: Optional[InventoryPath],
                y_path: InventoryPath, conventions: Conventions = Conventions(), order: int = 6) -> ELResidual:
    """Residual of the selected Euler-Lagrange equation, normalised to shares/day^2.

    trader:                xdd + ydd/2 + gamma yd / (2 eta)
    manager, follower:     ydd + (gamma xd + eta xdd) / (2 eta) - w y / (eta D^2)
    no_trader:             ydd - w y / (eta D^2)
    where w is the tracking penalty of the regime.
    """
    if regime not in EL_REGIMES:
        raise DomainError(f"unknown EL regime {regime!r}")
    times = y_path.times
    if times.size < 5:
        raise DomainError("EL residuals need at least 5 grid points")
    h = _uniform_step(times)
    eta, gamma, d = params.eta, params.gamma, scen.d_shares
    y1, y2 = fd_derivatives(y_path.shares, h, order)
    if regime == "no_trader":
        x1 = x2 = np.zeros_like(y1)
    else:
        if x_path is None:
            raise DomainError(f"regime {regime!r} needs the trader path")
        if not np.array_equal(x_path.times, times):
            x_path = x_path.resample(times)
        x1, x2 = fd_derivatives(x_path.shares, h, order)
    if regime == "trader":
        res = x2 + y2 / 2 + gamma * y1 / (2 * eta)
    else:
        w = tracking_penalty(params, scen, conventions, "no_trader" if regime == "no_trader" else "manager")
        res = y2 + (gamma * x1 + eta * x2) / (2 * eta) - w / (eta * d * d) * y_path.shares
    res = res[1:-1]
    inner = times[1:-1]
    span = inner[-1] - inner[0]
    l2 = math.sqrt(np.sum(res[:-1] ** 2 + res[1:] ** 2) / 2 * h / span) if span > 0 else float(abs(res[0]))
    return ELResidual(inner, res, float(np.max(np.abs(res))), l2)


# --- discrete best response ---------------------------------------------------

def discrete_best_response(params: ImpactParams, scen: ScenarioParams, fixed_path: InventoryPath, role: str,
                           grid_size: Optional[int] = None, conventions: Conventions = Conventions(),
                           penalty: Optional[float] = None) -> InventoryPath:
    """Minimize the role's cost on a uniform grid with pinned endpoints, the other path held fixed.

    Rates are interval differences and levels interval midpoints; the tracking
    penalty uses the trapezoid rule.  The gamma self-interaction telescopes to
    a constant, so the stationarity system is tridiagonal with diagonal
    4 eta / h + 2 w h / D^2.  ``penalty`` overrides the manager's tracking
    weight w (the no-trader regime may use a different one).
    """
    if role not in ("manager", "trader"):
        raise DomainError(f"role must be 'manager' or 'trader', got {role!r}")
    n_nodes = grid_size or default_grid_size(scen.t_n)
    grid = uniform_grid(scen.t_n, n_nodes)
    if not np.array_equal(fixed_path.times, grid):
        fixed_path = fixed_path.resample(grid)
    h = float(grid[1] - grid[0])
    other = fixed_path.shares
    mid = (other[:-1] + other[1:]) / 2
    rate = np.diff(other) / h
    eta, gamma = params.eta, params.gamma
    if role == "manager":
        w = tracking_penalty(params, scen, conventions, "manager") if penalty is None else penalty
        curvature = 2 * w * h / scen.d_shares**2
        terminal = scen.d_shares
    else:
        curvature = 0.0
        terminal = scen.t_shares
    interior = n_nodes - 2
    diag = np.full(interior, 4 * eta / h + curvature)
    off = np.full(interior - 1, -2 * eta / h)
    linear = gamma * (mid[:-1] - mid[1:]) + eta * (rate[:-1] - rate[1:])
    rhs = -linear
    rhs[-1] += 2 * eta / h * terminal
    shares = np.concatenate([[0.0], solve_spd_tridiagonal(diag, off, rhs), [terminal]])
    return InventoryPath(grid, shares, terminal)


# --- bundled verification -----------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    regime: str
    cost_rel_err: float
    el_residual_norm: Optional[float]
    bc_errors: Tuple[float, float, float, float]  # |x(0)|, |x(t_N)-T|, |y(0)|, |y(t_N)-D|
    br_deviation: Optional[float]
    tolerances: Dict[str, float]
    passed: Dict[str, bool]
    fallback: Optional[str] = None
    diagnostics: Tuple[str, ...] = field(default=())

    @property
    def all_passed(self) -> bool:
        return all(self.passed.values())

    def summary(self) -> str:
        parts = [f"{k}={'ok' if v else 'FAIL'}" for k, v in self.passed.items()]
        return f"{self.regime}: " + " ".join(parts)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _bc_errors(scen, x_path, y_path):
    x0 = abs(x_path.shares[0]) if x_path is not None else 0.0
    xn = abs(x_path.shares[-1] - scen.t_shares) if x_path is not None else 0.0
    return (float(x0), float(xn), float(abs(y_path.shares[0])), float(abs(y_path.shares[-1] - scen.d_shares)))


def verify_scenario(params: ImpactParams, scen: ScenarioParams, regime: str, conventions: Conventions = Conventions(),
                    grid_size: Optional[int] = None, el_order: int = 6) -> VerificationReport:
    """Run every applicable oracle check for one scenario with the standard tolerances."""
    if regime not in REGIMES:
        raise DomainError(f"unknown regime {regime!r}")
    n_nodes = grid_size or default_grid_size(scen.t_n)
    grid = uniform_grid(scen.t_n, n_nodes)
    d, t_n = scen.d_shares, scen.t_n
    tol = {"cost": COST_RTOL, "el": EL_TOL * d / t_n**2, "bc": BC_TOL * d, "br": BR_TOL * d}
    fallback, notes = None, ()
    el_norm = br_dev = None

    if regime == "linear":
        x_path, y_path = linear_paths(params, scen, n_nodes)
        quad = benchmark_cost(params, scen) - manager_cost(params, scen, x_path, y_path)
        cost_err = _rel(linear_savings(params, scen), quad)
        y_target = scen.f * d
        bcs = _bc_errors(scen, x_path, y_path)
        bcs = bcs[:3] + (float(abs(y_path.shares[-1] - y_target)),)
    elif regime == "no_trader":
        sol = solve_no_trader(params, scen, conventions)
        y_path = sol.path(grid)
        x_path = None
        zeros = InventoryPath.zeros(grid)
        cost_err = _rel(no_trader_cost_closed_form(params, scen, conventions),
                        quadrature_cost(params, "manager", zeros, y_path).value)
        el_norm = el_residual(params, scen, "no_trader", None, y_path, conventions, el_order).sup
        w = tracking_penalty(params, scen, conventions, "no_trader")
        br = discrete_best_response(params, scen, zeros, "manager", n_nodes, conventions, penalty=w)
        br_dev = float(np.max(np.abs(br.shares - y_path.shares)))
        bcs = _bc_errors(scen, None, y_path)
    elif regime == "nash":
        sol = solve_nash(params, scen, conventions)
        x_path, y_path = sol.paths(grid)
        m_cf, t_cf = nash_closed_form_costs(params, sol)
        cost_err = _rel(m_cf, quadrature_cost(params, "manager", x_path, y_path).value)
        el_norm = el_residual(params, scen, "manager", x_path, y_path, conventions, el_order).sup
        br = discrete_best_response(params, scen, x_path, "manager", n_nodes, conventions)
        br_dev = float(np.max(np.abs(br.shares - y_path.shares)))
        if sol.kind != "trader_absent":
            cost_err = max(cost_err, _rel(t_cf, quadrature_cost(params, "trader", x_path, y_path).value))
            el_norm = max(el_norm, el_residual(params, scen, "trader", x_path, y_path, conventions, el_order).sup)
            br_x = discrete_best_response(params, scen, y_path, "trader", n_nodes, conventions)
            br_dev = max(br_dev, float(np.max(np.abs(br_x.shares - x_path.shares))))
        else:
            notes = ("trader absent (T = 0): trader checks skipped",)
        bcs = _bc_errors(scen, x_path, y_path)
    else:
        sol = solve_stackelberg(params, scen, conventions)
        x_path, y_path = sol.paths(grid)
        m_terms = manager_cost_terms(params, scen, sol)
        t_terms = trader_cost_terms(params, scen, sol)
        fallback = m_terms.fallback
        notes = m_terms.diagnostics + t_terms.diagnostics
        cost_err = _rel(m_terms.value, quadrature_cost(params, "manager", x_path, y_path).value)
        if scen.t_shares:
            cost_err = max(cost_err, _rel(t_terms.value, quadrature_cost(params, "trader", x_path, y_path).value))
        el_norm = el_residual(params, scen, "stackelberg_follower", x_path, y_path, conventions, el_order).sup
        br = discrete_best_response(params, scen, x_path, "manager", n_nodes, conventions)
        br_dev = float(np.max(np.abs(br.shares - y_path.shares)))
        bcs = _bc_errors(scen, x_path, y_path)

    passed = {"cost": cost_err < tol["cost"], "bc": max(bcs) < tol["bc"]}
    if el_norm is not None:
        passed["el"] = el_norm < tol["el"]
    if br_dev is not None:
        passed["br"] = br_dev < tol["br"]
    tolerances = {k: v for k, v in tol.items() if k in passed}
    return VerificationReport(regime, cost_err, el_norm, bcs, br_dev, tolerances, passed, fallback, tuple(notes))
