import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from indexgame.closed_form import no_trader_cost_closed_form, solve_no_trader
from indexgame.errors import DomainError, IndefiniteSystemError
from indexgame.linalg import solve_spd_tridiagonal
from indexgame.market import Conventions, ImpactParams, InventoryPath, ScenarioParams, uniform_grid
from indexgame.nash import solve_nash
from indexgame.oracle import (
    discrete_best_response,
    el_residual,
    fd_derivatives,
    fornberg_weights,
    quadrature_cost,
    verify_scenario,
)

RAW = Conventions(lambda_scaling="raw")


def ramp_path(terminal, n, t_n=10.0):
    grid = uniform_grid(t_n, n)
    return InventoryPath(grid, terminal * grid / t_n, terminal, np.full(n, terminal / t_n))


def test_fornberg_central_weights():
    w = fornberg_weights(0.0, [-1.0, 0.0, 1.0], 2)
    np.testing.assert_allclose(w[1], [-0.5, 0.0, 0.5], atol=1e-15)
    np.testing.assert_allclose(w[2], [1.0, -2.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_fd_derivatives_exact_on_low_degree(order):
    t = np.linspace(0.0, 2.0, 41)
    deg = order
    v = t**deg
    d1, d2 = fd_derivatives(v, t[1] - t[0], order)
    np.testing.assert_allclose(d1, deg * t ** (deg - 1), atol=1e-8)
    np.testing.assert_allclose(d2, deg * (deg - 1) * t ** (deg - 2), atol=1e-6)


def test_fd_rejects_odd_order():
    with pytest.raises(DomainError):
        fd_derivatives(np.zeros(20), 0.1, 3)


def test_quadrature_of_ramp(low_gamma):
    scen = ScenarioParams(d_shares=1e6)
    y = ramp_path(1e6, 2001)
    q = quadrature_cost(low_gamma, "manager", InventoryPath.zeros(y.times), y)
    assert q.value == pytest.approx(5.0115e7, rel=1e-10)
    assert q.richardson == pytest.approx(5.0115e7, rel=1e-10)
    zero = InventoryPath.zeros(y.times)
    assert quadrature_cost(low_gamma, "trader", zero, y).value == 0.0


def test_quadrature_rejects_even_grid(core):
    y = ramp_path(1e6, 11)
    grid = np.linspace(0, 10, 10)
    even = InventoryPath(grid, 1e5 * grid, 1e6)
    with pytest.raises(DomainError):
        quadrature_cost(core, "manager", InventoryPath.zeros(grid), even)
    with pytest.raises(DomainError):
        quadrature_cost(core, "manager", InventoryPath.zeros(y.times), y, grid_size=10)
    with pytest.raises(DomainError):
        quadrature_cost(core, "bank", InventoryPath.zeros(y.times), y)


def test_quadrature_matches_no_trader_closed_form(core):
    s = ScenarioParams(d_shares=1e6, lam=1e4)
    y = solve_no_trader(core, s, RAW).path(uniform_grid(10.0, 2001))
    q = quadrature_cost(core, "manager", InventoryPath.zeros(y.times), y)
    assert q.value == pytest.approx(no_trader_cost_closed_form(core, s, RAW), rel=1e-6)


def test_linear_paths_have_zero_trader_residual():
    p = ImpactParams(gamma=0.0)
    s = ScenarioParams.game(1e6, 0.2)
    res = el_residual(p, s, "trader", ramp_path(2e5, 101), ramp_path(1e6, 101))
    # rounding only: eps * D / h^2 relative to the D / t_N^2 scale
    assert res.sup < 1e-10 * s.d_shares / s.t_n**2


def test_no_trader_residual_converges_at_second_order(core):
    s = ScenarioParams(d_shares=1e6, lam=1e5)
    sol = solve_no_trader(core, s, RAW)
    sups = [el_residual(core, s, "no_trader", None, sol.path(uniform_grid(10.0, n)), RAW, order=2).sup
            for n in (101, 201, 401)]
    rates = np.log2(np.array(sups[:-1]) / np.array(sups[1:]))
    assert np.all(rates > 1.8)


def test_el_residual_domain_errors(core):
    s = ScenarioParams()
    with pytest.raises(DomainError):
        el_residual(core, s, "manager", None, ramp_path(5e6, 3))
    with pytest.raises(DomainError):
        el_residual(core, s, "bystander", None, ramp_path(5e6, 11))
    grid = np.array([0.0, 1.0, 2.0, 4.0, 7.0, 10.0])
    with pytest.raises(DomainError):
        el_residual(core, s, "no_trader", None, InventoryPath(grid, 5e5 * grid, 5e6))


def test_manager_best_response_without_trader(core):
    s = ScenarioParams(d_shares=1e6, lam=1e4)
    grid = uniform_grid(10.0, 2001)
    br = discrete_best_response(core, s, InventoryPath.zeros(grid), "manager", 2001, RAW)
    exact = solve_no_trader(core, s, RAW).path(grid)
    assert np.max(np.abs(br.shares - exact.shares)) < 1e-3 * s.d_shares


def test_best_response_ramp_when_frictionless():
    p = ImpactParams(gamma=0.0)
    s = ScenarioParams(d_shares=1e6)
    grid = uniform_grid(10.0, 101)
    br = discrete_best_response(p, s, InventoryPath.zeros(grid), "manager", 101)
    np.testing.assert_allclose(br.shares, 1e6 * grid / 10, atol=1e-6)


def test_trader_best_response_is_nash_fixed_point(core):
    s = ScenarioParams.game(5e6, 0.1, lam=0.4)
    x, y = solve_nash(core, s).paths(uniform_grid(10.0, 2001))
    br = discrete_best_response(core, s, y, "trader", 2001)
    assert np.max(np.abs(br.shares - x.shares)) < 1e-3 * s.d_shares


def test_indefinite_system_reports_sign():
    with pytest.raises(IndefiniteSystemError) as info:
        solve_spd_tridiagonal([1.0, 1.0, 1.0], [2.0, 2.0], [0.0, 0.0, 1.0])
    assert info.value.eigenvalue_sign == -1


@given(st.integers(2, 30), st.floats(0.1, 10.0), st.floats(0.0, 5.0))
def test_tridiagonal_matches_dense(n, a, b):
    diag = np.full(n, 2 * a + b)
    off = np.full(n - 1, -a)
    rhs = np.arange(1.0, n + 1)
    dense = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    np.testing.assert_allclose(solve_spd_tridiagonal(diag, off, rhs), np.linalg.solve(dense, rhs), rtol=1e-9)


def test_verify_no_trader_zero_lambda(core):
    rep = verify_scenario(core, ScenarioParams(d_shares=1e6), "no_trader")
    assert rep.all_passed
    assert "cost=ok" in rep.summary()


def test_verify_nash_frictionless():
    rep = verify_scenario(ImpactParams(gamma=0.0), ScenarioParams.game(1e6, 0.1), "nash")
    assert rep.all_passed


def test_verify_resonant_stackelberg_flags_fallback(core):
    rep = verify_scenario(core, ScenarioParams.game(1e6, 0.1, lam=1e6), "stackelberg", RAW)
    assert rep.all_passed
    assert rep.fallback and "resonant" in rep.fallback


def test_verify_linear(core):
    rep = verify_scenario(core, ScenarioParams(t_shares=5e5, f=0.5, d_start=3.0), "linear")
    assert rep.all_passed
    assert rep.el_residual_norm is None
