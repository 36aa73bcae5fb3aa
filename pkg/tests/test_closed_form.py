import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from indexgame.closed_form import (
    evaluate_linear,
    evaluate_no_trader,
    linear_paths,
    linear_savings,
    linear_te_bps,
    no_trader_cost_closed_form,
    no_trader_path,
    solve_no_trader,
)
from indexgame.errors import SolverError
from indexgame.market import (
    Conventions,
    ImpactParams,
    InventoryPath,
    ScenarioParams,
    benchmark_cost,
    manager_cost,
    tracking_error_bps,
    uniform_grid,
)

RAW = Conventions(lambda_scaling="raw")


def scen_for_k(k, d=1e6, t_n=10.0, eta=1e-6):
    return ScenarioParams(d_shares=d, t_n=t_n, lam=k * k * eta * d * d)


def test_zero_lambda_is_linear(core):
    y = no_trader_path(core, ScenarioParams(d_shares=1e6), 2001)
    np.testing.assert_allclose(y.shares, 1e6 * y.times / 10.0, rtol=0, atol=1e-8 * 1e6)


def test_back_loaded_at_large_curvature(core):
    y = no_trader_path(core, scen_for_k(1.0), 2001, RAW)
    assert y.shares[1000] / 1e6 == pytest.approx(math.sinh(5) / math.sinh(10), rel=1e-12)
    assert math.sinh(5) / math.sinh(10) == pytest.approx(6.69e-3, rel=1e-2)


def test_printed_curvature_doubles_penalty(core):
    s = scen_for_k(0.3)
    el = solve_no_trader(core, s, RAW).k
    printed = solve_no_trader(core, s, Conventions(lambda_scaling="raw", no_trader_curvature="printed")).k
    assert printed == pytest.approx(math.sqrt(2) * el, rel=1e-14)


def test_ramp_limit_cost(low_gamma):
    assert no_trader_cost_closed_form(low_gamma, ScenarioParams(d_shares=1e6)) == pytest.approx(5.0115e7, rel=1e-12)


@pytest.mark.parametrize("k", [1e-4, 1e-2, 0.1, 1.0, 10.0, 50.0])
def test_cost_closed_form_matches_quadrature(core, k):
    s = scen_for_k(k)
    y = no_trader_path(core, s, 20001 if k >= 10 else 2001, RAW)
    quad = manager_cost(core, s, InventoryPath.zeros(y.times), y)
    assert no_trader_cost_closed_form(core, s, RAW) == pytest.approx(quad, rel=1e-6)


def test_overflow_guard(core):
    with pytest.raises(SolverError):
        no_trader_cost_closed_form(core, scen_for_k(71.0), RAW)


def test_no_trader_trends(core):
    reports = [evaluate_no_trader(core, ScenarioParams(lam=lam), grid_size=4001) for lam in (0.0, 0.01, 0.4, 10.0)]
    savings = [r.savings_usd for r in reports]
    te = [r.tracking_error_bps for r in reports]
    assert savings == sorted(savings, reverse=True)
    assert te == sorted(te, reverse=True)


def test_linear_savings_hand_value(low_gamma):
    s = ScenarioParams(d_shares=1e6, f=1.0)
    assert linear_savings(low_gamma, s) == pytest.approx(9.05e5, rel=1e-12)
    assert linear_savings(low_gamma, ScenarioParams(d_shares=1e6, f=0.0)) == 0.0


@given(st.floats(0.0, 1.0), st.floats(0.0, 8.0), st.floats(0.0, 1.0), st.sampled_from([1e6, 5e6]))
def test_linear_savings_matches_functionals(f, day, part, d):
    p = ImpactParams()
    s = ScenarioParams(d_shares=d, t_shares=part * d, f=f, d_start=day)
    x, y = linear_paths(p, s, 401)
    quad = benchmark_cost(p, s) - manager_cost(p, s, x, y)
    assert linear_savings(p, s) == pytest.approx(quad, rel=1e-10, abs=1e-6)


def test_linear_te(core):
    assert linear_te_bps(core, ScenarioParams(f=0.0)) == 0.0
    assert linear_te_bps(core, ScenarioParams(f=1.0)) == pytest.approx(3.4503, abs=5e-4)
    expected = 1e4 * 0.01 * 0.3 / math.sqrt(252) * 0.5 * math.sqrt(3)
    assert linear_te_bps(core, ScenarioParams(f=0.5, d_start=1.0)) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.64, abs=5e-3)


@given(st.floats(0.01, 1.0), st.floats(0.0, 9.0))
def test_linear_te_matches_path(f, day):
    p = ImpactParams()
    s = ScenarioParams(f=f, d_start=day)
    _, y = linear_paths(p, s, 2001)
    assert tracking_error_bps(p, s, y) == pytest.approx(linear_te_bps(p, s), rel=1e-8)


def test_evaluate_linear_consistent(core):
    s = ScenarioParams(d_shares=5e6, t_shares=5e5, f=0.5, d_start=2.0)
    rep = evaluate_linear(core, s, grid_size=801)
    assert rep.savings_usd == pytest.approx(linear_savings(core, s), rel=1e-10)
    assert rep.trader_profit_usd > 0
