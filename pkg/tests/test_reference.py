import pytest

from indexgame.reference import TARGETS, Target, score_cells, summarize, sweep_axes, trend_violations


@pytest.mark.parametrize("target,value,ok", [
    (Target(21e6, "usd"), 9e6, True),
    (Target(21e6, "usd"), 8e6, False),
    (Target(21e6, "usd"), -21e6, False),
    (Target(0.0, "usd"), 1.2e6, True),
    (Target(0.0, "bps"), 1.3, False),
    (Target(1.0, "bps", "<"), 2.4, True),
    (Target(1.0, "bps", "<"), 2.6, False),
])
def test_target_matching(target, value, ok):
    assert target.matches(value) is ok


def test_cell_counts():
    assert len(TARGETS["no_trader"]) == 18
    assert len(TARGETS["nash"]) == 32
    assert len(TARGETS["stackelberg"]) == 40
    assert sweep_axes("no_trader")["lambdas"] == (0.0, 0.4, 10.0)


def test_missing_rows_fail():
    n, signs, mags = summarize(score_cells("no_trader", []))
    assert (n, signs, mags) == (18, 18, 18)


def test_trend_detection():
    rows = [dict(lam=0.0, d_shares=1e6, participation=0.0, tau=1.0, savings_usd=1.0, tracking_error_bps=4.0),
            dict(lam=1.0, d_shares=1e6, participation=0.0, tau=1.0, savings_usd=2.0, tracking_error_bps=1.0)]
    bad = trend_violations("no_trader", rows)
    assert len(bad) == 1 and "savings_usd" in bad[0]
