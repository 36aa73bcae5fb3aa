"""
Target magnitudes for the three summary tables (no trader, Nash, Stackelberg)
and the qualitative scoring used to compare a run against them.

Targets are approximate ("~21mm (~754bps)"), so a cell matches when the
computed value is within a factor of 2.5.  A "~0" target matches when the
value would still print as 0 after a 2.5x widening of the half-unit of its
printed precision: |USD| < 1.25mm, |bps| < 1.25.  An upper-bound target ("<1")
matches below 2.5 times the bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

FACTOR = 2.5
ZERO_USD = 1.25e6
ZERO_BPS = 1.25


@dataclass(frozen=True)
class Target:
    """One printed number: value, unit ('usd' or 'bps') and qualifier ('~' or '<')."""

    value: float
    unit: str
    qualifier: str = "~"

    def matches(self, x: float) -> bool:
        if self.qualifier == "<":
            return x < FACTOR * self.value
        if self.value == 0.0:
            return abs(x) < (ZERO_USD if self.unit == "usd" else ZERO_BPS)
        return x * self.value > 0 and 1 / FACTOR <= x / self.value <= FACTOR

    def sign_ok(self, x: float) -> bool:
        return self.value == 0.0 or self.qualifier == "<" or x * self.value > 0


def _usd(mm):
    return Target(mm * 1e6, "usd")


def _bps(v, q="~"):
    return Target(float(v), "bps", q)


@dataclass(frozen=True)
class Cell:
    table: str
    lam: float
    d_shares: float
    participation: float
    tau: float
    column: str  # row field compared, e.g. "savings_usd"
    target: Target


def _row_cells(table, lam, d, f, tau, savings=None, te=None, profit=None):
    out = []
    if savings is not None:
        out += [Cell(table, lam, d, f, tau, "savings_usd", _usd(savings[0])),
                Cell(table, lam, d, f, tau, "savings_bps", _bps(savings[1]))]
    if te is not None:
        out.append(Cell(table, lam, d, f, tau, "tracking_error_bps", _bps(*te) if isinstance(te, tuple) else _bps(te)))
    if profit is not None:
        out += [Cell(table, lam, d, f, tau, "trader_profit_usd", _usd(profit[0])),
                Cell(table, lam, d, f, tau, "trader_profit_bps", _bps(profit[1]))]
    return out


def _no_trader():
    rows = [(0.0, 1e6, (1, 113), 4), (0.0, 5e6, (14, 536), 4),
            (0.4, 1e6, (0, 0), 1), (0.4, 5e6, (1, 30), 1),
            (10.0, 1e6, (0, 0), 1), (10.0, 5e6, (0, 0), 1)]
    return [c for lam, d, s, te in rows for c in _row_cells("no_trader", lam, d, 0.0, 1.0, s, te)]


def _nash():
    # savings and TE are compared at f = 0.1; the profit columns carry their own f
    rows = [(0.0, 5e6, (21, 754), 3, (2, 788), None),
            (0.4, 5e6, (7, 242), 1, (10, 3571), None),
            (1.0, 5e6, (-2, -78), 1, (14, 5179), None),
            (0.0, 1e6, (1, 162), 3, (0.1, 168), None),
            (0.4, 1e6, (-0.5, -108), (1, "<"), (1, 1454), (1, 790)),
            (1.0, 1e6, (-1, -257), (1, "<"), None, (1, 1163))]
    out = []
    for lam, d, s, te, p1, p2 in rows:
        out += _row_cells("nash", lam, d, 0.1, 1.0, s, te, p1)
        if p2 is not None:
            out += _row_cells("nash", lam, d, 0.2, 1.0, profit=p2)
    return out


def _stackelberg():
    rows = [(0.0, 5e6, 0.1, 1, (21, 756), 3, (2, 840)),
            (0.4, 5e6, 0.1, 1, (-2, -100), 1, (2, 945)),
            (0.0, 5e6, 0.2, 5, (18, 659), 3, (3.5, 715)),
            (0.0, 1e6, 0.1, 1, (1, 163), 3, (0.1, 166)),
            (0.4, 1e6, 0.1, 1, (-1, -258), 1, (0.1, 185)),
            (0.0, 1e6, 0.2, 1, (1, 140), 3, (0.1, 140)),
            (0.4, 1e6, 0.2, 1, (-1, -280), 1, (0.1, 154)),
            (0.0, 1e6, 0.2, 5, (1, 141), 3, (0.1, 142))]
    return [c for lam, d, f, tau, s, te, p in rows
            for c in _row_cells("stackelberg", lam, d, f, float(tau), s, te, p)]


TARGETS: Dict[str, List[Cell]] = {"no_trader": _no_trader(), "nash": _nash(), "stackelberg": _stackelberg()}


def sweep_axes(table: str) -> Dict[str, Tuple[float, ...]]:
    """Smallest cross-product of (lambda, D, f, tau) covering every target cell of a table."""
    cells = TARGETS[table]
    return {"lambdas": tuple(sorted({c.lam for c in cells})),
            "demands": tuple(sorted({c.d_shares for c in cells})),
            "participations": tuple(sorted({c.participation for c in cells})),
            "taus": tuple(sorted({c.tau for c in cells}))}


def _key(row) -> Tuple[float, float, float, float]:
    return (float(row["lam"]), float(row["d_shares"]), round(float(row["participation"]), 12), float(row["tau"]))


@dataclass(frozen=True)
class CellResult:
    cell: Cell
    value: Optional[float]
    sign_ok: bool
    magnitude_ok: bool

    def describe(self) -> str:
        c = self.cell
        q = c.target.qualifier
        return (f"{c.table} lam={c.lam:g} D={c.d_shares:g} f={c.participation:g} tau={c.tau:g} {c.column}: "
                f"target {q}{c.target.value:g} got {self.value!r:.12} "
                f"sign={'ok' if self.sign_ok else 'FAIL'} magnitude={'ok' if self.magnitude_ok else 'FAIL'}")


def score_cells(table: str, rows: Sequence[Dict]) -> List[CellResult]:
    index = {_key(r): r for r in rows if not r.get("error")}
    out = []
    for cell in TARGETS[table]:
        row = index.get((cell.lam, cell.d_shares, round(cell.participation, 12), cell.tau))
        value = None if row is None else row.get(cell.column)
        if value is None:
            out.append(CellResult(cell, None, False, False))
            continue
        out.append(CellResult(cell, float(value), cell.target.sign_ok(value), cell.target.matches(value)))
    return out


def trend_violations(table: str, rows: Sequence[Dict], rtol: float = 1e-9) -> List[str]:
    """Savings and TE nonincreasing in lambda; Nash profit nondecreasing in lambda at D = 5e6."""
    groups: Dict[tuple, List[Dict]] = {}
    for r in rows:
        if not r.get("error"):
            groups.setdefault((r["d_shares"], r["participation"], r["tau"]), []).append(r)
    bad = []
    for (d, f, tau), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["lam"])
        checks = [("savings_usd", -1), ("tracking_error_bps", -1)]
        if table == "nash" and d == 5e6:
            checks.append(("trader_profit_usd", +1))
        for col, direction in checks:
            for a, b in zip(grp, grp[1:]):
                step = (b[col] - a[col]) * direction
                if step < -rtol * max(abs(a[col]), abs(b[col]), 1.0):
                    bad.append(f"{table} D={d:g} f={f:g} tau={tau:g}: {col} moves the wrong way "
                               f"from lam={a['lam']:g} ({a[col]:.6g}) to lam={b['lam']:g} ({b[col]:.6g})")
    return bad


def summarize(results: Iterable[CellResult]) -> Tuple[int, int, int]:
    """(cells, sign failures, magnitude failures)."""
    results = list(results)
    return (len(results), sum(not r.sign_ok for r in results), sum(not r.magnitude_ok for r in results))
