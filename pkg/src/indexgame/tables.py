"""
Table rendering: a long-form CSV for machines and a pivoted markdown table
laid out as reference tables (one line per (lambda, D, tau), one column
group per participation f).
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Dict, List, Sequence

TABLE_COLUMNS = (
    "lam", "d_shares", "participation", "tau", "manager_fraction", "start_day",
    "savings_usd", "savings_bps", "tracking_error_bps", "trader_profit_usd", "trader_profit_bps",
)


def fmt(value) -> str:
    """Ten significant digits; empty string for missing values."""
    if value is None or value == "":
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool,)):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".10g")


def _parse(text: str):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text


def write_csv(rows: Sequence[Dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def parse_csv(text: str) -> List[Dict]:
    """Inverse of ``write_csv``: numbers come back as floats, blanks as None."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    return [{c: _parse(v) for c, v in zip(header, line)} for line in reader]


def _musd(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v / 1e6:.2f}mm"


def _bps(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.0f}bps"


def render_markdown(rows: Sequence[Dict]) -> str:
    fs = sorted({r["participation"] for r in rows})
    linear = any(r.get("manager_fraction") is not None for r in rows)
    header = ["lambda", "D (shares)", "tau"] + (["manager f", "start day"] if linear else [])
    for f in fs:
        header += [f"Savings f={fmt(f)}", f"TE f={fmt(f)}", f"Profit f={fmt(f)}"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    groups: Dict[tuple, Dict] = {}
    for r in rows:
        key = (r["lam"], r["d_shares"], r["tau"], r.get("manager_fraction"), r.get("start_day"))
        groups.setdefault(key, {})[r["participation"]] = r
    for (lam, d, tau, frac, day), by_f in groups.items():
        cells = [fmt(lam), f"{d / 1e6:g}mm", fmt(tau)] + ([fmt(frac), fmt(day)] if linear else [])
        for f in fs:
            r = by_f.get(f)
            if r is None:
                cells += ["---"] * 3
                continue
            profit = "---" if not r.get("participation") else f"{_musd(r['trader_profit_usd'])} ({_bps(r['trader_profit_bps'])})"
            cells += [f"{_musd(r['savings_usd'])} ({_bps(r['savings_bps'])})",
                      f"{r['tracking_error_bps']:.2f}bps", profit]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def make_tables(rows: Sequence[Dict], out_dir, stem: str = "table"):
    """Write ``<stem>.csv`` (long form) and ``<stem>.md`` (pivoted); return both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    good = [r for r in rows if not r.get("error")]
    csv_path, md_path = out / f"{stem}.csv", out / f"{stem}.md"
    csv_path.write_text(write_csv(good, TABLE_COLUMNS))
    md_path.write_text(render_markdown(good))
    return csv_path, md_path
