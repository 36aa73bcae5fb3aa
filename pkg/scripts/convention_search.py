"""
Score every combination of the under-determined conventions against the
summary-table targets and report the best per table.

    python3 scripts/convention_search.py [--out runs/convention_search.json]
"""

import argparse
import itertools
import json
from dataclasses import asdict
from pathlib import Path

from indexgame.market import Conventions
from indexgame.reference import TARGETS, score_cells, summarize, sweep_axes, trend_violations
from indexgame.runner import RunConfig, evaluate_scenario, scenarios

SPACE = {
    "gamma": (1e-7, 1e-8),
    "dt_bench": (1.0, 1.5),
    "lambda_scaling": ("benchmark", "raw"),
}
NO_TRADER_SPACE = {"no_trader_curvature": ("euler_lagrange", "printed"), "schedule": ("continuous", "daily")}
GAME_SPACE = {"trader_proceeds": ("post_event", "benchmark_price")}


def evaluate(table, gamma, dt_bench, conventions):
    config = RunConfig(regime=table, name=table, params={"gamma": gamma, "dt_bench": dt_bench},
                       conventions=conventions, path_points=0, tables=False, **sweep_axes(table))
    rows = [evaluate_scenario(config, i, s)[0] for i, s in enumerate(scenarios(config))]
    cells = score_cells(table, rows)
    trends = trend_violations(table, rows)
    n, sign_bad, mag_bad = summarize(cells)
    return {"cells": n, "sign_failures": sign_bad, "trend_failures": len(trends), "magnitude_failures": mag_bad,
            "failed_cells": [c.describe() for c in cells if not (c.sign_ok and c.magnitude_ok)], "trends": trends}


def search(table):
    extra = NO_TRADER_SPACE if table == "no_trader" else GAME_SPACE
    keys = list(SPACE) + list(extra)
    results = []
    for values in itertools.product(*[(SPACE | extra)[k] for k in keys]):
        choice = dict(zip(keys, values))
        conv = Conventions(**{k: v for k, v in choice.items() if k not in ("gamma", "dt_bench")})
        score = evaluate(table, choice["gamma"], choice["dt_bench"], conv)
        results.append({"choice": choice, "conventions": asdict(conv), **score})
    results.sort(key=lambda r: (r["sign_failures"] + r["trend_failures"], r["magnitude_failures"]))
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/convention_search.json")
    parser.add_argument("--top", type=int, default=5)
    args = parser.parse_args()
    report = {}
    for table in TARGETS:
        results = search(table)
        report[table] = results
        print(f"== {table}: {len(results)} combinations")
        for r in results[:args.top]:
            print(f"  sign {r['sign_failures']} trend {r['trend_failures']} magnitude {r['magnitude_failures']}"
                  f"/{r['cells']}  {r['choice']}")
        for line in results[0]["failed_cells"]:
            print("    " + line)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
