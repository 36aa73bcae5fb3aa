"""
Regenerate the three summary tables and score them against the target magnitudes.

    python3 scripts/reproduce_tables.py [--out runs/tables]
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from indexgame.reference import score_cells, summarize, trend_violations
from indexgame.runner import RunConfig, run

CONFIGS = Path(__file__).parent / "configs"
TABLES = {"no_trader": "no_trader_table", "nash": "nash_table", "stackelberg": "stackelberg_table"}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/tables")
    args = parser.parse_args()
    worst = 0
    for table, name in TABLES.items():
        config = RunConfig.from_json(CONFIGS / f"{name}.json")
        config = replace(config, out_dir=str(Path(args.out) / name))
        result = run(config)
        cells = score_cells(table, result.rows)
        trends = trend_violations(table, result.rows)
        n, sign_bad, mag_bad = summarize(cells)
        print(f"== {name}: {n} cells, sign failures {sign_bad}, trend failures {len(trends)}, "
              f"magnitude failures {mag_bad}; verification failures {result.verification_failures}")
        print((Path(config.output_dir()) / f"{name}_table.md").read_text())
        for c in cells:
            if not (c.sign_ok and c.magnitude_ok):
                print("  " + c.describe())
        for t in trends:
            print("  " + t)
        worst = max(worst, result.exit_code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
