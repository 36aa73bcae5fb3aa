"""
Write path and frontier data for plotting (CSV only; no rendering).

    python3 scripts/run_figures.py [--out runs/figures] [--workers 4]
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from indexgame.runner import RunConfig, run

CONFIGS = Path(__file__).parent / "configs"
FIGURES = ("no_trader_paths", "linear_frontier", "nash_paths", "stackelberg_paths")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/figures")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    code = 0
    for name in FIGURES:
        config = RunConfig.from_json(CONFIGS / f"{name}.json")
        config = replace(config, out_dir=str(Path(args.out) / name), workers=args.workers)
        result = run(config)
        print(f"{name}: {len(result.rows)} scenarios, {result.errors} errors -> {config.output_dir()}")
        code = max(code, result.exit_code)
    return code


if __name__ == "__main__":
    sys.exit(main())
