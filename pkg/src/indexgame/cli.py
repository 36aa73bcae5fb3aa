"""Command line entry point: ``indexgame <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, SolverError
from .market import PRESET_DEMAND, PRESETS, Conventions, ScenarioParams, preset, uniform_grid
from .runner import (
    PATH_COLUMNS,
    RunConfig,
    emit_price_path,
    format_row,
    price_decomposition,
    run,
    trader_only_paths,
)
from .tables import write_csv

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4

SUBCOMMANDS = {"no-trader": "no_trader", "linear": "linear", "nash": "nash", "stackelberg": "stackelberg"}


def _common(p):
    p.add_argument("--config", type=Path, help="JSON run config; inline flags override its lists")
    p.add_argument("--lambda", dest="lambdas", type=float, nargs="+")
    p.add_argument("--demand", dest="demands", type=float, nargs="+", help="manager demand D, shares")
    p.add_argument("--participation", dest="participations", type=float, nargs="+", help="trader T as a fraction of D")
    p.add_argument("--manager-fraction", dest="manager_fractions", type=float, nargs="+")
    p.add_argument("--start-day", dest="start_days", type=float, nargs="+")
    p.add_argument("--tau", dest="taus", type=float, nargs="+")
    p.add_argument("--horizon", dest="t_n", type=float, help="days until reconstitution")
    p.add_argument("--grid", dest="grid_size", type=int, help="odd number of grid points")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", dest="out_dir", help="output directory")
    p.add_argument("--verify", action="store_true", default=None, help="run the oracle checks per scenario")
    p.add_argument("--workers", type=int)
    p.add_argument("--convention", action="append", default=[], metavar="KEY=VALUE",
                   help=f"one of {[f.name for f in fields(Conventions)]}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indexgame", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _common(sub.add_parser(name, help=f"evaluate the {name} regime"))
    p = sub.add_parser("sweep", help="run a config file as is")
    _common(p)
    p = sub.add_parser("verify", help="oracle checks for one regime")
    _common(p)
    p.add_argument("--regime", choices=sorted(SUBCOMMANDS.values()), default="nash")
    p = sub.add_parser("price-path", help="mid and execution prices when the trader front-runs alone")
    p.add_argument("--demand", type=float, default=5e6)
    p.add_argument("--participation", type=float, default=0.9)
    p.add_argument("--horizon", type=float, default=5.0)
    p.add_argument("--gamma", type=float, default=3e-7)
    p.add_argument("--preset", choices=sorted(PRESETS), default="core")
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out", help="CSV file; stdout when omitted")
    return parser


def _conventions(base: Conventions, pairs) -> Conventions:
    if not pairs:
        return base
    updates = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"--convention expects KEY=VALUE, got {pair!r}")
        updates[key] = value
    try:
        return replace(base, **updates)
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def config_from_args(args, regime: str) -> RunConfig:
    data = RunConfig.from_json(args.config).to_dict() if args.config else {
        "schema": "indexgame.run/1", "regime": regime, "name": regime,
        "lambdas": [0.0], "demands": [PRESET_DEMAND[args.preset or "core"]],
    }
    data["regime"] = regime if args.command != "sweep" else data["regime"]
    if regime in ("nash", "stackelberg") and not args.config and not args.participations:
        data["participations"] = [0.1]
    for key in ("lambdas", "demands", "participations", "manager_fractions", "start_days", "taus",
                "t_n", "grid_size", "preset", "out_dir", "verify", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    conv = _conventions(Conventions(**data.get("conventions", {})), args.convention)
    data["conventions"] = {f.name: getattr(conv, f.name) for f in fields(Conventions)}
    return RunConfig.from_dict(data)


def _price_path(args) -> int:
    params = replace(preset(args.preset), gamma=args.gamma)
    scen = ScenarioParams(d_shares=args.demand, t_shares=args.participation * args.demand, t_n=args.horizon)
    grid = uniform_grid(scen.t_n, args.grid)
    x, y = trader_only_paths(params, scen, grid)
    records = emit_price_path(params, scen, x, y)
    rows = [{"time": r.time, "x_shares": xv, "y_shares": yv, "mid_price": r.mid_price,
             "execution_price": r.execution_price, "cumulative_return": r.cumulative_return}
            for r, xv, yv in zip(records, x.shares, y.shares)]
    text = write_csv(rows, PATH_COLUMNS)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    parts = price_decomposition(params, scen.t_shares / scen.t_n, scen.t_shares)
    logging.getLogger("indexgame").info(
        "return vs S0 just before t_N: permanent %.2f%%, temporary %.2f%%, spread %.2f%%, execution %.2f%%",
        *(100 * parts[k] for k in ("permanent", "temporary", "spread", "execution")))
    print(f"return at t_N-: mid {100 * records[-1].cumulative_return:.2f}%, execution "
          f"{100 * parts['execution']:.2f}% (permanent {100 * parts['permanent']:.2f}% + temporary "
          f"{100 * parts['temporary']:.2f}% + spread {100 * parts['spread']:.2f}%)", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "price-path":
            return _price_path(args)
        if args.command == "verify":
            config = config_from_args(args, args.regime)
            config = replace(config, verify=True)
        else:
            config = config_from_args(args, SUBCOMMANDS.get(args.command, "nash"))
        result = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, DomainError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for row in result.rows:
        print(format_row(row))
    print(f"wrote {len(result.files)} files to {config.output_dir()}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
