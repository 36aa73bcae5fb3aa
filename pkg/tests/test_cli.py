import json

import pytest

from indexgame.cli import EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, main
from indexgame.tables import parse_csv


@pytest.mark.parametrize("command,extra", [
    ("no-trader", ["--lambda", "0", "0.4"]),
    ("linear", ["--manager-fraction", "0.5", "--start-day", "2"]),
    ("nash", ["--lambda", "0.4", "--verify"]),
    ("stackelberg", ["--tau", "1", "5"]),
])
def test_subcommands(tmp_path, capsys, command, extra):
    code = main([command, "--demand", "1e6", "--out", str(tmp_path), *extra])
    assert code == EXIT_OK
    assert (tmp_path / "manifest.json").exists()
    assert capsys.readouterr().out.startswith("#0")


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["nash", "--tau", "3", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["nash", "--convention", "schedule", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["nash", "--convention", "colour=red", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_sweep_with_config_and_overrides(tmp_path):
    cfg = {"schema": "indexgame.run/1", "regime": "stackelberg", "name": "s", "lambdas": [0, 0.4],
           "demands": [1e6], "participations": [0.1], "path_points": 0}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert main(["sweep", "--config", str(path), "--lambda", "0.4", "--out", str(tmp_path / "o")]) == EXIT_OK
    rows = parse_csv((tmp_path / "o/s.csv").read_text())
    assert [r["lam"] for r in rows] == [0.4]


def test_verify_subcommand_reports_failures(tmp_path):
    code = main(["verify", "--regime", "no_trader", "--lambda", "1e11", "--demand", "1e6",
                 "--convention", "lambda_scaling=raw", "--out", str(tmp_path)])
    assert code == EXIT_VERIFY


def test_price_path(tmp_path, capsys):
    out = tmp_path / "pp.csv"
    assert main(["price-path", "--grid", "11", "--out", str(out)]) == EXIT_OK
    rows = parse_csv(out.read_text())
    assert len(rows) == 11
    assert "execution" in capsys.readouterr().err
