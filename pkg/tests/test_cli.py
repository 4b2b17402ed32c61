import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from cubewitness import cli

SCHEMA = json.loads(cli.SCHEMA_PATH.read_text())


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out


def strip_time(text):
    rep = json.loads(text)
    rep.pop("wall_time")
    return rep


@pytest.mark.parametrize("argv", [
    ["witness", "--n", "9", "--m", "2"],
    ["l1", "--n", "9", "--m", "1", "--rho", "1/4"],
    ["family", "--n", "21", "--m", "2", "--size", "20"],
    ["sq", "--n", "11", "--m", "2", "--family-size", "20"],
    ["learn", "--n", "7", "--m", "2", "--sigma", "1/4", "--eps", "1/2", "--samples", "3000"],
])
def test_reports_validate_and_are_deterministic(argv, capsys):
    code, out = run(argv, capsys)
    assert code == 0, out.err
    rep = json.loads(out.out)
    jsonschema.validate(rep, SCHEMA)
    assert rep["checks"]
    code2, out2 = run(argv, capsys)
    assert strip_time(out.out) == strip_time(out2.out)


def test_rationals_serialised_as_p_over_q(capsys):
    _, out = run(["witness", "--n", "7", "--m", "1"], capsys)
    rep = json.loads(out.out)
    assert rep["results"]["rho"] == "1/2"
    num, den = rep["results"]["kappa"].split("/")
    assert int(den) > 0


def test_even_n_is_usage_error(capsys):
    code, out = run(["witness", "--n", "14", "--m", "2"], capsys)
    assert code == 2 and "odd" in out.err


def test_unknown_flag_is_usage_error(capsys):
    code, _ = run(["witness", "--n", "9", "--m", "2", "--bogus"], capsys)
    assert code == 2


def test_budget_exit_code(capsys):
    code, out = run(["learn", "--n", "21", "--m", "2", "--sigma", "1/4", "--eps", "1/100", "--samples", "100"], capsys)
    assert code == 4 and "budget" in out.err


def test_consistency_exit_code(capsys, monkeypatch):
    from cubewitness.witness import ConsistencyError

    def broken(args, mode):
        raise ConsistencyError("kappa paths disagree")

    monkeypatch.setitem(cli.COMMANDS, "witness", broken)
    code, _ = run(["witness", "--n", "9", "--m", "2"], capsys)
    assert code == 3


def test_exit_code_tracks_checks(capsys):
    code, out = run(["witness", "--n", "5", "--m", "1", "--rho", "1/100"], capsys)
    rep = json.loads(out.out)
    assert code == (0 if all(c["pass"] for c in rep["checks"]) else 1)


def test_mode_env_var(capsys, monkeypatch):
    monkeypatch.setenv(cli.MODE_ENV, "float")
    _, out = run(["l1", "--n", "9", "--m", "1"], capsys)
    rep = json.loads(out.out)
    assert rep["command"]["mode"] == "float" and isinstance(rep["results"]["optimum"], float)
    monkeypatch.setenv(cli.MODE_ENV, "sideways")
    code, _ = run(["l1", "--n", "9", "--m", "1"], capsys)
    assert code == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out = run(["--output", str(path), "witness", "--n", "7", "--m", "1"], capsys)
    assert code == 0 and out.out == ""
    jsonschema.validate(json.loads(path.read_text()), SCHEMA)


def test_identities_command(capsys):
    code, out = run(["identities"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and len(rep["checks"]) == rep["results"]["count"]
    jsonschema.validate(rep, SCHEMA)


def test_single_cell_sweep_equals_dispatch(tmp_path, capsys):
    grid = tmp_path / "g.yaml"
    grid.write_text("command: witness\nn: 9\nm: 2\n")
    rows = cli.sweep(str(grid), str(tmp_path / "out.csv"))
    _, out = run(["witness", "--m", "2", "--n", "9"], capsys)
    rep = json.loads(out.out)
    assert len(rows) == 1 and rows[0]["status"] == "ok"
    assert rows[0]["results.kappa"] == rep["results"]["kappa"]


def test_sweep_matches_witness_grid_and_resumes(tmp_path):
    from fractions import Fraction

    from cubewitness.witness import WitnessSpec, correlation_kappa

    grid = tmp_path / "g.yaml"
    grid.write_text("command: l1\nn: [9, 11, 13]\nm: 1\nrho: 1/2\n")
    csv_path = tmp_path / "out.csv"
    rows = cli.sweep(str(grid), str(csv_path))
    assert all(r["status"] == "ok" for r in rows)
    for n, row in zip((9, 11, 13), rows):
        kappa = correlation_kappa(Fraction(1, 2), WitnessSpec(n, 1)).value
        assert Fraction(row["results.kappa_lower_bound"]) == kappa
    log = Path(str(csv_path) + ".log")
    assert len(log.read_text().splitlines()) == 3
    cli.sweep(str(grid), str(csv_path))
    assert len(log.read_text().splitlines()) == 3  # nothing recomputed
    assert csv_path.read_text().count("\n") == 4


def test_sweep_marks_failed_rows(tmp_path):
    grid = tmp_path / "g.yaml"
    grid.write_text("command: witness\nn: [9, 10]\nm: 2\n")
    rows = cli.sweep(str(grid), str(tmp_path / "o.csv"), workers=2)
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert rows[1]["exit_code"] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cubewitness", "witness", "--n", "7", "--m", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["schema_version"] == cli.SCHEMA_VERSION
