import csv
import json
import subprocess
import sys

import pytest

from pricing_lab.cli import run_command
from pricing_lab.sweep import CSV_HEADER, parse_range, ratio_sweep, rows_to_csv
from pricing_lab.errors import ParameterOutOfRange


@pytest.fixture
def table1_file(tmp_path):
    path = tmp_path / "table1.json"
    assert run_command(["generate", "--family", "table1", "--out", str(path)]) == 0
    return path


def run_json(capsys, argv):
    code = run_command(argv)
    out = capsys.readouterr().out
    assert code == 0, out
    return json.loads(out)


def test_solve_pre(capsys, table1_file):
    out = run_json(capsys, ["solve", "pre", "--instance", str(table1_file)])
    assert out == {"prices": ["17", "15"], "revenue": "32"}


def test_solve_pre_with_oracle(capsys, table1_file):
    out = run_json(capsys, ["solve", "pre", "--instance", str(table1_file), "--oracle"])
    assert out["oracle_agrees"] is True


def test_missing_instance_is_domain_error(capsys, tmp_path):
    code = run_command(["solve", "pre", "--instance", str(tmp_path / "missing.json")])
    assert code == 1
    assert "missing.json" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert run_command(["solve", "pre"]) == 2
    assert "--instance" in capsys.readouterr().err
    assert run_command(["frobnicate"]) == 2
    assert run_command(["sweep", "--family", "loggap", "--n", "2", "--threads", "x"]) == 2
    assert "--threads" in capsys.readouterr().err


def test_respond(capsys, table1_file):
    out = run_json(capsys, ["respond", "--instance", str(table1_file), "--prices", "10,12"])
    assert out["revenue"] == "30"
    assert out["consumer_surplus"] == "11"
    assert out["plans"][0]["q"] == [2, 0]
    out = run_json(capsys, ["respond", "--instance", str(table1_file), "--prices", "skip,15"])
    assert out["revenue"] == "15"


def test_certify_and_simulate(capsys, table1_file):
    out = run_json(capsys, ["certify", "--instance", str(table1_file), "--profile", "builtin:table1-threat"])
    assert out["certified"] is True
    assert out["on_path"]["revenue"] == "34"
    assert out["on_path"]["consumer_surplus"] == "11"
    out = run_json(capsys, ["simulate", "--instance", str(table1_file), "--profile", "builtin:table1-threat"])
    assert out["prices"] == ["10", "4"]
    assert out["revenue"] == "34"


def test_unknown_profile_is_domain_error(capsys, table1_file):
    assert run_command(["certify", "--instance", str(table1_file), "--profile", "builtin:nope"]) == 1


def test_solve_cp(capsys, tmp_path):
    path = tmp_path / "h.json"
    assert run_command(["generate", "--family", "harmonic", "--N", "2", "--out", str(path)]) == 0
    out = run_json(capsys, ["solve", "cp", "--instance", str(path), "--grid-delta", "1/4"])
    assert out["revenue"] == "3/2"
    assert out["prices"] == ["1", "1/2"]


def test_bounds(capsys, table1_file):
    out = run_json(capsys, ["bounds", "--instance", str(table1_file)])
    assert out == {
        "fixed_price": "15",
        "fixed_revenue": "30",
        "sum_values": "46",
        "bound": "125/2",
        "holds": True,
    }


def test_generate_stdout_round_trips(capsys):
    data = run_json(capsys, ["generate", "--family", "concave-cx", "--n1", "1", "--n2", "1"])
    assert data["storage"] == {"kind": "concave", "cum": ["0", "3/2", "25/16"]}


def test_sweep_csv(capsys, tmp_path):
    path = tmp_path / "out.csv"
    rows = run_json(capsys, ["sweep", "--family", "loggap", "--n", "2..6", "--csv", str(path)])
    assert len(rows) == 5
    with open(path, newline="") as fh:
        table = list(csv.reader(fh))
    assert tuple(table[0][: len(CSV_HEADER)]) == CSV_HEADER
    assert len(table) == 6
    n3 = next(r for r in table[1:] if r[1] == "3")
    assert n3[4] == "7"
    assert [r[7] for r in table[1:]] == ["1", "10/7", "29/15", "76/31", "187/63"]


def test_sweep_output_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path, threads in ((a, "1"), (b, "3")):
        argv = ["sweep", "--family", "harmonic", "--n", "4,8", "--csv", str(path), "--no-timing", "--threads", threads]
        assert run_command(argv) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rows_respect_bound():
    rows = ratio_sweep("harmonic", [4, 8], threads=2)
    assert [r.param for r in rows] == [4, 8]
    for r in rows:
        assert r.cp_revenue <= r.bound
        assert r.cp_revenue <= r.sum_values
        assert r.ratio == r.cp_revenue / r.pa_revenue
    assert rows_to_csv(rows, timing=False).splitlines()[1].split(",")[9] == ""


def test_parse_range():
    assert parse_range("2..4") == [2, 3, 4]
    assert parse_range("8,4") == [4, 8]
    with pytest.raises(ParameterOutOfRange):
        parse_range("a..b")
    with pytest.raises(ParameterOutOfRange):
        ratio_sweep("nope", [1])


def test_module_entry_point(table1_file):
    proc = subprocess.run(
        [sys.executable, "-m", "pricing_lab", "solve", "pre", "--instance", str(table1_file)],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["revenue"] == "32"
