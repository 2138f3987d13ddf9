import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from onofri_lab.cli import (
    BRANCH_COLUMNS,
    EXIT_DOMAIN,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    TRACE_COLUMNS,
    VERIFY_COLUMNS,
    load_schema,
    main,
    parse_peaks,
)
from onofri_lab.errors import DomainError

PI = math.pi

COMMAND_ARGS = {
    "constants": [],
    "branch": ["--peaks", "0:2:1"],
    "bubble-limit": ["--L", "1e-1,1e-2,1e-3"],
    "minimize": ["--rho-frac", "0.5", "--grid", "64"],
    "blowup-trace": ["--rho-fracs", "0.5,0.9", "--grid", "64"],
    "capacity": ["--outer", "2", "--inner", "1"],
    "harmonic-radius": ["--disk-offset", "0.25"],
    "concentration-level": ["--radius", "2"],
    "criterion": ["--inf", "-3", "--sup-log-radius", "0"],
    "pohozaev-check": ["--peak", "3"],
}


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("command", sorted(COMMAND_ARGS))
def test_json_output_matches_schema(capsys, command):
    code, out, _ = run_cli(capsys, command, *COMMAND_ARGS[command], "--json")
    assert code == EXIT_OK
    jsonschema.validate(json.loads(out), load_schema(command))


def test_verify_all_json(capsys):
    code, out, _ = run_cli(capsys, "verify-all", "--dim", "2", "--json")
    data = json.loads(out)
    jsonschema.validate(data, load_schema("verify-all"))
    assert code == EXIT_OK
    assert len(data["checks"]) == 11
    assert all(r["passed"] for r in data["checks"])


def test_branch_csv_columns_and_values(capsys):
    code, out, _ = run_cli(capsys, "branch", "--peaks", f"0,{math.log(8)!r}", "--csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == BRANCH_COLUMNS
    # peak v = ln 8 gives λ = 2 and mass 4π on the unit disk
    assert float(rows[1]["lambda"]) == pytest.approx(2.0, rel=1e-9)
    assert float(rows[1]["mass"]) == pytest.approx(4 * PI, rel=1e-9)


def test_trace_csv_columns(capsys):
    code, out, _ = run_cli(capsys, "blowup-trace", "--rho-fracs", "0.5", "--grid", "64", "--csv")
    assert code == EXIT_OK
    header = out.splitlines()[0].split(",")
    assert tuple(header) == TRACE_COLUMNS


def test_verify_csv_columns(capsys):
    code, out, _ = run_cli(capsys, "verify-all", "--csv")
    assert tuple(out.splitlines()[0].split(",")) == VERIFY_COLUMNS
    assert code == EXIT_OK


def test_csv_written_to_path(capsys, tmp_path):
    target = tmp_path / "branch.csv"
    code, out, _ = run_cli(capsys, "branch", "--peaks", "0,1", "--csv", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert target.read_text().splitlines()[0] == ",".join(BRANCH_COLUMNS)


def test_output_is_bit_identical(capsys):
    args = ("branch", "--peaks", "0:4:0.5", "--json")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second


def test_plain_output(capsys):
    code, out, _ = run_cli(capsys, "capacity", "--outer", "2.718281828459045", "--inner", "1")
    assert code == EXIT_OK
    assert "capacity: 6.28318530717958" in out


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# annulus\ncommand = capacity\ndim = 3\nouter = 4\ninner = 1\njson = true\n")
    code, out, _ = run_cli(capsys, "--config", str(cfg))
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["n"] == 3 and data["outer"] == 4.0
    code, out, _ = run_cli(capsys, "--config", str(cfg), "capacity", "--outer", "8")
    assert code == EXIT_OK
    assert json.loads(out)["outer"] == 8.0


def test_config_rejects_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = capacity\nbogus = 1\n")
    code, _, err = run_cli(capsys, "--config", str(cfg))
    assert code == EXIT_USAGE
    assert "bogus" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["constants", "--dim", "1"],
        ["minimize", "--rho-frac", "1.0"],
        ["capacity", "--outer", "1", "--inner", "2"],
        ["harmonic-radius", "--disk-offset", "1.2"],
    ],
)
def test_domain_errors_exit_1(capsys, argv):
    code, _, err = run_cli(capsys, *argv)
    assert code == EXIT_DOMAIN
    assert "domain error" in err


def test_non_converged_minimize_exit_2(capsys):
    code, out, _ = run_cli(capsys, "minimize", "--rho-frac", "0.9", "--grid", "64", "--max-iters", "1", "--json")
    assert code == EXIT_NUMERICAL
    assert json.loads(out)["converged"] is False


@pytest.mark.parametrize("argv", [["no-such-command"], ["branch"], ["capacity", "--outer", "x", "--inner", "1"], []])
def test_usage_errors_exit_64(capsys, argv):
    code, _, _ = run_cli(capsys, *argv)
    assert code == EXIT_USAGE


def test_module_entry_point_usage_exit():
    proc = subprocess.run([sys.executable, "-m", "onofri_lab", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE


def test_module_entry_point_success():
    proc = subprocess.run([sys.executable, "-m", "onofri_lab", "constants", "--json"], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert json.loads(proc.stdout)["beta"] == 8.0


def test_parse_peaks():
    assert parse_peaks("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_peaks("1,2.5") == [1.0, 2.5]
    for bad in ("1:0:0.1", "0:1:0", "0:1", "a,b"):
        with pytest.raises(DomainError):
            parse_peaks(bad)
