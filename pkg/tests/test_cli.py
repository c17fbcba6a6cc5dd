from __future__ import annotations

import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from volterra_series import load_problem, solve_problem
from volterra_series.cli import EXIT_DOMAIN, EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_STRUCTURE, main

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def problem(name: str) -> str:
    return str(PROBLEMS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_json(tmp_path, data) -> str:
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    return str(path)


class TestSolve:
    def test_csv_table(self, capsys):
        code, out, _ = run(capsys, "solve", problem("exp.json"), "--nmax", "5")
        assert code == EXIT_OK
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [float(r["value"]) for r in rows] == [1 / math.factorial(n) for n in range(6)]
        assert rows[2] == {"r": "0", "i": "2", "exponent": "2", "component": "0", "value": "0.5"}

    def test_deterministic_and_exact(self, capsys):
        first = run(capsys, "solve", problem("mittag_leffler.json"))[1]
        second = run(capsys, "solve", problem("mittag_leffler.json"))[1]
        assert first == second
        table = solve_problem(load_problem(problem("mittag_leffler.json"))).table
        for row in csv.DictReader(io.StringIO(first)):
            assert float(row["value"]) == table.get(int(row["r"]), int(row["i"]))[0]

    def test_pretty(self, capsys):
        code, out, _ = run(capsys, "solve", problem("mittag_leffler.json"), "--nmax", "1", "--output", "pretty")
        assert code == EXIT_OK
        assert "exponent" in out.splitlines()[0]
        assert "1-1*1/2" in out

    def test_log_table(self, capsys):
        code, out, _ = run(capsys, "solve", problem("log_t_minus_s.json"), "--nmax", "1", "--rmax", "1")
        assert code == EXIT_OK
        assert "ln(t)^1*t^1" in out


class TestEval:
    def test_exponential(self, capsys):
        code, out, _ = run(capsys, "eval", problem("exp.json"), "1.0", "0.5")
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[0] == "t,component,value"
        assert float(lines[1].split(",")[2]) == pytest.approx(math.e, rel=1e-15)
        assert float(lines[2].split(",")[2]) == pytest.approx(math.exp(0.5), rel=1e-15)

    def test_singular_at_zero(self, capsys):
        code, _, err = run(capsys, "eval", problem("log_t_minus_s.json"), "0")
        assert code == EXIT_DOMAIN
        assert "domain error" in err


class TestValidate:
    @pytest.mark.parametrize(
        "name",
        [p.name for p in sorted(PROBLEMS.glob("*.json")) if p.name != "bad_alpha.json"],
    )
    def test_shipped_problems_pass(self, capsys, name):
        code, out, _ = run(capsys, "validate", problem(name))
        assert code == EXIT_OK, out
        assert "FAIL" not in out

    def test_corruption_detected(self, capsys):
        code, out, _ = run(capsys, "validate", problem("exp.json"), "--corrupt")
        assert code == EXIT_FAIL
        assert "FAIL quadrature residual" in out

    def test_seeded_points_reproducible(self, capsys):
        a = run(capsys, "validate", problem("exp.json"), "--seed", "7")[1]
        b = run(capsys, "validate", problem("exp.json"), "--seed", "7")[1]
        assert a == b

    def test_grid_steps_checked(self, capsys):
        code, _, err = run(capsys, "validate", problem("exp.json"), "--grid-steps", "2")
        assert code == EXIT_INPUT and "grid-steps" in err


class TestRadius:
    def test_exponential(self, capsys):
        code, out, _ = run(capsys, "radius", problem("exp.json"))
        assert code == EXIT_OK
        assert "certified_bound: 0.5" in out
        assert "empirical_estimate: inf (low confidence)" in out

    def test_abel(self, capsys):
        code, out, _ = run(capsys, "radius", problem("mittag_leffler.json"), "--delta", "1")
        assert code == EXIT_OK
        assert "valid for t >= delta=1" in out

    def test_bad_delta(self, capsys):
        assert run(capsys, "radius", problem("exp.json"), "--delta", "0")[0] == EXIT_INPUT


class TestErrors:
    def test_bad_alpha(self, capsys):
        code, _, err = run(capsys, "solve", problem("bad_alpha.json"))
        assert code == EXIT_INPUT
        assert "0 < p < q" in err

    def test_broken_json(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"dim\": 1,,}")
        code, _, err = run(capsys, "solve", str(path))
        assert code == EXIT_INPUT and "line 1 column" in err

    def test_first_kind_inconsistent(self, capsys, tmp_path):
        path = write_json(
            tmp_path,
            {"dim": 1, "kind": "first-kind", "kernel": [{"i": 0, "j": 0, "value": [[1.0]]}],
             "xi": [{"i": 0, "value": [1.0]}]},
        )
        code, _, err = run(capsys, "solve", path)
        assert code == EXIT_STRUCTURE and "xi(0)" in err

    def test_missing_command(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == 2


class TestProcess:
    def env(self, **extra):
        env = dict(os.environ)
        env.update(extra)
        return env

    def test_module_entry_and_log_level(self):
        res = subprocess.run(
            [sys.executable, "-m", "volterra_series", "solve", problem("first_kind_shift.json")],
            capture_output=True,
            text=True,
            env=self.env(VOLTERRA_LOG_LEVEL="INFO"),
            check=False,
        )
        assert res.returncode == EXIT_OK
        assert "j0 = 1" in res.stderr

    def test_quiet_by_default(self):
        res = subprocess.run(
            [sys.executable, "-m", "volterra_series", "solve", problem("first_kind_shift.json")],
            capture_output=True,
            text=True,
            env={k: v for k, v in os.environ.items() if k != "VOLTERRA_LOG_LEVEL"},
            check=False,
        )
        assert res.returncode == EXIT_OK and res.stderr == ""
