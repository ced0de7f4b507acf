"""End-to-end runs of the batch front end through subprocess."""

from __future__ import annotations

import json
import subprocess
import sys
from textwrap import dedent

import pytest

import oracles
from pcrit.cli import VALIDATION_SUITES

EIG_INI = dedent(
    """\
    [problem]
    p = 2.0
    d = 1
    domain = 0 1
    potential = zero

    [command]
    name = eig
    level = 0 1
    resolution = 2001
    """
)

CRIT_INI = dedent(
    """\
    [problem]
    p = 2.0
    d = 1
    domain = -inf inf
    potential = zero

    [exhaustion]
    style = line
    count = 15
    base = 1.0
    growth = 2.0
    x0 = 0.0

    [command]
    name = critical
    resolution = 801
    """
)

VALIDATE_INI = dedent(
    """\
    [problem]
    p = 2.0
    d = 1
    domain = 0 1
    potential = zero

    [command]
    name = validate
    """
)

STUCK_SOLVE_INI = dedent(
    """\
    [problem]
    p = 3.0
    d = 1
    domain = 0 1
    potential = zero

    [command]
    name = solve
    level = 0 1
    boundary = 0.0 1.0
    forcing = constant 5
    resolution = 801

    [tolerances]
    max_iter_per_stage = 2
    """
)


def run_cli(tmp_path, ini_text, *extra):
    cfg = tmp_path / "run.ini"
    cfg.write_text(ini_text)
    out = tmp_path / "out"
    cmd = [sys.executable, "-m", "pcrit.cli", "--config", str(cfg), "--out", str(out)]
    cmd.extend(extra)
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=tmp_path)
    report = None
    report_path = out / "report.json"
    if report_path.exists():
        report = json.loads(report_path.read_text())
    return proc, out, report


class TestEigCommand:
    def test_eigenvalue_report_and_profile(self, tmp_path):
        proc, out, report = run_cli(tmp_path, EIG_INI)
        assert proc.returncode == 0, proc.stderr
        lam = report["results"]["lambda"]
        assert lam == pytest.approx(oracles.FROZEN["eig_shoot_p2"], rel=1e-3)
        assert report["results"]["converged"]
        assert report["status"] == "ok"
        lines = (out / "eig_profile.csv").read_text().splitlines()
        assert lines[0] == "node,value"
        assert len(lines) == 1 + 2001
        # every row parses back to two floats
        a, b = lines[1000].split(",")
        float(a), float(b)

    def test_report_embeds_config_hash_and_tolerances(self, tmp_path):
        proc, _, report = run_cli(tmp_path, EIG_INI)
        assert proc.returncode == 0
        digest = report["config_sha256"]
        assert len(digest) == 64 and set(digest) <= set("0123456789abcdef")
        tol = report["tolerances"]
        assert "residual_tol" in tol and "eigen_rtol" in tol

    def test_tol_flag_lands_in_report(self, tmp_path):
        proc, _, report = run_cli(tmp_path, EIG_INI, "--tol", "3e-9")
        assert proc.returncode == 0
        assert report["tolerances"]["residual_tol"] == 3e-9

    def test_reruns_are_byte_identical(self, tmp_path):
        dir_a = tmp_path / "a"
        dir_b = tmp_path / "b"
        dir_a.mkdir()
        dir_b.mkdir()
        _, out_a, rep_a = run_cli(dir_a, EIG_INI)
        _, out_b, rep_b = run_cli(dir_b, EIG_INI)
        csv_a = (out_a / "eig_profile.csv").read_bytes()
        csv_b = (out_b / "eig_profile.csv").read_bytes()
        assert csv_a == csv_b
        assert rep_a["results"] == rep_b["results"]


class TestCriticalCommand:
    def test_whole_line_is_critical(self, tmp_path):
        proc, out, report = run_cli(tmp_path, CRIT_INI)
        assert proc.returncode == 0, proc.stderr
        res = report["results"]
        assert res["verdict"] == "critical"
        ts = res["thresholds"]
        assert all(b < a for a, b in zip(ts, ts[1:]))
        assert ts[-1] <= 1e-4
        lines = (out / "critical_thresholds.csv").read_text().splitlines()
        assert lines[0] == "index,level_lo,level_hi,threshold"
        assert len(lines) == 1 + len(ts)


class TestValidateCommand:
    def test_all_suites_pass(self, tmp_path):
        proc, _, report = run_cli(tmp_path, VALIDATE_INI)
        assert proc.returncode == 0, proc.stderr
        suites = report["results"]["suites"]
        assert set(suites) == set(VALIDATION_SUITES)
        failing = [k for k, v in suites.items() if not v["pass"]]
        assert failing == []
        assert report["results"]["all_pass"]

    def test_seed_override_changes_draws_not_outcome(self, tmp_path):
        proc, _, report = run_cli(tmp_path, VALIDATE_INI, "--seed", "777")
        assert proc.returncode == 0, proc.stderr
        assert report["seed"] == 777
        assert report["results"]["all_pass"]


class TestFailureModes:
    def test_missing_p_is_config_error(self, tmp_path):
        bad = EIG_INI.replace("p = 2.0\n", "")
        proc, _, report = run_cli(tmp_path, bad)
        assert proc.returncode == 1
        assert report is None
        assert "[problem]" in proc.stderr and "'p'" in proc.stderr

    def test_unknown_command_is_config_error(self, tmp_path):
        bad = EIG_INI.replace("name = eig", "name = shrug")
        proc, _, _ = run_cli(tmp_path, bad)
        assert proc.returncode == 1
        assert "unknown command" in proc.stderr

    def test_starved_solver_reports_non_convergence(self, tmp_path):
        proc, _, report = run_cli(tmp_path, STUCK_SOLVE_INI)
        assert proc.returncode == 2
        assert report["status"] == "non-convergence"
        assert not report["results"]["converged"]
