# this_file: tests/test_cli.py
"""Subprocess-based CLI tests for the twat-robodyn Fire CLI."""

from __future__ import annotations

import re
import subprocess
import sys

import pytest
import yaml

PYTHON = sys.executable
MODULE = "twat_robodyn"

RAIL = {
    "seed": 3,
    "chain": {"joints": [{"kind": "prismatic", "axis": [1, 0, 0]}]},
    "bodies": [{"sphere": {"mass_kg": 1.0, "radius_m": 2.23606797749979}}],
    "scenario": {"t_end_s": 0.2, "dt_s": 0.01, "torque": {"kind": "constant", "values": [1.0]}},
    "grid": {"points": 3, "restarts": 1},
    "samples": {"count": 3},
    "verify": {"trials": 2},
}


def run(*args: str, cwd=None) -> subprocess.CompletedProcess:
    return subprocess.run(
        [PYTHON, "-m", MODULE, *args],
        capture_output=True,
        text=True,
        check=False,
        cwd=cwd,
    )


@pytest.fixture
def rail_config(tmp_path):
    path = tmp_path / "rail.yaml"
    path.write_text(yaml.safe_dump(RAIL), encoding="utf-8")
    return path


def test_help_exits_zero():
    """twat-robodyn --help exits 0 and produces output (Fire writes help to stderr)."""
    result = run("--help")
    assert result.returncode == 0, f"--help returned {result.returncode}\n{result.stderr}"
    assert result.stdout + result.stderr, "--help produced no output on stdout or stderr"


def test_version_leaf_prints_semver():
    result = run("version")
    assert result.returncode == 0, f"version returned {result.returncode}\n{result.stderr}"
    output = (result.stdout + result.stderr).strip()
    assert re.search(r"\d+\.\d+\.\d+", output), f"No semver found in output: {output!r}"


@pytest.mark.parametrize("command", ["simulate", "consistency", "certify", "verify"])
def test_command_help_exits_zero(command):
    result = run(command, "--help")
    assert result.returncode == 0, f"{command} --help returned {result.returncode}\n{result.stderr}"


def test_scenarios_lists_bundled_documents():
    result = run("scenarios")
    assert result.returncode == 0, result.stderr
    assert "rigid_2r_pendulum" in result.stdout


def test_simulate_writes_trajectory_and_summary(rail_config, tmp_path):
    out = tmp_path / "out"
    result = run("simulate", "--config", str(rail_config), "--out", str(out))
    assert result.returncode == 0, result.stderr
    assert (out / "trajectory.csv").is_file()
    summary = yaml.safe_load((out / "summary.yaml").read_text(encoding="utf-8"))
    assert summary["scenario"] == "rail"
    assert summary["seed"] == 3
    assert summary["final_state"]["q"][0] == pytest.approx(0.02, abs=1e-10)


def test_bad_config_exits_two_without_output(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({**RAIL, "scenario": {"t_end_s": 1.0, "dt_s": -1.0}}), encoding="utf-8")
    out = tmp_path / "out"
    result = run("simulate", "--config", str(bad), "--out", str(out))
    assert result.returncode == 2
    assert "ConfigError: /scenario/dt_s" in result.stderr
    assert not out.exists()


def test_missing_config_exits_two(tmp_path):
    result = run("consistency", "--out", str(tmp_path))
    assert result.returncode == 2
    assert "ConfigError" in result.stderr


def test_certify_reruns_are_byte_identical(rail_config, tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for folder in (first, second):
        result = run("certify", "--config", str(rail_config), "--out", str(folder))
        assert result.returncode == 0, result.stderr
    assert (first / "certificate.yaml").read_bytes() == (second / "certificate.yaml").read_bytes()


def test_seed_flag_overrides_document(rail_config, tmp_path):
    result = run("consistency", "--config", str(rail_config), "--out", str(tmp_path), "--seed", "17")
    assert result.returncode == 0, result.stderr
    report = yaml.safe_load((tmp_path / "consistency.yaml").read_text(encoding="utf-8"))
    assert report["seed"] == 17


def test_verify_passes_on_rail(rail_config, tmp_path):
    result = run("verify", "--config", str(rail_config), "--out", str(tmp_path))
    assert result.returncode == 0, result.stderr
    report = yaml.safe_load((tmp_path / "verify.yaml").read_text(encoding="utf-8"))
    assert report["failed"] == []


def test_singular_mass_exits_three(tmp_path):
    doc = {
        **RAIL,
        "bodies": [{"sphere": {"mass_kg": {"kind": "ramp", "initial": 1.0, "slope_per_s": -1.0}, "radius_m": 0.1}}],
        "scenario": {"t_end_s": 2.0, "dt_s": 0.1},
    }
    path = tmp_path / "vanish.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    result = run("simulate", "--config", str(path), "--out", str(tmp_path / "out"))
    assert result.returncode == 3
    assert "SingularMassMatrixError" in result.stderr
