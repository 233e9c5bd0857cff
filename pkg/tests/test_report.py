# this_file: tests/test_report.py
"""Report builders and writers."""

from __future__ import annotations

import csv

import numpy as np
import pytest
import yaml

from twat_robodyn.bounds import certify, corollary_report
from twat_robodyn.config import load_config
from twat_robodyn.inertial import trajectory_margins
from twat_robodyn.particles import sample_trajectory
from twat_robodyn.report import (
    certificate_report,
    consistency_report,
    simulation_summary,
    write_trajectory,
    write_yaml,
)
from twat_robodyn.simulator import run


def _certificate(name: str) -> dict:
    config = load_config(f"bundled:{name}")
    rng = np.random.default_rng(config.seed)
    grid = config.grid.build(rng)
    trajectory = sample_trajectory(config.bodies, config.sample_times)
    cert = certify(config.chain, trajectory, grid, restarts=config.grid.restarts, rng=rng)
    return certificate_report(config.name, config.seed, cert, corollary_report(cert))


def test_certificate_is_byte_identical_across_runs(tmp_path):
    first = write_yaml(_certificate("prismatic_sphere"), tmp_path / "a" / "certificate.yaml")
    second = write_yaml(_certificate("prismatic_sphere"), tmp_path / "b" / "certificate.yaml")
    assert first.read_bytes() == second.read_bytes()
    data = yaml.safe_load(first.read_text(encoding="utf-8"))
    assert data["alpha2"] == pytest.approx(2.0)
    assert data["notes"] == []
    assert data["verdicts"]["normal"] is True


def test_growing_mass_certificate_explains_infinite_bound():
    report = _certificate("growing_sphere")
    assert report["alpha2"] == float("inf")
    assert any("alpha2 is infinite" in note for note in report["notes"])
    # infinity survives the YAML round trip
    assert yaml.safe_load(yaml.safe_dump(report, sort_keys=False))["alpha2"] == float("inf")


def test_consistency_report_lists_every_sample():
    config = load_config("bundled:vanishing_sphere")
    trajectory = sample_trajectory(config.bodies, config.sample_times)
    report = consistency_report(config.name, config.seed, trajectory, trajectory_margins(trajectory))
    (body,) = report["bodies"]
    assert len(body["samples"]) == trajectory.n_samples
    assert body["vanishing_trend"] is True
    assert report["uniformly_consistent"] is False
    assert all(sample["consistent"] for sample in body["samples"])


def test_trajectory_csv_and_summary(tmp_path):
    config = load_config("bundled:prismatic_sphere")
    assert config.scenario is not None
    trajectory = run(config.scenario)
    path = write_trajectory(trajectory, tmp_path / "trajectory.csv")
    with path.open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == trajectory.header()
    assert len(rows) == trajectory.n_samples + 1
    assert float(rows[-1][1]) == trajectory.q[-1, 0]
    summary = simulation_summary(config.name, config.seed, trajectory)
    assert summary["steps"] == 100
    assert summary["final_state"]["q"][0] == float(trajectory.q[-1, 0])
    assert list(summary)[:3] == ["scenario", "seed", "variant"]
