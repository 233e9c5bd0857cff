"""Deterministic CSV and YAML reports.

Reports are plain dicts built in a fixed key order and dumped with
``yaml.safe_dump(sort_keys=False)``; every number goes through ``float`` or
``int`` first so numpy scalars never reach the emitter. Same inputs give
byte-identical files.
"""
# this_file: src/twat_robodyn/report.py

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from numpy.typing import ArrayLike

from twat_robodyn.bounds import BoundCertificate, CorollaryReport, RateBound
from twat_robodyn.inertial import BodyMargins, ParamTrajectory, check_consistency
from twat_robodyn.simulator import Trajectory
from twat_robodyn.verify import SuiteResult

logger = logging.getLogger(__name__)

TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.yaml"
CONSISTENCY_FILE = "consistency.yaml"
CERTIFICATE_FILE = "certificate.yaml"
VERIFY_FILE = "verify.yaml"


def _floats(values: ArrayLike) -> list[Any]:
    return np.asarray(values, dtype=float).tolist()


def write_yaml(data: Mapping[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(dict(data), sort_keys=False, allow_unicode=True), encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def write_csv(header: list[str], rows: Iterable[list[float]], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(value)) for value in row])
    logger.debug("wrote %s", path)
    return path


def write_trajectory(trajectory: Trajectory, path: Path) -> Path:
    return write_csv(trajectory.header(), trajectory.to_rows(), path)


def simulation_summary(name: str, seed: int, trajectory: Trajectory) -> dict[str, Any]:
    """Energy audit and step count of one run."""
    totals = trajectory.total_energy
    return {
        "scenario": name,
        "seed": int(seed),
        "variant": trajectory.variant.value,
        "steps": int(trajectory.steps),
        "samples": int(trajectory.n_samples),
        "t_start_s": float(trajectory.times[0]),
        "t_end_s": float(trajectory.times[-1]),
        "energy": {
            "initial": float(totals[0]),
            "final": float(totals[-1]),
            "max_abs_drift": float(trajectory.energy_drift),
            "relative_drift": float(trajectory.relative_energy_drift),
        },
        "diagnostics": {
            "flow_work": float(trajectory.flow_work[-1]),
            "drift_work": float(trajectory.drift_work[-1]),
            "input_work": float(trajectory.input_work[-1]),
        },
        "final_state": {"q": _floats(trajectory.q[-1]), "qd": _floats(trajectory.qd[-1])},
    }


def _body_margins(margin: BodyMargins) -> dict[str, Any]:
    return {
        "body": int(margin.body),
        "inf_lambda_min": float(margin.inf_lambda_min),
        "argmin_time_s": float(margin.argmin_time),
        "sup_lambda_max": float(margin.sup_lambda_max),
        "argmax_time_s": float(margin.argmax_time),
        "consistent_at_all_samples": bool(margin.consistent_at_all_samples),
        "offending_times_s": [float(t) for t in margin.offending_times],
        "vanishing_trend": bool(margin.vanishing_trend),
        "diverging_trend": bool(margin.diverging_trend),
        "uniformly_consistent": bool(margin.uniformly_consistent),
        "upper_bounded": bool(margin.upper_bounded),
    }


def consistency_report(
    name: str, seed: int, trajectory: ParamTrajectory, margins: tuple[BodyMargins, ...]
) -> dict[str, Any]:
    """Per-body pseudo-inertia spectra over the sample times, plus verdicts."""
    bodies = []
    for margin in margins:
        entry = _body_margins(margin)
        entry["samples"] = [
            {
                "t_s": float(t),
                "mass_kg": float(p.mass),
                "lambda_min": float(low),
                "lambda_max": float(high),
                "consistent": bool(check_consistency(p).consistent),
            }
            for t, p, low, high in zip(
                trajectory.times, trajectory.body(margin.body), margin.lambda_min_samples, margin.lambda_max_samples
            )
        ]
        bodies.append(entry)
    return {
        "scenario": name,
        "seed": int(seed),
        "samples": int(trajectory.n_samples),
        "uniformly_consistent": all(m.uniformly_consistent for m in margins),
        "upper_bounded": all(m.upper_bounded for m in margins),
        "bodies": bodies,
    }


def _rate(rate: RateBound | None) -> dict[str, Any] | None:
    if rate is None:
        return None
    return {
        "sup_sigma_max": float(rate.sup_sigma),
        "chi": float(rate.chi),
        "jac_sup": float(rate.jac_sup),
        "envelope": float(rate.envelope),
        "argmax_q": _floats(rate.argmax_q),
        "argmax_time_s": float(rate.argmax_time),
        "within_envelope": bool(rate.within_envelope),
    }


def _explain(cert: BoundCertificate) -> list[str]:
    notes = []
    verdicts = cert.verdicts
    if not verdicts["uniformly_consistent"]:
        notes.append("parameters approach the consistency boundary; no positive lower bound is claimed")
    if not verdicts["normal"]:
        notes.append("J^T J loses rank on the grid; no positive lower bound is claimed")
    if not verdicts["params_upper_bounded"]:
        notes.append("pseudo-inertia spectrum grows without a sampled bound; alpha2 is infinite")
    if not verdicts["upper_bounded_jac"]:
        notes.append("J depends on a prismatic coordinate, so sigma_max(J) is unbounded; alpha2 is infinite")
    return notes


def certificate_report(name: str, seed: int, cert: BoundCertificate, corollary: CorollaryReport) -> dict[str, Any]:
    """Bounds, verdicts, witnesses and the sampling that produced them."""
    lower, upper = cert.lower, cert.upper
    return {
        "scenario": name,
        "seed": int(seed),
        "alpha1": float(cert.alpha1),
        "alpha2": float(cert.alpha2),
        "verdicts": {key: bool(value) for key, value in cert.verdicts.items()},
        "notes": _explain(cert),
        "lower": {
            "consistency_inf": float(lower.consistency_inf),
            "jac_inf": float(lower.jac_inf),
            "epsilon": float(lower.epsilon),
            "sampled_min_lambda_min": float(lower.sampled_min),
            "verified": bool(lower.verified),
        },
        "upper": {
            "consistency_sup": float(upper.consistency_sup),
            "jac_sup": float(upper.jac_sup),
            "sampled_alpha2": float(upper.sampled_alpha2),
            "sampled_max_lambda_max": float(upper.sampled_max),
            "verified": bool(upper.verified),
        },
        "jacobian": {
            "inf_lambda_min": float(cert.spectrum.inf_lambda_min),
            "argmin_q": _floats(cert.spectrum.argmin_q),
            "sup_lambda_max": float(cert.spectrum.sup_lambda_max),
            "argmax_q": _floats(cert.spectrum.argmax_q),
            "points_evaluated": int(cert.spectrum.n_points),
            "prismatic_dependence": bool(cert.spectrum.prismatic_dependence),
        },
        "q_norm_sup": float(cert.q_norm_sup),
        "rate": _rate(cert.rate),
        "bodies": [_body_margins(m) for m in cert.margins],
        "corollary": {
            "hypotheses_hold": bool(corollary.hypotheses_hold),
            "bounded": bool(corollary.bounded),
            "constant_params": bool(corollary.constant_params),
            "beta1": float(corollary.beta1),
            "beta2": float(corollary.beta2),
            "jacobian_bounds_imply_mass_bounds": corollary.jacobian_bounds_imply_mass_bounds,
            "mass_bounds_imply_jacobian_bounds": corollary.mass_bounds_imply_jacobian_bounds,
        },
        "unit_ball_witness": {
            "beta1": float(cert.witness.beta1),
            "beta2": float(cert.witness.beta2),
            "mass_inf": float(cert.witness.mass_inf),
            "mass_sup": float(cert.witness.mass_sup),
            "matches": bool(cert.witness.matches),
        },
        "grid": [_floats(q) for q in cert.grid],
        "sample_times_s": _floats(cert.sample_times),
    }


def verify_report(name: str, suite: SuiteResult) -> dict[str, Any]:
    """Named checks with their worst residuals and tolerances."""
    return {
        "scenario": name,
        "seed": int(suite.seed),
        "passed": bool(suite.passed),
        "failed": list(suite.failed),
        "checks": [
            {
                "name": check.name,
                "passed": bool(check.passed),
                "worst": float(check.worst),
                "tolerance": float(check.tolerance),
                "trials": int(check.trials),
            }
            for check in suite.checks
        ],
    }


__all__ = [
    "CERTIFICATE_FILE",
    "CONSISTENCY_FILE",
    "SUMMARY_FILE",
    "TRAJECTORY_FILE",
    "VERIFY_FILE",
    "certificate_report",
    "consistency_report",
    "simulation_summary",
    "verify_report",
    "write_csv",
    "write_trajectory",
    "write_yaml",
]
