# this_file: src/twat_robodyn/__main__.py
"""Fire CLI entry point for twat-robodyn."""

from __future__ import annotations

import functools
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any, TypeVar

import fire
import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from twat_robodyn.bounds import certify, corollary_report
from twat_robodyn.config import Config, bundled_names, load_config
from twat_robodyn.errors import ConfigError, RobodynError, exit_code_for
from twat_robodyn.inertial import trajectory_margins
from twat_robodyn.particles import sample_trajectory
from twat_robodyn.report import (
    CERTIFICATE_FILE,
    CONSISTENCY_FILE,
    SUMMARY_FILE,
    TRAJECTORY_FILE,
    VERIFY_FILE,
    certificate_report,
    consistency_report,
    simulation_summary,
    verify_report,
    write_trajectory,
    write_yaml,
)
from twat_robodyn.simulator import run
from twat_robodyn.verify import verify_config

from twat_robodyn import __version__

logger = logging.getLogger("twat_robodyn")

F = TypeVar("F", bound=Callable[..., Any])


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _guarded(fn: F) -> F:
    """Map library errors to ``Name: message`` on stderr and the documented exit status."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except RobodynError as exc:
            logger.debug("command failed", exc_info=True)
            print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
            sys.exit(exit_code_for(exc))

    return wrapper  # type: ignore[return-value]


def _load(config: str | None, seed: int | None, verbose: bool) -> Config:
    _configure_logging(verbose)
    if not config:
        raise ConfigError("/", "--config is required (a path or bundled:<name>)")
    return load_config(config, seed=seed)


def _out_dir(loaded: Config, out: str | None) -> Path:
    return Path(out) if out else loaded.output_directory


def _version() -> str:
    """Print the installed version of twat-robodyn."""
    return __version__


def _scenarios() -> list[str]:
    """List the bundled scenario documents (use as ``--config bundled:<name>``)."""
    return bundled_names()


@_guarded
def _simulate(
    config: str | None = None, *, out: str | None = None, seed: int | None = None, verbose: bool = False
) -> str:
    """Integrate the configured scenario; writes trajectory.csv and summary.yaml."""
    loaded = _load(config, seed, verbose)
    if loaded.scenario is None:
        raise ConfigError("/scenario", "required for simulate")
    trajectory = run(loaded.scenario)
    folder = _out_dir(loaded, out)
    csv_path = write_trajectory(trajectory, folder / TRAJECTORY_FILE)
    summary_path = write_yaml(simulation_summary(loaded.name, loaded.seed, trajectory), folder / SUMMARY_FILE)
    return f"{csv_path}\n{summary_path}"


@_guarded
def _consistency(
    config: str | None = None, *, out: str | None = None, seed: int | None = None, verbose: bool = False
) -> str:
    """Per-body pseudo-inertia spectra over the sample times; writes consistency.yaml."""
    loaded = _load(config, seed, verbose)
    trajectory = sample_trajectory(loaded.bodies, loaded.sample_times)
    margins = trajectory_margins(trajectory)
    report = consistency_report(loaded.name, loaded.seed, trajectory, margins)
    return str(write_yaml(report, _out_dir(loaded, out) / CONSISTENCY_FILE))


@_guarded
def _certify(
    config: str | None = None, *, out: str | None = None, seed: int | None = None, verbose: bool = False
) -> str:
    """Mass-matrix bound certificate over the configured grid; writes certificate.yaml."""
    loaded = _load(config, seed, verbose)
    rng = np.random.default_rng(loaded.seed)
    grid = loaded.grid.build(rng)
    trajectory = sample_trajectory(loaded.bodies, loaded.sample_times)
    cert = certify(loaded.chain, trajectory, grid, restarts=loaded.grid.restarts, rng=rng)
    report = certificate_report(loaded.name, loaded.seed, cert, corollary_report(cert))
    return str(write_yaml(report, _out_dir(loaded, out) / CERTIFICATE_FILE))


@_guarded
def _verify(
    config: str | None = None, *, out: str | None = None, seed: int | None = None, verbose: bool = False
) -> str:
    """Seeded property suite on the configured system; writes verify.yaml, exits 4 on failure."""
    loaded = _load(config, seed, verbose)
    suite = verify_config(loaded)
    path = write_yaml(verify_report(loaded.name, suite), _out_dir(loaded, out) / VERIFY_FILE)
    suite.raise_for_failures()
    return str(path)


# Explicit allow-list; never fire.Fire(module).
COMMANDS: dict[str, object] = {
    "version": _version,
    "scenarios": _scenarios,
    "simulate": _simulate,
    "consistency": _consistency,
    "certify": _certify,
    "verify": _verify,
}


def main() -> None:
    """Run the twat-robodyn CLI."""
    fire.Fire(COMMANDS, name="twat-robodyn")


# Dashed-entry helpers, one per leaf.
def cmd_version() -> None:
    """Entry point for twat-robodyn-version."""
    fire.Fire(_version, name="twat-robodyn-version")


def cmd_simulate() -> None:
    """Entry point for twat-robodyn-simulate."""
    fire.Fire(_simulate, name="twat-robodyn-simulate")


def cmd_consistency() -> None:
    """Entry point for twat-robodyn-consistency."""
    fire.Fire(_consistency, name="twat-robodyn-consistency")


def cmd_certify() -> None:
    """Entry point for twat-robodyn-certify."""
    fire.Fire(_certify, name="twat-robodyn-certify")


def cmd_verify() -> None:
    """Entry point for twat-robodyn-verify."""
    fire.Fire(_verify, name="twat-robodyn-verify")


if __name__ == "__main__":
    main()
