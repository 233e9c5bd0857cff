"""Seeded property suite run by ``twat-robodyn verify``.

Each check draws its own random states from a generator seeded by the suite
seed, so the suite reruns identically. ``assemble_fn`` replaces
:func:`twat_robodyn.dynamics.assemble` for fault injection in tests.
"""
# this_file: src/twat_robodyn/verify.py

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from twat_robodyn.algebra import rotation, skew, skew_rotation_factorization
from twat_robodyn.bounds import Q_NORM_LIMIT, SAMPLE_TOLERANCE, q_norm_check
from twat_robodyn.config import Config
from twat_robodyn.dynamics import (
    DynamicsTerms,
    ModelVariant,
    QPath,
    assemble,
    lagrangian_oracle,
    mass_matrix_rate,
    regressor,
)
from twat_robodyn.errors import InternalConsistencyError, InvalidInputError, PropertySuiteError
from twat_robodyn.inertial import InertialParams, inverse_pseudo_inertia
from twat_robodyn.kinematics import Chain, random_grid
from twat_robodyn.particles import (
    FLOW_SIZE,
    BodyModel,
    FlowState,
    Oscillation,
    body_param_rates,
    body_params,
    flow_state,
    sphere_cloud,
)

logger = logging.getLogger(__name__)

AssembleFn = Callable[..., DynamicsTerms]

SKEW_TOLERANCE = 1e-9
H_SKEW_TOLERANCE = 1e-12
REGRESSOR_TOLERANCE = 1e-9
FACTORIZATION_TOLERANCE = 1e-12
ORACLE_TOLERANCE = 1e-5
ORACLE_PATHS = 2

CHECK_NAMES = (
    "skew_symmetry",
    "h_skew",
    "regressor",
    "q_norm_bound",
    "skew_rotation_factorization",
    "lagrangian_oracle",
)


@dataclass(frozen=True, eq=False)
class VerifySetup:
    """The system under test: chain, body models, coordinate box and oracle times."""

    chain: Chain
    bodies: tuple[BodyModel, ...]
    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    oracle_times: NDArray[np.float64]

    @classmethod
    def from_config(cls, config: Config) -> VerifySetup:
        return cls(
            chain=config.chain,
            bodies=config.bodies,
            lower=config.grid.lower,
            upper=config.grid.upper,
            oracle_times=config.verify.oracle_times,
        )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    trials: int


@dataclass(frozen=True)
class SuiteResult:
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(check.name for check in self.checks if not check.passed)

    def check(self, name: str) -> CheckResult:
        for result in self.checks:
            if result.name == name:
                return result
        msg = f"no check named {name!r}"
        raise KeyError(msg)

    def raise_for_failures(self) -> None:
        if not self.passed:
            raise PropertySuiteError(self.failed)


def random_consistent_params(rng: np.random.Generator) -> InertialParams:
    """Parameters whose pseudo-inertia ``L L^T + 0.1 I`` is safely positive definite."""
    lower = np.tril(rng.normal(size=(4, 4)))
    return inverse_pseudo_inertia(lower @ lower.T + 0.1 * np.eye(4))


def _random_rates(rng: np.random.Generator, n_bodies: int) -> tuple[InertialParams, ...]:
    return tuple(InertialParams.from_vector(rng.normal(size=10)) for _ in range(n_bodies))


def _random_q(setup: VerifySetup, rng: np.random.Generator) -> NDArray[np.float64]:
    return random_grid(setup.lower, setup.upper, 1, rng)[0]


def _result(name: str, worst: float, tolerance: float, trials: int) -> CheckResult:
    passed = bool(np.isfinite(worst)) and worst <= tolerance
    if passed:
        logger.debug("%s: worst %.3e (tolerance %.1e, %d trials)", name, worst, tolerance, trials)
    else:
        logger.error("%s failed: worst %.3e exceeds %.1e over %d trials", name, worst, tolerance, trials)
    return CheckResult(name, passed, float(worst), tolerance, trials)


def _skew_symmetry(setup: VerifySetup, rng: np.random.Generator, trials: int, assemble_fn: AssembleFn) -> CheckResult:
    """``Mdot - 2C - M(q, Theta_dot)`` is skew-symmetric; residual relative to ``|Mdot|``."""
    chain = setup.chain
    worst = 0.0
    for _ in range(trials):
        q, qd = _random_q(setup, rng), rng.normal(size=chain.n_dof)
        theta = tuple(random_consistent_params(rng) for _ in range(chain.n_bodies))
        theta_dot = _random_rates(rng, chain.n_bodies)
        terms = assemble_fn(chain, q, qd, theta, theta_dot)
        rate = mass_matrix_rate(chain, q, qd, theta, theta_dot)
        n = rate - 2.0 * terms.coriolis - terms.param_rate
        scale = max(1.0, float(np.max(np.abs(rate))))
        worst = max(worst, float(np.max(np.abs(n + n.T))) / scale)
    return _result("skew_symmetry", worst, SKEW_TOLERANCE, trials)


def _h_skew(setup: VerifySetup, rng: np.random.Generator, trials: int, assemble_fn: AssembleFn) -> CheckResult:
    chain = setup.chain
    worst = 0.0
    size = FLOW_SIZE * chain.n_bodies
    for _ in range(trials):
        q, qd = _random_q(setup, rng), rng.normal(size=chain.n_dof)
        theta = tuple(random_consistent_params(rng) for _ in range(chain.n_bodies))
        flow = FlowState(rng.normal(size=size), rng.normal(size=size), 0.0)
        terms = assemble_fn(chain, q, qd, theta, _random_rates(rng, chain.n_bodies), flow)
        h = terms.flow_coupling
        worst = max(worst, float(np.max(np.abs(h + h.T))))
    return _result("h_skew", worst, H_SKEW_TOLERANCE, trials)


def _regressor(setup: VerifySetup, rng: np.random.Generator, trials: int, assemble_fn: AssembleFn) -> CheckResult:
    """``M a + C v + G`` against the regressor applied to the same parameters."""
    chain = setup.chain
    n = chain.n_dof
    worst = 0.0
    for _ in range(trials):
        q, qd, v, a = _random_q(setup, rng), rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)
        theta = tuple(random_consistent_params(rng) for _ in range(chain.n_bodies))
        zero = tuple(InertialParams.zeros() for _ in theta)
        terms = assemble_fn(chain, q, qd, theta, zero, variant=ModelVariant.CLASSICAL)
        direct = terms.mass @ a + terms.coriolis @ v + terms.gravity
        fitted = regressor(chain, q, qd, v, a).apply(theta)
        scale = max(1.0, float(np.max(np.abs(direct))))
        worst = max(worst, float(np.max(np.abs(direct - fitted))) / scale)
    return _result("regressor", worst, REGRESSOR_TOLERANCE, trials)


def _q_norm_bound(setup: VerifySetup, rng: np.random.Generator, trials: int) -> CheckResult:
    grid = random_grid(setup.lower, setup.upper, trials, rng)
    limit = Q_NORM_LIMIT + SAMPLE_TOLERANCE
    try:
        worst = q_norm_check(setup.chain, grid)
    except InternalConsistencyError as exc:
        logger.error("%s", exc)
        return CheckResult("q_norm_bound", False, math.inf, limit, trials)
    return _result("q_norm_bound", worst, limit, trials)


def _factorization(rng: np.random.Generator, trials: int) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        x = rng.normal(size=3)
        r = rotation(rng.uniform(-math.pi, math.pi, size=3))
        residual = skew(x) @ r - skew_rotation_factorization(x, r)
        worst = max(worst, float(np.max(np.abs(residual))))
    return _result("skew_rotation_factorization", worst, FACTORIZATION_TOLERANCE, trials)


def _flowing_variant(bodies: Sequence[BodyModel], rng: np.random.Generator) -> tuple[BodyModel, ...]:
    """Replace the last body by a seeded cloud with moving particles so flow terms are exercised."""
    motion = Oscillation(0.05 * rng.normal(size=3), float(rng.uniform(1.0, 4.0)), float(rng.uniform(0.0, math.pi)))
    cloud = sphere_cloud(0.1, 6, 1.0, rng, mobility=0.5, motion=motion)
    return (*tuple(bodies)[:-1], cloud)


def _sine_path(setup: VerifySetup, rng: np.random.Generator) -> QPath:
    n = setup.chain.n_dof
    span = setup.upper - setup.lower
    centre = setup.lower + span * rng.uniform(0.25, 0.75, size=n)
    amplitude = 0.2 * np.minimum(span, 1.0) * rng.uniform(0.5, 1.0, size=n)
    omega = rng.uniform(0.5, 2.0, size=n)
    phase = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return QPath(
        lambda t: centre + amplitude * np.sin(omega * t + phase),
        lambda t: amplitude * omega * np.cos(omega * t + phase),
        lambda t: -amplitude * omega**2 * np.sin(omega * t + phase),
    )


def _oracle(setup: VerifySetup, rng: np.random.Generator, assemble_fn: AssembleFn) -> CheckResult:
    """Assembled equation of motion against finite-difference Euler-Lagrange along sine paths."""
    chain = setup.chain
    worst, count = 0.0, 0
    for bodies in (setup.bodies, _flowing_variant(setup.bodies, rng)):
        for _ in range(ORACLE_PATHS):
            path = _sine_path(setup, rng)
            for t in setup.oracle_times:
                time = float(t)
                expected = lagrangian_oracle(chain, bodies, path, time)
                terms = assemble_fn(
                    chain,
                    path.position(time),
                    path.velocity(time),
                    body_params(bodies, time),
                    body_param_rates(bodies, time),
                    flow_state(bodies, time),
                )
                actual = terms.generalized_force(path.acceleration(time))
                scale = max(1.0, float(np.max(np.abs(expected))))
                worst = max(worst, float(np.max(np.abs(actual - expected))) / scale)
                count += 1
    return _result("lagrangian_oracle", worst, ORACLE_TOLERANCE, count)


def run_property_suite(
    setup: VerifySetup, seed: int, trials: int, assemble_fn: AssembleFn = assemble
) -> SuiteResult:
    """Run every named check; failures are reported, not raised."""
    if trials < 1:
        msg = f"trials must be at least 1, got {trials}"
        raise InvalidInputError(msg)
    streams = np.random.SeedSequence(seed).spawn(len(CHECK_NAMES))
    rngs = dict(zip(CHECK_NAMES, (np.random.default_rng(s) for s in streams)))
    checks = (
        _skew_symmetry(setup, rngs["skew_symmetry"], trials, assemble_fn),
        _h_skew(setup, rngs["h_skew"], trials, assemble_fn),
        _regressor(setup, rngs["regressor"], trials, assemble_fn),
        _q_norm_bound(setup, rngs["q_norm_bound"], trials),
        _factorization(rngs["skew_rotation_factorization"], trials),
        _oracle(setup, rngs["lagrangian_oracle"], assemble_fn),
    )
    result = SuiteResult(seed, checks)
    logger.info("property suite seed %d: %d/%d checks passed", seed, len(checks) - len(result.failed), len(checks))
    return result


def verify_config(config: Config, *, assemble_fn: AssembleFn = assemble) -> SuiteResult:
    return run_property_suite(VerifySetup.from_config(config), config.seed, config.verify.trials, assemble_fn)


__all__ = [
    "CHECK_NAMES",
    "CheckResult",
    "SuiteResult",
    "VerifySetup",
    "random_consistent_params",
    "run_property_suite",
    "verify_config",
]
