"""Fixed-step integration of the generalized robotics equation.

A :class:`Scenario` bundles a chain, one body model per body, torque and
disturbance sources and the time span. :func:`run` integrates with the
classical fourth-order Runge-Kutta scheme, re-evaluating parameters, their
rates and the flow state at every stage time, and records an energy audit at
every output sample.
"""
# this_file: src/twat_robodyn/simulator.py

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twat_robodyn.algebra import require_finite
from twat_robodyn.dynamics import (
    DynamicsTerms,
    ModelVariant,
    assemble,
    forward_dynamics,
    kinetic_energy_terms,
    potential_energy,
)
from twat_robodyn.errors import InvalidInputError, NumericFailureError, SingularMassMatrixError
from twat_robodyn.inertial import spatial_inertia
from twat_robodyn.kinematics import Chain, forward_map, jacobian
from twat_robodyn.particles import BodyModel, ParticleCloud, body_param_rates, body_params, flow_state

logger = logging.getLogger(__name__)

Vec = NDArray[np.float64]


# --- torque and disturbance sources ----------------------------------------


@runtime_checkable
class TorqueSource(Protocol):
    """Generalized force as a function of time, state and the assembled terms."""

    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec: ...


@dataclass(frozen=True)
class ZeroTorque:
    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec:
        return np.zeros(q.size)


@dataclass(frozen=True, eq=False)
class ConstantTorque:
    values: Vec

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", require_finite("torque", self.values).reshape(-1))

    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec:
        if self.values.size != q.size:
            msg = f"constant torque has {self.values.size} entries, chain has {q.size} coordinates"
            raise InvalidInputError(msg)
        return self.values.copy()


@dataclass(frozen=True, eq=False)
class TableTorque:
    """Piecewise linear in time; held constant outside the table."""

    times: Vec
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        times = require_finite("torque table times", self.times).reshape(-1)
        values = np.atleast_2d(require_finite("torque table values", self.values))
        if times.size == 0 or values.shape[0] != times.size:
            msg = f"torque table needs one row per time, got {times.size} times and {values.shape[0]} rows"
            raise InvalidInputError(msg)
        if np.any(np.diff(times) <= 0.0):
            msg = "torque table times must be strictly increasing"
            raise InvalidInputError(msg)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec:
        if self.values.shape[1] != q.size:
            msg = f"torque table has {self.values.shape[1]} columns, chain has {q.size} coordinates"
            raise InvalidInputError(msg)
        return np.array([np.interp(t, self.times, column) for column in self.values.T])


@dataclass(frozen=True, eq=False)
class PDTorque:
    """``kp (setpoint - q) - kd qd``, optionally plus the gravity term."""

    setpoint: Vec
    kp: float
    kd: float
    compensate_gravity: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "setpoint", require_finite("setpoint", self.setpoint).reshape(-1))
        if self.kp < 0.0 or self.kd < 0.0:
            msg = f"PD gains must be nonnegative, got kp={self.kp}, kd={self.kd}"
            raise InvalidInputError(msg)

    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec:
        if self.setpoint.size != q.size:
            msg = f"setpoint has {self.setpoint.size} entries, chain has {q.size} coordinates"
            raise InvalidInputError(msg)
        out = self.kp * (self.setpoint - q) - self.kd * qd
        return out + terms.gravity if self.compensate_gravity else out


@dataclass(frozen=True)
class GravityCompensation:
    def __call__(self, t: float, q: Vec, qd: Vec, terms: DynamicsTerms) -> Vec:
        return terms.gravity.copy()


# --- scenario, state, trajectory -------------------------------------------


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything needed to integrate one motion."""

    chain: Chain
    bodies: tuple[BodyModel, ...]
    q0: Vec
    qd0: Vec
    t_end: float
    dt: float
    t0: float = 0.0
    torque: TorqueSource = field(default_factory=ZeroTorque)
    disturbance: TorqueSource = field(default_factory=ZeroTorque)
    variant: ModelVariant = ModelVariant.GENERALIZED
    output_every: int = 1
    name: str = "scenario"

    def __post_init__(self) -> None:
        bodies = tuple(self.bodies)
        if len(bodies) != self.chain.n_bodies:
            msg = f"chain has {self.chain.n_bodies} bodies but {len(bodies)} body models were given"
            raise InvalidInputError(msg)
        q0 = require_finite("q0", self.q0).reshape(-1)
        qd0 = require_finite("qd0", self.qd0).reshape(-1)
        if q0.size != self.chain.n_dof or qd0.size != self.chain.n_dof:
            msg = f"q0 and qd0 must have {self.chain.n_dof} entries"
            raise InvalidInputError(msg)
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            msg = f"dt must be positive, got {self.dt}"
            raise InvalidInputError(msg)
        if not (math.isfinite(self.t_end) and math.isfinite(self.t0) and self.t_end > self.t0):
            msg = f"time span must be positive, got [{self.t0}, {self.t_end}]"
            raise InvalidInputError(msg)
        if self.output_every < 1:
            msg = f"output_every must be >= 1, got {self.output_every}"
            raise InvalidInputError(msg)
        object.__setattr__(self, "bodies", bodies)
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "qd0", qd0)

    @property
    def n_steps(self) -> int:
        return max(1, round((self.t_end - self.t0) / self.dt))

    @property
    def initial_state(self) -> State:
        return State(self.t0, self.q0.copy(), self.qd0.copy())


@dataclass(frozen=True, eq=False)
class State:
    t: float
    q: Vec
    qd: Vec


@dataclass(frozen=True)
class EnergyBreakdown:
    """Kinetic terms ``1/2 qd^T M qd``, ``1/2 nu``, ``qd^T J^T Q Psi`` and the potential."""

    quadratic: float
    offset: float
    cross: float
    potential: float

    @property
    def kinetic(self) -> float:
        return self.quadratic + self.offset + self.cross

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Output samples of one run.

    ``flow_work`` accumulates ``qd^T J^T Q Psi_dot``, ``drift_work``
    accumulates ``qd^T M(q, Theta_dot) qd`` and ``input_work`` accumulates
    ``qd^T (tau + w)``; all three are trapezoid diagnostics.
    """

    times: Vec
    q: NDArray[np.float64]
    qd: NDArray[np.float64]
    qdd: NDArray[np.float64]
    energies: tuple[EnergyBreakdown, ...]
    flow_work: Vec
    drift_work: Vec
    input_work: Vec
    steps: int
    variant: ModelVariant = ModelVariant.GENERALIZED

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    @property
    def total_energy(self) -> Vec:
        return np.array([e.total for e in self.energies])

    @property
    def energy_drift(self) -> float:
        """Largest deviation of ``T + U`` from its initial value."""
        totals = self.total_energy
        return float(np.max(np.abs(totals - totals[0])))

    @property
    def relative_energy_drift(self) -> float:
        totals = self.total_energy
        return self.energy_drift / max(abs(float(totals[0])), np.finfo(float).tiny)

    def header(self) -> list[str]:
        n = self.q.shape[1]
        names = ["t"]
        for prefix in ("q", "qd", "qdd"):
            names.extend(f"{prefix}_{i + 1}" for i in range(n))
        names.extend(["T_kin", "U_pot", "nu", "E_total", "flow_work", "drift_work"])
        return names

    def to_rows(self) -> list[list[float]]:
        """One row per sample, in :meth:`header` order."""
        rows = []
        for k in range(self.n_samples):
            e = self.energies[k]
            row = [float(self.times[k]), *map(float, self.q[k]), *map(float, self.qd[k]), *map(float, self.qdd[k])]
            row.extend([e.kinetic, e.potential, 2.0 * e.offset, e.total])
            row.extend([float(self.flow_work[k]), float(self.drift_work[k])])
            rows.append(row)
        return rows


# --- integration -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Evaluation:
    qdd: Vec
    terms: DynamicsTerms
    force: Vec


def _evaluate(scenario: Scenario, t: float, q: Vec, qd: Vec, snapshot: State | None = None) -> _Evaluation:
    bodies = scenario.bodies
    terms = assemble(
        scenario.chain,
        q,
        qd,
        body_params(bodies, t),
        body_param_rates(bodies, t),
        flow_state(bodies, t),
        variant=scenario.variant,
    )
    tau = np.asarray(scenario.torque(t, terms.q, terms.qd, terms), dtype=float)
    w = np.asarray(scenario.disturbance(t, terms.q, terms.qd, terms), dtype=float)
    try:
        qdd = forward_dynamics(terms, tau, w)
    except SingularMassMatrixError as exc:
        raise SingularMassMatrixError(exc.lambda_min, exc.q, snapshot or State(t, q, qd)) from exc
    return _Evaluation(qdd, terms, tau + w)


def step(state: State, scenario: Scenario, dt: float | None = None) -> State:
    """Advance ``(q, qd)`` by one classical Runge-Kutta step of length ``dt``.

    Raises:
      SingularMassMatrixError: if any stage meets a mass matrix that is not
        safely positive definite; ``snapshot`` holds the state at step start.
    """
    h = scenario.dt if dt is None else float(dt)
    if not (math.isfinite(h) and h > 0.0):
        msg = f"step size must be positive, got {h}"
        raise InvalidInputError(msg)
    return _rk4(state, scenario, h, _evaluate(scenario, state.t, state.q, state.qd, state).qdd)


def _rk4(state: State, scenario: Scenario, h: float, k1: Vec) -> State:
    t, q, qd = state.t, state.q, state.qd
    q2, qd2 = q + 0.5 * h * qd, qd + 0.5 * h * k1
    k2 = _evaluate(scenario, t + 0.5 * h, q2, qd2, state).qdd
    q3, qd3 = q + 0.5 * h * qd2, qd + 0.5 * h * k2
    k3 = _evaluate(scenario, t + 0.5 * h, q3, qd3, state).qdd
    q4, qd4 = q + h * qd3, qd + h * k3
    k4 = _evaluate(scenario, t + h, q4, qd4, state).qdd
    q_next = q + h / 6.0 * (qd + 2.0 * qd2 + 2.0 * qd3 + qd4)
    qd_next = qd + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return State(t + h, q_next, qd_next)


def energy(state: State, scenario: Scenario) -> EnergyBreakdown:
    """Kinetic energy split into its three terms, plus the potential energy."""
    theta = body_params(scenario.bodies, state.t)
    flow = flow_state(scenario.bodies, state.t, with_rate=False)
    quadratic, offset, cross = kinetic_energy_terms(scenario.chain, state.q, state.qd, theta, flow)
    potential = float(potential_energy(scenario.chain, state.q, theta))
    return EnergyBreakdown(quadratic, offset, cross, potential)


def particle_kinetic_energy(state: State, scenario: Scenario) -> float:
    """Kinetic energy summed particle by particle from absolute velocities.

    A particle at body-frame position ``x`` moves with ``v + omega x x`` and
    its mobile share additionally with ``R(phi) v_rel``. Bodies that are not
    particle clouds contribute ``1/2 V^T Z V``.
    """
    chain = scenario.chain
    pose = forward_map(chain, state.q)
    twist = np.asarray(jacobian(chain, state.q), dtype=float) @ state.qd
    total = 0.0
    for index, body in enumerate(scenario.bodies):
        v, omega = twist[6 * index : 6 * index + 3], twist[6 * index + 3 : 6 * index + 6]
        if not isinstance(body, ParticleCloud):
            spatial = twist[6 * index : 6 * index + 6]
            total += 0.5 * float(spatial @ spatial_inertia(body.params(state.t)) @ spatial)
            continue
        weights, positions, mobility, relative = body.particle_states(state.t)
        rotation = np.asarray(pose.orientations[index], dtype=float)
        carried = v + np.cross(omega, positions)
        moving = carried + relative @ rotation.T
        still = np.sum(carried * carried, axis=1)
        flowing = np.sum(moving * moving, axis=1)
        total += 0.5 * float(np.sum(weights * ((1.0 - mobility) * still + mobility * flowing)))
    return total


def run(scenario: Scenario, *, on_sample: Callable[[State, EnergyBreakdown], None] | None = None) -> Trajectory:
    """Integrate the scenario and audit the energy at every output sample."""
    n_steps = scenario.n_steps
    h = (scenario.t_end - scenario.t0) / n_steps
    state = scenario.initial_state
    times, qs, qds, qdds, energies = [], [], [], [], []
    flow_work, drift_work, input_work = [], [], []
    acc_flow = acc_drift = acc_input = 0.0
    previous: tuple[float, float, float] | None = None
    logger.info("run %s: %d steps of %.6g s, variant=%s", scenario.name, n_steps, h, scenario.variant.value)
    for index in range(n_steps + 1):
        evaluation = _evaluate(scenario, state.t, state.q, state.qd, state)
        terms = evaluation.terms
        rates = (
            float(state.qd @ terms.flow_acceleration_force),
            float(state.qd @ terms.param_rate @ state.qd),
            float(state.qd @ evaluation.force),
        )
        if previous is not None:
            acc_flow += 0.5 * h * (previous[0] + rates[0])
            acc_drift += 0.5 * h * (previous[1] + rates[1])
            acc_input += 0.5 * h * (previous[2] + rates[2])
        previous = rates
        if index % scenario.output_every == 0 or index == n_steps:
            breakdown = energy(state, scenario)
            times.append(state.t)
            qs.append(state.q.copy())
            qds.append(state.qd.copy())
            qdds.append(evaluation.qdd)
            energies.append(breakdown)
            flow_work.append(acc_flow)
            drift_work.append(acc_drift)
            input_work.append(acc_input)
            if on_sample is not None:
                on_sample(state, breakdown)
            logger.debug("t=%.6g E=%.12g", state.t, breakdown.total)
        if index < n_steps:
            state = _rk4(state, scenario, h, evaluation.qdd)
            if not (np.all(np.isfinite(state.q)) and np.all(np.isfinite(state.qd))):
                msg = f"state became non-finite at t={state.t}"
                raise NumericFailureError(msg)
    trajectory = Trajectory(
        times=np.array(times),
        q=np.array(qs),
        qd=np.array(qds),
        qdd=np.array(qdds),
        energies=tuple(energies),
        flow_work=np.array(flow_work),
        drift_work=np.array(drift_work),
        input_work=np.array(input_work),
        steps=n_steps,
        variant=scenario.variant,
    )
    logger.info("run %s done: energy drift %.3e", scenario.name, trajectory.energy_drift)
    return trajectory


def self_convergence_order(scenario: Scenario, *, refinements: Sequence[int] = (1, 2, 4)) -> float:
    """Observed order from endpoints at ``dt``, ``dt/2``, ``dt/4``.

    ``log2(|q_h - q_{h/2}| / |q_{h/2} - q_{h/4}|)`` on the final coordinates
    and velocities.
    """
    if len(refinements) != 3:
        msg = "self convergence needs exactly three refinements"
        raise InvalidInputError(msg)
    ends = []
    for factor in refinements:
        state = scenario.initial_state
        h = (scenario.t_end - scenario.t0) / (scenario.n_steps * factor)
        for _ in range(scenario.n_steps * factor):
            state = step(state, scenario, h)
        ends.append(np.concatenate((state.q, state.qd)))
    coarse = float(np.linalg.norm(ends[0] - ends[1]))
    fine = float(np.linalg.norm(ends[1] - ends[2]))
    if fine == 0.0 or coarse == 0.0:
        return math.inf
    ratio = refinements[1] / refinements[0]
    return math.log(coarse / fine) / math.log(ratio)


def state_from(t: float, q: ArrayLike, qd: ArrayLike) -> State:
    return State(float(t), require_finite("q", q).reshape(-1), require_finite("qd", qd).reshape(-1))


__all__ = [
    "ConstantTorque",
    "EnergyBreakdown",
    "GravityCompensation",
    "PDTorque",
    "Scenario",
    "State",
    "TableTorque",
    "TorqueSource",
    "Trajectory",
    "ZeroTorque",
    "energy",
    "particle_kinetic_energy",
    "run",
    "self_convergence_order",
    "state_from",
]
