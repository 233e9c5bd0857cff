"""Terms of the generalized robotics equation.

For coordinates ``q``, parameters ``Theta(t)`` with rate ``Theta_dot`` and the
stacked flow vector ``Psi(t)``::

    M q_dd + (C + M(q, Theta_dot) + H) q_d + G = tau + w - J^T Q Psi_dot

``M = J^T Z(Theta) J``; ``C`` comes from the Christoffel symbols of ``M``;
``G`` is the gradient of the potential ``g^T sum(m_l z_l + R_l h_l)``;
``H`` is the skew part of the Jacobian of ``J^T Q Psi``. Every derivative
with respect to ``q`` is taken with dual numbers. The regressor and the
finite-difference Euler-Lagrange oracle live here as well.
"""
# this_file: src/twat_robodyn/dynamics.py

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from twat_robodyn import dual
from twat_robodyn.algebra import block_replicate, require_finite, st_matrices, symmetric_eigenvalues
from twat_robodyn.errors import InvalidInputError, SingularMassMatrixError
from twat_robodyn.inertial import (
    PARAMS_PER_BODY,
    InertialParams,
    basis_params,
    block_spatial_inertia,
    stack_params,
)
from twat_robodyn.kinematics import Chain, Pose, pose_and_jacobian
from twat_robodyn.particles import FLOW_SIZE, BodyModel, FlowState, body_params, flow_state

logger = logging.getLogger(__name__)

Vec = NDArray[np.float64]
Mat = NDArray[np.float64]

POSITIVE_DEFINITE_FLOOR = 1e-10
ORACLE_TIME_STEP = 1e-5
ORACLE_COORDINATE_STEP = 1e-6
# L is quadratic in the velocities, so a wide central step is exact and keeps roundoff down
ORACLE_VELOCITY_STEP = 1e-3

_S, _T = st_matrices()


class ModelVariant(str, Enum):
    """Which terms of the equation of motion are kept."""

    GENERALIZED = "generalized"
    PARAMETER_DRIFT = "parameter_drift"
    CLASSICAL = "classical"


def _theta(chain: Chain, theta: Sequence[InertialParams]) -> tuple[InertialParams, ...]:
    params = tuple(theta)
    if len(params) != chain.n_bodies:
        msg = f"chain has {chain.n_bodies} bodies but {len(params)} parameter sets were given"
        raise InvalidInputError(msg)
    return params


def _psi(chain: Chain, psi: ArrayLike) -> Vec:
    vec = require_finite("flow vector", psi).reshape(-1)
    if vec.size != FLOW_SIZE * chain.n_bodies:
        msg = f"flow vector must have {FLOW_SIZE * chain.n_bodies} entries, got {vec.size}"
        raise InvalidInputError(msg)
    return vec


def _velocity(chain: Chain, name: str, value: ArrayLike) -> Vec:
    vec = require_finite(name, value).reshape(-1)
    if vec.size != chain.n_dof:
        msg = f"{name} must have {chain.n_dof} entries, got {vec.size}"
        raise InvalidInputError(msg)
    return vec


# --- building blocks shared by float and dual evaluation ------------------


def _potential_from_pose(gravity: Vec, pose: Pose, theta: Sequence[InertialParams]) -> Any:
    total: Any = 0.0
    for z, r, p in zip(pose.positions, pose.orientations, theta):
        total = total + gravity @ (p.mass * z + r @ p.first_moment)
    return total


def _q_times_psi(pose: Pose, psi: Vec) -> NDArray[Any]:
    """Blockwise ``Q(q) Psi`` without forming Q."""
    parts = []
    for l, r in enumerate(pose.orientations):
        chunk = psi[FLOW_SIZE * l : FLOW_SIZE * (l + 1)]
        parts.append(chunk[:3])
        parts.append(-(_S @ (block_replicate(r) @ (_T @ chunk[3:]))))
    return np.concatenate(parts)


def _unit_potentials_from_pose(gravity: Vec, pose: Pose) -> NDArray[Any]:
    out = []
    for z, r in zip(pose.positions, pose.orientations):
        out.append(gravity @ z)
        out.extend(r.T @ gravity)
        out.extend([0.0] * 6)
    return np.array(out)


@dataclass(frozen=True, eq=False)
class _Differentials:
    jac: Mat
    jac_partials: NDArray[np.float64]
    pose: Pose
    grad_potential: Vec | None
    flow_jacobian: Mat | None


def _differentials(
    chain: Chain,
    q: Vec,
    theta: Sequence[InertialParams] | None = None,
    psi: Vec | None = None,
) -> _Differentials:
    """One dual pass per coordinate yielding dJ/dq, dU/dq and d(J^T Q Psi)/dq together."""
    pose, jac = pose_and_jacobian(chain, q)
    n = chain.n_dof
    partials = np.zeros((n, 6 * chain.n_bodies, n))
    grad = np.zeros(n) if theta is not None else None
    flow_jac = np.zeros((n, n)) if psi is not None else None
    flowing = psi is not None and bool(np.any(psi))
    needs_pass = chain.has_revolute or theta is not None or flowing
    if needs_pass:
        basis = np.eye(n)
        for i in range(n):
            dual_pose, dual_jac = pose_and_jacobian(chain, dual.seed(q, basis[i]))
            partials[i] = dual.tangent(dual_jac)
            if grad is not None and theta is not None:
                grad[i] = float(dual.tangent(_potential_from_pose(chain.gravity, dual_pose, theta)))
            if flow_jac is not None and flowing and psi is not None:
                flow_jac[:, i] = dual.tangent(dual_jac.T @ _q_times_psi(dual_pose, psi))
    return _Differentials(np.asarray(jac, dtype=float), partials, pose, grad, flow_jac)


def _mass_from(jac: Mat, theta: Sequence[InertialParams]) -> Mat:
    m = jac.T @ block_spatial_inertia(theta) @ jac
    return 0.5 * (m + m.T)


def _mass_partials_from(jac: Mat, jac_partials: NDArray[np.float64], theta: Sequence[InertialParams]) -> NDArray[Any]:
    z = block_spatial_inertia(theta)
    zj = z @ jac
    return np.stack([dj.T @ zj + zj.T @ dj for dj in jac_partials])


def _christoffel_from(mass_partials: NDArray[np.float64]) -> NDArray[np.float64]:
    # mass_partials[i, a, b] = dM[a, b]/dq_i; gamma[i, j, k]
    d = mass_partials
    return 0.5 * (np.transpose(d, (0, 2, 1)) + np.transpose(d, (2, 0, 1)) - np.transpose(d, (1, 2, 0)))


def _coriolis_from(gamma: NDArray[np.float64], qd: Vec) -> Mat:
    return np.einsum("ijk,i->kj", gamma, qd)


# --- public operations ------------------------------------------------------


def mass_matrix(chain: Chain, q: ArrayLike, theta: Sequence[InertialParams]) -> Mat:
    """``J^T Z(Theta) J``."""
    _, jac = pose_and_jacobian(chain, chain.coordinates(q))
    return _mass_from(np.asarray(jac, dtype=float), _theta(chain, theta))


def mass_matrix_partials(chain: Chain, q: ArrayLike, theta: Sequence[InertialParams]) -> NDArray[np.float64]:
    """``dM/dq_i`` stacked along the first axis."""
    diff = _differentials(chain, chain.coordinates(q))
    return _mass_partials_from(diff.jac, diff.jac_partials, _theta(chain, theta))


def christoffel(chain: Chain, q: ArrayLike, theta: Sequence[InertialParams]) -> NDArray[np.float64]:
    """Christoffel symbols of the first kind, ``gamma[i, j, k]``."""
    return _christoffel_from(mass_matrix_partials(chain, q, theta))


def coriolis(chain: Chain, q: ArrayLike, qd: ArrayLike, theta: Sequence[InertialParams]) -> Mat:
    """``C[k, j] = sum_i gamma[i, j, k] qd_i``."""
    return _coriolis_from(christoffel(chain, q, theta), _velocity(chain, "qd", qd))


def potential_energy(chain: Chain, q: ArrayLike, theta: Sequence[InertialParams]) -> Any:
    """``g^T sum_l (m_l z_l + R_l h_l)``; dual in, dual out."""
    pose, _ = pose_and_jacobian(chain, chain.coordinates(q))
    return _potential_from_pose(chain.gravity, pose, _theta(chain, theta))


def gravity(chain: Chain, q: ArrayLike, theta: Sequence[InertialParams]) -> Vec:
    """Gradient of the potential energy."""
    params = _theta(chain, theta)
    return dual.partials(lambda qq: potential_energy(chain, qq, params), dual.primal(chain.coordinates(q)))


def unit_potentials(chain: Chain, q: ArrayLike) -> NDArray[Any]:
    """Potential of each unit parameter basis element; ``U = unit_potentials . Theta``."""
    pose, _ = pose_and_jacobian(chain, chain.coordinates(q))
    return _unit_potentials_from_pose(chain.gravity, pose)


def q_block(chain: Chain, q: ArrayLike) -> Mat:
    """Block diagonal of ``diag(I3, -S A33(R_l) T)`` over bodies (6N x 12N)."""
    pose, _ = pose_and_jacobian(chain, chain.coordinates(q))
    return _q_block_from(pose)


def _q_block_from(pose: Pose) -> Mat:
    blocks = []
    for r in pose.orientations:
        block = np.zeros((6, FLOW_SIZE))
        block[:3, :3] = np.eye(3)
        block[3:, 3:] = -_S @ block_replicate(np.asarray(r, dtype=float)) @ _T
        blocks.append(block)
    return np.asarray(scipy.linalg.block_diag(*blocks), dtype=float)


def flow_force(chain: Chain, q: ArrayLike, psi: ArrayLike) -> NDArray[Any]:
    """``J^T Q Psi``; dual in, dual out."""
    pose, jac = pose_and_jacobian(chain, chain.coordinates(q))
    return jac.T @ _q_times_psi(pose, _psi(chain, psi))


def h_matrix(chain: Chain, q: ArrayLike, psi: ArrayLike) -> Mat:
    """Skew-symmetric flow coupling ``D - D^T`` with ``D = d(J^T Q Psi)/dq``."""
    vec = _psi(chain, psi)
    if not np.any(vec):
        return np.zeros((chain.n_dof, chain.n_dof))
    d = dual.partials(lambda qq: flow_force(chain, qq, vec), dual.primal(chain.coordinates(q))).T
    return d - d.T


def param_rate_matrix(chain: Chain, q: ArrayLike, theta_dot: Sequence[InertialParams]) -> Mat:
    """``M(q, Theta_dot)``: the mass matrix evaluated at the parameter rates."""
    return mass_matrix(chain, q, theta_dot)


def mass_matrix_rate(
    chain: Chain,
    q: ArrayLike,
    qd: ArrayLike,
    theta: Sequence[InertialParams],
    theta_dot: Sequence[InertialParams],
) -> Mat:
    """Total time derivative ``sum_i dM/dq_i qd_i + M(q, Theta_dot)``."""
    rates = _velocity(chain, "qd", qd)
    partials = mass_matrix_partials(chain, q, theta)
    return np.einsum("iab,i->ab", partials, rates) + param_rate_matrix(chain, q, theta_dot)


@dataclass(frozen=True, eq=False)
class DynamicsTerms:
    """All terms of the equation of motion at one state.

    ``mass`` M, ``coriolis`` C, ``gravity`` G, ``flow_coupling`` H,
    ``param_rate`` M(q, Theta_dot), ``q_block`` Q(q), ``jq`` J^T Q, ``psi``,
    ``psi_dot`` and ``nu``.
    """

    q: Vec
    qd: Vec
    mass: Mat
    coriolis: Mat
    gravity: Vec
    flow_coupling: Mat
    param_rate: Mat
    q_block: Mat
    jq: Mat
    psi: Vec
    psi_dot: Vec
    nu: float
    variant: ModelVariant = ModelVariant.GENERALIZED

    @property
    def flow_acceleration_force(self) -> Vec:
        """``J^T Q Psi_dot``."""
        return self.jq @ self.psi_dot

    def generalized_force(self, qdd: ArrayLike) -> Vec:
        """Left side of the equation of motion moved to ``tau + w`` form."""
        acc = np.asarray(qdd, dtype=float).reshape(-1)
        damping = self.coriolis + self.param_rate + self.flow_coupling
        return self.mass @ acc + damping @ self.qd + self.gravity + self.flow_acceleration_force


def assemble(
    chain: Chain,
    q: ArrayLike,
    qd: ArrayLike,
    theta: Sequence[InertialParams],
    theta_dot: Sequence[InertialParams],
    flow: FlowState | None = None,
    *,
    variant: ModelVariant = ModelVariant.GENERALIZED,
) -> DynamicsTerms:
    """Evaluate every term of the equation of motion at one state."""
    coords = dual.primal(chain.coordinates(q))
    rates = _velocity(chain, "qd", qd)
    params = _theta(chain, theta)
    params_dot = _theta(chain, theta_dot)
    state = flow if flow is not None else FlowState.still(chain.n_bodies)
    psi = _psi(chain, state.psi)
    psi_dot = _psi(chain, state.psi_dot)
    keep_flow = variant is ModelVariant.GENERALIZED
    diff = _differentials(chain, coords, params, psi if keep_flow else None)
    assert diff.grad_potential is not None
    mass = _mass_from(diff.jac, params)
    coriolis_matrix = _coriolis_from(_christoffel_from(_mass_partials_from(diff.jac, diff.jac_partials, params)), rates)
    if variant is ModelVariant.CLASSICAL:
        drift = np.zeros_like(mass)
    else:
        drift = _mass_from(diff.jac, params_dot)
    if keep_flow and diff.flow_jacobian is not None:
        coupling = diff.flow_jacobian - diff.flow_jacobian.T
    else:
        coupling = np.zeros_like(mass)
        psi, psi_dot = np.zeros_like(psi), np.zeros_like(psi_dot)
    blocks = _q_block_from(diff.pose)
    return DynamicsTerms(
        q=coords,
        qd=rates,
        mass=mass,
        coriolis=coriolis_matrix,
        gravity=diff.grad_potential,
        flow_coupling=coupling,
        param_rate=drift,
        q_block=blocks,
        jq=diff.jac.T @ blocks,
        psi=psi,
        psi_dot=psi_dot,
        nu=state.nu if keep_flow else 0.0,
        variant=variant,
    )


def forward_dynamics(terms: DynamicsTerms, tau: ArrayLike, w: ArrayLike | None = None) -> Vec:
    """Solve the equation of motion for the accelerations by Cholesky factorization."""
    n = terms.q.size
    torque = require_finite("tau", tau).reshape(-1)
    disturbance = np.zeros(n) if w is None else require_finite("w", w).reshape(-1)
    if torque.size != n or disturbance.size != n:
        msg = f"tau and w must have {n} entries"
        raise InvalidInputError(msg)
    smallest = float(symmetric_eigenvalues(terms.mass)[0])
    if smallest <= POSITIVE_DEFINITE_FLOOR:
        logger.error("singular mass matrix: lambda_min=%.3e at q=%s", smallest, terms.q.tolist())
        raise SingularMassMatrixError(smallest, terms.q)
    # generalized_force at zero acceleration already carries J^T Q Psi_dot
    rhs = torque + disturbance - terms.generalized_force(np.zeros(n))
    try:
        factor = scipy.linalg.cho_factor(terms.mass)
    except np.linalg.LinAlgError:
        raise SingularMassMatrixError(smallest, terms.q) from None
    return np.asarray(scipy.linalg.cho_solve(factor, rhs), dtype=float)


@dataclass(frozen=True, eq=False)
class Regressor:
    """``M a + C v + G = matrix @ Theta`` with per-body column blocks of ten."""

    matrix: Mat
    n_bodies: int

    def body(self, index: int) -> Mat:
        return self.matrix[:, PARAMS_PER_BODY * index : PARAMS_PER_BODY * (index + 1)]

    def apply(self, theta: Sequence[InertialParams]) -> Vec:
        return self.matrix @ stack_params(theta)


def regressor(chain: Chain, q: ArrayLike, qd: ArrayLike, v: ArrayLike, a: ArrayLike) -> Regressor:
    """Columns ``M(q, e_h) a + C(q, qd, e_h) v + G(q, e_h)`` for every unit basis ``e_h``."""
    coords = dual.primal(chain.coordinates(q))
    rates = _velocity(chain, "qd", qd)
    vel = _velocity(chain, "v", v)
    acc = _velocity(chain, "a", a)
    diff = _differentials(chain, coords)
    gravity_columns = dual.partials(lambda qq: unit_potentials(chain, qq), coords).T
    count = PARAMS_PER_BODY * chain.n_bodies
    out = np.empty((chain.n_dof, count))
    for h in range(count):
        unit = basis_params(chain.n_bodies, h)
        m_h = _mass_from(diff.jac, unit)
        c_h = _coriolis_from(_christoffel_from(_mass_partials_from(diff.jac, diff.jac_partials, unit)), rates)
        out[:, h] = m_h @ acc + c_h @ vel + gravity_columns[:, h]
    return Regressor(out, chain.n_bodies)


def kinetic_energy_terms(
    chain: Chain, q: ArrayLike, qd: ArrayLike, theta: Sequence[InertialParams], flow: FlowState
) -> tuple[float, float, float]:
    """``(1/2 qd^T M qd, 1/2 nu, qd^T J^T Q Psi)``."""
    rates = _velocity(chain, "qd", qd)
    pose, jac = pose_and_jacobian(chain, chain.coordinates(q))
    jac = np.asarray(jac, dtype=float)
    quadratic = 0.5 * float(rates @ _mass_from(jac, _theta(chain, theta)) @ rates)
    cross = float(rates @ (jac.T @ _q_times_psi(pose, _psi(chain, flow.psi))))
    return quadratic, 0.5 * flow.nu, cross


def lagrangian(
    chain: Chain, q: ArrayLike, qd: ArrayLike, theta: Sequence[InertialParams], flow: FlowState
) -> float:
    """Kinetic minus potential energy."""
    quadratic, offset, cross = kinetic_energy_terms(chain, q, qd, theta, flow)
    return quadratic + offset + cross - float(potential_energy(chain, q, theta))


class QPath:
    """Twice differentiable coordinate path ``q(t)``."""

    def __init__(
        self,
        position: Callable[[float], ArrayLike],
        velocity: Callable[[float], ArrayLike],
        acceleration: Callable[[float], ArrayLike],
    ) -> None:
        self._position = position
        self._velocity = velocity
        self._acceleration = acceleration

    @classmethod
    def from_samples(cls, times: ArrayLike, positions: ArrayLike) -> QPath:
        """Cubic spline through sampled coordinates."""
        spline = CubicSpline(np.asarray(times, dtype=float), np.asarray(positions, dtype=float), axis=0)
        return cls(spline, lambda t: spline(t, 1), lambda t: spline(t, 2))

    def position(self, t: float) -> Vec:
        return np.asarray(self._position(t), dtype=float).reshape(-1)

    def velocity(self, t: float) -> Vec:
        return np.asarray(self._velocity(t), dtype=float).reshape(-1)

    def acceleration(self, t: float) -> Vec:
        return np.asarray(self._acceleration(t), dtype=float).reshape(-1)


def lagrangian_oracle(
    chain: Chain,
    bodies: Sequence[BodyModel],
    path: QPath,
    t: float,
    *,
    time_step: float = ORACLE_TIME_STEP,
    coordinate_step: float = ORACLE_COORDINATE_STEP,
    velocity_step: float = ORACLE_VELOCITY_STEP,
) -> Vec:
    """``d/dt dL/dqd - dL/dq`` along ``path`` by central finite differences.

    The result is the generalized force ``tau + w`` the path requires; the
    assembled equation of motion must reproduce it.
    """
    if len(bodies) != chain.n_bodies:
        msg = f"chain has {chain.n_bodies} bodies but {len(bodies)} body models were given"
        raise InvalidInputError(msg)
    n = chain.n_dof

    def frozen_lagrangian(s: float) -> Callable[[Vec, Vec], float]:
        theta = body_params(bodies, s)
        flow = flow_state(bodies, s, with_rate=False)
        return lambda qq, vv: lagrangian(chain, qq, vv, theta, flow)

    def momentum(s: float) -> Vec:
        lag = frozen_lagrangian(s)
        q, qd = path.position(s), path.velocity(s)
        out = np.empty(n)
        for k in range(n):
            step = np.zeros(n)
            step[k] = velocity_step
            out[k] = (lag(q, qd + step) - lag(q, qd - step)) / (2.0 * velocity_step)
        return out

    momentum_rate = (momentum(t + time_step) - momentum(t - time_step)) / (2.0 * time_step)
    lag = frozen_lagrangian(t)
    q, qd = path.position(t), path.velocity(t)
    slope = np.empty(n)
    for k in range(n):
        delta = coordinate_step * max(1.0, abs(float(q[k])))
        step = np.zeros(n)
        step[k] = delta
        slope[k] = (lag(q + step, qd) - lag(q - step, qd)) / (2.0 * delta)
    return momentum_rate - slope


__all__ = [
    "DynamicsTerms",
    "ModelVariant",
    "QPath",
    "Regressor",
    "assemble",
    "christoffel",
    "coriolis",
    "flow_force",
    "forward_dynamics",
    "gravity",
    "h_matrix",
    "kinetic_energy_terms",
    "lagrangian",
    "lagrangian_oracle",
    "mass_matrix",
    "mass_matrix_partials",
    "mass_matrix_rate",
    "param_rate_matrix",
    "potential_energy",
    "q_block",
    "regressor",
    "unit_potentials",
]
