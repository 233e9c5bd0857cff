"""Serial chains: forward map, Jacobian, its partials and spectral scans.

Body frames sit at the joints. Each body's pose is its origin ``z`` and three
angles ``phi`` with ``rotation(phi)`` its orientation; the angular velocity is
taken to be the angle rate. That equality is exact for two chain classes,
which are the only ones accepted:

* prismatic-only chains with arbitrary constant offset rotations;
* chains whose revolute axes all lie along one world coordinate axis ``e_k``,
  with every offset rotation fixing ``e_k`` (planar-style chains, offsets
  along ``e_k`` allowed).

All evaluation functions accept float or dual coordinates.
"""
# this_file: src/twat_robodyn/kinematics.py

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from twat_robodyn import dual
from twat_robodyn.algebra import (
    require_finite,
    rotation,
    rotation_angles,
    skew,
    symmetric_eigenvalues,
)
from twat_robodyn.errors import InvalidInputError, UnsupportedChainError

logger = logging.getLogger(__name__)

AXIS_TOLERANCE = 1e-9
NORMALITY_TOLERANCE = 1e-9


class JointKind(str, Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"
    FIXED = "fixed"


@dataclass(frozen=True, eq=False)
class Joint:
    """A joint and the constant offset from the previous joint frame.

    ``offset`` is expressed in the previous joint frame, ``offset_angles`` give
    the fixed rotation applied after it and ``axis`` is a unit vector in the
    resulting frame. FIXED joints carry a body but no coordinate.
    """

    kind: JointKind
    axis: NDArray[np.float64] = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    offset: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    offset_angles: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        try:
            kind = JointKind(self.kind)
        except ValueError:
            msg = f"unknown joint kind {self.kind!r}; expected one of {[k.value for k in JointKind]}"
            raise InvalidInputError(msg) from None
        axis = require_finite("axis", self.axis).reshape(-1)
        offset = require_finite("offset", self.offset).reshape(-1)
        angles = require_finite("offset_angles", self.offset_angles).reshape(-1)
        for name, vec in (("axis", axis), ("offset", offset), ("offset_angles", angles)):
            if vec.shape != (3,):
                msg = f"joint {name} must have 3 entries, got {vec.size}"
                raise InvalidInputError(msg)
        if kind is not JointKind.FIXED and abs(float(np.linalg.norm(axis)) - 1.0) > AXIS_TOLERANCE:
            msg = f"joint axis must be a unit vector, got norm {np.linalg.norm(axis):.6g}"
            raise InvalidInputError(msg)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "offset_angles", angles)

    @cached_property
    def offset_rotation(self) -> NDArray[np.float64]:
        return np.asarray(rotation(self.offset_angles), dtype=float)

    @property
    def actuated(self) -> bool:
        return self.kind is not JointKind.FIXED


def _coordinate_axis(vector: NDArray[np.float64]) -> int | None:
    """Index k when ``vector`` is +-e_k, else None."""
    k = int(np.argmax(np.abs(vector)))
    target = np.zeros(3)
    target[k] = math.copysign(1.0, vector[k])
    return k if np.allclose(vector, target, atol=AXIS_TOLERANCE) else None


def _angle_about(r: NDArray[np.float64], k: int) -> float:
    i, j = (k + 1) % 3, (k + 2) % 3
    return math.atan2(r[j, i], r[i, i])


@dataclass(frozen=True, eq=False)
class Chain:
    """A serial chain; body ``l`` is attached after joint ``l``.

    ``gravity`` is the field vector ``g`` of the potential ``g^T sum(m z + R h)``.
    """

    joints: tuple[Joint, ...]
    gravity: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    plane_axis: int | None = field(init=False, default=None)
    _coordinate: tuple[int, ...] = field(init=False, default=(), repr=False)
    _offset_angle: tuple[float, ...] = field(init=False, default=(), repr=False)
    _axis_sign: tuple[float, ...] = field(init=False, default=(), repr=False)

    def __post_init__(self) -> None:
        joints = tuple(self.joints)
        if not joints:
            msg = "a chain needs at least one joint"
            raise InvalidInputError(msg)
        gravity = require_finite("gravity", self.gravity).reshape(-1)
        if gravity.shape != (3,):
            msg = f"gravity must have 3 entries, got {gravity.size}"
            raise InvalidInputError(msg)
        coordinate, counter = [], 0
        for joint in joints:
            coordinate.append(counter if joint.actuated else -1)
            counter += int(joint.actuated)
        if counter == 0:
            msg = "a chain needs at least one revolute or prismatic joint"
            raise InvalidInputError(msg)
        plane_axis, offset_angle, axis_sign = self._classify(joints)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "gravity", gravity)
        object.__setattr__(self, "plane_axis", plane_axis)
        object.__setattr__(self, "_coordinate", tuple(coordinate))
        object.__setattr__(self, "_offset_angle", offset_angle)
        object.__setattr__(self, "_axis_sign", axis_sign)

    @staticmethod
    def _classify(joints: tuple[Joint, ...]) -> tuple[int | None, tuple[float, ...], tuple[float, ...]]:
        revolute = [j for j in joints if j.kind is JointKind.REVOLUTE]
        if not revolute:
            return None, tuple(0.0 for _ in joints), tuple(0.0 for _ in joints)
        k = _coordinate_axis(revolute[0].axis)
        if k is None:
            msg = "revolute axes must lie along a coordinate axis of the joint frame"
            raise UnsupportedChainError(msg)
        e_k = np.zeros(3)
        e_k[k] = 1.0
        angles, signs = [], []
        for index, joint in enumerate(joints):
            r = joint.offset_rotation
            if not np.allclose(r @ e_k, e_k, atol=AXIS_TOLERANCE):
                msg = (
                    f"joint {index}: offset rotation must keep axis e{k + 1} fixed in a chain "
                    "with revolute joints; general 3D orientation composition is not supported"
                )
                raise UnsupportedChainError(msg)
            angles.append(_angle_about(r, k))
            sign = 0.0
            if joint.kind is JointKind.REVOLUTE:
                if _coordinate_axis(joint.axis) != k:
                    msg = f"joint {index}: revolute axis must be parallel to e{k + 1} like the first revolute joint"
                    raise UnsupportedChainError(msg)
                sign = math.copysign(1.0, joint.axis[k])
            signs.append(sign)
        return k, tuple(angles), tuple(signs)

    @property
    def n_bodies(self) -> int:
        return len(self.joints)

    @property
    def n_dof(self) -> int:
        return sum(1 for j in self.joints if j.actuated)

    @property
    def prismatic_coordinates(self) -> tuple[int, ...]:
        return tuple(c for j, c in zip(self.joints, self._coordinate) if j.kind is JointKind.PRISMATIC)

    @property
    def has_revolute(self) -> bool:
        return self.plane_axis is not None

    def coordinates(self, q: ArrayLike) -> NDArray[Any]:
        """Validate a coordinate vector; keeps dual entries."""
        arr = np.asarray(q)
        arr = arr.reshape(-1) if arr.dtype == object else arr.astype(float).reshape(-1)
        if arr.size != self.n_dof:
            msg = f"expected {self.n_dof} joint coordinates, got {arr.size}"
            raise InvalidInputError(msg)
        require_finite("q", arr)
        return arr


@dataclass(frozen=True, eq=False)
class Pose:
    """Per-body origins ``z`` (N x 3), angles ``phi`` (N x 3) and orientations (N x 3 x 3)."""

    positions: NDArray[Any]
    angles: NDArray[Any]
    orientations: NDArray[Any]

    def as_vector(self) -> NDArray[Any]:
        """(z_1, phi_1, ..., z_N, phi_N)."""
        return np.concatenate([np.concatenate((z, p)) for z, p in zip(self.positions, self.angles)])


@dataclass(frozen=True)
class _Frames:
    pose: Pose
    joint_axes: list[NDArray[Any]]
    is_dual: bool


def _frames(chain: Chain, q: ArrayLike) -> _Frames:
    coords = chain.coordinates(q)
    k = chain.plane_axis
    position: NDArray[Any] = np.zeros(3)
    orientation: NDArray[Any] = np.eye(3)
    theta: Any = 0.0
    positions, angles, orientations, axes = [], [], [], []
    for index, joint in enumerate(chain.joints):
        position = position + orientation @ joint.offset
        if k is None:
            orientation = orientation @ joint.offset_rotation
        else:
            theta = theta + chain._offset_angle[index]
            orientation = _planar_rotation(theta, k)
        axis_world = orientation @ joint.axis
        c = chain._coordinate[index]
        if joint.kind is JointKind.PRISMATIC:
            position = position + axis_world * coords[c]
        elif joint.kind is JointKind.REVOLUTE:
            assert k is not None
            theta = theta + chain._axis_sign[index] * coords[c]
            orientation = _planar_rotation(theta, k)
        if k is None:
            phi: NDArray[Any] = rotation_angles(orientation)
        else:
            phi = np.array([theta if i == k else 0.0 for i in range(3)])
        positions.append(position)
        angles.append(phi)
        orientations.append(orientation)
        axes.append(axis_world)
    pose = Pose(np.array(positions), np.array(angles), np.array(orientations))
    return _Frames(pose, axes, coords.dtype == object)


def _planar_rotation(theta: Any, k: int) -> NDArray[Any]:
    return rotation(np.array([theta if i == k else 0.0 for i in range(3)]))


def forward_map(chain: Chain, q: ArrayLike) -> Pose:
    """Poses of all body frames at coordinates ``q``."""
    return _frames(chain, q).pose


def pose_and_jacobian(chain: Chain, q: ArrayLike) -> tuple[Pose, NDArray[Any]]:
    """Forward map and Jacobian from one pass over the chain."""
    frames = _frames(chain, q)
    return frames.pose, _jacobian_from(chain, frames)


def jacobian(chain: Chain, q: ArrayLike) -> NDArray[Any]:
    """6N x n Jacobian stacking ``(v_l; omega_l)`` per body."""
    return _jacobian_from(chain, _frames(chain, q))


def _jacobian_from(chain: Chain, frames: _Frames) -> NDArray[Any]:
    z = frames.pose.positions
    dtype = object if frames.is_dual else float
    out = np.zeros((6 * chain.n_bodies, chain.n_dof), dtype=dtype)
    for body in range(chain.n_bodies):
        rows = slice(6 * body, 6 * body + 3)
        for j in range(body + 1):
            joint, c = chain.joints[j], chain._coordinate[j]
            u = frames.joint_axes[j]
            if joint.kind is JointKind.REVOLUTE:
                out[rows, c] = skew(u) @ (z[body] - z[j])
                out[6 * body + 3 : 6 * body + 6, c] = u
            elif joint.kind is JointKind.PRISMATIC:
                out[rows, c] = u
    return out


def jacobian_partials(chain: Chain, q: ArrayLike) -> NDArray[np.float64]:
    """Exact ``dJ/dq_i`` stacked along the first axis (n x 6N x n)."""
    coords = dual.primal(chain.coordinates(q))
    if not chain.has_revolute:
        return np.zeros((chain.n_dof, 6 * chain.n_bodies, chain.n_dof))
    return dual.partials(lambda qq: jacobian(chain, qq), coords)


def jacobian_gram(chain: Chain, q: ArrayLike) -> NDArray[np.float64]:
    j = np.asarray(jacobian(chain, q), dtype=float)
    return j.T @ j


# --- grids and spectral scans ----------------------------------------------


def uniform_grid(lower: ArrayLike, upper: ArrayLike, points: int) -> NDArray[np.float64]:
    """Cartesian grid with ``points`` samples per coordinate."""
    lo = require_finite("lower", lower).reshape(-1)
    hi = require_finite("upper", upper).reshape(-1)
    if lo.shape != hi.shape or lo.size == 0 or points < 1:
        msg = "grid bounds must be non-empty vectors of equal length and points >= 1"
        raise InvalidInputError(msg)
    if np.any(hi < lo):
        msg = "grid upper bounds must not be below lower bounds"
        raise InvalidInputError(msg)
    axes = [np.linspace(a, b, points) if points > 1 else np.array([a]) for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def random_grid(lower: ArrayLike, upper: ArrayLike, count: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """``count`` coordinates drawn uniformly from the box."""
    lo = require_finite("lower", lower).reshape(-1)
    hi = require_finite("upper", upper).reshape(-1)
    if lo.shape != hi.shape or count < 1:
        msg = "random grid needs matching bounds and count >= 1"
        raise InvalidInputError(msg)
    return lo + (hi - lo) * rng.random((count, lo.size))


@dataclass(frozen=True, eq=False)
class JacobianSpectrum:
    """Sampled extremes of the spectrum of ``J^T J`` over a set of coordinates."""

    inf_lambda_min: float
    sup_lambda_max: float
    argmin_q: NDArray[np.float64]
    argmax_q: NDArray[np.float64]
    n_points: int
    prismatic_dependence: bool
    tolerance: float = NORMALITY_TOLERANCE

    @property
    def normal(self) -> bool:
        return self.inf_lambda_min > self.tolerance

    @property
    def upper_bounded(self) -> bool:
        # J is affine in each prismatic coordinate, so it stays bounded only when it ignores them
        return math.isfinite(self.sup_lambda_max) and not self.prismatic_dependence

    @property
    def sigma_max_sq(self) -> float:
        return self.sup_lambda_max


def merge_spectra(first: JacobianSpectrum, second: JacobianSpectrum) -> JacobianSpectrum:
    """Combine two partial scans."""
    low = first if first.inf_lambda_min <= second.inf_lambda_min else second
    high = first if first.sup_lambda_max >= second.sup_lambda_max else second
    return JacobianSpectrum(
        inf_lambda_min=low.inf_lambda_min,
        sup_lambda_max=high.sup_lambda_max,
        argmin_q=low.argmin_q,
        argmax_q=high.argmax_q,
        n_points=first.n_points + second.n_points,
        prismatic_dependence=first.prismatic_dependence or second.prismatic_dependence,
        tolerance=min(first.tolerance, second.tolerance),
    )


def _spectrum_at(chain: Chain, q: NDArray[np.float64]) -> tuple[float, float]:
    eig = symmetric_eigenvalues(jacobian_gram(chain, q))
    return float(eig[0]), float(eig[-1])


def _depends_on_prismatic(chain: Chain, q: NDArray[np.float64]) -> bool:
    if not chain.has_revolute:
        return False
    for p in chain.prismatic_coordinates:
        direction = np.zeros(chain.n_dof)
        direction[p] = 1.0
        _, slope = dual.directional(lambda qq: jacobian(chain, qq), q, direction)
        if np.max(np.abs(slope)) > NORMALITY_TOLERANCE:
            return True
    return False


def spectral_scan(
    chain: Chain,
    grid: ArrayLike,
    *,
    restarts: int = 10,
    rng: np.random.Generator | None = None,
    tolerance: float = NORMALITY_TOLERANCE,
) -> JacobianSpectrum:
    """Sampled ``inf lambda_min(J^T J)`` and ``sup lambda_max(J^T J)``.

    The grid is evaluated exhaustively, then ``restarts`` local Nelder-Mead
    descents on ``lambda_min`` start from random grid points and stay inside
    the box the grid spans.
    """
    points = require_finite("grid", grid)
    points = np.atleast_2d(points)
    if points.size == 0:
        msg = "spectral scan needs a non-empty grid"
        raise InvalidInputError(msg)
    if points.shape[1] != chain.n_dof:
        msg = f"grid points must have {chain.n_dof} coordinates, got {points.shape[1]}"
        raise InvalidInputError(msg)
    lows, highs = np.empty(len(points)), np.empty(len(points))
    for i, q in enumerate(points):
        lows[i], highs[i] = _spectrum_at(chain, q)
    kmin, kmax = int(np.argmin(lows)), int(np.argmax(highs))
    spectrum = JacobianSpectrum(
        inf_lambda_min=float(lows[kmin]),
        sup_lambda_max=float(highs[kmax]),
        argmin_q=points[kmin].copy(),
        argmax_q=points[kmax].copy(),
        n_points=len(points),
        prismatic_dependence=any(_depends_on_prismatic(chain, q) for q in points),
        tolerance=tolerance,
    )
    generator = rng if rng is not None else np.random.default_rng(0)
    lo, hi = points.min(axis=0), points.max(axis=0)
    for start in generator.choice(len(points), size=restarts, replace=True) if restarts > 0 else []:
        result = minimize(
            lambda qq: _spectrum_at(chain, np.asarray(qq, dtype=float))[0],
            points[start],
            method="Nelder-Mead",
            bounds=list(zip(lo, hi)),
            options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": 200 * chain.n_dof},
        )
        q_found = np.clip(np.asarray(result.x, dtype=float), lo, hi)
        low, high = _spectrum_at(chain, q_found)
        partial = JacobianSpectrum(low, high, q_found, q_found, 1, _depends_on_prismatic(chain, q_found), tolerance)
        spectrum = merge_spectra(spectrum, partial)
    logger.debug(
        "spectral scan over %d points: inf=%.6g sup=%.6g normal=%s bounded=%s",
        spectrum.n_points,
        spectrum.inf_lambda_min,
        spectrum.sup_lambda_max,
        spectrum.normal,
        spectrum.upper_bounded,
    )
    return spectrum


__all__ = [
    "Chain",
    "JacobianSpectrum",
    "Joint",
    "JointKind",
    "Pose",
    "forward_map",
    "jacobian",
    "jacobian_gram",
    "jacobian_partials",
    "merge_spectra",
    "pose_and_jacobian",
    "random_grid",
    "spectral_scan",
    "uniform_grid",
]
