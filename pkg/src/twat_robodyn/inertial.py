"""Inertial parameters, pseudo-inertia and consistency tests.

A body's ten inertial parameters are its mass, first moment of mass and
rotational inertia about the body-frame origin. They are physically realizable
by a nonnegative mass density exactly when the 4x4 pseudo-inertia
``[[Sigma, h], [h^T, m]]`` with ``Sigma = tr(I)/2 * I3 - I`` is positive
definite.
"""
# this_file: src/twat_robodyn/inertial.py

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from twat_robodyn.algebra import require_finite, skew, symmetric_eigenvalues
from twat_robodyn.errors import InvalidInputError

logger = logging.getLogger(__name__)

BOUNDARY_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12
PARAMS_PER_BODY = 10

# (row, col) of the inertia entries in the 10-vector after m, h1, h2, h3
_INERTIA_LAYOUT = ((0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2))


@dataclass(frozen=True, eq=False)
class InertialParams:
    """Mass [kg], first moment [kg m] and inertia about the frame origin [kg m^2]."""

    mass: float
    first_moment: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    inertia: NDArray[np.float64] = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self) -> None:
        mass = float(require_finite("mass", self.mass))
        h = require_finite("first_moment", self.first_moment).reshape(-1)
        inertia = require_finite("inertia", self.inertia)
        if h.shape != (3,):
            msg = f"first_moment must have 3 entries, got {h.size}"
            raise InvalidInputError(msg)
        if inertia.shape != (3, 3):
            msg = f"inertia must be 3x3, got {inertia.shape}"
            raise InvalidInputError(msg)
        scale = max(1.0, float(np.max(np.abs(inertia))))
        if np.max(np.abs(inertia - inertia.T)) > SYMMETRY_TOLERANCE * scale:
            msg = "inertia must be symmetric"
            raise InvalidInputError(msg)
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "first_moment", h)
        object.__setattr__(self, "inertia", 0.5 * (inertia + inertia.T))

    @classmethod
    def zeros(cls) -> InertialParams:
        return cls(0.0)

    @classmethod
    def unit_ball(cls) -> InertialParams:
        """m = 1, h = 0, I = I3: the parameters whose spatial inertia is the identity."""
        return cls(1.0, np.zeros(3), np.eye(3))

    @classmethod
    def solid_sphere(cls, mass: float, radius: float) -> InertialParams:
        """Uniform solid sphere centred on the frame origin."""
        if radius < 0 or not math.isfinite(radius):
            msg = f"radius must be a finite nonnegative number, got {radius}"
            raise InvalidInputError(msg)
        return cls(mass, np.zeros(3), 0.4 * mass * radius**2 * np.eye(3))

    @classmethod
    def point_mass(cls, mass: float, position: ArrayLike) -> InertialParams:
        """A single mass concentrated at ``position``."""
        x = require_finite("position", position).reshape(3)
        s = skew(x)
        return cls(mass, mass * x, mass * (s.T @ s))

    @classmethod
    def from_vector(cls, vector: ArrayLike) -> InertialParams:
        """Inverse of :meth:`as_vector`."""
        v = require_finite("parameter vector", vector).reshape(-1)
        if v.size != PARAMS_PER_BODY:
            msg = f"parameter vector must have {PARAMS_PER_BODY} entries, got {v.size}"
            raise InvalidInputError(msg)
        inertia = np.zeros((3, 3))
        for value, (i, j) in zip(v[4:], _INERTIA_LAYOUT):
            inertia[i, j] = inertia[j, i] = value
        return cls(float(v[0]), v[1:4], inertia)

    def as_vector(self) -> NDArray[np.float64]:
        """(m, h1, h2, h3, I11, I22, I33, I12, I23, I13)."""
        tail = [self.inertia[i, j] for i, j in _INERTIA_LAYOUT]
        return np.concatenate(([self.mass], self.first_moment, tail))

    def center_of_mass(self) -> NDArray[np.float64]:
        """h / m; undefined unless the mass is positive."""
        if self.mass <= 0.0:
            msg = f"center of mass needs positive mass, got {self.mass}"
            raise InvalidInputError(msg)
        return self.first_moment / self.mass

    def allclose(self, other: InertialParams, *, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_vector(), other.as_vector(), rtol=0.0, atol=atol))

    def __add__(self, other: InertialParams) -> InertialParams:
        return InertialParams(
            self.mass + other.mass, self.first_moment + other.first_moment, self.inertia + other.inertia
        )

    def __sub__(self, other: InertialParams) -> InertialParams:
        return self + (-1.0) * other

    def __mul__(self, factor: float) -> InertialParams:
        k = float(factor)
        return InertialParams(k * self.mass, k * self.first_moment, k * self.inertia)

    __rmul__ = __mul__

    def __neg__(self) -> InertialParams:
        return (-1.0) * self

    def __repr__(self) -> str:
        return f"InertialParams({np.array2string(self.as_vector(), precision=6)})"


def stack_params(theta: Sequence[InertialParams]) -> NDArray[np.float64]:
    """Concatenate per-body 10-vectors into the 10N vector."""
    if not theta:
        return np.zeros(0)
    return np.concatenate([p.as_vector() for p in theta])


def unstack_params(vector: ArrayLike) -> tuple[InertialParams, ...]:
    """Split a 10N vector into per-body parameters."""
    v = np.asarray(vector, dtype=float).reshape(-1)
    if v.size % PARAMS_PER_BODY:
        msg = f"stacked parameter vector length {v.size} is not a multiple of {PARAMS_PER_BODY}"
        raise InvalidInputError(msg)
    return tuple(InertialParams.from_vector(chunk) for chunk in v.reshape(-1, PARAMS_PER_BODY))


def basis_params(n_bodies: int, index: int) -> tuple[InertialParams, ...]:
    """Unit basis element ``index`` of the 10N parameter space."""
    e = np.zeros(n_bodies * PARAMS_PER_BODY)
    e[index] = 1.0
    return unstack_params(e)


def pseudo_inertia(p: InertialParams) -> NDArray[np.float64]:
    """4x4 pseudo-inertia ``[[Sigma, h], [h^T, m]]``."""
    sigma = 0.5 * np.trace(p.inertia) * np.eye(3) - p.inertia
    out = np.empty((4, 4))
    out[:3, :3] = sigma
    out[:3, 3] = p.first_moment
    out[3, :3] = p.first_moment
    out[3, 3] = p.mass
    return out


def inverse_pseudo_inertia(pseudo: ArrayLike) -> InertialParams:
    """Recover (m, h, I) from a pseudo-inertia via ``I = tr(Sigma) I3 - Sigma``."""
    m = require_finite("pseudo-inertia", pseudo)
    if m.shape != (4, 4):
        msg = f"pseudo-inertia must be 4x4, got {m.shape}"
        raise InvalidInputError(msg)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOLERANCE * scale:
        msg = "pseudo-inertia must be symmetric"
        raise InvalidInputError(msg)
    sigma = m[:3, :3]
    return InertialParams(m[3, 3], m[:3, 3], np.trace(sigma) * np.eye(3) - sigma)


@dataclass(frozen=True)
class ConsistencyResult:
    """Outcome of a pseudo-inertia definiteness test."""

    consistent: bool
    lambda_min: float
    threshold: float


def check_consistency(p: InertialParams, margin: float = 0.0) -> ConsistencyResult:
    """Physical consistency: smallest pseudo-inertia eigenvalue above ``margin``.

    Eigenvalues within ``BOUNDARY_TOLERANCE`` of zero count as the boundary and
    are reported inconsistent.
    """
    if not math.isfinite(margin) or margin < 0.0:
        msg = f"margin must be finite and nonnegative, got {margin}"
        raise InvalidInputError(msg)
    smallest = float(symmetric_eigenvalues(pseudo_inertia(p))[0])
    threshold = max(margin, BOUNDARY_TOLERANCE)
    return ConsistencyResult(smallest > threshold, smallest, threshold)


@dataclass(frozen=True, eq=False)
class ParamTrajectory:
    """Time samples of every body's parameters, ``params[k][l]`` at ``times[k]``.

    ``rates`` holds the matching parameter time-derivatives when known.
    """

    times: NDArray[np.float64]
    params: tuple[tuple[InertialParams, ...], ...]
    rates: tuple[tuple[InertialParams, ...], ...] | None = None

    def __post_init__(self) -> None:
        times = require_finite("times", self.times).reshape(-1)
        if times.size > 1 and np.any(np.diff(times) <= 0.0):
            msg = "sample times must be strictly increasing"
            raise InvalidInputError(msg)
        params = tuple(tuple(sample) for sample in self.params)
        if len(params) != times.size:
            msg = f"{times.size} times but {len(params)} parameter samples"
            raise InvalidInputError(msg)
        if params and len({len(sample) for sample in params}) != 1:
            msg = "every sample must list the same number of bodies"
            raise InvalidInputError(msg)
        rates = None
        if self.rates is not None:
            rates = tuple(tuple(sample) for sample in self.rates)
            if [len(s) for s in rates] != [len(s) for s in params]:
                msg = "rate samples must match parameter samples"
                raise InvalidInputError(msg)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "rates", rates)

    @property
    def n_samples(self) -> int:
        return int(self.times.size)

    @property
    def n_bodies(self) -> int:
        return len(self.params[0]) if self.params else 0

    @property
    def has_rates(self) -> bool:
        return self.rates is not None

    def body(self, index: int) -> tuple[InertialParams, ...]:
        """Samples of one body over time."""
        return tuple(sample[index] for sample in self.params)


@dataclass(frozen=True, eq=False)
class BodyMargins:
    """Sampled pseudo-inertia spectrum of one body along a trajectory."""

    body: int
    lambda_min_samples: NDArray[np.float64]
    lambda_max_samples: NDArray[np.float64]
    inf_lambda_min: float
    sup_lambda_max: float
    argmin_time: float
    argmax_time: float
    consistent_at_all_samples: bool
    offending_times: tuple[float, ...]
    vanishing_trend: bool
    diverging_trend: bool

    @property
    def uniformly_consistent(self) -> bool:
        return self.consistent_at_all_samples and self.inf_lambda_min > BOUNDARY_TOLERANCE and not self.vanishing_trend

    @property
    def upper_bounded(self) -> bool:
        return math.isfinite(self.sup_lambda_max) and not self.diverging_trend


def _monotone_trend(values: NDArray[np.float64], ratio: float, *, decreasing: bool) -> bool:
    """Strictly monotone second half that moved by more than ``ratio`` from the first sample."""
    if values.size < 3:
        return False
    tail = values[-max(3, values.size // 2) :]
    steps = np.diff(tail)
    first, last = float(values[0]), float(values[-1])
    if decreasing:
        return bool(np.all(steps < 0.0) and last * ratio < first)
    return bool(np.all(steps > 0.0) and first > 0.0 and last > ratio * first)


def trajectory_margins(trajectory: ParamTrajectory, *, trend_ratio: float = 2.0) -> tuple[BodyMargins, ...]:
    """Per-body sampled infimum of lambda_min and supremum of lambda_max of the pseudo-inertia.

    The inf/sup are taken over the supplied samples only. A strictly monotone
    tail that shrinks (grows) by more than ``trend_ratio`` relative to the first
    sample is flagged as a vanishing (diverging) trend.
    """
    if trajectory.n_samples == 0:
        msg = "trajectory has no samples"
        raise InvalidInputError(msg)
    margins = []
    for index in range(trajectory.n_bodies):
        spectra = np.array([symmetric_eigenvalues(pseudo_inertia(p)) for p in trajectory.body(index)])
        lows, highs = spectra[:, 0], spectra[:, -1]
        kmin, kmax = int(np.argmin(lows)), int(np.argmax(highs))
        offending = tuple(float(t) for t, low in zip(trajectory.times, lows) if low <= BOUNDARY_TOLERANCE)
        margin = BodyMargins(
            body=index,
            lambda_min_samples=lows,
            lambda_max_samples=highs,
            inf_lambda_min=float(lows[kmin]),
            sup_lambda_max=float(highs[kmax]),
            argmin_time=float(trajectory.times[kmin]),
            argmax_time=float(trajectory.times[kmax]),
            consistent_at_all_samples=not offending,
            offending_times=offending,
            vanishing_trend=_monotone_trend(lows, trend_ratio, decreasing=True),
            diverging_trend=_monotone_trend(highs, trend_ratio, decreasing=False),
        )
        logger.debug(
            "body %d: inf lambda_min=%.6g sup lambda_max=%.6g uniform=%s bounded=%s",
            index,
            margin.inf_lambda_min,
            margin.sup_lambda_max,
            margin.uniformly_consistent,
            margin.upper_bounded,
        )
        margins.append(margin)
    return tuple(margins)


def spatial_inertia(p: InertialParams) -> NDArray[np.float64]:
    """6x6 spatial inertia ``[[m I3, -skew(h)], [-skew(h)^T, I]]``."""
    s = skew(p.first_moment)
    out = np.empty((6, 6))
    out[:3, :3] = p.mass * np.eye(3)
    out[:3, 3:] = -s
    out[3:, :3] = -s.T
    out[3:, 3:] = p.inertia
    return out


def block_spatial_inertia(theta: Sequence[InertialParams]) -> NDArray[np.float64]:
    """Block-diagonal assembly of the per-body spatial inertias."""
    if not theta:
        msg = "at least one body is required"
        raise InvalidInputError(msg)
    return np.asarray(scipy.linalg.block_diag(*[spatial_inertia(p) for p in theta]), dtype=float)


__all__ = [
    "BOUNDARY_TOLERANCE",
    "PARAMS_PER_BODY",
    "BodyMargins",
    "ConsistencyResult",
    "InertialParams",
    "ParamTrajectory",
    "basis_params",
    "block_spatial_inertia",
    "check_consistency",
    "inverse_pseudo_inertia",
    "pseudo_inertia",
    "spatial_inertia",
    "stack_params",
    "trajectory_margins",
    "unstack_params",
]
