"""Particle-cloud realization of time-varying mass distributions.

Each body's mass is a finite set of weighted particles expressed in the body
frame. A particle has a weight that may change with time (mass creation or
removal) and a mobility fraction: that fraction of its mass moves with a
prescribed relative velocity, and the particle's position is transported by
the moving portion. Sums over the cloud give the inertial parameters, their
rates, the lumped relative mass-flux vector and the kinetic offset.

All relative motion is a function of time only, never of the joint
coordinates.
"""
# this_file: src/twat_robodyn/particles.py

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol, Union, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from twat_robodyn.algebra import require_finite
from twat_robodyn.errors import InvalidInputError
from twat_robodyn.inertial import InertialParams, ParamTrajectory

logger = logging.getLogger(__name__)

FLOW_SIZE = 12
Vec = NDArray[np.float64]


# --- scalar profiles -------------------------------------------------------


@runtime_checkable
class Profile(Protocol):
    """A scalar function of time with a known derivative."""

    def value(self, t: float) -> float: ...

    def rate(self, t: float) -> float: ...


@dataclass(frozen=True)
class ConstantProfile:
    level: float

    def value(self, t: float) -> float:
        return self.level

    def rate(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class RampProfile:
    """``initial + slope * t``."""

    initial: float
    slope: float

    def value(self, t: float) -> float:
        return self.initial + self.slope * t

    def rate(self, t: float) -> float:
        return self.slope


@dataclass(frozen=True)
class SineProfile:
    """``mean + amplitude * sin(angular_frequency * t + phase)``."""

    mean: float
    amplitude: float
    angular_frequency: float
    phase: float = 0.0

    def value(self, t: float) -> float:
        return self.mean + self.amplitude * math.sin(self.angular_frequency * t + self.phase)

    def rate(self, t: float) -> float:
        return self.amplitude * self.angular_frequency * math.cos(self.angular_frequency * t + self.phase)


@dataclass(frozen=True)
class ExponentialProfile:
    """``initial * exp(rate_constant * t)``; vanishes for a negative constant, grows otherwise."""

    initial: float
    rate_constant: float

    def value(self, t: float) -> float:
        return self.initial * math.exp(self.rate_constant * t)

    def rate(self, t: float) -> float:
        return self.rate_constant * self.value(t)


@dataclass(frozen=True)
class ScaledProfile:
    base: Profile
    factor: float

    def value(self, t: float) -> float:
        return self.factor * self.base.value(t)

    def rate(self, t: float) -> float:
        return self.factor * self.base.rate(t)


Weight = Union[float, Profile]


def as_profile(weight: Weight) -> Profile:
    """Wrap plain numbers in a :class:`ConstantProfile`."""
    if isinstance(weight, Profile):
        return weight
    return ConstantProfile(float(weight))


# --- relative motion -------------------------------------------------------


@runtime_checkable
class Motion(Protocol):
    """Body-frame relative motion of the mobile portion of a particle."""

    def displacement(self, t: float) -> Vec: ...

    def velocity(self, t: float) -> Vec: ...

    def acceleration(self, t: float) -> Vec | None: ...


_ZERO3 = np.zeros(3)
_ZERO3.setflags(write=False)


@dataclass(frozen=True)
class Stationary:
    def displacement(self, t: float) -> Vec:
        return _ZERO3

    def velocity(self, t: float) -> Vec:
        return _ZERO3

    def acceleration(self, t: float) -> Vec:
        return _ZERO3


@dataclass(frozen=True, eq=False)
class ConstantVelocity:
    velocity_m_s: Vec

    def __post_init__(self) -> None:
        object.__setattr__(self, "velocity_m_s", require_finite("velocity", self.velocity_m_s).reshape(3))

    def displacement(self, t: float) -> Vec:
        return self.velocity_m_s * t

    def velocity(self, t: float) -> Vec:
        return self.velocity_m_s

    def acceleration(self, t: float) -> Vec:
        return _ZERO3


@dataclass(frozen=True, eq=False)
class Oscillation:
    """``amplitude * (sin(w t + phase) - sin(phase))``, starting at zero displacement."""

    amplitude: Vec
    angular_frequency: float
    phase: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitude", require_finite("amplitude", self.amplitude).reshape(3))

    def displacement(self, t: float) -> Vec:
        return self.amplitude * (math.sin(self.angular_frequency * t + self.phase) - math.sin(self.phase))

    def velocity(self, t: float) -> Vec:
        return self.amplitude * self.angular_frequency * math.cos(self.angular_frequency * t + self.phase)

    def acceleration(self, t: float) -> Vec:
        w = self.angular_frequency
        return -self.amplitude * w * w * math.sin(w * t + self.phase)


@dataclass(frozen=True)
class FunctionMotion:
    """Motion from user callables; acceleration may be omitted."""

    displacement_fn: Callable[[float], ArrayLike]
    velocity_fn: Callable[[float], ArrayLike]
    acceleration_fn: Callable[[float], ArrayLike] | None = None

    def displacement(self, t: float) -> Vec:
        return np.asarray(self.displacement_fn(t), dtype=float).reshape(3)

    def velocity(self, t: float) -> Vec:
        return np.asarray(self.velocity_fn(t), dtype=float).reshape(3)

    def acceleration(self, t: float) -> Vec | None:
        if self.acceleration_fn is None:
            return None
        return np.asarray(self.acceleration_fn(t), dtype=float).reshape(3)


# --- particles and clouds --------------------------------------------------


@dataclass(frozen=True, eq=False)
class Particle:
    """One weighted particle; ``position`` is its body-frame location at t = 0."""

    position: Vec
    weight: Weight = 1.0
    mobility: float = 0.0
    motion: Motion = field(default_factory=Stationary)

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", require_finite("position", self.position).reshape(3))
        object.__setattr__(self, "weight", as_profile(self.weight))
        if not 0.0 <= self.mobility <= 1.0:
            msg = f"mobility must lie in [0, 1], got {self.mobility}"
            raise InvalidInputError(msg)

    @property
    def profile(self) -> Profile:
        return as_profile(self.weight)

    def location(self, t: float) -> Vec:
        """Body-frame position at ``t``; the mobile portion carries the particle."""
        if self.mobility == 0.0:
            return self.position
        return self.position + self.mobility * self.motion.displacement(t)


@dataclass(frozen=True)
class _CloudSample:
    w: Vec
    wdot: Vec
    sigma: Vec
    x: Vec
    v: Vec
    a: Vec | None


@dataclass(frozen=True)
class ParticleCloud:
    """The particles of one body."""

    particles: tuple[Particle, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "particles", tuple(self.particles))
        if not self.particles:
            msg = "a particle cloud needs at least one particle"
            raise InvalidInputError(msg)

    @classmethod
    def from_arrays(
        cls,
        positions: ArrayLike,
        weights: ArrayLike,
        *,
        mobility: float = 0.0,
        motion: Motion | None = None,
    ) -> ParticleCloud:
        """Build a cloud of constant-weight particles sharing one motion law."""
        xs = require_finite("positions", positions).reshape(-1, 3)
        ws = require_finite("weights", weights).reshape(-1)
        if ws.size != xs.shape[0]:
            msg = f"{xs.shape[0]} positions but {ws.size} weights"
            raise InvalidInputError(msg)
        law = motion or Stationary()
        return cls(tuple(Particle(x, float(w), mobility, law) for x, w in zip(xs, ws)))

    def _sample(self, t: float, *, need_acceleration: bool = False) -> _CloudSample:
        count = len(self.particles)
        w, wdot, sigma = np.empty(count), np.empty(count), np.empty(count)
        x, v = np.empty((count, 3)), np.zeros((count, 3))
        a = np.zeros((count, 3)) if need_acceleration else None
        for k, particle in enumerate(self.particles):
            profile = particle.profile
            w[k], wdot[k], sigma[k] = profile.value(t), profile.rate(t), particle.mobility
            x[k] = particle.location(t)
            if particle.mobility == 0.0:
                continue
            v[k] = particle.motion.velocity(t)
            if a is not None:
                acc = particle.motion.acceleration(t)
                if acc is None:
                    msg = f"particle {k} is mobile but its motion has no relative acceleration"
                    raise InvalidInputError(msg)
                a[k] = acc
        if np.any(w < 0.0):
            msg = f"particle weights must be nonnegative at t={t}"
            raise InvalidInputError(msg)
        return _CloudSample(w, wdot, sigma, x, require_finite("relative velocity", v), a)

    # BodyModel protocol

    def params(self, t: float = 0.0) -> InertialParams:
        """m = sum w, h = sum w x, I = sum w skew(x)^T skew(x)."""
        s = self._sample(t)
        mass = float(np.sum(s.w))
        if mass <= 0.0:
            msg = f"cloud total mass must be positive, got {mass} at t={t}"
            raise InvalidInputError(msg)
        return InertialParams(mass, s.w @ s.x, _moment_sum(s.w, s.x, s.x))

    def param_rate(self, t: float) -> InertialParams:
        s = self._sample(t)
        if float(np.sum(s.w)) <= 0.0:
            msg = f"cloud total mass must be positive at t={t}"
            raise InvalidInputError(msg)
        carried = s.w * s.sigma
        # d/dt (|x|^2 I - x x^T) with xdot = sigma v, summed symmetrically
        inertia_rate = _moment_sum(s.wdot, s.x, s.x) + _moment_sum(carried, s.v, s.x) + _moment_sum(carried, s.x, s.v)
        return InertialParams(
            float(np.sum(s.wdot)),
            s.wdot @ s.x + carried @ s.v,
            inertia_rate,
        )

    def flow(self, t: float) -> Vec:
        s = self._sample(t)
        return _flow_sum(s.w * s.sigma, s.v, s.x)

    def flow_rate(self, t: float) -> Vec:
        s = self._sample(t, need_acceleration=True)
        assert s.a is not None
        carried = s.w * s.sigma
        out = _flow_sum(s.wdot * s.sigma, s.v, s.x) + _flow_sum(carried, s.a, s.x)
        out[3:] += np.einsum("p,pi,pj->ij", carried, s.v, s.sigma[:, None] * s.v).ravel()
        return out

    def kinetic_offset(self, t: float) -> float:
        s = self._sample(t)
        return float(np.sum(s.w * s.sigma * np.sum(s.v * s.v, axis=1)))

    def particle_states(self, t: float) -> tuple[Vec, Vec, Vec, Vec]:
        """Weights, body-frame positions, mobilities and relative velocities."""
        s = self._sample(t)
        return s.w, s.x, s.sigma, s.v


def _moment_sum(w: Vec, a: Vec, b: Vec) -> NDArray[np.float64]:
    """sum_p w_p skew(a_p)^T skew(b_p) = sum_p w_p ((a_p . b_p) I - b_p a_p^T)."""
    dot = float(np.sum(w * np.sum(a * b, axis=1)))
    return dot * np.eye(3) - np.einsum("p,pi,pj->ij", w, b, a)


def _flow_sum(weights: Vec, v: Vec, x: Vec) -> Vec:
    """sum_p weights_p [v_p; A31(x_p) v_p]; A31(x) v stacks v1 x, v2 x, v3 x."""
    out = np.empty(FLOW_SIZE)
    out[:3] = weights @ v
    out[3:] = np.einsum("p,pi,pj->ij", weights, v, x).ravel()
    return out


def cloud_inertial_params(cloud: ParticleCloud, t: float = 0.0) -> InertialParams:
    return cloud.params(t)


def cloud_param_rate(cloud: ParticleCloud, t: float) -> InertialParams:
    return cloud.param_rate(t)


def flow_vector(cloud: ParticleCloud, t: float) -> Vec:
    return cloud.flow(t)


def flow_rate(cloud: ParticleCloud, t: float) -> Vec:
    return cloud.flow_rate(t)


def kinetic_offset(cloud: ParticleCloud, t: float) -> float:
    return cloud.kinetic_offset(t)


def sphere_cloud(
    radius: float,
    count: int,
    mass: Weight,
    rng: np.random.Generator,
    *,
    mobility: float = 0.0,
    motion: Motion | None = None,
) -> ParticleCloud:
    """Equal-weight particles uniformly filling a ball centred on the frame origin."""
    if count < 1 or radius <= 0.0:
        msg = f"sphere cloud needs count >= 1 and radius > 0, got {count}, {radius}"
        raise InvalidInputError(msg)
    directions = rng.normal(size=(count, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / 3.0)
    positions = directions * radii[:, None]
    share = ScaledProfile(as_profile(mass), 1.0 / count)
    law = motion or Stationary()
    return ParticleCloud(tuple(Particle(x, share, mobility, law) for x in positions))


# --- body models -----------------------------------------------------------


@runtime_checkable
class BodyModel(Protocol):
    """Time-dependent source of a body's parameters, their rate and its flow quantities."""

    def params(self, t: float) -> InertialParams: ...

    def param_rate(self, t: float) -> InertialParams: ...

    def flow(self, t: float) -> Vec: ...

    def flow_rate(self, t: float) -> Vec: ...

    def kinetic_offset(self, t: float) -> float: ...


class _NoFlow:
    def flow(self, t: float) -> Vec:
        return np.zeros(FLOW_SIZE)

    def flow_rate(self, t: float) -> Vec:
        return np.zeros(FLOW_SIZE)

    def kinetic_offset(self, t: float) -> float:
        return 0.0


@dataclass(frozen=True, eq=False)
class RigidBody(_NoFlow):
    """Constant parameters."""

    inertial: InertialParams

    def params(self, t: float) -> InertialParams:
        return self.inertial

    def param_rate(self, t: float) -> InertialParams:
        return InertialParams.zeros()


@dataclass(frozen=True, eq=False)
class ProfiledBody(_NoFlow):
    """``profile(t) * base``: a fixed shape whose mass scales with time."""

    base: InertialParams
    profile: Profile

    def params(self, t: float) -> InertialParams:
        return self.profile.value(t) * self.base

    def param_rate(self, t: float) -> InertialParams:
        return self.profile.rate(t) * self.base


@dataclass(frozen=True, eq=False)
class TabulatedBody(_NoFlow):
    """Cubic-spline interpolation through sampled parameters."""

    times: Vec
    samples: tuple[InertialParams, ...]
    _spline: CubicSpline | None = field(init=False, default=None, repr=False)

    def __post_init__(self) -> None:
        times = require_finite("table times", self.times).reshape(-1)
        samples = tuple(self.samples)
        if times.size == 0 or times.size != len(samples):
            msg = f"table needs matching non-empty times and samples, got {times.size} and {len(samples)}"
            raise InvalidInputError(msg)
        if times.size > 1 and np.any(np.diff(times) <= 0.0):
            msg = "table times must be strictly increasing"
            raise InvalidInputError(msg)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", samples)
        if times.size > 1:
            values = np.stack([p.as_vector() for p in samples])
            object.__setattr__(self, "_spline", CubicSpline(times, values, axis=0))

    def _check(self, t: float) -> None:
        if not self.times[0] - 1e-12 <= t <= self.times[-1] + 1e-12:
            msg = f"t={t} outside the table range [{self.times[0]}, {self.times[-1]}]"
            raise InvalidInputError(msg)

    def params(self, t: float) -> InertialParams:
        self._check(t)
        if self._spline is None:
            return self.samples[0]
        return InertialParams.from_vector(self._spline(t))

    def param_rate(self, t: float) -> InertialParams:
        self._check(t)
        if self._spline is None:
            return InertialParams.zeros()
        return InertialParams.from_vector(self._spline(t, 1))


@dataclass(frozen=True, eq=False)
class FlowState:
    """Stacked flow vector, its rate and the total kinetic offset of all bodies."""

    psi: Vec
    psi_dot: Vec
    nu: float

    @classmethod
    def still(cls, n_bodies: int) -> FlowState:
        return cls(np.zeros(FLOW_SIZE * n_bodies), np.zeros(FLOW_SIZE * n_bodies), 0.0)

    @property
    def is_zero(self) -> bool:
        return not (np.any(self.psi) or np.any(self.psi_dot))


def flow_state(bodies: Sequence[BodyModel], t: float, *, with_rate: bool = True) -> FlowState:
    """Assemble the flow state of a chain's bodies at ``t``."""
    psi = np.concatenate([body.flow(t) for body in bodies])
    if with_rate:
        psi_dot = np.concatenate([body.flow_rate(t) for body in bodies])
    else:
        psi_dot = np.zeros_like(psi)
    nu = float(sum(body.kinetic_offset(t) for body in bodies))
    return FlowState(require_finite("flow", psi), require_finite("flow rate", psi_dot), nu)


def body_params(bodies: Sequence[BodyModel], t: float) -> tuple[InertialParams, ...]:
    return tuple(body.params(t) for body in bodies)


def body_param_rates(bodies: Sequence[BodyModel], t: float) -> tuple[InertialParams, ...]:
    return tuple(body.param_rate(t) for body in bodies)


def sample_trajectory(bodies: Sequence[BodyModel], times: ArrayLike) -> ParamTrajectory:
    """Sample parameters and their rates of every body at ``times``."""
    ts = require_finite("times", times).reshape(-1)
    params = tuple(body_params(bodies, float(t)) for t in ts)
    rates = tuple(body_param_rates(bodies, float(t)) for t in ts)
    return ParamTrajectory(ts, params, rates)


__all__ = [
    "FLOW_SIZE",
    "BodyModel",
    "ConstantProfile",
    "ConstantVelocity",
    "ExponentialProfile",
    "FlowState",
    "FunctionMotion",
    "Motion",
    "Oscillation",
    "Particle",
    "ParticleCloud",
    "ProfiledBody",
    "Profile",
    "RampProfile",
    "RigidBody",
    "ScaledProfile",
    "SineProfile",
    "Stationary",
    "TabulatedBody",
    "as_profile",
    "body_param_rates",
    "body_params",
    "cloud_inertial_params",
    "cloud_param_rate",
    "flow_rate",
    "flow_state",
    "flow_vector",
    "kinetic_offset",
    "sample_trajectory",
    "sphere_cloud",
]
