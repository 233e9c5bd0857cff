"""Test path setup for local src imports and shared chain fixtures."""
# this_file: tests/conftest.py

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from twat_robodyn.inertial import InertialParams  # noqa: E402
from twat_robodyn.kinematics import Chain, Joint, JointKind  # noqa: E402
from twat_robodyn.particles import RigidBody  # noqa: E402

GRAVITY = np.array([0.0, 9.81, 0.0])
SQRT5 = float(np.sqrt(5.0))


def _revolute(offset: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> Joint:
    return Joint(JointKind.REVOLUTE, np.array([0.0, 0.0, 1.0]), np.array(offset))


def _tool(offset: tuple[float, float, float]) -> Joint:
    return Joint(JointKind.FIXED, offset=np.array(offset))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def prismatic_x() -> Chain:
    """One prismatic joint along x, no gravity."""
    return Chain((Joint(JointKind.PRISMATIC, np.array([1.0, 0.0, 0.0])),))


@pytest.fixture
def planar_2r() -> Chain:
    """Two unit links about z plus a tool frame, gravity pulling along -y."""
    return Chain((_revolute(), _revolute((1.0, 0.0, 0.0)), _tool((1.0, 0.0, 0.0))), GRAVITY)


@pytest.fixture
def planar_3r() -> Chain:
    return Chain(
        (_revolute(), _revolute((0.6, 0.0, 0.0)), _revolute((0.5, 0.0, 0.0)), _tool((0.4, 0.0, 0.0))),
        GRAVITY,
    )


@pytest.fixture
def pendulum_bodies() -> tuple[RigidBody, ...]:
    """Frame-centred bodies of the double pendulum: a hub and two spheres."""
    hub = InertialParams(0.5, np.zeros(3), 0.01 * np.eye(3))
    return (
        RigidBody(hub),
        RigidBody(InertialParams.solid_sphere(1.0, 0.1)),
        RigidBody(InertialParams.solid_sphere(1.0, 0.1)),
    )


@pytest.fixture
def unit_sphere() -> InertialParams:
    """Sphere with m = 1 and r = sqrt(5), whose pseudo-inertia is the identity."""
    return InertialParams.solid_sphere(1.0, SQRT5)
