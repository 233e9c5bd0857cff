# this_file: tests/test_dynamics.py
"""Terms of the equation of motion and their structural properties."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twat_robodyn.dynamics import (
    ModelVariant,
    assemble,
    coriolis,
    forward_dynamics,
    gravity,
    h_matrix,
    mass_matrix,
    mass_matrix_rate,
    potential_energy,
    regressor,
    unit_potentials,
)
from twat_robodyn.errors import InvalidInputError, SingularMassMatrixError
from twat_robodyn.inertial import InertialParams, stack_params
from twat_robodyn.particles import FlowState

G = 9.81


def _pendulum_theta(bodies):
    return tuple(body.params(0.0) for body in bodies)


def _random_flow(rng, n_bodies):
    return FlowState(rng.normal(size=12 * n_bodies), rng.normal(size=12 * n_bodies), 0.3)


def test_prismatic_sphere_acceleration(prismatic_x):
    """m = 2 and tau = 4 with everything else zero gives q_dd = 2."""
    theta = (InertialParams.solid_sphere(2.0, 0.1),)
    terms = assemble(prismatic_x, [0.0], [0.0], theta, (InertialParams.zeros(),))
    assert_allclose(terms.mass, [[2.0]])
    assert_allclose(terms.gravity, [0.0])
    assert forward_dynamics(terms, [4.0]) == pytest.approx([2.0])


def test_mass_rate_damps_prismatic_motion(prismatic_x):
    theta = (InertialParams.solid_sphere(1.0, 0.1),)
    rate = (InertialParams.solid_sphere(0.1, 0.1),)
    terms = assemble(prismatic_x, [0.0], [1.0], theta, rate)
    assert_allclose(terms.param_rate, [[0.1]])
    assert forward_dynamics(terms, [0.0]) == pytest.approx([-0.1])


def test_planar_2r_closed_form(planar_2r, pendulum_bodies):
    """Hub at the base, 1 kg spheres (r = 0.1) at the elbow and the tip."""
    q = np.array([0.3, 0.9])
    theta = _pendulum_theta(pendulum_bodies)
    c2 = math.cos(q[1])
    expected_mass = np.array([[3.018 + 2.0 * c2, 1.008 + c2], [1.008 + c2, 1.008]])
    assert_allclose(mass_matrix(planar_2r, q, theta), expected_mass, atol=1e-12)
    c1, c12 = math.cos(q[0]), math.cos(q.sum())
    assert_allclose(gravity(planar_2r, q, theta), [G * (2.0 * c1 + c12), G * c12], atol=1e-12)


def test_planar_2r_coriolis_closed_form(planar_2r, pendulum_bodies):
    q, qd = np.array([0.3, 0.9]), np.array([0.7, -0.4])
    s2 = math.sin(q[1])
    expected = np.array([[-s2 * qd[1], -s2 * (qd[0] + qd[1])], [s2 * qd[0], 0.0]])
    assert_allclose(coriolis(planar_2r, q, qd, _pendulum_theta(pendulum_bodies)), expected, atol=1e-12)


def test_mass_rate_minus_twice_coriolis_is_skew(planar_3r, rng):
    theta = tuple(InertialParams.solid_sphere(m, 0.1) for m in (1.0, 0.8, 0.5, 0.3))
    theta_dot = tuple(InertialParams.solid_sphere(r, 0.1) for r in (0.1, -0.2, 0.05, 0.0))
    for _ in range(10):
        q, qd = rng.uniform(-math.pi, math.pi, 3), rng.normal(size=3)
        n = mass_matrix_rate(planar_3r, q, qd, theta, theta_dot)
        n -= 2.0 * coriolis(planar_3r, q, qd, theta)
        n -= mass_matrix(planar_3r, q, theta_dot)
        assert np.max(np.abs(n + n.T)) <= 1e-9 * max(1.0, float(np.max(np.abs(n))))


def test_potential_is_linear_in_parameters(planar_2r):
    """Bodies with a first moment still give U = unit_potentials . Theta."""
    theta = (
        InertialParams(0.5, np.array([0.02, -0.01, 0.0]), 0.01 * np.eye(3)),
        InertialParams(1.0, np.array([0.1, 0.05, 0.0]), 0.02 * np.eye(3)),
        InertialParams.solid_sphere(0.7, 0.1),
    )
    q = [0.4, -1.1]
    basis = np.asarray(unit_potentials(planar_2r, q), dtype=float)
    assert basis.shape == (30,)
    assert float(basis @ stack_params(theta)) == pytest.approx(float(potential_energy(planar_2r, q, theta)), abs=1e-12)


def test_flow_coupling_is_skew(planar_3r, rng):
    for _ in range(10):
        h = h_matrix(planar_3r, rng.uniform(-math.pi, math.pi, 3), rng.normal(size=48))
        assert np.max(np.abs(h + h.T)) <= 1e-12


def test_flow_coupling_vanishes_without_flow(planar_2r):
    assert not np.any(h_matrix(planar_2r, [0.1, 0.2], np.zeros(36)))


def test_regressor_reproduces_classical_terms(planar_3r, rng):
    theta = tuple(InertialParams.solid_sphere(m, 0.1) for m in (1.0, 0.8, 0.5, 0.3))
    q, qd, v, a = (rng.normal(size=3) for _ in range(4))
    reg = regressor(planar_3r, q, qd, v, a)
    assert reg.matrix.shape == (3, 40)
    expected = mass_matrix(planar_3r, q, theta) @ a + coriolis(planar_3r, q, qd, theta) @ v
    expected = expected + gravity(planar_3r, q, theta)
    assert_allclose(reg.apply(theta), expected, atol=1e-9)
    assert reg.body(1).shape == (3, 10)


def test_variants_drop_terms(planar_2r, pendulum_bodies, rng):
    theta = _pendulum_theta(pendulum_bodies)
    theta_dot = tuple(0.1 * p for p in theta)
    flow = _random_flow(rng, 3)
    args = (planar_2r, [0.4, -0.2], [0.3, 0.5], theta, theta_dot, flow)
    full = assemble(*args)
    drift = assemble(*args, variant=ModelVariant.PARAMETER_DRIFT)
    classical = assemble(*args, variant=ModelVariant.CLASSICAL)
    assert np.any(full.flow_coupling)
    assert np.any(full.flow_acceleration_force)
    assert full.nu == pytest.approx(0.3)
    assert not np.any(drift.flow_coupling)
    assert not np.any(drift.flow_acceleration_force)
    assert_allclose(drift.param_rate, full.param_rate)
    assert not np.any(classical.param_rate)
    assert classical.nu == 0.0
    assert_allclose(classical.mass, full.mass)


def test_generalized_force_inverts_forward_dynamics(planar_3r, rng):
    theta = tuple(InertialParams.solid_sphere(m, 0.1) for m in (1.0, 0.8, 0.5, 0.3))
    theta_dot = tuple(0.05 * p for p in theta)
    terms = assemble(planar_3r, rng.normal(size=3), rng.normal(size=3), theta, theta_dot, _random_flow(rng, 4))
    tau = rng.normal(size=3)
    qdd = forward_dynamics(terms, tau)
    assert_allclose(terms.generalized_force(qdd), tau, atol=1e-9)


def test_q_block_keeps_identity_for_translational_flow(planar_2r):
    terms = assemble(planar_2r, [0.5, 0.5], [0.0, 0.0], (InertialParams.unit_ball(),) * 3, (InertialParams.zeros(),) * 3)
    assert terms.q_block.shape == (18, 36)
    assert_allclose(terms.q_block[:3, :3], np.eye(3))
    assert terms.jq.shape == (2, 36)


def test_singular_mass_matrix_raises(prismatic_x):
    terms = assemble(prismatic_x, [0.0], [0.0], (InertialParams.zeros(),), (InertialParams.zeros(),))
    with pytest.raises(SingularMassMatrixError) as info:
        forward_dynamics(terms, [1.0])
    assert info.value.exit_code == 3
    assert info.value.lambda_min == pytest.approx(0.0)


def test_shape_errors(planar_2r, pendulum_bodies):
    theta = _pendulum_theta(pendulum_bodies)
    with pytest.raises(InvalidInputError):
        mass_matrix(planar_2r, [0.1, 0.2], theta[:2])
    terms = assemble(planar_2r, [0.1, 0.2], [0.0, 0.0], theta, theta)
    with pytest.raises(InvalidInputError):
        forward_dynamics(terms, [1.0])
