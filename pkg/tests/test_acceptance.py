# this_file: tests/test_acceptance.py
"""Long seeded runs of the structural identities at full sample counts (``-m slow``)."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twat_robodyn.algebra import rotation, skew, skew_rotation_factorization
from twat_robodyn.bounds import certify, q_norm_check, rate_bound
from twat_robodyn.config import bundled_names, load_config
from twat_robodyn.dynamics import coriolis, gravity, h_matrix, mass_matrix, mass_matrix_rate, regressor
from twat_robodyn.inertial import InertialParams
from twat_robodyn.kinematics import random_grid, uniform_grid
from twat_robodyn.particles import ProfiledBody, SineProfile, sample_trajectory
from twat_robodyn.simulator import Scenario, particle_kinetic_energy, run

pytestmark = pytest.mark.slow

TUPLES = 1000


def _random_theta(rng, n_bodies):
    return tuple(InertialParams.solid_sphere(rng.uniform(0.2, 2.0), rng.uniform(0.02, 0.3)) for _ in range(n_bodies))


def _random_rates(rng, n_bodies):
    return tuple(InertialParams.solid_sphere(rng.normal(scale=0.3), rng.uniform(0.02, 0.3)) for _ in range(n_bodies))


def test_skew_identities_over_random_tuples(prismatic_x, planar_2r, planar_3r):
    rng = np.random.default_rng(1)
    chains = (prismatic_x, planar_2r, planar_3r)
    for k in range(TUPLES):
        chain = chains[k % 3]
        n = chain.n_dof
        q, qd = rng.uniform(-math.pi, math.pi, n), rng.normal(size=n)
        theta, theta_dot = _random_theta(rng, chain.n_bodies), _random_rates(rng, chain.n_bodies)
        residual = mass_matrix_rate(chain, q, qd, theta, theta_dot)
        residual -= 2.0 * coriolis(chain, q, qd, theta) + mass_matrix(chain, q, theta_dot)
        assert np.max(np.abs(residual + residual.T)) < 1e-9 * max(1.0, float(np.max(np.abs(residual))))
        h = h_matrix(chain, q, rng.normal(size=12 * chain.n_bodies))
        assert np.max(np.abs(h + h.T)) < 1e-12


def test_regressor_identity_over_random_tuples(planar_3r):
    rng = np.random.default_rng(2)
    for _ in range(TUPLES):
        q, qd, v, a = (rng.normal(size=3) for _ in range(4))
        theta = _random_theta(rng, planar_3r.n_bodies)
        expected = mass_matrix(planar_3r, q, theta) @ a + coriolis(planar_3r, q, qd, theta) @ v
        expected = expected + gravity(planar_3r, q, theta)
        assert np.max(np.abs(regressor(planar_3r, q, qd, v, a).apply(theta) - expected)) < 1e-9


def test_oscillating_mass_bounds_on_ten_thousand_points(planar_2r, pendulum_bodies):
    """m(t) in [0.5, 1.5] at the tip; 1000 configurations times 11 samples."""
    rng = np.random.default_rng(3)
    bodies = (
        *pendulum_bodies[:2],
        ProfiledBody(InertialParams.solid_sphere(1.0, 0.1), SineProfile(1.0, 0.5, 2.0)),
    )
    trajectory = sample_trajectory(bodies, np.linspace(0.0, math.pi, 11))
    box = uniform_grid([-math.pi] * 2, [math.pi] * 2, 31)
    grid = np.vstack([box, random_grid([-math.pi] * 2, [math.pi] * 2, 1000 - len(box), rng)])
    cert = certify(planar_2r, trajectory, grid, restarts=0)
    assert len(cert.grid) * trajectory.n_samples >= 10_000
    assert cert.alpha1 - 1e-9 <= cert.lower.sampled_min
    assert cert.upper.sampled_max <= cert.alpha2 + 1e-9


def test_q_norm_and_factorization_at_scale():
    rng = np.random.default_rng(4)
    names = bundled_names()
    per_chain = 10_000 // len(names) + 1
    for name in names:
        config = load_config(f"bundled:{name}")
        grid = random_grid(config.grid.lower, config.grid.upper, per_chain, rng)
        assert q_norm_check(config.chain, grid) <= math.sqrt(2.0) + 1e-9
    for _ in range(10_000):
        x, r = rng.normal(size=3), rotation(rng.uniform(-math.pi, math.pi, 3))
        assert np.max(np.abs(skew_rotation_factorization(x, r) - skew(x) @ r)) < 1e-12


@pytest.mark.parametrize("name", bundled_names())
def test_rate_envelope_on_bundled_scenarios(name):
    config = load_config(f"bundled:{name}")
    rng = np.random.default_rng(5)
    grid = random_grid(config.grid.lower, config.grid.upper, 50, rng)
    trajectory = sample_trajectory(config.bodies, config.sample_times)
    rate = rate_bound(config.chain, trajectory, grid)
    assert rate.within_envelope
    assert rate.sup_sigma <= rate.envelope + 1e-9


def test_pendulum_energy_over_ten_seconds(planar_2r, pendulum_bodies):
    scenario = Scenario(planar_2r, pendulum_bodies, [0.5, 0.3], [0.0, 0.0], t_end=10.0, dt=1e-3, output_every=500)
    trajectory = run(scenario)
    assert trajectory.relative_energy_drift < 1e-6


def test_particle_energy_at_every_sample_of_flowing_cloud():
    scenario = load_config("bundled:internal_flow_2r").scenario
    assert scenario is not None
    pairs = []
    run(scenario, on_sample=lambda state, breakdown: pairs.append((particle_kinetic_energy(state, scenario), breakdown.kinetic)))
    assert len(pairs) > 10
    direct, decomposed = np.array(pairs).T
    assert_allclose(direct, decomposed, atol=1e-9, rtol=0.0)
