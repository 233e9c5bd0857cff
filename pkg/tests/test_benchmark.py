# this_file: tests/test_benchmark.py
"""Performance benchmarks for the equation of motion and the integrator."""

from __future__ import annotations

import numpy as np
import pytest

from twat_robodyn.bounds import certify
from twat_robodyn.config import load_config
from twat_robodyn.dynamics import assemble, forward_dynamics
from twat_robodyn.particles import body_param_rates, body_params, flow_state, sample_trajectory
from twat_robodyn.simulator import step


@pytest.fixture
def flow_config():
    """Two-link arm whose links carry counter-moving particle pairs."""
    return load_config("bundled:internal_flow_2r")


@pytest.fixture
def arm_config():
    return load_config("bundled:planar_3r")


def _terms(config, t=0.4):
    bodies = config.bodies
    q = np.full(config.chain.n_dof, 0.3)
    qd = np.full(config.chain.n_dof, -0.2)
    return assemble(config.chain, q, qd, body_params(bodies, t), body_param_rates(bodies, t), flow_state(bodies, t))


@pytest.mark.benchmark
def test_assemble_with_flow(benchmark, flow_config):
    """Benchmark assembling every term on a two-link chain with internal flow."""
    terms = benchmark(_terms, flow_config)
    assert terms.mass.shape == (2, 2)


@pytest.mark.benchmark
def test_assemble_three_links(benchmark, arm_config):
    terms = benchmark(_terms, arm_config)
    assert terms.mass.shape == (3, 3)


@pytest.mark.benchmark
def test_forward_dynamics(benchmark, flow_config):
    terms = _terms(flow_config)
    qdd = benchmark(forward_dynamics, terms, np.zeros(2))
    assert np.all(np.isfinite(qdd))


@pytest.mark.benchmark
def test_rk4_step(benchmark, flow_config):
    """Benchmark one fourth-order step, four right-hand-side evaluations."""
    scenario = flow_config.scenario
    assert scenario is not None
    state = benchmark(step, scenario.initial_state, scenario)
    assert state.t == pytest.approx(scenario.t0 + scenario.dt)


@pytest.mark.benchmark
def test_certify_small_grid(benchmark, arm_config):
    trajectory = sample_trajectory(arm_config.bodies, arm_config.sample_times[:5])
    lower = arm_config.grid.lower
    upper = arm_config.grid.upper
    grid = np.linspace(lower, upper, 7)
    cert = benchmark(certify, arm_config.chain, trajectory, grid, restarts=0)
    assert cert.alpha1 <= cert.alpha2
