# this_file: tests/test_inertial.py
"""Inertial parameters, pseudo-inertia and consistency along trajectories."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from twat_robodyn.errors import InvalidInputError
from twat_robodyn.inertial import (
    InertialParams,
    ParamTrajectory,
    block_spatial_inertia,
    check_consistency,
    inverse_pseudo_inertia,
    pseudo_inertia,
    spatial_inertia,
    stack_params,
    trajectory_margins,
    unstack_params,
)


def test_unit_ball_pseudo_inertia():
    assert np.max(np.abs(pseudo_inertia(InertialParams.unit_ball()) - np.diag([0.5, 0.5, 0.5, 1.0]))) < 1e-12


@pytest.mark.parametrize(("mass", "radius"), [(1.0, 1.0), (2.5, 0.3), (0.1, math.sqrt(5.0))])
def test_sphere_pseudo_inertia(mass, radius):
    """A solid sphere has f = m diag(r^2/5 I3, 1)."""
    expected = mass * np.diag([radius**2 / 5.0] * 3 + [1.0])
    assert np.max(np.abs(pseudo_inertia(InertialParams.solid_sphere(mass, radius)) - expected)) < 1e-12


def test_sphere_consistent_iff_mass_positive():
    assert check_consistency(InertialParams.solid_sphere(1.0, 0.2)).consistent
    assert not check_consistency(InertialParams.solid_sphere(-1.0, 0.2)).consistent
    # the all-zero body sits on the boundary
    result = check_consistency(InertialParams.zeros())
    assert not result.consistent
    assert result.lambda_min == pytest.approx(0.0)


def test_consistency_margin():
    p = InertialParams.unit_ball()
    assert check_consistency(p, margin=0.4).consistent
    assert not check_consistency(p, margin=0.6).consistent
    with pytest.raises(InvalidInputError):
        check_consistency(p, margin=-1.0)


def test_point_mass_inertia():
    x = np.array([0.3, -0.2, 0.5])
    p = InertialParams.point_mass(2.0, x)
    assert_allclose(p.first_moment, 2.0 * x)
    assert_allclose(p.inertia, 2.0 * (x @ x * np.eye(3) - np.outer(x, x)))
    assert_allclose(p.center_of_mass(), x)


def test_vector_layout():
    p = InertialParams.from_vector(np.arange(1.0, 11.0))
    assert p.mass == 1.0
    assert_allclose(p.first_moment, [2.0, 3.0, 4.0])
    assert_allclose(np.diag(p.inertia), [5.0, 6.0, 7.0])
    assert (p.inertia[0, 1], p.inertia[1, 2], p.inertia[0, 2]) == (8.0, 9.0, 10.0)
    assert_allclose(p.as_vector(), np.arange(1.0, 11.0))


def test_stacking_and_arithmetic():
    a, b = InertialParams.unit_ball(), InertialParams.solid_sphere(2.0, 1.0)
    assert_allclose(stack_params((a, b))[10:], b.as_vector())
    assert unstack_params(stack_params((a, b)))[1].allclose(b)
    assert (a + b - b).allclose(a)
    assert (2.0 * a).mass == 2.0
    with pytest.raises(InvalidInputError):
        unstack_params(np.ones(7))


def test_inverse_pseudo_inertia(rng):
    lower = np.tril(rng.normal(size=(4, 4)))
    pseudo = lower @ lower.T + 0.1 * np.eye(4)
    p = inverse_pseudo_inertia(pseudo)
    assert_allclose(pseudo_inertia(p), pseudo, atol=1e-12)
    assert check_consistency(p).consistent


def test_invalid_params_rejected():
    with pytest.raises(InvalidInputError):
        InertialParams(1.0, np.zeros(3), np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    with pytest.raises(InvalidInputError):
        InertialParams(math.inf)
    with pytest.raises(InvalidInputError):
        InertialParams.zeros().center_of_mass()


def test_spatial_inertia_of_unit_ball_is_identity():
    assert_allclose(spatial_inertia(InertialParams.unit_ball()), np.eye(6))
    z = block_spatial_inertia((InertialParams.unit_ball(), InertialParams.solid_sphere(2.0, 0.0)))
    assert z.shape == (12, 12)
    assert_allclose(z[6:9, 6:9], 2.0 * np.eye(3))


def _sphere_trajectory(masses):
    times = np.arange(len(masses), dtype=float)
    return ParamTrajectory(times, tuple((InertialParams.solid_sphere(m, math.sqrt(5.0)),) for m in masses))


def test_vanishing_mass_is_consistent_but_not_uniformly():
    """m(t) = exp(-t): every sample passes, the trend fails."""
    (margin,) = trajectory_margins(_sphere_trajectory([math.exp(-t) for t in range(12)]))
    assert margin.consistent_at_all_samples
    assert margin.vanishing_trend
    assert not margin.uniformly_consistent
    assert margin.upper_bounded
    assert margin.argmin_time == 11.0


def test_growing_mass_is_not_upper_bounded():
    (margin,) = trajectory_margins(_sphere_trajectory([1.0 + k for k in range(12)]))
    assert margin.diverging_trend
    assert not margin.upper_bounded
    assert margin.uniformly_consistent
    assert margin.sup_lambda_max == pytest.approx(12.0)


def test_negative_mass_sample_is_reported():
    (margin,) = trajectory_margins(_sphere_trajectory([1.0, 0.5, -0.5, 1.0]))
    assert not margin.consistent_at_all_samples
    assert margin.offending_times == (2.0,)


def test_bounded_oscillation_has_no_trend():
    masses = [1.0 + 0.5 * math.sin(0.7 * k) for k in range(30)]
    (margin,) = trajectory_margins(_sphere_trajectory(masses))
    assert margin.uniformly_consistent
    assert margin.upper_bounded


def test_trajectory_validation():
    p = (InertialParams.unit_ball(),)
    with pytest.raises(InvalidInputError):
        ParamTrajectory(np.array([0.0, 0.0]), (p, p))
    with pytest.raises(InvalidInputError):
        ParamTrajectory(np.array([0.0, 1.0]), (p,))
    with pytest.raises(InvalidInputError):
        trajectory_margins(ParamTrajectory(np.zeros(0), ()))
