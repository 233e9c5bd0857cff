# this_file: tests/test_algebra.py
"""Cross-product matrices, rotations, the S/T factorization and the Jacobi solver."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from twat_robodyn.algebra import (
    block_replicate,
    is_rotation,
    lambda_max,
    lambda_min,
    require_finite,
    rotation,
    rotation_angles,
    sigma_max,
    skew,
    skew_rotation_factorization,
    st_matrices,
    symmetric_eigenvalues,
)
from twat_robodyn.errors import InvalidInputError, NumericFailureError

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, 3, elements=finite)
angles = arrays(np.float64, 3, elements=st.floats(min_value=-math.pi, max_value=math.pi))


@given(vectors, vectors)
def test_skew_matches_cross_product(x, y):
    """skew(x) @ y is the cross product and skew(x) is antisymmetric."""
    s = skew(x)
    assert_allclose(s @ y, np.cross(x, y), atol=1e-12)
    assert_allclose(s, -s.T, atol=0.0)


def test_block_replicate_shapes():
    b = np.arange(6.0).reshape(2, 3)
    out = block_replicate(b)
    assert out.shape == (6, 9)
    assert_allclose(out[2:4, 3:6], b)
    assert not np.any(out[0:2, 3:9])
    assert block_replicate(np.ones(3)).shape == (9, 3)


def test_rotation_about_z_is_planar():
    theta = 0.7
    expected = np.array([[math.cos(theta), -math.sin(theta), 0.0], [math.sin(theta), math.cos(theta), 0.0], [0, 0, 1]])
    assert_allclose(rotation(np.array([0.0, 0.0, theta])), expected, atol=1e-15)


@given(angles)
def test_rotation_is_orthonormal(phi):
    assert is_rotation(rotation(phi))


@given(arrays(np.float64, 3, elements=st.floats(min_value=-1.5, max_value=1.5)))
def test_rotation_angles_inverts_rotation(phi):
    """Away from gimbal lock the angles are recovered; the matrix always is."""
    r = rotation(phi)
    assert_allclose(rotation(rotation_angles(r)), r, atol=1e-10)


def test_st_matrices_shapes_and_permutation():
    s, t = st_matrices()
    assert s.shape == (3, 9)
    assert_allclose(t @ t, np.eye(9))
    assert_allclose(t.sum(axis=0), np.ones(9))


@settings(max_examples=200)
@given(vectors, angles)
def test_skew_rotation_factorization(x, phi):
    """-S A33(R) T A31(x) reproduces skew(x) R to 1e-12."""
    r = rotation(phi)
    assert np.max(np.abs(skew_rotation_factorization(x, r) - skew(x) @ r)) < 1e-12


def test_skew_rotation_factorization_rejects_bad_shapes():
    with pytest.raises(InvalidInputError):
        skew_rotation_factorization(np.ones(2), np.eye(3))


def test_jacobi_matches_numpy(rng):
    for size in (1, 2, 4, 6, 12):
        a = rng.normal(size=(size, size))
        sym = a + a.T
        assert_allclose(symmetric_eigenvalues(sym), np.linalg.eigvalsh(sym), atol=1e-10)


def test_jacobi_diagonal_sorted():
    assert_allclose(symmetric_eigenvalues(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])
    assert lambda_min(np.diag([3.0, 1.0, 2.0])) == 1.0
    assert lambda_max(np.diag([3.0, 1.0, 2.0])) == 3.0


def test_jacobi_rejects_asymmetric_and_reports_non_convergence():
    with pytest.raises(InvalidInputError):
        symmetric_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(NumericFailureError):
        symmetric_eigenvalues(np.array([[1.0, 0.5], [0.5, 2.0]]), max_sweeps=0)


def test_sigma_max_and_finiteness():
    assert sigma_max(np.diag([3.0, -4.0])) == pytest.approx(4.0)
    with pytest.raises(InvalidInputError):
        require_finite("x", [1.0, math.nan])
