# this_file: tests/test_dual.py
"""Forward-mode dual numbers."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from twat_robodyn import dual
from twat_robodyn.dual import Dual

reals = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


@given(reals, reals)
def test_product_and_quotient_rules(a, b):
    x = Dual(a, 1.0)
    product = x * x * b
    assert product.re == pytest.approx(a * a * b)
    assert product.eps == pytest.approx(2.0 * a * b)
    quotient = 1.0 / (x * x + 1.0)
    assert quotient.eps == pytest.approx(-2.0 * a / (a * a + 1.0) ** 2)


@given(reals)
def test_trig_derivatives(a):
    x = Dual(a, 1.0)
    assert dual.sin(x).eps == pytest.approx(math.cos(a))
    assert dual.cos(x).eps == pytest.approx(-math.sin(a))
    assert dual.sin(a) == math.sin(a)


def test_sqrt_derivative_and_singularities():
    assert Dual(4.0, 1.0).sqrt().eps == pytest.approx(0.25)
    with pytest.raises(ZeroDivisionError):
        Dual(0.0, 1.0).sqrt()
    with pytest.raises(ZeroDivisionError):
        Dual(1.0, 1.0) / 0.0


def test_subtraction_and_negation():
    x = Dual(3.0, 2.0)
    assert (5.0 - x).re == 2.0
    assert (5.0 - x).eps == -2.0
    assert (-x).eps == -2.0


def test_partials_of_vector_function():
    """Jacobian of f(x, y) = (x y, sin x, y^2) by one seeded pass per input."""

    def f(v):
        return np.array([v[0] * v[1], dual.sin(v[0]), v[1] * v[1]])

    x = np.array([0.3, -1.2])
    d = dual.partials(f, x)
    assert d.shape == (2, 3)
    assert_allclose(d[0], [x[1], math.cos(x[0]), 0.0])
    assert_allclose(d[1], [x[0], 0.0, 2.0 * x[1]])


def test_directional_returns_value_and_slope():
    value, slope = dual.directional(lambda v: v @ v, np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    assert float(value) == pytest.approx(5.0)
    assert float(slope) == pytest.approx(6.0)


def test_primal_and_tangent_on_plain_floats():
    a = np.array([1.0, 2.0])
    assert_allclose(dual.primal(a), a)
    assert_allclose(dual.tangent(a), np.zeros(2))
    mixed = np.array([Dual(1.0, 3.0), 2.0], dtype=object)
    assert_allclose(dual.tangent(mixed), [3.0, 0.0])
