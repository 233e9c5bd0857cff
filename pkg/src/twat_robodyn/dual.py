"""Scalar forward-mode dual numbers.

A :class:`Dual` carries a value and one directional derivative. Numpy object
arrays of duals flow through the same matrix code as float arrays, so one
kinematics implementation yields both values and exact first partials.
"""
# this_file: src/twat_robodyn/dual.py

from __future__ import annotations

import math
from collections.abc import Callable
from typing import Any, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

Number = Union[int, float]
Scalar = Union["Dual", float]


class Dual:
    """Dual number ``re + eps * e`` with ``e**2 = 0``."""

    __slots__ = ("eps", "re")

    def __init__(self, re: Number, eps: Number = 0.0) -> None:
        self.re = float(re)
        self.eps = float(eps)

    @staticmethod
    def _coerce(other: Dual | Number) -> Dual:
        return other if isinstance(other, Dual) else Dual(other, 0.0)

    def __add__(self, other: Dual | Number) -> Dual:
        o = Dual._coerce(other)
        return Dual(self.re + o.re, self.eps + o.eps)

    __radd__ = __add__

    def __sub__(self, other: Dual | Number) -> Dual:
        o = Dual._coerce(other)
        return Dual(self.re - o.re, self.eps - o.eps)

    def __rsub__(self, other: Dual | Number) -> Dual:
        o = Dual._coerce(other)
        return Dual(o.re - self.re, o.eps - self.eps)

    def __mul__(self, other: Dual | Number) -> Dual:
        if isinstance(other, Dual):
            return Dual(self.re * other.re, self.eps * other.re + self.re * other.eps)
        value = float(other)
        return Dual(self.re * value, self.eps * value)

    __rmul__ = __mul__

    def __truediv__(self, other: Dual | Number) -> Dual:
        o = Dual._coerce(other)
        if o.re == 0.0:
            msg = "dual division by zero"
            raise ZeroDivisionError(msg)
        inv = 1.0 / o.re
        return Dual(self.re * inv, (self.eps * o.re - self.re * o.eps) * inv * inv)

    def __rtruediv__(self, other: Dual | Number) -> Dual:
        return Dual._coerce(other).__truediv__(self)

    def __neg__(self) -> Dual:
        return Dual(-self.re, -self.eps)

    def __pos__(self) -> Dual:
        return self

    def sin(self) -> Dual:
        return Dual(math.sin(self.re), math.cos(self.re) * self.eps)

    def cos(self) -> Dual:
        return Dual(math.cos(self.re), -math.sin(self.re) * self.eps)

    def sqrt(self) -> Dual:
        root = math.sqrt(self.re)
        if root == 0.0:
            msg = "derivative of sqrt at zero"
            raise ZeroDivisionError(msg)
        return Dual(root, 0.5 * self.eps / root)

    def __repr__(self) -> str:
        return f"Dual({self.re!r}, {self.eps!r})"


def sin(x: Scalar) -> Scalar:
    """Sine of a float or a dual."""
    return x.sin() if isinstance(x, Dual) else math.sin(x)


def cos(x: Scalar) -> Scalar:
    """Cosine of a float or a dual."""
    return x.cos() if isinstance(x, Dual) else math.cos(x)


def sqrt(x: Scalar) -> Scalar:
    """Square root of a float or a dual."""
    return x.sqrt() if isinstance(x, Dual) else math.sqrt(x)


def seed(x: ArrayLike, direction: ArrayLike) -> NDArray[np.object_]:
    """Lift ``x`` to duals whose tangent is ``direction``."""
    values = np.asarray(x, dtype=float)
    tangents = np.broadcast_to(np.asarray(direction, dtype=float), values.shape)
    lifted = np.empty(values.shape, dtype=object)
    for index in np.ndindex(values.shape):
        lifted[index] = Dual(values[index], tangents[index])
    return lifted


def primal(a: Any) -> NDArray[np.float64]:
    """Value part of a float, dual or array of either."""
    arr = np.asarray(a)
    if arr.dtype != object:
        return arr.astype(float)
    flat = [item.re if isinstance(item, Dual) else float(item) for item in arr.flat]
    return np.array(flat, dtype=float).reshape(arr.shape)


def tangent(a: Any) -> NDArray[np.float64]:
    """Derivative part of a float, dual or array of either; zero for plain floats."""
    arr = np.asarray(a)
    if arr.dtype != object:
        return np.zeros(arr.shape)
    flat = [item.eps if isinstance(item, Dual) else 0.0 for item in arr.flat]
    return np.array(flat, dtype=float).reshape(arr.shape)


def directional(
    fn: Callable[[NDArray[Any]], Any], x: ArrayLike, direction: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Evaluate ``fn`` at ``x`` and its derivative along ``direction``."""
    out = fn(seed(x, direction))
    return primal(out), tangent(out)


def partials(fn: Callable[[NDArray[Any]], Any], x: ArrayLike) -> NDArray[np.float64]:
    """All first partials of ``fn`` at the vector ``x``.

    The result is stacked along a new leading axis: ``result[i]`` is
    ``d fn / d x_i`` with the shape of ``fn(x)``.
    """
    point = np.asarray(x, dtype=float).ravel()
    basis = np.eye(point.size)
    return np.stack([tangent(fn(seed(point, basis[i]))) for i in range(point.size)])


__all__ = ["Dual", "cos", "directional", "partials", "primal", "seed", "sin", "sqrt", "tangent"]
