"""Small fixed-size matrix utilities.

Cross-product matrices, block replication, the rotation convention, the
constant S/T pair that rewrites ``skew(x) @ R`` with ``x`` on the right, and a
cyclic Jacobi eigen-solver for the tiny symmetric matrices used in consistency
tests and mass-matrix bounds.

The builders (``skew``, ``block_replicate``, ``rotation``,
``skew_rotation_factorization``) accept float arrays and object arrays of
:class:`~twat_robodyn.dual.Dual` alike.
"""
# this_file: src/twat_robodyn/algebra.py

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from twat_robodyn import dual
from twat_robodyn.errors import InvalidInputError, NumericFailureError

logger = logging.getLogger(__name__)

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100

_S = np.array(
    [
        [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ]
)
# Row 3i+j of T picks entry 3j+i: the vec-transpose permutation.
_T = np.zeros((9, 9))
for _i in range(3):
    for _j in range(3):
        _T[3 * _i + _j, 3 * _j + _i] = 1.0


def require_finite(name: str, value: ArrayLike) -> NDArray[np.float64]:
    """Return ``value`` as a float array, rejecting NaN and infinities."""
    arr = dual.primal(value)
    if not np.all(np.isfinite(arr)):
        msg = f"{name} must contain only finite numbers"
        raise InvalidInputError(msg)
    return arr


def require_shape(name: str, value: ArrayLike, shape: tuple[int, ...]) -> NDArray[Any]:
    """Return ``value`` as an array of exactly ``shape``."""
    arr = np.asarray(value)
    if arr.dtype != object:
        arr = arr.astype(float)
    if arr.shape != shape:
        msg = f"{name} must have shape {shape}, got {arr.shape}"
        raise InvalidInputError(msg)
    return arr


def skew(x: ArrayLike) -> NDArray[Any]:
    """Cross-product matrix: ``skew(x) @ y == cross(x, y)``."""
    v = require_shape("x", x, (3,))
    zero = 0.0
    return np.array(
        [
            [zero, -v[2], v[1]],
            [v[2], zero, -v[0]],
            [-v[1], v[0], zero],
        ]
    )


def block_replicate(b: ArrayLike) -> NDArray[Any]:
    """Three copies of ``b`` on the block diagonal."""
    block = np.asarray(b)
    if block.ndim == 1:
        block = block.reshape(-1, 1)
    if block.ndim != 2:
        msg = f"block must be a matrix, got {block.ndim} dimensions"
        raise InvalidInputError(msg)
    p1, p2 = block.shape
    out = np.zeros((3 * p1, 3 * p2), dtype=object if block.dtype == object else float)
    for k in range(3):
        out[k * p1 : (k + 1) * p1, k * p2 : (k + 1) * p2] = block
    return out


def rotation(phi: ArrayLike) -> NDArray[Any]:
    """Rotation ``Rz(phi[2]) @ Ry(phi[1]) @ Rx(phi[0])``."""
    a = require_shape("phi", phi, (3,))
    c1, s1 = dual.cos(a[0]), dual.sin(a[0])
    c2, s2 = dual.cos(a[1]), dual.sin(a[1])
    c3, s3 = dual.cos(a[2]), dual.sin(a[2])
    return np.array(
        [
            [c3 * c2, c3 * s2 * s1 - s3 * c1, c3 * s2 * c1 + s3 * s1],
            [s3 * c2, s3 * s2 * s1 + c3 * c1, s3 * s2 * c1 - c3 * s1],
            [-s2, c2 * s1, c2 * c1],
        ]
    )


def rotation_angles(r: ArrayLike) -> NDArray[np.float64]:
    """Angles ``phi`` with ``rotation(phi) == r`` for an orthonormal ``r``."""
    m = require_finite("rotation", r)
    if m.shape != (3, 3):
        msg = f"rotation must be 3x3, got {m.shape}"
        raise InvalidInputError(msg)
    pitch = math.asin(float(np.clip(-m[2, 0], -1.0, 1.0)))
    if abs(math.cos(pitch)) < 1e-12:
        # gimbal lock: fold the roll into the yaw
        return np.array([0.0, pitch, math.atan2(-m[0, 1], m[1, 1])])
    return np.array([math.atan2(m[2, 1], m[2, 2]), pitch, math.atan2(m[1, 0], m[0, 0])])


def is_rotation(r: ArrayLike, tol: float = 1e-9) -> bool:
    """True when ``r`` is orthonormal with determinant +1."""
    m = np.asarray(r, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    return bool(np.allclose(m.T @ m, np.eye(3), atol=tol) and abs(np.linalg.det(m) - 1.0) < tol)


def st_matrices() -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """The constant 3x9 matrix S and the 9x9 permutation T."""
    return _S.copy(), _T.copy()


def skew_rotation_factorization(x: ArrayLike, r: ArrayLike) -> NDArray[Any]:
    """``-S @ A33(R) @ T @ A31(x)``, equal to ``skew(x) @ R``."""
    v = require_shape("x", x, (3,))
    m = require_shape("R", r, (3, 3))
    return -_S @ block_replicate(m) @ _T @ block_replicate(v)


def symmetric_eigenvalues(
    a: ArrayLike, *, tol: float = JACOBI_TOLERANCE, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> NDArray[np.float64]:
    """Ascending eigenvalues of a small symmetric matrix by cyclic Jacobi sweeps."""
    work = require_finite("matrix", a).copy()
    if work.ndim != 2 or work.shape[0] != work.shape[1]:
        msg = f"matrix must be square, got shape {work.shape}"
        raise InvalidInputError(msg)
    scale = max(1.0, float(np.max(np.abs(work))) if work.size else 1.0)
    if not np.allclose(work, work.T, rtol=0.0, atol=1e-9 * scale):
        msg = "matrix must be symmetric"
        raise InvalidInputError(msg)
    work = 0.5 * (work + work.T)
    n = work.shape[0]
    frobenius = max(1.0, float(np.linalg.norm(work)))
    for _sweep in range(max_sweeps):
        off = math.sqrt(float(np.sum(work**2) - np.sum(np.diag(work) ** 2)))
        if off <= tol * frobenius:
            return np.sort(np.diag(work))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                theta = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                g = np.array([[c, s], [-s, c]])
                idx = [p, q]
                work[:, idx] = work[:, idx] @ g
                work[idx, :] = g.T @ work[idx, :]
                work[p, q] = work[q, p] = 0.0
    msg = f"Jacobi eigen-solver did not converge in {max_sweeps} sweeps"
    logger.debug("%s; matrix=%s", msg, np.asarray(a).tolist())
    raise NumericFailureError(msg)


def lambda_min(a: ArrayLike) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(symmetric_eigenvalues(a)[0])


def lambda_max(a: ArrayLike) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    return float(symmetric_eigenvalues(a)[-1])


def sigma_max(b: ArrayLike) -> float:
    """Largest singular value."""
    m = require_finite("matrix", b)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


__all__ = [
    "JACOBI_MAX_SWEEPS",
    "JACOBI_TOLERANCE",
    "block_replicate",
    "is_rotation",
    "lambda_max",
    "lambda_min",
    "require_finite",
    "require_shape",
    "rotation",
    "rotation_angles",
    "sigma_max",
    "skew",
    "skew_rotation_factorization",
    "st_matrices",
    "symmetric_eigenvalues",
]
