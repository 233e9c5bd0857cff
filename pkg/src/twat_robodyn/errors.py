"""Exception hierarchy for twat-robodyn."""
# this_file: src/twat_robodyn/errors.py

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np


class RobodynError(Exception):
    """Base class for every error raised by twat-robodyn."""

    exit_code = 1


class InvalidInputError(RobodynError, ValueError):
    """Input violates a documented precondition (shape, finiteness, range)."""

    exit_code = 2


class UnsupportedChainError(InvalidInputError):
    """Chain geometry outside the classes where angular velocity equals the angle rate."""


class ConfigError(InvalidInputError):
    """Scenario document failed schema validation."""

    def __init__(self, pointer: str, message: str) -> None:
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


class NumericFailureError(RobodynError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""

    exit_code = 3


class SingularMassMatrixError(NumericFailureError):
    """Mass matrix is not safely positive definite."""

    def __init__(self, lambda_min: float, q: Sequence[float], snapshot: Any = None) -> None:
        self.lambda_min = float(lambda_min)
        self.q = np.asarray(q, dtype=float).copy()
        self.snapshot = snapshot
        coords = ", ".join(f"{value:.6g}" for value in self.q)
        super().__init__(f"mass matrix not positive definite: lambda_min={self.lambda_min:.3e} at q=({coords})")


class InternalConsistencyError(RobodynError, AssertionError):
    """A bound that holds for every input was violated; indicates a bug."""

    exit_code = 4


class PropertySuiteError(RobodynError):
    """One or more property checks failed."""

    exit_code = 4

    def __init__(self, failed: Sequence[str]) -> None:
        self.failed = tuple(failed)
        super().__init__("property checks failed: " + ", ".join(self.failed))


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(error, RobodynError):
        return error.exit_code
    return 1


__all__ = [
    "ConfigError",
    "InternalConsistencyError",
    "InvalidInputError",
    "NumericFailureError",
    "PropertySuiteError",
    "RobodynError",
    "SingularMassMatrixError",
    "UnsupportedChainError",
    "exit_code_for",
]
