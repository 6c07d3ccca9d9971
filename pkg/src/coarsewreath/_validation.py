"""Input validation helpers shared by the estimators and the functional API."""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np

INT_LIMIT = 2**62


class CapExceeded(ValueError):
    """A desk-scale enumeration cap was exceeded."""

    def __init__(self, message: str, *, kind: str = "cap", cap: int | None = None, value: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.cap = cap
        self.value = value

    def as_dict(self) -> dict:
        return {"error": "cap_exceeded", "kind": self.kind, "cap": self.cap, "value": self.value, "message": str(self)}


class PropertyViolation(ValueError):
    """An invariant that should hold did not."""


def as_fraction(value) -> Fraction:
    """Parse ints, Fractions and ``"num/den"`` strings; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not distances")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        raise TypeError(f"refusing inexact float {value!r}; pass a Fraction or 'num/den' string")
    raise TypeError(f"cannot interpret {value!r} as a rational")


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def common_scale(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        den = lcm(den, Fraction(v).denominator)
    return den


def to_scaled_ints(matrix: Sequence[Sequence], den: int | None = None) -> tuple[np.ndarray, int]:
    """Convert a rational matrix to ``(int64 array, den)`` with ``matrix == array / den``."""
    rows = [[as_fraction(v) for v in row] for row in matrix]
    if den is None:
        den = common_scale(v for row in rows for v in row)
    out = np.zeros((len(rows), len(rows[0]) if rows else 0), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            scaled = v * den
            if scaled.denominator != 1:
                raise ValueError(f"{v} is not representable over denominator {den}")
            if abs(scaled.numerator) >= INT_LIMIT:
                raise OverflowError("scaled distance exceeds int64 range")
            out[i, j] = scaled.numerator
    return out, den


def rescale(num: np.ndarray, den: int, new_den: int) -> np.ndarray:
    if new_den % den:
        raise ValueError(f"{new_den} is not a multiple of {den}")
    return num * (new_den // den)


def check_square(num: np.ndarray, n: int) -> None:
    if num.ndim != 2 or num.shape != (n, n):
        raise ValueError(f"distance matrix has shape {num.shape}, expected ({n}, {n})")


def check_positive_int(name: str, value: int) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
