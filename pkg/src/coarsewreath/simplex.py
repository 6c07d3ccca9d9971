"""Exact rational phase-one simplex for ``A w = b, w >= 0`` (Bland's rule)."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass
class FeasibilityResult:
    feasible: bool
    solution: list[Fraction] | None = None
    # y with A^T y <= 0 and b.y > 0 when infeasible
    certificate: list[Fraction] | None = None
    pivots: int = 0


def solve_feasibility(A: Sequence[Sequence], b: Sequence, *, max_pivots: int = 100000) -> FeasibilityResult:
    """Decide whether ``A w = b`` has a nonnegative solution, exactly.

    Artificial variables start as the basis and their sum is minimised.
    A positive optimum yields a Farkas certificate from the final duals.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append(row + art + [rhs])
    basis = [n + i for i in range(m)]
    width = n + m
    # reduced costs of the phase-one objective: c_j - c_B B^-1 a_j with c = (0, 1)
    obj = [Fraction(0)] * (width + 1)
    for j in range(n):
        obj[j] = -sum(rows[i][j] for i in range(m))
    obj[width] = -sum(rows[i][width] for i in range(m))
    pivots = 0
    while True:
        entering = next((j for j in range(n) if obj[j] < 0), None)
        if entering is None:
            break
        best = None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                ratio = rows[i][width] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # unbounded direction cannot occur: objective is bounded below by 0
            raise RuntimeError("phase-one objective unbounded")
        r = best[1]
        piv = rows[r][entering]
        prow = [v / piv for v in rows[r]]
        rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i in range(m):
            if i != r:
                f = rows[i][entering]
                if f:
                    ri = rows[i]
                    for j in nz:
                        ri[j] -= f * prow[j]
        f = obj[entering]
        for j in nz:
            obj[j] -= f * prow[j]
        basis[r] = entering
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit reached")
    value = -obj[width]
    if value == 0:
        w = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                w[j] = rows[i][width]
        return FeasibilityResult(True, solution=w, pivots=pivots)
    # Phase-one duals of the sign-normalised rows: reduced cost of artificial i is 1 - y_i.
    y = []
    for i in range(m):
        sign = -1 if Fraction(b[i]) < 0 else 1
        y.append(sign * (1 - obj[n + i]))
    return FeasibilityResult(False, certificate=y, pivots=pivots)
