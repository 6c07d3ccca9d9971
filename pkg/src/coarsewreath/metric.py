"""Exact finite (pseudo)metric spaces, word metrics and geometric hypothesis checks.

Distances are stored as an ``int64`` matrix together with a positive common
denominator, so every distance is an exact rational while pairwise work can
still be vectorised with numpy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from ._validation import as_fraction, check_square, to_scaled_ints

__all__ = [
    "FiniteMetricSpace",
    "DenseMap",
    "ValidationReport",
    "validate_metric",
    "word_metric",
    "uniform_discreteness",
    "bounded_geometry",
    "check_dense",
    "cycle_metric",
    "path_metric",
]


class FiniteMetricSpace:
    """A finite set of labelled points with an exact distance matrix.

    Parameters
    ----------
    points : sequence of hashable labels
    dist : rational matrix (ints, Fractions or ``"num/den"`` strings), or an
        integer array when ``den`` is given.
    den : optional common denominator for an integer ``dist``.
    """

    def __init__(self, points: Sequence[Hashable], dist, den: int | None = None):
        self.points = tuple(points)
        n = len(self.points)
        if len(set(self.points)) != n:
            raise ValueError("point labels must be distinct")
        if den is not None:
            num = np.asarray(dist, dtype=np.int64).reshape(n, n) if n else np.zeros((0, 0), np.int64)
            if den < 1:
                raise ValueError("denominator must be positive")
        else:
            if n == 0:
                num, den = np.zeros((0, 0), np.int64), 1
            else:
                if len(dist) != n or any(len(row) != n for row in dist):
                    raise ValueError(
                        f"distance matrix does not match {n} points"
                    )
                num, den = to_scaled_ints(dist)
        check_square(num, n)
        # reduce to lowest common denominator
        g = int(np.gcd.reduce(np.append(num.ravel(), den))) if num.size else den
        if g > 1:
            num, den = num // g, den // g
        num.setflags(write=False)
        self.num = num
        self.den = int(den)
        self._index = {p: i for i, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={len(self)}, den={self.den})"

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown point {label!r}") from None

    def d(self, i: int, j: int) -> Fraction:
        """Distance between the points with indices ``i`` and ``j``."""
        return Fraction(int(self.num[i, j]), self.den)

    def distance(self, a: Hashable, b: Hashable) -> Fraction:
        return self.d(self.index(a), self.index(b))

    def matrix(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.den) for v in row] for row in self.num]

    def scaled(self, den: int) -> np.ndarray:
        """Integer matrix of distances over the denominator ``den``."""
        if den % self.den:
            raise ValueError(f"{den} is not a multiple of {self.den}")
        return self.num * (den // self.den)

    def diameter(self) -> Fraction:
        if not len(self):
            return Fraction(0)
        return Fraction(int(self.num.max()), self.den)

    def distances(self) -> list[Fraction]:
        """Sorted distinct distances attained, including 0."""
        return [Fraction(int(v), self.den) for v in np.unique(self.num)]

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = np.asarray(indices, dtype=np.intp)
        return FiniteMetricSpace([self.points[i] for i in idx], self.num[np.ix_(idx, idx)], den=self.den)


@dataclass(frozen=True)
class DenseMap:
    """A map ``p: Y -> Z`` given by point indices, with density radius ``C``."""

    domain: FiniteMetricSpace
    codomain: FiniteMetricSpace
    values: tuple[int, ...]
    C: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "C", as_fraction(self.C))
        if len(self.values) != len(self.domain):
            raise ValueError("map needs one value per domain point")
        if any(not 0 <= v < len(self.codomain) for v in self.values):
            raise ValueError("map value outside the codomain")
        if self.C < 0:
            raise ValueError("density radius must be nonnegative")

    @classmethod
    def identity(cls, space: FiniteMetricSpace) -> "DenseMap":
        return cls(space, space, tuple(range(len(space))), Fraction(0))

    def fiber_mask(self) -> np.ndarray:
        """Boolean ``|Z| x |Y|`` matrix: ``d_Z(p(y), z) <= C``."""
        Z = self.codomain
        limit = self.C * Z.den
        near = Z.num <= limit  # [z, z']
        return near[:, np.asarray(self.values, dtype=np.intp)]


@dataclass
class ValidationReport:
    violations: list[tuple[str, tuple]] = field(default_factory=list)
    pseudometric: bool = False

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def axioms(self) -> set[str]:
        return {name for name, _ in self.violations}


def validate_metric(
    M: FiniteMetricSpace, *, pseudometric: bool = False, max_witnesses: int = 20
) -> ValidationReport:
    """List violated metric axioms, each with an index witness.

    With ``pseudometric=True`` distinct points at distance zero are allowed.
    """
    D = M.num
    n = len(M)
    check_square(D, n)
    report = ValidationReport(pseudometric=pseudometric)

    def add(name, witnesses):
        for w in witnesses[: max_witnesses - len(report.violations)]:
            report.violations.append((name, tuple(int(i) for i in w)))

    add("nonnegativity", np.argwhere(D < 0))
    add("zero-diagonal", [(i, i) for i in np.flatnonzero(np.diag(D) != 0)])
    asym = np.argwhere(np.triu(D != D.T, 1))
    add("symmetry", asym)
    if not pseudometric:
        zero = np.argwhere(np.triu(D == 0, 1))
        add("separation", zero)
    for k in range(n):
        if len(report.violations) >= max_witnesses:
            break
        bad = D > D[:, k : k + 1] + D[k : k + 1, :]
        if bad.any():
            add("triangle", [(i, k, j) for i, j in np.argwhere(bad)])
    return report


def word_metric(edges: Iterable[tuple[int, int]], n: int, points: Sequence | None = None) -> FiniteMetricSpace:
    """Graph shortest-path metric (unit edge lengths) on vertices ``0..n-1``."""
    edges = [(int(a), int(b)) for a, b in edges]
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    for a, b in edges:
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a}, {b}) leaves the vertex set")
    if edges:
        rows = [a for a, b in edges] + [b for a, b in edges]
        cols = [b for a, b in edges] + [a for a, b in edges]
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    else:
        adj = coo_matrix((n, n)).tocsr()
    dist = shortest_path(adj, method="D", unweighted=True, directed=False)
    unreachable = np.argwhere(np.isinf(dist))
    if len(unreachable):
        a, b = unreachable[0]
        raise ValueError(f"graph is disconnected: vertices {int(a)} and {int(b)} are unreachable")
    return FiniteMetricSpace(points if points is not None else range(n), dist.astype(np.int64), den=1)


def cycle_metric(n: int) -> FiniteMetricSpace:
    return word_metric([(i, (i + 1) % n) for i in range(n)] if n > 1 else [], n)


def path_metric(n: int) -> FiniteMetricSpace:
    return word_metric([(i, i + 1) for i in range(n - 1)], n)


def uniform_discreteness(M: FiniteMetricSpace) -> Fraction | None:
    """Minimum positive pairwise distance, or ``None`` (read as +inf) below two points."""
    if len(M) < 2:
        return None
    pos = M.num[M.num > 0]
    if not pos.size:
        return None
    return Fraction(int(pos.min()), M.den)


def bounded_geometry(M: FiniteMetricSpace, C) -> int:
    """``N(C)``: the largest closed ball of radius ``C``."""
    C = as_fraction(C)
    if not len(M):
        return 0
    limit = C * M.den
    return int((M.num <= limit).sum(axis=1).max())


def check_dense(p: DenseMap) -> tuple[bool, int | None, Fraction]:
    """Is every codomain point within ``C`` of the image?

    Returns ``(ok, witness, gap)`` where ``witness`` is the codomain point
    farthest from the image and ``gap`` its distance to the image.
    """
    Z = p.codomain
    img = sorted(set(p.values))
    to_img = Z.num[:, img].min(axis=1)
    worst = int(np.argmax(to_img))
    gap = Fraction(int(to_img[worst]), Z.den)
    return gap <= p.C, worst, gap
