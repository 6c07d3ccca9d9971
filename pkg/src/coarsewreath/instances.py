"""Seeded random instances shared by the acceptance suite, the tests and the CLI."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .metric import DenseMap, FiniteMetricSpace, word_metric
from .walls import WallsStructure
from .wreath import PathProblem, WreathInstance

__all__ = [
    "random_graph_metric",
    "random_walls",
    "random_dense_map",
    "random_instance",
    "random_path_problem",
    "separating_walls",
]

WEIGHTS = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(1, 3))


def random_graph_metric(rng: np.random.Generator, n: int, extra: float = 0.3) -> FiniteMetricSpace:
    """Word metric of a random spanning tree plus independent extra edges."""
    edges = [(int(rng.integers(0, k)), k) for k in range(1, n)]
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra:
                edges.append((a, b))
    return word_metric(edges, n)


def random_walls(rng: np.random.Generator, n: int, k: int | None = None) -> WallsStructure:
    """Random proper halfspaces with small rational weights."""
    k = int(rng.integers(1, 2 * n + 1)) if k is None else k
    hs = []
    if n >= 2:
        for _ in range(k):
            bits = rng.random(n) < 0.5
            if bits.all() or not bits.any():
                bits[int(rng.integers(0, n))] ^= True
            hs.append((np.flatnonzero(bits).tolist(), WEIGHTS[int(rng.integers(0, len(WEIGHTS)))]))
    return WallsStructure(range(n), hs, quiet=True)


def separating_walls(rng: np.random.Generator, n: int) -> WallsStructure:
    """Random walls plus every singleton at weight 1, so distinct points are always separated."""
    base = random_walls(rng, n)
    hs = list(base.halfspaces) + ([([i], 1) for i in range(n)] if n >= 2 else [])
    return WallsStructure(range(n), hs, quiet=True)


def random_dense_map(rng: np.random.Generator, Y: FiniteMetricSpace, Z: FiniteMetricSpace) -> DenseMap:
    """Random ``p: Y -> Z`` with ``C`` the smallest radius making it dense."""
    values = rng.integers(0, len(Z), size=len(Y))
    img = sorted(set(values.tolist()))
    C = Fraction(int(Z.num[:, img].min(axis=1).max()), Z.den)
    return DenseMap(Y, Z, tuple(int(v) for v in values), C)


def random_instance(rng: np.random.Generator, nX: int, nY: int, nZ: int) -> WreathInstance:
    X = random_graph_metric(rng, nX)
    Y = random_graph_metric(rng, nY)
    Z = random_graph_metric(rng, nZ)
    return WreathInstance(X, 0, random_dense_map(rng, Y, Z))


def random_path_problem(rng: np.random.Generator, max_sites: int = 6, max_y: int = 7) -> PathProblem:
    nY = int(rng.integers(2, max_y + 1))
    Y = random_graph_metric(rng, nY)
    k = int(rng.integers(0, max_sites + 1))
    fibers = []
    for _ in range(k):
        size = int(rng.choice([1, 1, 2, 2, 3]))
        fibers.append(tuple(sorted(rng.choice(nY, size=min(size, nY), replace=False).tolist())))
    return PathProblem(Y, tuple(fibers), int(rng.integers(0, nY)), int(rng.integers(0, nY)))
