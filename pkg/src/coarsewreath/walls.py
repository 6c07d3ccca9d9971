"""Finite measured-walls structures: wall metrics, exact L^1/L^p embeddings and cut decompositions."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from ._validation import CapExceeded, as_fraction
from .embedding import DenseBlock, EmbeddingTable
from .metric import FiniteMetricSpace
from .simplex import solve_feasibility

__all__ = [
    "WallsStructure",
    "Infeasible",
    "wall_metric",
    "wall_metric_space",
    "embed_l1",
    "embed_lp",
    "pullback",
    "sum_walls",
    "cut_decompose",
    "is_cnd_kernel",
    "check_invariance",
    "permutation_closure",
    "cycle_walls",
    "path_walls",
    "discrete_walls",
    "canonical_walls",
    "CUT_CAP",
]

log = logging.getLogger(__name__)

CUT_CAP = 12


def _mask(subset: Iterable[int]) -> int:
    m = 0
    for i in subset:
        m |= 1 << int(i)
    return m


class WallsStructure:
    """Weighted halfspaces over a finite ground set.

    Each wall ``{A, A^c}`` is stored once as the halfspace ``A`` with the
    total weight of both sides.  Empty and full halfspaces cut nothing and
    are dropped with a warning.
    """

    def __init__(self, ground: Sequence, halfspaces: Iterable[tuple[Iterable[int], object]] = (), *, quiet: bool = False):
        self.ground = tuple(ground)
        n = len(self.ground)
        full = (1 << n) - 1
        merged: dict[int, Fraction] = {}
        for side, weight in halfspaces:
            A = side if isinstance(side, int) else _mask(side)
            if A >> n:
                raise ValueError("halfspace refers to points outside the ground set")
            w = as_fraction(weight)
            if w <= 0:
                raise ValueError(f"halfspace weight must be positive, got {w}")
            if A == 0 or A == full:
                if not quiet:
                    warnings.warn("dropping a halfspace that cuts nothing (empty or full)", stacklevel=2)
                continue
            key = A if (full ^ A) not in merged else full ^ A
            merged[key] = merged.get(key, Fraction(0)) + w
        self.halfspaces = tuple(merged.items())
        self._full = full

    def __len__(self) -> int:
        return len(self.halfspaces)

    def __repr__(self) -> str:
        return f"WallsStructure(|X|={len(self.ground)}, halfspaces={len(self.halfspaces)})"

    def sides(self, A: int) -> list[int]:
        return [i for i in range(len(self.ground)) if (A >> i) & 1]

    def membership(self) -> np.ndarray:
        """Boolean ``(|X|, #halfspaces)`` incidence matrix."""
        n = len(self.ground)
        out = np.zeros((n, len(self.halfspaces)), dtype=bool)
        for k, (A, _) in enumerate(self.halfspaces):
            for i in range(n):
                out[i, k] = (A >> i) & 1
        return out

    def weights(self) -> list[Fraction]:
        return [w for _, w in self.halfspaces]

    def scaled(self, factor, index: int | None = None) -> "WallsStructure":
        """Copy with every weight (or only halfspace ``index``) multiplied by ``factor``."""
        factor = as_fraction(factor)
        hs = [(A, w * factor if index is None or k == index else w) for k, (A, w) in enumerate(self.halfspaces)]
        return WallsStructure(self.ground, hs)

    def cuts_set(self, A: int, S: int) -> bool:
        """Does halfspace ``A`` cut the point set with bitmask ``S``?"""
        return bool(S & A) and bool(S & ~A & self._full)


def wall_metric(W: WallsStructure, x: int, y: int) -> Fraction:
    """Total weight of halfspaces containing exactly one of ``x``, ``y``."""
    return sum((w for A, w in W.halfspaces if ((A >> x) & 1) != ((A >> y) & 1)), Fraction(0))


def wall_metric_space(W: WallsStructure) -> FiniteMetricSpace:
    n = len(W.ground)
    return FiniteMetricSpace(W.ground, [[wall_metric(W, i, j) for j in range(n)] for i in range(n)])


def embed_l1(W: WallsStructure) -> EmbeddingTable:
    """One coordinate per halfspace: ``weight * [x in A]``."""
    return embed_lp(W, 1)


def embed_lp(W: WallsStructure, p: int = 1) -> EmbeddingTable:
    """Coordinates ``weight**(1/p) * [x in A]``; stored as incidence bits with p-th power weights."""
    bits = W.membership().astype(np.int64)
    names = tuple(f"A{k}" for k in range(len(W)))
    block = DenseBlock(bits, 1, tuple(W.weights()), names)
    return EmbeddingTable(list(W.ground), p, [block])


def pullback(q: Sequence[int], W: WallsStructure, domain: Sequence | None = None) -> WallsStructure:
    """Halfspaces ``q^-1(A)`` with the same weights; degenerate preimages are dropped."""
    domain = tuple(range(len(q))) if domain is None else tuple(domain)
    if len(domain) != len(q):
        raise ValueError("need one image per domain point")
    hs = []
    for A, w in W.halfspaces:
        pre = [s for s, t in enumerate(q) if (A >> int(t)) & 1]
        if 0 < len(pre) < len(q):
            hs.append((pre, w))
    return WallsStructure(domain, hs)


def sum_walls(factors: Sequence[WallsStructure]) -> WallsStructure:
    """Sum of the pullbacks along the coordinate projections of the product set."""
    grounds = [range(len(F.ground)) for F in factors]
    tuples = list(product(*grounds))
    labels = [tuple(F.ground[i] for F, i in zip(factors, t)) for t in tuples]
    hs = []
    for k, F in enumerate(factors):
        hs.extend(pullback([t[k] for t in tuples], F, labels).halfspaces)
    return WallsStructure(labels, hs)


@dataclass
class Infeasible:
    """Farkas certificate: ``sum c*cut_A <= 0`` for every cut while ``sum c*d > 0``."""

    certificate: dict[tuple[int, int], Fraction]
    violation: Fraction

    def verify(self, M: FiniteMetricSpace) -> bool:
        n = len(M)
        for A in range(1, 1 << (n - 1)):
            s = sum(c for (i, j), c in self.certificate.items() if ((A >> i) & 1) != ((A >> j) & 1))
            if s > 0:
                return False
        return sum(c * M.d(i, j) for (i, j), c in self.certificate.items()) > 0


def cut_decompose(M: FiniteMetricSpace, *, cap: int = CUT_CAP) -> WallsStructure | Infeasible:
    """Write ``d`` as a nonnegative combination of cut semimetrics, exactly.

    Every cut ``{A, A^c}`` is enumerated once (``A`` avoids the last point),
    and exact linear feasibility decides the weights.
    """
    n = len(M)
    if n > cap:
        raise CapExceeded(f"{n} points exceed the cut enumeration cap {cap}", kind="cut_points", cap=cap, value=n)
    if n <= 1:
        return WallsStructure(M.points, [])
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cuts = list(range(1, 1 << (n - 1)))
    A = [[int(((c >> i) & 1) != ((c >> j) & 1)) for c in cuts] for i, j in pairs]
    b = [M.d(i, j) for i, j in pairs]
    res = solve_feasibility(A, b)
    if res.feasible:
        return WallsStructure(M.points, [(c, w) for c, w in zip(cuts, res.solution) if w > 0])
    cert = {pair: c for pair, c in zip(pairs, res.certificate) if c}
    return Infeasible(cert, sum(c * M.d(i, j) for (i, j), c in cert.items()))


def _is_psd(G: list[list[Fraction]]) -> bool:
    G = [row[:] for row in G]
    n = len(G)
    for k in range(n):
        piv = G[k][k]
        if piv < 0:
            return False
        if piv == 0:
            if any(G[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            f = G[i][k] / piv
            if f:
                for j in range(k + 1, n):
                    G[i][j] -= f * G[k][j]
    return True


def is_cnd_kernel(k: Sequence[Sequence]) -> bool:
    """Conditionally negative definite test via the Gram matrix at base point 0.

    ``k`` is cnd iff it is symmetric with zero diagonal and
    ``G[i][j] = k(i,0) + k(j,0) - k(i,j)`` is positive semidefinite; the
    semidefinite check is an exact rational elimination.
    """
    K = [[as_fraction(v) for v in row] for row in k]
    n = len(K)
    if any(len(row) != n for row in K):
        raise ValueError("kernel matrix must be square")
    if any(K[i][i] != 0 for i in range(n)) or any(K[i][j] != K[j][i] for i in range(n) for j in range(n)):
        return False
    G = [[K[i][0] + K[j][0] - K[i][j] for j in range(1, n)] for i in range(1, n)]
    return _is_psd(G)


def permutation_closure(generators: Iterable[Sequence[int]]) -> list[tuple[int, ...]]:
    """All permutations generated by ``generators`` (as image tuples), identity first."""
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        return []
    n = len(gens[0])
    ident = tuple(range(n))
    seen = {ident}
    out = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = tuple(s[g[i]] for i in range(n))
                if h not in seen:
                    seen.add(h)
                    out.append(h)
                    nxt.append(h)
        frontier = nxt
    return out


def check_invariance(action: Iterable[Sequence[int]], W: WallsStructure) -> bool:
    """``d(gx, gy) == d(x, y)`` for every permutation ``g`` in ``action`` and every pair."""
    n = len(W.ground)
    D = [[wall_metric(W, i, j) for j in range(n)] for i in range(n)]
    for g in action:
        for i in range(n):
            for j in range(i + 1, n):
                if D[g[i]][g[j]] != D[i][j]:
                    return False
    return True


def cycle_walls(n: int, ground: Sequence | None = None) -> WallsStructure:
    """Arcs of length ``n // 2`` at weight 1/2; the wall metric is the cycle metric."""
    ground = tuple(range(n)) if ground is None else tuple(ground)
    if n < 2:
        return WallsStructure(ground, [])
    k = n // 2
    arcs = [[(s + t) % n for t in range(k)] for s in range(n)]
    return WallsStructure(ground, [(a, Fraction(1, 2)) for a in arcs])


def path_walls(n: int, ground: Sequence | None = None) -> WallsStructure:
    ground = tuple(range(n)) if ground is None else tuple(ground)
    return WallsStructure(ground, [(range(i + 1), 1) for i in range(n - 1)])


def discrete_walls(n: int, ground: Sequence | None = None) -> WallsStructure:
    """Singleton halfspaces at weight 1/2: distinct points are at wall distance 1."""
    ground = tuple(range(n)) if ground is None else tuple(ground)
    if n == 2:
        return WallsStructure(ground, [([0], 1)])
    return WallsStructure(ground, [([i], Fraction(1, 2)) for i in range(n)])


def canonical_walls(M: FiniteMetricSpace) -> WallsStructure:
    """Isometric walls from the cut decomposition when one exists, else the discrete walls."""
    if len(M) <= CUT_CAP:
        res = cut_decompose(M)
        if isinstance(res, WallsStructure):
            return res
    log.info("metric is not a cut sum; falling back to discrete walls")
    return discrete_walls(len(M), M.points)
