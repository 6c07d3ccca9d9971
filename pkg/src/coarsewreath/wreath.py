"""The generalized wreath product of metric spaces and its exact metric.

A point is a finitely supported configuration ``f: Z -> X`` (sites holding
the basepoint are not stored) together with a position ``y`` in ``Y``.  The
distance is the cheapest tour in ``Y`` from ``y`` to ``y'`` that passes
within ``C`` (after applying ``p``) of every site where the configurations
differ, plus the per-site costs in ``X``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._validation import CapExceeded
from .groups import FiniteGroup, FiniteWreathGroup, cayley_graph
from .metric import DenseMap, FiniteMetricSpace, check_dense, cycle_metric, path_metric, word_metric

__all__ = [
    "WreathInstance",
    "WreathPoint",
    "PointSet",
    "PathProblem",
    "WreathMetric",
    "support_diff",
    "path_through",
    "path_through_bruteforce",
    "wreath_distance",
    "group_instance",
    "group_metric_crosscheck",
    "enumerate_ball",
    "ball_pointset",
    "lamplighter_instance",
    "DEFAULT_DP_CAP",
]

DEFAULT_DP_CAP = 14
TABLE_SITE_CAP = 18
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True, order=True)
class WreathPoint:
    """``(f, y)`` with ``f`` stored sparsely as sorted ``(site, value)`` pairs."""

    lamps: tuple[tuple[int, int], ...]
    y: int

    @classmethod
    def make(cls, f: Mapping[int, int] | Iterable[tuple[int, int]], y: int, x0: int) -> "WreathPoint":
        items = f.items() if isinstance(f, Mapping) else f
        lamps = tuple(sorted((int(z), int(x)) for z, x in items if int(x) != x0))
        if len({z for z, _ in lamps}) != len(lamps):
            raise ValueError("a site appears twice in the configuration")
        return cls(lamps, int(y))

    def as_dict(self) -> dict[int, int]:
        return dict(self.lamps)

    def support(self) -> frozenset[int]:
        return frozenset(z for z, _ in self.lamps)


def support_diff(f, g) -> frozenset[int]:
    """``(Supp f ∪ Supp g)`` minus the sites where ``f`` and ``g`` agree."""
    f = f.as_dict() if isinstance(f, WreathPoint) else dict(f)
    g = g.as_dict() if isinstance(g, WreathPoint) else dict(g)
    return frozenset(z for z in set(f) | set(g) if f.get(z) != g.get(z))


class WreathInstance:
    """``X wr_Z^C Y``: metric spaces ``X`` (basepoint ``x0``), ``Y``, ``Z`` and a ``C``-dense ``p: Y -> Z``."""

    def __init__(self, X: FiniteMetricSpace, x0: int, p: DenseMap):
        if not 0 <= x0 < len(X):
            raise ValueError("basepoint is not a point of X")
        ok, witness, gap = check_dense(p)
        if not ok:
            raise ValueError(
                f"p is not C-dense: Z point {p.codomain.points[witness]!r} is {gap} from the image, C = {p.C}"
            )
        self.X, self.x0, self.p = X, int(x0), p
        self.Y, self.Z, self.C = p.domain, p.codomain, p.C
        self.den = lcm(X.den, self.Y.den)
        self.DX = X.scaled(self.den)
        self.DY = self.Y.scaled(self.den)
        near = p.fiber_mask()
        self.fibers = tuple(np.flatnonzero(near[z]) for z in range(len(self.Z)))

    def __repr__(self) -> str:
        return f"WreathInstance(|X|={len(self.X)}, |Y|={len(self.Y)}, |Z|={len(self.Z)}, C={self.C})"

    @property
    def n_sites(self) -> int:
        return len(self.Z)

    def point(self, f: Mapping[int, int] | Iterable[tuple[int, int]], y: int) -> WreathPoint:
        p = WreathPoint.make(f, y, self.x0)
        if any(not 0 <= z < len(self.Z) or not 0 <= x < len(self.X) for z, x in p.lamps):
            raise ValueError("configuration refers to points outside Z or X")
        if not 0 <= p.y < len(self.Y):
            raise ValueError("position outside Y")
        return p

    def identity_point(self, y: int = 0) -> WreathPoint:
        return WreathPoint((), int(y))

    def size(self) -> int:
        return len(self.X) ** len(self.Z) * len(self.Y)


@dataclass(frozen=True)
class PathProblem:
    """Cheapest tour from ``start`` to ``end`` in ``Y`` meeting one lift per fiber."""

    Y: FiniteMetricSpace
    fibers: tuple[tuple[int, ...], ...]
    start: int
    end: int
    sites: tuple[int, ...] = ()

    @classmethod
    def from_instance(cls, W: WreathInstance, I: Iterable[int], y: int, y2: int) -> "PathProblem":
        I = tuple(sorted(int(z) for z in I))
        fibers = tuple(tuple(int(v) for v in W.fibers[z]) for z in I)
        return cls(W.Y, fibers, int(y), int(y2), I)

    def check(self) -> None:
        for k, F in enumerate(self.fibers):
            if not F:
                site = self.sites[k] if self.sites else k
                raise ValueError(f"fiber over site {site} is empty")


def _subset_dp(D: np.ndarray, fibers: Sequence[np.ndarray], starts: np.ndarray) -> np.ndarray:
    """All-subsets path DP.

    Returns ``L`` with ``L[mask, s, t]`` the cheapest walk from ``starts[s]``
    through one lift of every fiber in ``mask`` and then to ``t``.  Costs are
    in the integer units of ``D``.
    """
    n = len(fibers)
    Ny = D.shape[0]
    starts = np.asarray(starts, dtype=np.intp)
    S = len(starts)
    fibers = [np.asarray(F, dtype=np.intp) for F in fibers]
    bound = int(D.max(initial=0)) * (n + 2) + 1
    dtype = np.int32 if bound < 2**29 else np.int64
    INF = np.iinfo(dtype).max // 4
    lifts = np.unique(np.concatenate([starts] + fibers)) if n else np.unique(starts)
    Dl = D[lifts].astype(dtype)  # (U, Ny)
    pos = np.full(Ny, -1, dtype=np.intp)
    pos[lifts] = np.arange(len(lifts))
    fib_pos = [pos[F] for F in fibers]
    dp = np.full((1 << n, S, len(lifts)), INF, dtype=dtype)
    dp[0, np.arange(S), pos[starts]] = 0
    L = np.empty((1 << n, S, Ny), dtype=dtype)
    all_masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        popcount += (all_masks >> j) & 1
    chunk = max(1, _CHUNK_ELEMS // max(1, S * len(lifts) * Ny))
    s_idx = np.arange(S)[None, :, None]
    for k in range(n + 1):
        layer = all_masks[popcount == k]
        for c0 in range(0, len(layer), chunk):
            masks = layer[c0 : c0 + chunk]
            M = np.minimum((dp[masks][:, :, :, None] + Dl[None, None, :, :]).min(axis=2), INF)
            L[masks] = M
            if k == n:
                continue
            for j in range(n):
                free = ((masks >> j) & 1) == 0
                if not free.any():
                    continue
                new = masks[free] | (1 << j)
                Fj = fibers[j]
                cand = M[free][:, :, Fj]
                tgt = (new[:, None, None], s_idx, fib_pos[j][None, None, :])
                dp[tgt] = np.minimum(dp[tgt], cand)
    return L


def path_through(P: PathProblem, *, cap: int = DEFAULT_DP_CAP) -> Fraction:
    """Exact minimum over visiting orders and lift choices (subset DP)."""
    n = len(P.fibers)
    if n > cap:
        raise CapExceeded(f"support of size {n} exceeds the path DP cap {cap}", kind="dp_support", cap=cap, value=n)
    P.check()
    if n == 0:
        return P.Y.d(P.start, P.end)
    L = _subset_dp(P.Y.num, [np.array(F) for F in P.fibers], np.array([P.start]))
    return Fraction(int(L[(1 << n) - 1, 0, P.end]), P.Y.den)


def path_through_bruteforce(P: PathProblem) -> Fraction:
    """Oracle: enumerate every ordering and every choice of lift."""
    P.check()
    Y = P.Y
    n = len(P.fibers)
    if n == 0:
        return Y.d(P.start, P.end)
    best = None
    for order in permutations(range(n)):
        for lift in product(*(P.fibers[i] for i in order)):
            cost = Y.num[P.start, lift[0]] + Y.num[lift[-1], P.end]
            cost += sum(int(Y.num[a, b]) for a, b in zip(lift, lift[1:]))
            if best is None or cost < best:
                best = int(cost)
    return Fraction(best, Y.den)


def wreath_distance(W: WreathInstance, a: WreathPoint, b: WreathPoint, *, cap: int = DEFAULT_DP_CAP) -> Fraction:
    fa, fb = a.as_dict(), b.as_dict()
    I = support_diff(fa, fb)
    path = path_through(PathProblem.from_instance(W, I, a.y, b.y), cap=cap)
    lamps = sum(W.X.d(fa.get(z, W.x0), fb.get(z, W.x0)) for z in I)
    return path + lamps


@dataclass
class PointSet:
    """Dense array form of many wreath points: ``F[i, z]`` is the X-index at site ``z``."""

    F: np.ndarray
    y: np.ndarray

    def __len__(self) -> int:
        return len(self.y)

    @classmethod
    def from_points(cls, points: Sequence[WreathPoint], n_sites: int, x0: int) -> "PointSet":
        F = np.full((len(points), n_sites), x0, dtype=np.int64)
        for i, pt in enumerate(points):
            for z, x in pt.lamps:
                F[i, z] = x
        return cls(F, np.array([pt.y for pt in points], dtype=np.int64))

    def to_points(self, x0: int) -> list[WreathPoint]:
        out = []
        for row, y in zip(self.F.tolist(), self.y.tolist()):
            out.append(WreathPoint(tuple((z, x) for z, x in enumerate(row) if x != x0), y))
        return out

    def masks(self, x0: int) -> np.ndarray:
        weights = np.int64(1) << np.arange(self.F.shape[1], dtype=np.int64)
        return ((self.F != x0) * weights).sum(axis=1)

    def take(self, idx) -> "PointSet":
        return PointSet(self.F[idx], self.y[idx])


class WreathMetric:
    """Batch evaluator of the wreath metric with all-subsets path tables.

    ``table(y)[mask, t]`` is the path length from ``y`` to ``t`` through the
    sites in ``mask``, in units of ``1 / instance.den``.
    """

    def __init__(self, W: WreathInstance, *, site_cap: int = TABLE_SITE_CAP):
        if W.n_sites > site_cap:
            raise CapExceeded(f"|Z| = {W.n_sites} exceeds the table cap {site_cap}",
                              kind="table_sites", cap=site_cap, value=W.n_sites)
        self.W = W
        self._tables: dict[int, np.ndarray] = {}

    def prepare(self, starts: Iterable[int]) -> None:
        todo = sorted({int(s) for s in starts} - set(self._tables))
        if not todo:
            return
        W = self.W
        per = max(1, (1 << 24) // ((1 << W.n_sites) * len(W.Y)))
        for c0 in range(0, len(todo), per):
            group = np.array(todo[c0 : c0 + per])
            L = _subset_dp(W.DY, W.fibers, group)
            for k, s in enumerate(group):
                self._tables[int(s)] = np.ascontiguousarray(L[:, k, :])

    def table(self, y: int) -> np.ndarray:
        self.prepare([y])
        return self._tables[int(y)]

    def pair_ints(self, A: PointSet, ia: np.ndarray, B: PointSet, ib: np.ndarray) -> np.ndarray:
        """Scaled distances between ``A[ia[k]]`` and ``B[ib[k]]``."""
        W = self.W
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ib, dtype=np.intp)
        Fa, Fb = A.F[ia], B.F[ib]
        ya, yb = A.y[ia], B.y[ib]
        weights = np.int64(1) << np.arange(W.n_sites, dtype=np.int64)
        diff = Fa != Fb
        mask = (diff * weights).sum(axis=1)
        lamp = W.DX[Fa, Fb].sum(axis=1)
        out = np.empty(len(ia), dtype=np.int64)
        self.prepare(np.unique(ya).tolist())
        for s in np.unique(ya):
            sel = ya == s
            out[sel] = self._tables[int(s)][mask[sel], yb[sel]]
        return out + lamp

    def pairwise_ints(self, A: PointSet, B: PointSet | None = None) -> np.ndarray:
        B = A if B is None else B
        ia, ib = np.meshgrid(np.arange(len(A)), np.arange(len(B)), indexing="ij")
        return self.pair_ints(A, ia.ravel(), B, ib.ravel()).reshape(len(A), len(B))

    def distance(self, a: WreathPoint, b: WreathPoint) -> Fraction:
        A = PointSet.from_points([a, b], self.W.n_sites, self.W.x0)
        return Fraction(int(self.pair_ints(A, [0], A, [1])[0]), self.W.den)


def ball_pointset(W: WreathInstance, center: WreathPoint, radius, support_cap: int | None = None) -> PointSet:
    """All points within ``radius`` of ``center`` whose own support has at most ``support_cap`` sites."""
    radius = Fraction(radius)
    R = radius * W.den
    metric = WreathMetric(W)
    Lc = metric.table(center.y)
    fc = np.full(W.n_sites, W.x0, dtype=np.int64)
    for z, x in center.lamps:
        fc[z] = x
    DX = W.DX
    nX = len(W.X)
    alt_cost = [sorted((int(DX[fc[z], x]), x) for x in range(nX) if x != fc[z]) for z in range(W.n_sites)]
    cheapest = np.array([c[0][0] if c else np.iinfo(np.int64).max // 4 for c in alt_cost], dtype=np.int64)
    n = W.n_sites
    masks = np.arange(1 << n, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    lamp_min = (bits * np.minimum(cheapest, 1 << 40)).sum(axis=1)
    feasible = Lc.min(axis=1) + lamp_min <= R
    rows_F, rows_y = [], []
    for mask in np.flatnonzero(feasible):
        sites = [z for z in range(n) if (mask >> z) & 1]
        ell = Lc[mask]
        budget = R - int(ell.min())

        def expand(k, cost, values):
            if k == len(sites):
                ys = np.flatnonzero(ell + cost <= R)
                if len(ys):
                    f = fc.copy()
                    f[sites] = values
                    rows_F.append(np.repeat(f[None, :], len(ys), axis=0))
                    rows_y.append(ys)
                return
            for c, x in alt_cost[sites[k]]:
                if cost + c > budget:
                    break
                expand(k + 1, cost + c, values + [x])

        expand(0, 0, [])
    F = np.concatenate(rows_F) if rows_F else np.zeros((0, n), dtype=np.int64)
    y = np.concatenate(rows_y) if rows_y else np.zeros(0, dtype=np.int64)
    if support_cap is not None:
        keep = (F != W.x0).sum(axis=1) <= support_cap
        F, y = F[keep], y[keep]
    return PointSet(F.astype(np.int64), y.astype(np.int64))


def enumerate_ball(W: WreathInstance, center: WreathPoint, radius, support_cap: int | None = None) -> list[WreathPoint]:
    return ball_pointset(W, center, radius, support_cap).to_points(W.x0)


def group_instance(G: FiniteGroup, H: FiniteGroup) -> WreathInstance:
    """``X = Cay(G)``, ``Y = Z = Cay(H)``, ``p = id``, ``C = 0``; basepoint the identity of ``G``."""
    X = word_metric(cayley_graph(G), G.order)
    Y = word_metric(cayley_graph(H), H.order)
    return WreathInstance(X, G.identity, DenseMap.identity(Y))


def group_metric_crosscheck(G: FiniteGroup, H: FiniteGroup, *, cap: int = 4096) -> Fraction:
    """Largest gap between the wreath formula and the BFS word metric of ``G wr H``."""
    WG = FiniteWreathGroup(G, H, cap=cap)
    bfs = word_metric(cayley_graph(WG), WG.order)
    W = group_instance(G, H)
    F, h = WG.decode_all()
    pts = PointSet(F, h)
    formula = WreathMetric(W).pairwise_ints(pts)
    gap = np.abs(formula * bfs.den - bfs.num * W.den).max()
    return Fraction(int(gap), W.den * bfs.den)


def lamplighter_instance(n: int, *, shape: str = "cycle", lamp: FiniteGroup | None = None) -> WreathInstance:
    """``X wr Y`` with ``X`` a finite group's Cayley graph (default ``Z/2``) and ``Y = Z`` a cycle or path."""
    from .groups import cyclic

    lamp = cyclic(2) if lamp is None else lamp
    X = word_metric(cayley_graph(lamp), lamp.order)
    Y = cycle_metric(n) if shape == "cycle" else path_metric(n)
    return WreathInstance(X, lamp.identity, DenseMap.identity(Y))
