"""Gauges, lifted walls on wreath products and the assembled L^1 embedding.

For a halfspace ``A`` of ``Z``, two points ``(f, z)`` and ``(g, z')`` are
equivalent when ``A`` does not cut ``phi(f, g) ∪ {z, z'}``.  With the support
gauge this happens exactly when ``z, z'`` lie on the same side of ``A`` and
``f, g`` agree off that side, so the class of ``(f, z)`` is labelled by its
side together with ``f`` restricted to the other side.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Sequence

import numpy as np

from ._validation import CapExceeded, PropertyViolation
from .embedding import DenseBlock, EmbeddingTable, PartitionBlock
from .metric import FiniteMetricSpace, bounded_geometry, uniform_discreteness
from .walls import WallsStructure, embed_l1, wall_metric_space
from .wreath import PointSet, WreathInstance, WreathPoint, support_diff

__all__ = [
    "Gauge",
    "support_gauge",
    "LiftedWalls",
    "lift_metric",
    "lift_embedding",
    "omega_embedding",
    "LambdaStructure",
    "assemble_lambda",
    "GeometryReport",
    "hypothesis_check",
    "MASK_SITE_CAP",
]

MASK_SITE_CAP = 62
PAIR_CHECK_LIMIT = 250_000


def _site_weights(n: int) -> np.ndarray:
    if n > MASK_SITE_CAP:
        raise CapExceeded(f"|Z| = {n} exceeds the bitmask cap {MASK_SITE_CAP}",
                          kind="mask_sites", cap=MASK_SITE_CAP, value=n)
    return np.int64(1) << np.arange(n, dtype=np.int64)


def _as_pointset(points, n_sites: int, x0: int) -> PointSet:
    return points if isinstance(points, PointSet) else PointSet.from_points(list(points), n_sites, x0)


@dataclass(frozen=True)
class Gauge:
    """A set-valued assignment ``phi`` on configurations, with a vectorised bitmask form."""

    n_sites: int
    evaluate: Callable[[WreathPoint, WreathPoint], frozenset]
    mask_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "support"

    def __call__(self, a: WreathPoint, b: WreathPoint) -> frozenset:
        return self.evaluate(a, b)

    def masks(self, Fa: np.ndarray, Fb: np.ndarray) -> np.ndarray:
        return self.mask_fn(Fa, Fb)

    def check_axioms(self, points: Sequence[WreathPoint], *, max_triples: int = 500, seed: int = 0) -> list[str]:
        """Symmetry, ``phi(w, w) = ∅`` and triangle containment; returns the violations found."""
        pts = list(points)
        bad = []
        for a in pts:
            if self(a, a):
                bad.append(f"phi(w, w) nonempty at {a}")
        n = len(pts)
        if n == 0:
            return bad
        if n**3 <= max_triples:
            triples = [(i, j, k) for i in range(n) for j in range(n) for k in range(n)]
        else:
            rng = np.random.default_rng(seed)
            triples = rng.integers(0, n, size=(max_triples, 3)).tolist()
        for i, j, k in triples:
            a, b, c = pts[i], pts[j], pts[k]
            if self(a, b) != self(b, a):
                bad.append(f"asymmetric at {a}, {b}")
            if not self(a, c) <= self(a, b) | self(b, c):
                bad.append(f"triangle containment fails at {a}, {b}, {c}")
        return bad


def support_gauge(W: WreathInstance, *, sample: int = 40, seed: int = 0) -> Gauge:
    """``phi(f, g)``: the sites where ``f`` and ``g`` differ; axioms checked on random configurations."""
    n = W.n_sites

    def masks(Fa, Fb):
        return ((Fa != Fb) * _site_weights(n)).sum(axis=-1)

    g = Gauge(n, lambda a, b: support_diff(a, b), masks)
    rng = np.random.default_rng(seed)
    F = rng.integers(0, len(W.X), size=(sample, n))
    pts = PointSet(F, np.zeros(sample, dtype=np.int64)).to_points(W.x0)
    bad = g.check_axioms(pts)
    if bad:
        raise PropertyViolation("; ".join(bad[:3]))
    return g


class LiftedWalls:
    """The lifted walls over ``X wr Z``: one partition of the point set per base halfspace of ``Z``.

    Points are :class:`PointSet` rows whose position column is read as a site of ``Z``.
    """

    def __init__(self, base: WallsStructure, gauge: Gauge):
        if len(base.ground) != gauge.n_sites:
            raise ValueError("base walls must live on the site set of the gauge")
        self.base = base
        self.gauge = gauge
        self.n_sites = gauge.n_sites
        _site_weights(self.n_sites)
        self.den = lcm(1, *(w.denominator for w in base.weights()))
        self.hmasks = np.array([A for A, _ in base.halfspaces], dtype=np.int64)
        self.hweights = np.array([(w * self.den).numerator for w in base.weights()], dtype=np.int64)
        self._full = np.int64((1 << self.n_sites) - 1)

    def set_masks(self, Fa, za, Fb, zb) -> np.ndarray:
        one = np.int64(1)
        return self.gauge.masks(Fa, Fb) | (one << np.asarray(za, dtype=np.int64)) | (one << np.asarray(zb, dtype=np.int64))

    def cut_ints(self, S: np.ndarray) -> np.ndarray:
        """Scaled weight of halfspaces cutting each set mask in ``S`` (units of ``1/den``)."""
        S = np.asarray(S, dtype=np.int64)
        out = np.zeros(S.shape, dtype=np.int64)
        for A, w in zip(self.hmasks, self.hweights):
            cut = ((S & A) != 0) & ((S & (self._full ^ A)) != 0)
            out += cut * w
        return out

    def pair_ints(self, P: PointSet, ia, ib, z: np.ndarray | None = None) -> np.ndarray:
        z = P.y if z is None else z
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ib, dtype=np.intp)
        return self.cut_ints(self.set_masks(P.F[ia], z[ia], P.F[ib], z[ib]))

    def labels(self, k: int, P: PointSet, z: np.ndarray | None = None) -> np.ndarray:
        """Class labels of the partition induced by halfspace ``k``."""
        z = P.y if z is None else z
        A = int(self.hmasks[k])
        inside = ((A >> np.arange(self.n_sites)) & 1).astype(bool)
        side = inside[z]
        key = P.F.copy()
        # blank the sites on the point's own side; what remains must agree within a class
        key[np.ix_(side, inside)] = -1
        key[np.ix_(~side, ~inside)] = -1
        rows = np.concatenate([side[:, None].astype(np.int64), key], axis=1)
        _, lab = np.unique(rows, axis=0, return_inverse=True)
        return lab.ravel()


def lift_metric(L: LiftedWalls, a: WreathPoint, b: WreathPoint) -> Fraction:
    """Total base weight of halfspaces cutting ``phi(f, g) ∪ {z, z'}``, by direct enumeration."""
    S = {a.y, b.y} | set(L.gauge(a, b))
    Smask = sum(1 << z for z in S)
    return sum((w for A, w in L.base.halfspaces if L.base.cuts_set(A, Smask)), Fraction(0))


def _check_partition(L: LiftedWalls, P: PointSet, k: int, lab: np.ndarray, z: np.ndarray, seed: int = 0) -> None:
    n = len(P)
    if n * n <= PAIR_CHECK_LIMIT:
        ia, ib = (g.ravel() for g in np.meshgrid(np.arange(n), np.arange(n), indexing="ij"))
    else:
        rng = np.random.default_rng(seed)
        ia, ib = rng.integers(0, n, PAIR_CHECK_LIMIT), rng.integers(0, n, PAIR_CHECK_LIMIT)
    A = np.int64(L.hmasks[k])
    S = L.set_masks(P.F[ia], z[ia], P.F[ib], z[ib])
    cut = ((S & A) != 0) & ((S & (L._full ^ A)) != 0)
    bad = np.flatnonzero(cut == (lab[ia] == lab[ib]))
    if len(bad):
        i, j = int(ia[bad[0]]), int(ib[bad[0]])
        raise PropertyViolation(f"halfspace {k}: partition disagrees with the cut rule at points {i}, {j}")


def lift_embedding(L: LiftedWalls, points, *, x0: int = 0, check: bool = True, z: np.ndarray | None = None) -> EmbeddingTable:
    """One partition block per base halfspace; parts carry half the halfspace weight each."""
    P = _as_pointset(points, L.n_sites, x0)
    z = P.y if z is None else np.asarray(z, dtype=np.int64)
    blocks = []
    for k, w in enumerate(L.base.weights()):
        lab = L.labels(k, P, z)
        if check:
            _check_partition(L, P, k, lab, z)
        blocks.append(PartitionBlock(lab, w, f"mu~[{k}]"))
    return EmbeddingTable(list(range(len(P))), 1, blocks)


def omega_embedding(W: WreathInstance, points) -> tuple[EmbeddingTable, FiniteMetricSpace]:
    """Half-indicators of ``f(z) = x`` over ``X x Z``, and the support-count pseudometric."""
    P = _as_pointset(points, W.n_sites, W.x0)
    nX, nZ = len(W.X), W.n_sites
    num = np.zeros((len(P), nX * nZ), dtype=np.int64)
    rows = np.arange(len(P))
    for z in range(nZ):
        num[rows, P.F[:, z] * nZ + z] = 1
    names = tuple(f"omega[{x},{z}]" for x in range(nX) for z in range(nZ))
    table = EmbeddingTable(list(range(len(P))), 1, [DenseBlock(num, 2, (1,) * (nX * nZ), names)])
    D = (P.F[:, None, :] != P.F[None, :, :]).sum(axis=2)
    return table, FiniteMetricSpace(range(len(P)), D, den=1)


def _scaled_matrix(M: FiniteMetricSpace, den: int) -> np.ndarray:
    return M.num * (den // M.den)


class LambdaStructure:
    """``lambda = p*mu~ + sigma~ + nu~ + omega~`` over a wreath instance.

    ``sigma`` lives on ``X``, ``nu`` on ``Y`` and ``mu`` on ``Z``.
    """

    def __init__(self, W: WreathInstance, sigma: WallsStructure, nu: WallsStructure, mu: WallsStructure,
                 gauge: Gauge | None = None):
        for name, walls, space in (("sigma", sigma, W.X), ("nu", nu, W.Y), ("mu", mu, W.Z)):
            if len(walls.ground) != len(space):
                raise ValueError(f"{name} has {len(walls.ground)} ground points, expected {len(space)}")
        self.W, self.sigma, self.nu, self.mu = W, sigma, nu, mu
        self.lifted = LiftedWalls(mu, gauge or support_gauge(W))
        self.dsigma = wall_metric_space(sigma)
        self.dnu = wall_metric_space(nu)
        self.den = lcm(self.lifted.den, self.dsigma.den, self.dnu.den)
        self._S = _scaled_matrix(self.dsigma, self.den)
        self._N = _scaled_matrix(self.dnu, self.den)
        self._p = np.asarray(W.p.values, dtype=np.int64)

    def components_ints(self, A: PointSet, ia, B: PointSet | None = None, ib=None) -> dict[str, np.ndarray]:
        """The four summands of ``d_lambda`` in units of ``1/den``, by halfspace enumeration."""
        B = A if B is None else B
        ia = np.asarray(ia, dtype=np.intp)
        ib = np.asarray(ia if ib is None else ib, dtype=np.intp)
        Fa, Fb, ya, yb = A.F[ia], B.F[ib], A.y[ia], B.y[ib]
        S = self.lifted.set_masks(Fa, self._p[ya], Fb, self._p[yb])
        scale = self.den // self.lifted.den
        return {
            "mu": self.lifted.cut_ints(S) * scale,
            "sigma": self._S[Fa, Fb].sum(axis=1),
            "nu": self._N[ya, yb],
            "omega": (Fa != Fb).sum(axis=1) * self.den,
        }

    def pair_ints(self, A: PointSet, ia, B: PointSet | None = None, ib=None) -> np.ndarray:
        parts = self.components_ints(A, ia, B, ib)
        return parts["mu"] + parts["sigma"] + parts["nu"] + parts["omega"]

    def distance(self, a: WreathPoint, b: WreathPoint) -> Fraction:
        P = PointSet.from_points([a, b], self.W.n_sites, self.W.x0)
        return Fraction(int(self.pair_ints(P, [0], P, [1])[0]), self.den)

    def embedding(self, points, *, check: bool = True) -> EmbeddingTable:
        """Concatenated coordinates: lifted walls at ``p(y)``, per-site sigma blocks, nu, and omega."""
        W = self.W
        P = _as_pointset(points, W.n_sites, W.x0)
        blocks = list(lift_embedding(self.lifted, P, check=check, z=self._p[P.y]).blocks)
        sig = embed_l1(self.sigma).blocks[0]
        for z in range(W.n_sites):
            names = tuple(f"sigma[{z}].{c}" for c in sig.names)
            blocks.append(DenseBlock(sig.num[P.F[:, z]], 1, sig.weights, names))
        nub = embed_l1(self.nu).blocks[0]
        blocks.append(DenseBlock(nub.num[P.y], 1, nub.weights, tuple(f"nu.{c}" for c in nub.names)))
        blocks += omega_embedding(W, P)[0].blocks
        return EmbeddingTable(list(range(len(P))), 1, blocks)


def assemble_lambda(W: WreathInstance, sigma: WallsStructure, nu: WallsStructure, mu: WallsStructure,
                    points=None) -> tuple[LambdaStructure, EmbeddingTable | None]:
    """Build ``d_lambda`` and, when ``points`` are given, its explicit coordinates over them."""
    lam = LambdaStructure(W, sigma, nu, mu)
    return lam, (lam.embedding(points) if points is not None else None)


HYPOTHESES = ("Y-discrete+Z-bounded", "Y-bounded+Z-bounded", "X-discrete")


@dataclass
class GeometryReport:
    deltaX: Fraction | None
    deltaY: Fraction | None
    NC: int
    flags: dict[str, bool] = field(default_factory=dict)

    @property
    def hypothesis(self) -> str | None:
        """First hypothesis set that holds, in the order of :data:`HYPOTHESES`."""
        return next((h for h in HYPOTHESES if self.flags.get(h)), None)

    @property
    def ok(self) -> bool:
        return self.hypothesis is not None


def _discrete(M: FiniteMetricSpace) -> bool:
    return not np.any(np.triu(M.num == 0, 1))


def hypothesis_check(W: WreathInstance) -> GeometryReport:
    """Which of the accepted hypothesis sets hold for the instance.

    Finite spaces always have bounded geometry; uniform discreteness fails
    only when distinct points sit at distance zero.
    """
    NC = bounded_geometry(W.Z, W.C)
    flags = {
        "Y-discrete+Z-bounded": _discrete(W.Y),
        "Y-bounded+Z-bounded": True,
        "X-discrete": _discrete(W.X),
    }
    return GeometryReport(uniform_discreteness(W.X), uniform_discreteness(W.Y), NC, flags)
