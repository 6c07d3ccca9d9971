"""Moduli of maps, path lifting, exponent fits and the distortion certificate for the lambda walls.

Everything that enters a certified inequality is an exact rational.  Only
:func:`poly_fit` and :func:`compression_fit` use floats.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._validation import PropertyViolation, as_fraction
from .lift import GeometryReport, LambdaStructure, hypothesis_check
from .metric import DenseMap, FiniteMetricSpace, bounded_geometry
from .walls import wall_metric_space
from .wreath import PointSet, WreathMetric

__all__ = [
    "Modulus",
    "moduli_from_ints",
    "empirical_moduli",
    "LiftingProfile",
    "lifting_modulus",
    "poly_fit",
    "bornologous_modulus",
    "affine_upper",
    "CompressionFit",
    "compression_fit",
    "ModuliBundle",
    "compute_moduli",
    "CertificationReport",
    "certify_c1c2",
    "comp_lower_bound",
]


@dataclass(frozen=True)
class Modulus:
    """Step function on attained distances.

    ``kind == "lower"``: ``rho(t) = min{e : d >= t}``.
    ``kind == "upper"``: ``eta(t) = max{e : d <= t}``.
    """

    ts: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    kind: str

    def __post_init__(self):
        if self.kind not in ("lower", "upper"):
            raise ValueError("kind must be 'lower' or 'upper'")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("modulus values must be nondecreasing")

    def __call__(self, t) -> Fraction | None:
        t = Fraction(t)
        if self.kind == "lower":
            k = bisect.bisect_left(self.ts, t)
            return self.values[k] if k < len(self.ts) else None
        k = bisect.bisect_right(self.ts, t) - 1
        return self.values[k] if k >= 0 else Fraction(0)

    def inverse(self, R) -> Fraction:
        """Generalised inverse ``max{t attained : rho(t) <= R}``, and 0 when no such ``t`` exists."""
        R = Fraction(R)
        k = bisect.bisect_right(self.values, R) - 1
        return self.ts[k] if k >= 0 else Fraction(0)

    def table(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.ts, self.values))


def moduli_from_ints(d: np.ndarray, d_den: int, e: np.ndarray, e_den: int) -> tuple[Modulus, Modulus]:
    """``(rho, eta)`` of the cloud ``(d/d_den, e/e_den)``."""
    d = np.asarray(d, dtype=np.int64).ravel()
    e = np.asarray(e, dtype=np.int64).ravel()
    if d.shape != e.shape:
        raise ValueError("distance and embedding arrays differ in length")
    if not d.size:
        return Modulus((), (), "lower"), Modulus((), (), "upper")
    ts, inv = np.unique(d, return_inverse=True)
    lo = np.full(len(ts), np.iinfo(np.int64).max, dtype=np.int64)
    hi = np.full(len(ts), np.iinfo(np.int64).min, dtype=np.int64)
    np.minimum.at(lo, inv, e)
    np.maximum.at(hi, inv, e)
    rho = np.minimum.accumulate(lo[::-1])[::-1]
    eta = np.maximum.accumulate(hi)
    tq = tuple(Fraction(int(t), d_den) for t in ts)
    return (
        Modulus(tq, tuple(Fraction(int(v), e_den) for v in rho), "lower"),
        Modulus(tq, tuple(Fraction(int(v), e_den) for v in eta), "upper"),
    )


def empirical_moduli(space: FiniteMetricSpace, embedding_metric) -> tuple[Modulus, Modulus]:
    """Moduli of the identity map from ``space`` to the (pseudo)metric ``embedding_metric`` over all pairs."""
    emb = embedding_metric if isinstance(embedding_metric, FiniteMetricSpace) else FiniteMetricSpace(
        space.points, embedding_metric
    )
    if len(emb) != len(space):
        raise ValueError("embedding metric has the wrong number of points")
    return moduli_from_ints(space.num, space.den, emb.num, emb.den)


@dataclass(frozen=True)
class LiftingProfile:
    """Worst lift cost ``theta`` on attained codomain distances (running maximum of ``raw``)."""

    rs: tuple[Fraction, ...]
    theta: tuple[Fraction, ...]
    raw: tuple[Fraction, ...]
    C: Fraction

    def at(self, r) -> Fraction:
        """``theta`` at the largest attained distance not exceeding ``r``."""
        k = bisect.bisect_right(self.rs, Fraction(r)) - 1
        return self.theta[k] if k >= 0 else Fraction(0)


def lifting_modulus(p: DenseMap) -> LiftingProfile:
    """Exhaustive ``theta(r)``: worst over admissible ``(z, z', y)`` of the cheapest admissible ``y'``."""
    Y, Z = p.domain, p.codomain
    near = p.fiber_mask()  # [z, y]
    empty = np.flatnonzero(~near.any(axis=1))
    if len(empty):
        raise PropertyViolation(f"no admissible lift near Z point {Z.points[empty[0]]!r}")
    big = np.iinfo(np.int64).max
    # m[y, z'] = min over admissible y' for z' of d_Y(y, y')
    m = np.where(near[None, :, :], Y.num[:, None, :], big).min(axis=2)
    T = np.where(near[:, :, None], m[None, :, :], -1).max(axis=1)  # [z, z']
    ts, inv = np.unique(Z.num, return_inverse=True)
    worst = np.full(len(ts), -1, dtype=np.int64)
    np.maximum.at(worst, inv.ravel(), T.ravel())
    run = np.maximum.accumulate(worst)
    return LiftingProfile(
        tuple(Fraction(int(t), Z.den) for t in ts),
        tuple(Fraction(int(v), Y.den) for v in run),
        tuple(Fraction(int(v), Y.den) for v in worst),
        p.C,
    )


def _poly_ratio_ok(r: np.ndarray, th: np.ndarray, delta: float, split: float) -> bool:
    ratio = th / np.maximum(r, 1.0) ** delta
    top, bottom = ratio[r >= split], ratio[r < split]
    if not len(bottom) or not len(top):
        return True
    return top.max() <= bottom.max() * (1 + 1e-9)


def poly_fit(L: LiftingProfile, *, grid_max: float = 4.0, step: float = 0.01, refine: int = 40) -> tuple[float, float]:
    """Least exponent ``delta`` whose normalised profile ``theta(r)/r**delta`` stops growing.

    The positive distances are split at their geometric midpoint; ``delta`` is
    accepted when the upper half never exceeds the lower half's maximum.
    Returns ``(delta, K)`` with ``theta(r) <= K * (r**delta + 1)`` on the table.
    """
    r = np.array([float(v) for v in L.rs])
    th = np.array([float(v) for v in L.theta])
    keep = r > 0
    r, th = r[keep], th[keep]
    if not len(r):
        return 0.0, float(max(L.theta, default=0))
    split = float(np.sqrt(r.min() * r.max()))
    grid = np.round(np.arange(0.0, grid_max + step / 2, step), 10)
    first = next((k for k, d in enumerate(grid) if _poly_ratio_ok(r, th, d, split)), None)
    if first is None:
        delta = grid_max
    elif first == 0:
        delta = 0.0
    else:
        lo, hi = float(grid[first - 1]), float(grid[first])
        for _ in range(refine):
            mid = (lo + hi) / 2
            lo, hi = (lo, mid) if _poly_ratio_ok(r, th, mid, split) else (mid, hi)
        delta = hi
    K = float((th / np.maximum(r, 1.0) ** delta).max())
    return delta, max(K, float(L.theta[0]) if L.theta else 0.0)


def _map_pairs(p: DenseMap) -> tuple[np.ndarray, int, np.ndarray, int]:
    v = np.asarray(p.values, dtype=np.intp)
    return p.domain.num, p.domain.den, p.codomain.num[np.ix_(v, v)], p.codomain.den


def bornologous_modulus(p: DenseMap) -> Modulus:
    """``S_R = max{d_Z(p(y), p(y')) : d_Y(y, y') <= R}`` as an upper step modulus."""
    return moduli_from_ints(*_map_pairs(p))[1]


def affine_upper(p: DenseMap) -> tuple[Fraction, Fraction]:
    """Affine envelope ``d_Z(p y, p y') <= a d_Y + b``: ``b`` minimised first, then ``a``."""
    u, ud, v, vd = _map_pairs(p)
    u, v = u.ravel(), v.ravel()
    b = Fraction(int(v[u == 0].max()), vd) if (u == 0).any() else Fraction(0)
    pos = u > 0
    if not pos.any():
        return Fraction(0), b
    # slope needed once b is fixed
    a = max(Fraction(int(vv), vd) / Fraction(int(uu), ud) - b / Fraction(int(uu), ud) for uu, vv in zip(u[pos], v[pos]))
    return max(a, Fraction(0)), b


@dataclass
class CompressionFit:
    r: float
    C: float
    D: float
    feasible: bool
    n_pairs: int


def _compress_ok(t: np.ndarray, rho: np.ndarray, r: float, split: float) -> bool:
    ratio = t**r / rho
    top, bottom = ratio[t >= split], ratio[t < split]
    if not len(bottom) or not len(top):
        return True
    return top.max() <= bottom.max() * (1 + 1e-9)


def compression_check(d: np.ndarray, e: np.ndarray, r: float, C: float, D: float, tol: float = 1e-9) -> bool:
    """``(1/C) d**r - D <= e <= C d + D`` on every pair, up to a relative tolerance."""
    scale = max(1.0, float(np.abs(e).max(initial=0.0)), float(np.abs(d).max(initial=0.0)))
    lower = d**r / C - D <= e + tol * scale
    upper = e <= C * d + D + tol * scale
    return bool(lower.all() and upper.all())


def compression_fit(d, e, *, step: float = 0.001, r: float | None = None) -> CompressionFit:
    """Largest grid exponent ``r`` in ``[0, 1]`` with an admissible ``(C, D)`` for the cloud.

    The exponent is read off the lower envelope ``rho(t) = min{e : d >= t}``
    on the upper half of the positive distances (geometric split): ``r`` is
    accepted when ``t**r / rho(t)`` over the top part of that range stays
    below its maximum over the bottom part.
    With ``r`` given, only ``C`` and ``D`` are fitted.  This is a finite
    sample estimate, not the asymptotic exponent.
    """
    d = np.asarray(d, dtype=float).ravel()
    e = np.asarray(e, dtype=float).ravel()
    if d.shape != e.shape:
        raise ValueError("cloud arrays differ in length")
    order = np.argsort(d, kind="stable")
    ds, es = d[order], e[order]
    ts, first = np.unique(ds, return_index=True)
    suffix = np.minimum.accumulate(es[::-1])[::-1][first]
    keep = (ts > 0) & (suffix > 0)
    t, rho = ts[keep], suffix[keep]
    if r is None:
        r = 0.0
        if len(t):
            # large-scale behaviour: keep the upper half of the range when it is well populated
            far = t >= np.sqrt(t.min() * t.max())
            tf, rf = (t[far], rho[far]) if far.sum() >= 4 else (t, rho)
            split = float(np.sqrt(tf.min() * tf.max()))
            grid = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
            ok = [g for g in grid if _compress_ok(tf, rf, float(g), split)]
            r = float(max(ok)) if ok else 0.0
    C = 1.0
    if len(t):
        C = max(C, float((t**r / rho).max()))
    pos = d > 0
    if pos.any():
        C = max(C, float((e[pos] / d[pos]).max()))
    D = 0.0
    if d.size:
        D = max(0.0, float((d**r / C - e).max()), float((e - C * d).max()))
    return CompressionFit(r, C, D, compression_check(d, e, r, C, D), int(d.size))


@dataclass
class ModuliBundle:
    """Moduli entering the distortion constants, each with provenance."""

    rhoX: Modulus
    etaX: Modulus
    rhoY: Modulus
    etaY: Modulus
    rhoZ: Modulus
    etaZ: Modulus
    theta: LiftingProfile
    S: Modulus
    NC: int
    C: Fraction
    geometry: GeometryReport
    hypothesis: str
    extra: dict = field(default_factory=dict)

    def E(self, R: Fraction) -> Fraction:
        """Bound on the number of sites where two configurations at distance ``<= R`` differ."""
        g = self.geometry
        if self.hypothesis == "Y-discrete+Z-bounded":
            delta = min(g.deltaY, Fraction(1)) if g.deltaY is not None else Fraction(1)
            return self.NC * (R + 1) / delta
        if self.hypothesis == "Y-bounded+Z-bounded":
            return Fraction(self.NC * self.extra["NY"](R))
        if g.deltaX is None:
            return Fraction(0)
        return R / g.deltaX

    def C1(self, R) -> Fraction:
        R = Fraction(R)
        return 2 * R * self.theta.at(self.rhoZ.inverse(R)) + self.rhoY.inverse(R) + R * self.rhoX.inverse(R)

    def C2(self, R) -> Fraction:
        R = Fraction(R)
        S = self.S(R + 1)
        return self.etaY(R) + self.E(R) * (self.etaZ(S + 2 * self.C) + self.etaX(R) + 1)


def compute_moduli(lam: LambdaStructure, *, hypothesis: str | None = None) -> ModuliBundle:
    """Exact moduli of the component walls, the lifting profile and the support bound data."""
    W = lam.W
    geo = hypothesis_check(W)
    hyp = hypothesis or geo.hypothesis
    if hyp is None or not geo.flags.get(hyp):
        raise PropertyViolation(f"hypothesis set {hyp!r} does not hold for this instance")
    rX, eX = empirical_moduli(W.X, lam.dsigma)
    rY, eY = empirical_moduli(W.Y, lam.dnu)
    rZ, eZ = empirical_moduli(W.Z, wall_metric_space(lam.mu))
    Y = W.Y
    return ModuliBundle(
        rX, eX, rY, eY, rZ, eZ,
        lifting_modulus(W.p),
        bornologous_modulus(W.p),
        geo.NC,
        W.C,
        geo,
        hyp,
        {"NY": lambda R: bounded_geometry(Y, R)},
    )


@dataclass
class CertificationReport:
    n_points: int
    n_pairs: int
    hypothesis: str
    checked_c1: int
    checked_c2: int
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    ia, ib = np.triu_indices(n, 1)
    return ia.astype(np.intp), ib.astype(np.intp)


def _prefix_check(key: np.ndarray, key_den: int, val: np.ndarray, val_den: int, bound, ia, ib, label: str,
                  max_witnesses: int) -> tuple[int, list[dict]]:
    """For each attained ``R`` of ``key``: ``max{val : key <= R} <= bound(R)``."""
    if not len(key):
        return 0, []
    order = np.argsort(key, kind="stable")
    k, v = key[order], val[order]
    run = np.maximum.accumulate(v)
    arg = np.zeros(len(v), dtype=np.intp)
    best = 0
    for i in range(len(v)):  # position of the running maximum
        if v[i] > v[best]:
            best = i
        arg[i] = best
    uniq, last = np.unique(k, return_index=False, return_counts=True)
    ends = np.cumsum(last) - 1
    out = []
    for R_num, end in zip([0] + uniq.tolist(), [None] + ends.tolist()):
        R = Fraction(int(R_num), key_den)
        worst = Fraction(int(run[end]), val_den) if end is not None else Fraction(0)
        b = bound(R)
        if worst > b and len(out) < max_witnesses:
            j = int(order[arg[end]])
            out.append({"check": label, "R": R, "bound": b, "value": worst, "pair": (int(ia[j]), int(ib[j]))})
    return len(uniq) + 1, out


def certify_c1c2(lam: LambdaStructure, points, *, moduli: ModuliBundle | None = None,
                 max_witnesses: int = 20, pairs: tuple[np.ndarray, np.ndarray] | None = None) -> CertificationReport:
    """Check both distortion implications on every pair and every attained radius.

    ``d_lambda <= R`` must force ``d <= C1(R)`` and ``d <= R`` must force
    ``d_lambda <= C2(R)``.  Radii range over attained values (and 0); the
    bounds are nondecreasing in ``R``, so this covers every real ``R``.
    """
    W = lam.W
    P = points if isinstance(points, PointSet) else PointSet.from_points(list(points), W.n_sites, W.x0)
    M = moduli or compute_moduli(lam)
    ia, ib = pairs if pairs is not None else _pairs(len(P))
    d = WreathMetric(W).pair_ints(P, ia, P, ib)
    dl = lam.pair_ints(P, ia, P, ib)
    n1, v1 = _prefix_check(dl, lam.den, d, W.den, M.C1, ia, ib, "C1", max_witnesses)
    n2, v2 = _prefix_check(d, W.den, dl, lam.den, M.C2, ia, ib, "C2", max_witnesses)
    return CertificationReport(len(P), len(ia), M.hypothesis, n1, n2, v1 + v2)


def comp_lower_bound(alpha, beta, gamma, delta):
    """``min(alpha, beta, gamma / (gamma + delta))`` with ``gamma = delta = 0`` read as 0."""
    vals = [alpha, beta, gamma, delta]
    exact = all(not isinstance(v, float) for v in vals)
    alpha, beta, gamma, delta = (as_fraction(v) if exact else float(v) for v in vals)
    ratio = 0 if gamma + delta == 0 else gamma / (gamma + delta)
    return min(alpha, beta, ratio)
