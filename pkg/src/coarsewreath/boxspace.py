"""Box spaces of wreath products ``G wr Z`` (and ``G wr H`` for finite ``H``).

Level ``i`` of a chain is the finite quotient ``(G/K_i) wr (Z/n_i)``: lamps are
projected to ``G/K_i`` and lamps on sites congruent mod ``n_i`` are multiplied
together.  The kernel of that quotient map is the normal subgroup ``M_i``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Iterable, Sequence

import numpy as np

from ._validation import CapExceeded, check_positive_int
from .analysis import Modulus, moduli_from_ints
from .embedding import DenseBlock, EmbeddingTable
from .groups import (
    DEFAULT_WREATH_CAP,
    FiniteGroup,
    FiniteWreathGroup,
    ball_over_Z,
    cayley_graph,
    cyclic,
    quotient,
)
from .lift import LambdaStructure, hypothesis_check
from .metric import FiniteMetricSpace, word_metric
from .walls import WallsStructure, canonical_walls, cycle_walls
from .wreath import PointSet, WreathInstance, DenseMap

__all__ = [
    "precondition_gruenberg",
    "SubgroupChainZ",
    "Level",
    "WreathChain",
    "build_wreath_chain",
    "finite_H_box",
    "ChainReport",
    "check_M_chain",
    "BoxSpace",
    "assemble_box",
    "default_rule",
    "BoxEmbedding",
    "box_embedding",
    "group_walls",
]

log = logging.getLogger(__name__)

PAIR_CHUNK = 1 << 18


def precondition_gruenberg(G: FiniteGroup, H: FiniteGroup | None = None) -> tuple[bool, str]:
    """Residual finiteness precondition for ``G wr H``; ``H = None`` stands for the integers.

    Accepted: ``G`` abelian with ``H = Z``, or ``H`` finite.  Otherwise rejected,
    since a wreath product with infinite top group is residually finite only
    when the base is abelian (Gruenberg).
    """
    if H is not None:
        return True, "H finite: every G wr H is finite, hence residually finite"
    if G.is_abelian():
        return True, "G abelian and H = Z: G wr Z is residually finite (Gruenberg)"
    return False, "rejected: H = Z is infinite and G is not abelian, so G wr Z is not residually finite (Gruenberg)"


@dataclass(frozen=True)
class SubgroupChainZ:
    """Subgroups ``n_i Z`` of the integers, nested by divisibility."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        mods = tuple(check_positive_int("modulus", m) for m in self.moduli)
        object.__setattr__(self, "moduli", mods)
        for a, b in zip(mods, mods[1:]):
            if b % a:
                raise ValueError(f"chain is not nested: {a} does not divide {b}")

    @property
    def strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.moduli, self.moduli[1:]))


@dataclass
class Level:
    index: int
    Q: FiniteGroup
    proj: np.ndarray  # G -> G/K_i by element index
    top: FiniteGroup
    n: int | None  # modulus when the top group is Z, None for a finite top group
    group: FiniteWreathGroup

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def expected_index(self) -> int:
        return self.Q.order ** self.top.order * self.top.order


@dataclass
class WreathChain:
    G: FiniteGroup
    K: list[frozenset[int]]
    levels: list[Level]
    H: FiniteGroup | None = None  # None: the top group is Z
    notice: str = ""

    def reduce(self, element, i: int) -> tuple[tuple[int, ...], int]:
        """Image of a source element in level ``i``.

        Source elements are :class:`WreathElementOverZ` when the top group is
        ``Z`` and ``(f, h)`` pairs of ``G wr H`` otherwise.
        """
        lev = self.levels[i]
        if lev.n is not None:
            return element.reduce(lev.Q, lev.proj, lev.n)
        f, h = element
        return tuple(int(lev.proj[x]) for x in f), int(h)

    def step_map(self, i: int) -> Callable[[tuple[int, ...], int], tuple[tuple[int, ...], int]]:
        """The map from level ``i + 1`` to level ``i``."""
        hi, lo = self.levels[i + 1], self.levels[i]
        pi = np.full(hi.Q.order, -1, dtype=np.int64)
        for g in range(self.G.order):
            a, b = int(hi.proj[g]), int(lo.proj[g])
            if pi[a] not in (-1, b):
                raise ValueError(f"K_{i + 2} is not contained in K_{i + 1}: projection is not well defined")
            pi[a] = b

        def phi(f, h):
            if lo.n is None:
                return tuple(int(pi[x]) for x in f), int(h)
            out = [lo.Q.identity] * lo.n
            for k, x in enumerate(f):
                out[k % lo.n] = lo.Q.m(out[k % lo.n], int(pi[x]))
            return tuple(out), int(h) % lo.n

        return phi


def _check_K_chain(G: FiniteGroup, K_chain: Sequence[Iterable[int]]) -> list[frozenset[int]]:
    Ks = [frozenset(int(x) for x in K) for K in K_chain]
    for i, (a, b) in enumerate(zip(Ks, Ks[1:])):
        if not b <= a:
            raise ValueError(f"K chain is not nested at position {i + 1}")
    if Ks and frozenset.intersection(*Ks) != {G.identity}:
        raise ValueError("the K chain does not intersect trivially")
    return Ks


def _make_level(i: int, G: FiniteGroup, K: frozenset[int], top: FiniteGroup, n: int | None, cap: int) -> Level:
    Q, proj = quotient(G, K)
    return Level(i, Q, proj, top, n, FiniteWreathGroup(Q, top, cap=cap))


def build_wreath_chain(G: FiniteGroup, K_chain: Sequence[Iterable[int]], n_chain: Sequence[int] | SubgroupChainZ,
                       *, cap: int = DEFAULT_WREATH_CAP) -> WreathChain:
    """Levels ``(G/K_i) wr (Z/n_i)``; stops with a notice at the first level above ``cap``."""
    ok, why = precondition_gruenberg(G)
    if not ok:
        raise ValueError(why)
    chain = n_chain if isinstance(n_chain, SubgroupChainZ) else SubgroupChainZ(tuple(n_chain))
    Ks = _check_K_chain(G, K_chain)
    if len(Ks) != len(chain.moduli):
        raise ValueError("K chain and n chain have different lengths")
    levels, notice = [], ""
    for i, (K, n) in enumerate(zip(Ks, chain.moduli)):
        try:
            levels.append(_make_level(i, G, K, cyclic(n), n, cap))
        except CapExceeded as exc:
            notice = f"truncated at level {i + 1}: {exc}"
            log.warning(notice)
            break
    return WreathChain(G, Ks, levels, None, notice)


def finite_H_box(G: FiniteGroup, K_chain: Sequence[Iterable[int]], H: FiniteGroup,
                 *, cap: int = DEFAULT_WREATH_CAP) -> WreathChain:
    """Levels ``(G/K_i) wr H`` for a finite top group ``H``."""
    Ks = _check_K_chain(G, K_chain)
    levels = [_make_level(i, G, K, H, None, cap) for i, K in enumerate(Ks)]
    return WreathChain(G, Ks, levels, H)


@dataclass
class ChainReport:
    index_ok: bool
    nested_ok: bool
    trivial_ok: bool
    ball_size: int
    indices: list[int] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.index_ok and self.nested_ok and self.trivial_ok


def _source_ball(chain: WreathChain, L: int) -> list:
    if chain.H is None:
        return [e for e, _ in ball_over_Z(chain.G, L)]
    WG = FiniteWreathGroup(chain.G, chain.H)
    D = word_metric(cayley_graph(WG), WG.order)
    within = np.flatnonzero(D.num[WG.identity] <= L * D.den)
    return [WG.decode(int(x)) for x in within]


def _is_identity(level: Level, f, h) -> bool:
    return all(x == level.Q.identity for x in f) and h == level.top.identity


def check_M_chain(chain: WreathChain, L: int, *, exhaustive_limit: int = 1 << 14) -> ChainReport:
    """Index identity, nesting of the kernels and trivial intersection on a word ball of radius ``L``."""
    wit: list[str] = []
    indices = []
    index_ok = True
    for lev in chain.levels:
        indices.append(lev.order)
        if lev.order != lev.expected_index:
            index_ok = False
            wit.append(f"level {lev.index + 1}: order {lev.order} != {lev.expected_index}")
        # the images of the generators must generate the level, so the quotient map is onto
        try:
            word_metric(cayley_graph(lev.group), lev.order)
        except ValueError:
            index_ok = False
            wit.append(f"level {lev.index + 1}: generator images do not generate")
    ball = _source_ball(chain, L)
    images = [[chain.reduce(x, i) for x in ball] for i in range(len(chain.levels))]
    nested_ok = True
    for i in range(len(chain.levels) - 1):
        hi, lo = chain.levels[i + 1], chain.levels[i]
        phi = chain.step_map(i)
        enc_phi = lambda x: lo.group.encode(*phi(*hi.group.decode(x)))  # noqa: E731
        for a, b in zip(hi.group.generators, lo.group.generators):
            if enc_phi(a) != b:
                nested_ok = False
                wit.append(f"level {i + 2} -> {i + 1}: generator {a} maps to {enc_phi(a)}, expected {b}")
        elems = range(hi.order) if hi.order <= exhaustive_limit else np.random.default_rng(0).integers(
            0, hi.order, exhaustive_limit).tolist()
        for x in elems:
            for s in hi.group.generators:
                if enc_phi(hi.group.m(x, s)) != lo.group.m(enc_phi(x), enc_phi(s)):
                    nested_ok = False
                    wit.append(f"level {i + 2} -> {i + 1}: not a homomorphism at ({x}, {s})")
                    break
            if not nested_ok:
                break
        for x, a, b in zip(ball, images[i + 1], images[i]):
            if phi(*a) != b:
                nested_ok = False
                wit.append(f"level {i + 2} -> {i + 1}: quotient maps do not factor at {x}")
                break
    trivial_ok = True
    for k, x in enumerate(ball):
        if chain.H is None:
            nontrivial = not x.is_identity()
        else:
            nontrivial = any(v != chain.G.identity for v in x[0]) or x[1] != chain.H.identity
        if nontrivial and all(_is_identity(lev, *images[i][k]) for i, lev in enumerate(chain.levels)):
            trivial_ok = False
            wit.append(f"nontrivial element {x} dies in every level")
    return ChainReport(index_ok, nested_ok, trivial_ok, len(ball), indices, wit[:20])


def default_rule(diam_i: Fraction, diam_j: Fraction, i: int, j: int) -> Fraction:
    return diam_i + diam_j + abs(i - j)


class BoxSpace:
    """Disjoint union of finite metric spaces; component ``i`` and ``j`` sit at ``rule(diam_i, diam_j, i, j)``."""

    def __init__(self, components: Sequence[FiniteMetricSpace], rule=default_rule):
        self.components = list(components)
        self.rule = rule
        self.diameters = [M.diameter() for M in self.components]
        for i in range(len(self.components)):
            for j in range(i + 1, len(self.components)):
                if self.inter(i, j) <= max(self.diameters[i], self.diameters[j]):
                    raise ValueError(f"components {i} and {j} are not farther apart than their diameters")
        offs = [Fraction(0)]
        for i in range(1, len(self.components)):
            offs.append(offs[-1] + self.diameters[i - 1] + self.diameters[i] + 1)
        self.offsets = offs

    def inter(self, i: int, j: int) -> Fraction:
        return Fraction(self.rule(self.diameters[i], self.diameters[j], i, j))

    def distance(self, i: int, u: int, j: int, v: int) -> Fraction:
        return self.components[i].d(u, v) if i == j else self.inter(i, j)

    def metric(self) -> FiniteMetricSpace:
        """The whole box as one finite metric space with points ``(component, point)``."""
        labels = [(i, p) for i, M in enumerate(self.components) for p in range(len(M))]
        rows = []
        for i, u in labels:
            rows.append([self.distance(i, u, j, v) for j, v in labels])
        return FiniteMetricSpace(labels, rows)


def assemble_box(components: Sequence[FiniteMetricSpace], rule=default_rule) -> BoxSpace:
    return BoxSpace(components, rule)


def group_walls(Q: FiniteGroup) -> WallsStructure:
    """Isometric walls on the Cayley graph of ``Q``: cycle arcs for cyclic generation, cut decomposition otherwise."""
    edges = cayley_graph(Q)
    n = Q.order
    if len(Q.generators) == 1 and (n <= 2 or len(edges) == n):
        g = Q.generators[0]
        order = [Q.identity]
        while len(order) < n:
            order.append(Q.m(order[-1], g))
        base = cycle_walls(n)
        return WallsStructure(range(n), [([order[k] for k in base.sides(A)], w) for A, w in base.halfspaces])
    return canonical_walls(word_metric(edges, n))


def _l1_norms(table: EmbeddingTable) -> list[Fraction]:
    """``||f(x)||_1`` for every point of a ``p = 1`` table."""
    out = []
    dense = [b for b in table.blocks if isinstance(b, DenseBlock)]
    part_total = sum((b.weight / 2 for b in table.blocks if not isinstance(b, DenseBlock)), Fraction(0))
    for i in range(len(table.points)):
        s = part_total
        for b in dense:
            for w, v in zip(b.weights, b.num[i].tolist()):
                s += w * Fraction(abs(v), b.den)
        out.append(s)
    return out


@dataclass
class BoxEmbedding:
    box: BoxSpace
    tables: list[EmbeddingTable]
    offsets: list[Fraction]
    rho: Modulus
    eta: Modulus
    norms: list[tuple[Fraction, Fraction]]  # (min, max) coordinate norm per component
    offset_ok: bool
    valid_everywhere: bool
    unbounded: bool
    growth_K: Fraction | None
    witnesses: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.offset_ok and self.valid_everywhere and self.unbounded


def _pair_chunks(n: int, chunk: int = PAIR_CHUNK):
    ia, ib = np.triu_indices(n, 1)
    for s in range(0, len(ia), chunk):
        yield ia[s : s + chunk], ib[s : s + chunk]


def box_embedding(chain: WreathChain, *, offsets: Sequence | None = None, with_tables: bool = True) -> BoxEmbedding:
    """Lambda embeddings of every level placed on disjoint coordinate blocks, plus one offset coordinate.

    Cross-component embedding distance is ``||f_i(u)|| + ||f_j(v)|| + |o_i - o_j|``
    and must dominate the box distance.  The returned envelopes hold for
    every pair of the box at once.
    """
    comps, lams = [], []
    for lev in chain.levels:
        top = lev.top
        X = word_metric(cayley_graph(lev.Q), lev.Q.order)
        Y = word_metric(cayley_graph(top), top.order)
        W = WreathInstance(X, lev.Q.identity, DenseMap.identity(Y))
        if not hypothesis_check(W).ok:
            raise ValueError(f"level {lev.index + 1} fails every hypothesis set")
        zw = group_walls(top)
        lam = LambdaStructure(W, group_walls(lev.Q), zw, zw)
        comps.append(word_metric(cayley_graph(lev.group), lev.order))
        lams.append(lam)
    box = assemble_box(comps)
    offs = [Fraction(o) for o in offsets] if offsets is not None else list(box.offsets)
    wit: list[str] = []
    cross_d, cross_lo, cross_hi, norms = [], [], [], []
    tables = []
    for lev, lam in zip(chain.levels, lams):
        F, h = lev.group.decode_all()
        table = lam.embedding(PointSet(F, h), check=False)
        nrm = _l1_norms(table)
        norms.append((min(nrm), max(nrm)))
        tables.append(table)
    offset_ok = True
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            dbox = box.inter(i, j)
            gap = abs(offs[i] - offs[j])
            if gap < dbox:
                offset_ok = False
                wit.append(f"components {i + 1}, {j + 1}: offset gap {gap} below box distance {dbox}")
            cross_d.append(dbox)
            cross_lo.append(gap + norms[i][0] + norms[j][0])
            cross_hi.append(gap + norms[i][1] + norms[j][1])
    den = lcm(1, *(lam.den for lam in lams), *(M.den for M in comps),
              *(q.denominator for q in cross_d + cross_lo + cross_hi))
    ds, es = [], []
    for lev, lam, M in zip(chain.levels, lams, comps):
        F, h = lev.group.decode_all()
        P = PointSet(F, h)
        for ia, ib in _pair_chunks(len(P)):
            ds.append(M.num[ia, ib] * (den // M.den))
            es.append(lam.pair_ints(P, ia, P, ib) * (den // lam.den))
    ints = lambda qs: np.array([(q * den).numerator for q in qs], dtype=np.int64)  # noqa: E731
    d_all = np.concatenate(ds + [ints(cross_d)])
    rho, _ = moduli_from_ints(d_all, den, np.concatenate(es + [ints(cross_lo)]), den)
    _, eta = moduli_from_ints(d_all, den, np.concatenate(es + [ints(cross_hi)]), den)
    positive = [(t, v) for t, v in rho.table() if t > 0]
    unbounded = bool(positive) and all(v > 0 for _, v in positive) and positive[-1][1] > positive[0][1]
    K = max((t / v for t, v in positive), default=None) if unbounded else None
    if with_tables:
        placed = []
        for table, o in zip(tables, offs):
            n = len(table.points)
            off = DenseBlock(np.full((n, 1), o.numerator, dtype=np.int64), o.denominator, (1,), ("offset",))
            placed.append(EmbeddingTable(table.points, 1, table.blocks + [off]))
        tables = placed
    else:
        tables = []
    return BoxEmbedding(box, tables, offs, rho, eta, norms, offset_ok, offset_ok, unbounded, K, wit)
