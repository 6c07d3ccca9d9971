"""Finite groups as multiplication tables, wreath products, and lazy elements of G wr Z."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from ._validation import CapExceeded

__all__ = [
    "FiniteGroup",
    "FiniteWreathGroup",
    "WreathElementOverZ",
    "cyclic",
    "symmetric",
    "direct_product",
    "quotient",
    "subgroup_closure",
    "normal_closure",
    "wreath_product",
    "cayley_graph",
    "DEFAULT_WREATH_CAP",
    "EXHAUSTIVE_AXIOM_LIMIT",
]

DEFAULT_WREATH_CAP = 2**20
EXHAUSTIVE_AXIOM_LIMIT = 512


class FiniteGroup:
    """A group on ``0..n-1`` given by its multiplication table.

    ``generators`` may contain repeats; they are kept so that induced word
    metrics on quotients use the image of the original generating set.
    """

    def __init__(self, mul, generators: Sequence[int] = (), labels: Sequence | None = None, *, check: bool = True):
        mul = np.asarray(mul, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1]:
            raise ValueError("multiplication table must be square")
        n = mul.shape[0]
        if n < 1:
            raise ValueError("a group has at least one element")
        if mul.min() < 0 or mul.max() >= n:
            raise ValueError("table entries must be element indices")
        mul.setflags(write=False)
        self.mul = mul
        self.order = n
        self.generators = tuple(int(g) for g in generators)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        ident = [e for e in range(n) if (mul[e] == np.arange(n)).all() and (mul[:, e] == np.arange(n)).all()]
        if not ident:
            raise ValueError("table has no two-sided identity")
        self.identity = ident[0]
        inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.flatnonzero(mul[a] == self.identity)
            if len(hits) != 1 or mul[hits[0], a] != self.identity:
                raise ValueError(f"element {a} has no two-sided inverse")
            inv[a] = hits[0]
        inv.setflags(write=False)
        self.inverse = inv
        if check:
            self.check_axioms()

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, generators={self.generators})"

    def __len__(self) -> int:
        return self.order

    def m(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    def check_axioms(self, *, sample: int = 20000, seed: int = 0) -> None:
        """Associativity: exhaustive up to ``EXHAUSTIVE_AXIOM_LIMIT`` elements, sampled above."""
        n = self.order
        M = self.mul
        if n <= EXHAUSTIVE_AXIOM_LIMIT:
            for a in range(n):
                left = M[M[a]]  # (a*b)*c as [b, c]
                right = M[a][M]  # a*(b*c) as [b, c]
                if not np.array_equal(left, right):
                    b, c = np.argwhere(left != right)[0]
                    raise ValueError(f"associativity fails at ({a}, {int(b)}, {int(c)})")
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(0, n, size=(3, sample))
            bad = M[M[a, b], c] != M[a, M[b, c]]
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise ValueError(f"associativity fails at ({a[k]}, {b[k]}, {c[k]})")
        if self.generators and len(self.generated_by(self.generators)) != n:
            raise ValueError("generators do not generate the group")

    def generated_by(self, gens: Iterable[int]) -> frozenset[int]:
        gens = [int(g) for g in gens]
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            g = queue.popleft()
            for s in gens:
                h = int(self.mul[g, s])
                if h not in seen:
                    seen.add(h)
                    queue.append(h)
        return frozenset(seen)


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group order must be >= 1")
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, [1] if n > 1 else [], check=False)


def symmetric(k: int) -> FiniteGroup:
    """Symmetric group on ``k`` letters; composition ``(s*t)(i) = s(t(i))``."""
    perms = list(permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    mul = [[index[tuple(s[t[i]] for i in range(k))] for t in perms] for s in perms]
    gens = []
    if k > 1:
        gens.append(index[tuple([1, 0] + list(range(2, k)))])
        gens.append(index[tuple(list(range(1, k)) + [0])])
    return FiniteGroup(mul, gens, labels=perms)


def direct_product(A: FiniteGroup, B: FiniteGroup) -> FiniteGroup:
    nb = B.order
    ia = np.arange(A.order).repeat(nb)
    ib = np.tile(np.arange(nb), A.order)
    mul = A.mul[ia[:, None], ia[None, :]] * nb + B.mul[ib[:, None], ib[None, :]]
    gens = [a * nb + B.identity for a in A.generators] + [A.identity * nb + b for b in B.generators]
    labels = [(x, y) for x in A.labels for y in B.labels]
    return FiniteGroup(mul, gens, labels, check=False)


def subgroup_closure(G: FiniteGroup, S: Iterable[int]) -> frozenset[int]:
    return G.generated_by(S)


def _check_normal(G: FiniteGroup, N: frozenset[int]) -> None:
    if G.identity not in N:
        raise ValueError("subset does not contain the identity")
    for a in N:
        for b in N:
            if G.m(a, G.inv(b)) not in N:
                raise ValueError(f"subset is not a subgroup: {a} * {b}^-1 leaves it")
    for g in range(G.order):
        for n in N:
            c = G.m(G.m(g, n), G.inv(g))
            if c not in N:
                raise ValueError(f"subgroup is not normal: {g} * {n} * {g}^-1 = {c} leaves it")


def quotient(G: FiniteGroup, N: Iterable[int]) -> tuple[FiniteGroup, np.ndarray]:
    """``G/N`` together with the projection as an index array."""
    N = frozenset(int(x) for x in N)
    _check_normal(G, N)
    coset_of = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for g in range(G.order):
        if coset_of[g] < 0:
            members = [G.m(g, n) for n in N]
            coset_of[members] = len(reps)
            reps.append(g)
    mul = np.array([[coset_of[G.m(a, b)] for b in reps] for a in reps], dtype=np.int64)
    gens = [int(coset_of[s]) for s in G.generators]
    return FiniteGroup(mul, gens, check=False), coset_of


def normal_closure(G: FiniteGroup, S: Iterable[int]) -> frozenset[int]:
    """Smallest normal subgroup containing ``S``."""
    current = {int(s) for s in S}
    if not current:
        raise ValueError("normal closure of an empty set")
    while True:
        conj = {G.m(G.m(g, s), G.inv(g)) for g in range(G.order) for s in current}
        closed = set(G.generated_by(current | conj))
        if closed == current:
            return frozenset(current)
        current = closed


def cayley_graph(G, generators: Sequence[int] | None = None) -> list[tuple[int, int]]:
    """Undirected edges ``{g, g s}``, deduplicated, loops dropped."""
    gens = G.generators if generators is None else tuple(generators)
    src = np.arange(G.order, dtype=np.int64)
    edges = set()
    for s in gens:
        if hasattr(G, "right_multiply_all"):
            dst = G.right_multiply_all(s)
        else:
            dst = np.asarray(G.mul)[:, s]
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        keep = lo != hi
        edges.update(zip(lo[keep].tolist(), hi[keep].tolist()))
    return sorted(edges)


class FiniteWreathGroup:
    """``G wr H`` for finite ``G`` and ``H``, with elements encoded lazily.

    Element ``(f, h)`` with ``f: H -> G`` is encoded as
    ``(sum_k f(k) |G|^k) * |H| + h``.  Multiplication is
    ``(f, h)(g, h') = (f * (h.g), h h')`` with ``(h.g)(z) = g(h^-1 z)``.
    """

    def __init__(self, base: FiniteGroup, top: FiniteGroup, *, cap: int = DEFAULT_WREATH_CAP):
        self.base = base
        self.top = top
        order = base.order ** top.order * top.order
        if order > cap:
            raise CapExceeded(
                f"|G wr H| = {order} exceeds the enumeration cap {cap}; "
                "use WreathElementOverZ for lazy arithmetic instead",
                kind="wreath_order", cap=cap, value=order,
            )
        self.order = order
        self.identity = self.encode([base.identity] * top.order, top.identity)
        gens = [self.encode([base.identity] * top.order, t) for t in top.generators]
        for s in base.generators:
            f = [base.identity] * top.order
            f[top.identity] = s
            gens.append(self.encode(f, top.identity))
        self.generators = tuple(gens)
        self._powers = base.order ** np.arange(top.order, dtype=np.int64)

    def __repr__(self) -> str:
        return f"FiniteWreathGroup(|G|={self.base.order}, |H|={self.top.order})"

    def __len__(self) -> int:
        return self.order

    def encode(self, f: Sequence[int], h: int) -> int:
        code = 0
        for k in reversed(range(self.top.order)):
            code = code * self.base.order + int(f[k])
        return code * self.top.order + int(h)

    def decode(self, x: int) -> tuple[tuple[int, ...], int]:
        code, h = divmod(int(x), self.top.order)
        f = []
        for _ in range(self.top.order):
            code, r = divmod(code, self.base.order)
            f.append(r)
        return tuple(f), h

    def decode_all(self) -> tuple[np.ndarray, np.ndarray]:
        """Lamp array ``(order, |H|)`` and position array for every element."""
        idx = np.arange(self.order, dtype=np.int64)
        h = idx % self.top.order
        code = idx // self.top.order
        F = (code[:, None] // self._powers[None, :]) % self.base.order
        return F, h

    def m(self, a: int, b: int) -> int:
        f, h = self.decode(a)
        g, h2 = self.decode(b)
        hinv = self.top.inv(h)
        prod_f = [self.base.m(f[z], g[self.top.m(hinv, z)]) for z in range(self.top.order)]
        return self.encode(prod_f, self.top.m(h, h2))

    def inv(self, a: int) -> int:
        f, h = self.decode(a)
        hinv = self.top.inv(h)
        # (f, h)^-1 = (h^-1 . f^-1, h^-1)
        g = [self.base.inv(f[self.top.m(h, z)]) for z in range(self.top.order)]
        return self.encode(g, hinv)

    def right_multiply_all(self, s: int) -> np.ndarray:
        """Vectorised ``x -> x s`` over all elements."""
        F, h = self.decode_all()
        g, hs = self.decode(s)
        g = np.asarray(g, dtype=np.int64)
        hinv = self.top.inverse[h]
        shifted = g[self.top.mul[hinv[:, None], np.arange(self.top.order)[None, :]]]
        newF = self.base.mul[F, shifted]
        newh = self.top.mul[h, hs]
        return (newF @ self._powers) * self.top.order + newh

    def as_group(self, *, table_cap: int = 4096) -> FiniteGroup:
        if self.order > table_cap:
            raise CapExceeded(f"multiplication table of order {self.order} exceeds {table_cap}",
                              kind="table_order", cap=table_cap, value=self.order)
        mul = np.array([[self.m(a, b) for b in range(self.order)] for a in range(self.order)], dtype=np.int64)
        return FiniteGroup(mul, self.generators, check=False)

    def lamp_subgroup(self) -> frozenset[int]:
        """The base ``⊕_H G`` (elements with trivial position)."""
        return frozenset(x for x in range(self.order) if x % self.top.order == self.top.identity)


def wreath_product(G: FiniteGroup, H: FiniteGroup, *, cap: int = DEFAULT_WREATH_CAP) -> FiniteWreathGroup:
    return FiniteWreathGroup(G, H, cap=cap)


@dataclass(frozen=True)
class WreathElementOverZ:
    """Element of ``G wr Z`` for a finite abelian ``G``: sparse lamps plus an integer position."""

    lamp: tuple[tuple[int, int], ...]
    pos: int
    group: FiniteGroup

    def __post_init__(self):
        e = self.group.identity
        cleaned = tuple(sorted((int(k), int(v)) for k, v in self.lamp if int(v) != e))
        if len({k for k, _ in cleaned}) != len(cleaned):
            raise ValueError("duplicate lamp site")
        object.__setattr__(self, "lamp", cleaned)

    @classmethod
    def identity(cls, G: FiniteGroup) -> "WreathElementOverZ":
        return cls((), 0, G)

    def __mul__(self, other: "WreathElementOverZ") -> "WreathElementOverZ":
        G = self.group
        lamps = dict(self.lamp)
        for k, v in other.lamp:
            site = k + self.pos  # (h.g)(z) = g(z - h)
            lamps[site] = G.m(lamps.get(site, G.identity), v)
        return WreathElementOverZ(tuple(lamps.items()), self.pos + other.pos, G)

    def inverse(self) -> "WreathElementOverZ":
        G = self.group
        return WreathElementOverZ(tuple((k - self.pos, G.inv(v)) for k, v in self.lamp), -self.pos, G)

    def is_identity(self) -> bool:
        return not self.lamp and self.pos == 0

    def key(self) -> tuple:
        return (self.lamp, self.pos)

    def reduce(self, quotient_group: FiniteGroup, projection: np.ndarray, n: int) -> tuple[tuple[int, ...], int]:
        """Image in ``(G/K) wr (Z/n)``; ``projection`` maps ``G -> G/K`` by index.

        Lamps on sites congruent mod ``n`` are multiplied together (``G`` abelian).
        """
        f = [quotient_group.identity] * n
        for k, v in self.lamp:
            f[k % n] = quotient_group.m(f[k % n], int(projection[v]))
        return tuple(f), self.pos % n


def generators_over_Z(G: FiniteGroup) -> list[WreathElementOverZ]:
    """``(e, +1)``, ``(e, -1)`` and ``(delta_s, 0)`` for each generator ``s`` of ``G``."""
    gens = [WreathElementOverZ((), 1, G), WreathElementOverZ((), -1, G)]
    for s in G.generators:
        gens.append(WreathElementOverZ(((0, s),), 0, G))
    return gens


def ball_over_Z(G: FiniteGroup, radius: int) -> list[tuple[WreathElementOverZ, int]]:
    """Elements of ``G wr Z`` with word length ``<= radius`` and their lengths (BFS)."""
    gens = generators_over_Z(G)
    gens += [g.inverse() for g in gens if g.lamp]
    start = WreathElementOverZ.identity(G)
    seen = {start.key(): 0}
    order = [(start, 0)]
    queue = deque([start])
    while queue:
        x = queue.popleft()
        dist = seen[x.key()]
        if dist == radius:
            continue
        for s in gens:
            y = x * s
            if y.key() not in seen:
                seen[y.key()] = dist + 1
                order.append((y, dist + 1))
                queue.append(y)
    return order
