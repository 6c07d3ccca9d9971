from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsewreath import CapExceeded
from coarsewreath.groups import (
    FiniteGroup,
    WreathElementOverZ,
    cayley_graph,
    cyclic,
    direct_product,
    normal_closure,
    quotient,
    symmetric,
    wreath_product,
)
from coarsewreath.metric import word_metric
from oracles import bfs_distances


def _assert_group(G: FiniteGroup):
    n = G.order
    e = G.identity
    for a, b, c in product(range(n), repeat=3):
        assert G.m(G.m(a, b), c) == G.m(a, G.m(b, c))
    for a in range(n):
        assert G.m(a, e) == a == G.m(e, a)
        assert G.m(a, G.inv(a)) == e


def test_cyclic_trivial():
    G = cyclic(1)
    assert G.order == 1 and G.generators == ()


def test_quotient_z4_by_z2():
    Q, proj = quotient(cyclic(4), {0, 2})
    assert Q.order == 2
    assert proj.tolist() == [0, 1, 0, 1]


def test_quotient_by_non_normal_subgroup_fails():
    S3 = symmetric(3)
    # a transposition generates a non-normal subgroup; oracle: some conjugate leaves it
    t = S3.generators[0]
    H = {S3.identity, t}
    assert any(S3.m(S3.m(g, t), S3.inv(g)) not in H for g in range(6))
    with pytest.raises(ValueError, match="not normal"):
        quotient(S3, H)


def test_broken_table_rejected():
    with pytest.raises(ValueError):
        FiniteGroup([[0, 1], [1, 1]])


@pytest.mark.parametrize("g,h,order", [(2, 2, 8), (2, 4, 64), (3, 3, 81)])
def test_wreath_order(g, h, order):
    assert wreath_product(cyclic(g), cyclic(h)).order == order


def test_wreath_axioms_exhaustive():
    _assert_group(wreath_product(cyclic(2), cyclic(2)).as_group())
    _assert_group(wreath_product(cyclic(2), cyclic(3)).as_group())


def test_wreath_multiplication_rule():
    W = wreath_product(cyclic(3), cyclic(3))
    # (f, h)(g, h') = (f + h.g, h + h') with (h.g)(z) = g(z - h)
    for _ in range(200):
        rng = np.random.default_rng(_)
        f, g = rng.integers(0, 3, 3).tolist(), rng.integers(0, 3, 3).tolist()
        h, h2 = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        expect_f = [(f[z] + g[(z - h) % 3]) % 3 for z in range(3)]
        got = W.decode(W.m(W.encode(f, h), W.encode(g, h2)))
        assert got == (tuple(expect_f), (h + h2) % 3)


def test_wreath_cap():
    with pytest.raises(CapExceeded, match="WreathElementOverZ"):
        wreath_product(cyclic(2), cyclic(30))


def test_normal_closure_examples():
    W = wreath_product(cyclic(2), cyclic(2))
    G = W.as_group()
    lamp = [g for g in W.generators if W.decode(g)[1] == 0][0]
    N = normal_closure(G, {lamp})
    assert len(N) == 4 and N == W.lamp_subgroup()
    assert normal_closure(G, {G.identity}) == {G.identity}
    assert normal_closure(G, set(W.generators)) == frozenset(range(8))


def test_cayley_graph_cycle_and_trivial():
    edges = cayley_graph(cyclic(5))
    assert sorted(tuple(sorted(e)) for e in edges) == [(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]
    assert cayley_graph(cyclic(1)) == []


def test_lamplighter_cayley_graph_vertex_transitive():
    W = wreath_product(cyclic(2), cyclic(3))
    M = word_metric(cayley_graph(W), W.order)
    profiles = {tuple(np.bincount(M.num[v], minlength=10)) for v in range(W.order)}
    assert len(profiles) == 1
    # independent BFS from the identity over (lamps, position)
    def nbrs(x):
        f, h = x
        yield f, (h + 1) % 3
        yield f, (h - 1) % 3
        g = list(f)
        g[h] ^= 1
        yield tuple(g), h
    ref = bfs_distances(((0, 0, 0), 0), nbrs)
    for (f, h), d in ref.items():
        assert M.num[W.identity, W.encode(f, h)] == d


def test_symmetric_axioms():
    _assert_group(symmetric(3))
    assert not symmetric(3).is_abelian()


def test_direct_product():
    P = direct_product(cyclic(2), cyclic(3))
    _assert_group(P)
    assert P.order == 6 and P.is_abelian()


elements = st.builds(
    lambda lamps, pos: WreathElementOverZ(tuple(lamps.items()), pos, cyclic(3)),
    st.dictionaries(st.integers(-6, 6), st.integers(0, 2), max_size=4),
    st.integers(-5, 5),
)


@settings(max_examples=80, deadline=None)
@given(elements, elements, elements)
def test_over_Z_associative(a, b, c):
    assert ((a * b) * c).key() == (a * (b * c)).key()
    assert (a * a.inverse()).is_identity()


@settings(max_examples=80, deadline=None)
@given(elements, elements, st.sampled_from([1, 2, 3, 4]))
def test_over_Z_reduction_is_homomorphism(a, b, n):
    G = cyclic(3)
    W = wreath_product(G, cyclic(n))
    proj = np.arange(3)
    ra, rb, rab = (x.reduce(G, proj, n) for x in (a, b, a * b))
    assert W.decode(W.m(W.encode(*ra), W.encode(*rb))) == rab
