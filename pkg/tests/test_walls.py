from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsewreath import CapExceeded
from coarsewreath.instances import random_walls
from coarsewreath.metric import FiniteMetricSpace, cycle_metric, validate_metric, word_metric
from coarsewreath.walls import (
    Infeasible,
    WallsStructure,
    check_invariance,
    cut_decompose,
    cycle_walls,
    discrete_walls,
    embed_l1,
    embed_lp,
    is_cnd_kernel,
    path_walls,
    permutation_closure,
    pullback,
    sum_walls,
    wall_metric,
    wall_metric_space,
)
from oracles import cut_weight

K23_EDGES = [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]


def test_single_halfspace():
    W = WallsStructure("ab", [([0], 1)])
    assert wall_metric(W, 0, 1) == 1
    T = embed_l1(W)
    assert T.coordinates() == [[1], [0]]


def test_three_point_structure():
    W = WallsStructure([0, 1, 2], [([0], 1), ([0, 1], 1)])
    assert wall_metric(W, 0, 2) == 2 and wall_metric(W, 1, 2) == 1
    assert embed_l1(W).pnorm_p(0, 2) == 2


def test_cycle_walls_reproduce_cycle_metric():
    for n in range(1, 10):
        assert wall_metric_space(cycle_walls(n)).matrix() == cycle_metric(n).matrix()


def test_five_cycle_arcs_are_two_point_half_weight():
    W = cycle_walls(5)
    assert len(W.halfspaces) == 5
    assert all(bin(A).count("1") == 2 and w == Fraction(1, 2) for A, w in W.halfspaces)


def test_complement_normalization_merges():
    W = WallsStructure(range(3), [([0], 1), ([1, 2], Fraction(1, 2))])
    assert len(W.halfspaces) == 1 and W.weights() == [Fraction(3, 2)]


def test_trivial_halfspaces_dropped_with_warning():
    with pytest.warns(UserWarning):
        W = WallsStructure(range(3), [([], 1), ([0, 1, 2], 1), ([0], 1)])
    assert len(W.halfspaces) == 1


def test_nonpositive_weight_rejected():
    with pytest.raises(ValueError):
        WallsStructure(range(2), [([0], 0)])


def test_lp_examples():
    W = WallsStructure("ab", [([0], 4)])
    assert embed_lp(W, 1).coordinates() == embed_l1(W).coordinates()
    T = embed_lp(W, 2)
    assert T.pnorm_p(0, 1) == 4
    a, b = (np.array(r, dtype=float) for r in T.coordinates())
    assert np.linalg.norm(a - b) == pytest.approx(2.0)


def test_pullback_examples():
    W = cycle_walls(6)
    assert wall_metric_space(pullback(range(6), W)).matrix() == wall_metric_space(W).matrix()
    const = pullback([0] * 4, W)
    assert const.halfspaces == () and all(v == 0 for row in wall_metric_space(const).matrix() for v in row)
    q = [i % 6 for i in range(12)]
    P = pullback(q, W)
    C6 = cycle_metric(6)
    assert all(wall_metric(P, i, j) == C6.d(q[i], q[j]) for i in range(12) for j in range(12))


def test_sum_walls_square_and_identity():
    a = WallsStructure([0, 1], [([0], 1)])
    S = sum_walls([a, a])
    assert len(S.ground) == 4
    D = wall_metric_space(S)
    assert sorted(D.num[0].tolist()) == [0, 1, 1, 2]
    one = sum_walls([cycle_walls(5)])
    assert wall_metric_space(one).matrix() == cycle_metric(5).matrix()


def test_sum_walls_additive_on_random_factors():
    rng = np.random.default_rng(7)
    fs = [random_walls(rng, int(rng.integers(2, 4))) for _ in range(3)]
    S = sum_walls(fs)
    for i, a in enumerate(S.ground):
        for j, b in enumerate(S.ground):
            assert wall_metric(S, i, j) == sum(wall_metric(f, x, y) for f, x, y in zip(fs, a, b))


def test_cut_decompose_path_unique():
    P3 = FiniteMetricSpace([0, 1, 2], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    W = cut_decompose(P3)
    assert isinstance(W, WallsStructure)
    assert sorted((tuple(W.sides(A)), w) for A, w in W.halfspaces) == [((0,), 1), ((0, 1), 1)]


def test_cut_decompose_c5():
    W = cut_decompose(cycle_metric(5))
    assert isinstance(W, WallsStructure)
    assert wall_metric_space(W).matrix() == cycle_metric(5).matrix()


def test_k23_is_not_a_cut_sum():
    M = word_metric(K23_EDGES, 5)
    res = cut_decompose(M)
    assert isinstance(res, Infeasible)
    assert res.verify(M) and res.violation > 0
    # independent check of the certificate against every cut
    for k in range(1, 5):
        for A in combinations(range(5), k):
            s = sum(c for (i, j), c in res.certificate.items() if (i in A) != (j in A))
            assert s <= 0


def test_cut_cap():
    with pytest.raises(CapExceeded):
        cut_decompose(cycle_metric(13))


def test_cnd_examples():
    assert is_cnd_kernel([[0] * 3] * 3)
    P3sq = [[0, 1, 4], [1, 0, 1], [4, 1, 0]]
    lam = (1, -2, 1)
    assert sum(lam[i] * lam[j] * P3sq[i][j] for i in range(3) for j in range(3)) == 0
    assert is_cnd_kernel(P3sq)
    C4sq = [[min(abs(i - j), 4 - abs(i - j)) ** 2 for j in range(4)] for i in range(4)]
    lam = (1, -1, 1, -1)
    assert sum(lam[i] * lam[j] * C4sq[i][j] for i in range(4) for j in range(4)) > 0
    assert not is_cnd_kernel(C4sq)


def test_invariance_examples():
    rot = permutation_closure([[(i + 1) % 5 for i in range(5)]])
    assert len(rot) == 5
    assert check_invariance(rot, cycle_walls(5))
    assert not check_invariance(rot, WallsStructure(range(5), [([0], 1)]))
    assert check_invariance([tuple(range(5))], WallsStructure(range(5), [([0], 1)]))


def test_named_walls():
    assert wall_metric_space(path_walls(5)).matrix() == [[abs(i - j) for j in range(5)] for i in range(5)]
    D = wall_metric_space(discrete_walls(4))
    assert all(D.d(i, j) == (i != j) for i in range(4) for j in range(4))
    assert wall_metric_space(discrete_walls(2)).d(0, 1) == 1


@st.composite
def structures(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    return random_walls(np.random.default_rng(draw(st.integers(0, 2**32 - 1))), n)


@settings(max_examples=60, deadline=None)
@given(structures())
def test_wall_metric_matches_direct_cut_count(W):
    n = len(W.ground)
    hs = [(W.sides(A), w) for A, w in W.halfspaces]
    D = wall_metric_space(W)
    for i in range(n):
        for j in range(n):
            assert D.d(i, j) == cut_weight(hs, n, [i, j])
    assert validate_metric(D, pseudometric=True).ok


@settings(max_examples=60, deadline=None)
@given(structures(), st.sampled_from([1, 2, 3]))
def test_embeddings_are_isometric(W, p):
    D = wall_metric_space(W).matrix()
    assert embed_l1(W).pairwise_pnorm_p() == D
    assert embed_lp(W, p).pairwise_pnorm_p() == D


@settings(max_examples=40, deadline=None)
@given(structures(max_n=8))
def test_cut_round_trip(W):
    D = wall_metric_space(W)
    res = cut_decompose(D)
    assert isinstance(res, WallsStructure)
    assert wall_metric_space(res).matrix() == D.matrix()


@settings(max_examples=30, deadline=None)
@given(structures(max_n=7))
def test_wall_metrics_are_cnd(W):
    assert is_cnd_kernel(wall_metric_space(W).matrix())


@settings(max_examples=30, deadline=None)
@given(structures(max_n=6), st.integers(0, 2**32 - 1))
def test_pullback_commutes(W, seed):
    rng = np.random.default_rng(seed)
    n = len(W.ground)
    q = rng.integers(0, n, size=int(rng.integers(1, 8))).tolist()
    P = pullback(q, W)
    for i in range(len(q)):
        for j in range(len(q)):
            assert wall_metric(P, i, j) == wall_metric(W, q[i], q[j])
