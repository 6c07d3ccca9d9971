from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsewreath.metric import (
    DenseMap,
    FiniteMetricSpace,
    bounded_geometry,
    check_dense,
    cycle_metric,
    path_metric,
    uniform_discreteness,
    validate_metric,
    word_metric,
)
from oracles import floyd_warshall


def test_path_metric_is_valid():
    M = FiniteMetricSpace([0, 1, 2], [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert validate_metric(M).ok


def test_symmetry_violation_witness():
    M = FiniteMetricSpace([0, 1], [[0, 1], [2, 0]])
    rep = validate_metric(M)
    assert ("symmetry", (0, 1)) in rep.violations


def test_triangle_violation_witness():
    M = FiniteMetricSpace([0, 1, 2], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    rep = validate_metric(M)
    assert "triangle" in rep.axioms()
    assert ("triangle", (0, 1, 2)) in rep.violations


def test_pseudometric_mode_allows_zero_gaps():
    M = FiniteMetricSpace([0, 1], [[0, 0], [0, 0]])
    assert "separation" in validate_metric(M).axioms()
    assert validate_metric(M, pseudometric=True).ok


def test_dimension_mismatch_is_structural():
    with pytest.raises(ValueError):
        FiniteMetricSpace([0, 1, 2], [[0, 1], [1, 0]])


def test_rational_entries_round_trip():
    M = FiniteMetricSpace("ab", [[0, "1/3"], [Fraction(1, 3), 0]])
    assert M.distance("a", "b") == Fraction(1, 3)
    assert uniform_discreteness(M) == Fraction(1, 3)


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        FiniteMetricSpace([0, 1], [[0, 0.5], [0.5, 0]])


def test_five_cycle_distances():
    C5 = cycle_metric(5)
    assert C5.d(0, 2) == 2 and C5.d(0, 3) == 2
    assert uniform_discreteness(C5) == 1


def test_single_vertex():
    M = word_metric([], 1)
    assert M.matrix() == [[0]]
    assert uniform_discreteness(M) is None


def test_disconnected_graph_names_vertices():
    with pytest.raises(ValueError, match="unreachable"):
        word_metric([(0, 1)], 3)


def test_lamplighter_two_sites_diameter():
    # Cay((Z/2) wr (Z/2)) with generators (delta_0, e) and (e, t); elements (f0, f1, h)
    elems = [(a, b, h) for a in (0, 1) for b in (0, 1) for h in (0, 1)]
    idx = {e: k for k, e in enumerate(elems)}
    edges = []
    for a, b, h in elems:
        edges.append((idx[(a, b, h)], idx[(a, b, 1 - h)]))
        f = [a, b]
        f[h] ^= 1
        edges.append((idx[(a, b, h)], idx[(f[0], f[1], h)]))
    M = word_metric(edges, 8)
    assert M.diameter() == 4


@pytest.mark.parametrize("n,C,expected", [(5, 1, 3), (5, 0, 1), (6, 2, 5)])
def test_bounded_geometry(n, C, expected):
    assert bounded_geometry(cycle_metric(n), C) == expected


def test_check_dense_cases():
    C12, C6 = cycle_metric(12), cycle_metric(6)
    assert check_dense(DenseMap.identity(C6))[0]
    assert check_dense(DenseMap(C12, C6, tuple(i % 6 for i in range(12)), 0))[0]
    ok, witness, gap = check_dense(DenseMap(C6, C6, (0, 1, 2, 3, 4, 4), 0))
    assert not ok and witness == 5 and gap == 1


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 9))
    edges = [(draw(st.integers(0, k - 1)), k) for k in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    return n, edges + [e for e in extra if e[0] != e[1]]


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_word_metric_matches_floyd_warshall(g):
    n, edges = g
    M = word_metric(edges, n)
    assert M.matrix() == floyd_warshall(n, edges)
    assert validate_metric(M).ok
    if n >= 2:
        assert uniform_discreteness(M) == 1


@settings(max_examples=40, deadline=None)
@given(graphs(), st.integers(0, 5), st.integers(0, 5))
def test_bounded_geometry_monotone(g, a, b):
    M = word_metric(*reversed(g))
    lo, hi = sorted((a, b))
    assert bounded_geometry(M, 0) == 1
    assert bounded_geometry(M, lo) <= bounded_geometry(M, hi)


def test_path_metric_values():
    P = path_metric(4)
    assert np.array_equal(P.num, np.abs(np.arange(4)[:, None] - np.arange(4)[None, :]))
