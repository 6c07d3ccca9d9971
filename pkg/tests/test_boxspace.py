import numpy as np
import pytest

from coarsewreath.boxspace import (
    SubgroupChainZ,
    assemble_box,
    box_embedding,
    build_wreath_chain,
    check_M_chain,
    finite_H_box,
    precondition_gruenberg,
)
from coarsewreath.groups import WreathElementOverZ, cyclic, symmetric, wreath_product
from coarsewreath.metric import FiniteMetricSpace, cycle_metric, path_metric, validate_metric
from oracles import triples


@pytest.fixture(scope="module")
def z2_chain():
    return build_wreath_chain(cyclic(2), [[0], [0], [0]], (2, 4, 8))


def test_gruenberg_precondition():
    assert precondition_gruenberg(cyclic(2))[0]
    assert not precondition_gruenberg(symmetric(3))[0]
    assert precondition_gruenberg(symmetric(3), cyclic(4))[0]


def test_chain_validation():
    with pytest.raises(ValueError):
        SubgroupChainZ((2, 3))
    assert SubgroupChainZ((2, 4, 8)).strictly_increasing
    assert not SubgroupChainZ((2, 2)).strictly_increasing
    with pytest.raises(ValueError, match="trivially"):
        build_wreath_chain(cyclic(4), [[0, 2]], (2,))
    with pytest.raises(ValueError):
        build_wreath_chain(symmetric(3), [[0]], (2,))


def test_z2_chain_orders(z2_chain):
    assert [lev.order for lev in z2_chain.levels] == [8, 64, 2048]
    assert all(lev.order == 2 ** lev.n * lev.n for lev in z2_chain.levels)


def test_z4_chain_levels():
    chain = build_wreath_chain(cyclic(4), [[0, 2], [0]], (2, 4))
    assert [(lev.Q.order, lev.n) for lev in chain.levels] == [(2, 2), (4, 4)]
    ref = wreath_product(cyclic(2), cyclic(2))
    lev = chain.levels[0].group
    assert np.array_equal(chain.levels[0].Q.mul, cyclic(2).mul)
    for a in range(8):
        for b in range(8):
            assert lev.m(a, b) == ref.m(a, b)
    assert sorted(lev.generators) == sorted(ref.generators)


def test_check_chain_radius_six(z2_chain):
    rep = check_M_chain(z2_chain, 6)
    assert rep.ok, rep.witnesses
    assert rep.indices == [8, 64, 2048]


def test_short_chain_loses_far_elements():
    chain = build_wreath_chain(cyclic(2), [[0], [0]], (2, 4))
    rep = check_M_chain(chain, 5)
    assert not rep.trivial_ok and rep.witnesses
    assert check_M_chain(chain, 3).ok


def test_reduction_examples(z2_chain):
    G = cyclic(2)
    lamp = WreathElementOverZ(((0, 1),), 0, G)
    for i, lev in enumerate(z2_chain.levels):
        f, h = z2_chain.reduce(lamp, i)
        assert f[0] == 1 and h == 0
    shift = WreathElementOverZ((), 8, G)
    chain16 = build_wreath_chain(G, [[0]] * 4, (2, 4, 8, 16))
    dies = [z2_chain.reduce(shift, i)[1] == 0 for i in range(3)]
    assert dies == [True, True, True]
    assert chain16.reduce(shift, 3) == ((0,) * 16, 8)


def test_truncation_notice():
    chain = build_wreath_chain(cyclic(2), [[0]] * 3, (2, 4, 16), cap=2000)
    assert len(chain.levels) == 2 and "truncated at level 3" in chain.notice


def test_finite_top_group():
    chain = finite_H_box(cyclic(4), [[0, 2], [0]], cyclic(2))
    assert [lev.order for lev in chain.levels] == [2**2 * 2, 4**2 * 2]
    rep = check_M_chain(chain, 4)
    assert rep.ok, rep.witnesses


def test_box_distances():
    pt = FiniteMetricSpace([0], [[0]])
    assert assemble_box([pt, pt]).inter(0, 1) == 1
    B = assemble_box([path_metric(3), path_metric(5)])
    assert B.inter(0, 1) == 7
    M = assemble_box([path_metric(2), cycle_metric(4), path_metric(3)]).metric()
    assert validate_metric(M).ok
    D = M.num
    for i, j, k in triples(len(M)):
        assert D[i, k] <= D[i, j] + D[j, k]


def test_rule_must_separate():
    with pytest.raises(ValueError):
        assemble_box([path_metric(3), path_metric(3)], rule=lambda a, b, i, j: 1)


def test_box_embedding_uniform(z2_chain):
    emb = box_embedding(z2_chain, with_tables=False)
    assert emb.ok and emb.unbounded and emb.valid_everywhere
    assert emb.offsets[0] == 0 and all(b > a for a, b in zip(emb.offsets, emb.offsets[1:]))
    vals = [v for _, v in emb.rho.table()]
    assert vals == sorted(vals) and vals[-1] > vals[0]


def test_one_level_box():
    chain = build_wreath_chain(cyclic(2), [[0]], (4,))
    emb = box_embedding(chain)
    assert emb.ok and emb.offsets == [0] and len(emb.tables) == 1


def test_equal_offsets_detected(z2_chain):
    emb = box_embedding(z2_chain, offsets=[0, 0, 0], with_tables=False)
    assert not emb.offset_ok and not emb.ok and emb.witnesses
