from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from coarsewreath.embedding import DenseBlock, EmbeddingTable, PartitionBlock, isometry_defect
from coarsewreath.estimators import CompressionEstimator, LambdaEmbedding, PolyLiftingEstimator, WallsEmbedding, as_metric
from coarsewreath.metric import DenseMap, cycle_metric, word_metric
from coarsewreath.wreath import lamplighter_instance


def test_walls_embedding_c6():
    M = cycle_metric(6)
    est = WallsEmbedding()
    X = est.fit_transform(M.matrix())
    D = np.abs(X[:, None, :] - X[None, :, :]).sum(axis=2)
    assert np.allclose(D, M.num)
    assert est.transform([0, 3]).shape == (2, est.n_features_out_)
    assert len(est.get_feature_names_out()) == est.n_features_out_


def test_walls_embedding_p2_squares():
    est = WallsEmbedding(p=2).fit(cycle_metric(5).num)
    X = est.transform(None)
    D = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    assert np.allclose(D, cycle_metric(5).num)


def test_walls_embedding_rejects_non_l1():
    with pytest.raises(ValueError, match="cuts"):
        WallsEmbedding().fit(word_metric([(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)], 5))


def test_as_metric_rejects_fractional_floats():
    with pytest.raises(ValueError):
        as_metric([[0, 0.5], [0.5, 0]])
    assert as_metric([[0.0, 2.0], [2.0, 0.0]]).d(0, 1) == 2


def test_params_and_clone():
    est = CompressionEstimator(r=0.5, step=0.01)
    assert est.get_params() == {"r": 0.5, "step": 0.01}
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.predict([1.0])


def test_compression_estimator():
    d = np.linspace(1, 1e4, 3000)
    est = CompressionEstimator().fit(d, 3 * np.sqrt(d))
    assert est.r_ == pytest.approx(0.5, abs=0.02) and est.feasible_
    assert est.score(d, 3 * np.sqrt(d)) == 1.0
    assert np.all(est.predict(d) <= 3 * np.sqrt(d) + 1e-6)
    assert np.all(est.upper(d) >= 3 * np.sqrt(d) - 1e-6)


def test_poly_lifting_estimator():
    est = PolyLiftingEstimator().fit(DenseMap.identity(cycle_metric(16)))
    assert est.delta_ == pytest.approx(1, abs=0.01)
    r = np.array([float(v) for v in est.profile_.rs])
    th = np.array([float(v) for v in est.profile_.theta])
    assert np.all(th <= est.predict(r) + 1e-9)


def test_lambda_embedding():
    W = lamplighter_instance(5)
    est = LambdaEmbedding(nu="cycle", mu="cycle").fit(W)
    a, b = W.point({}, 0), W.point({1: 1, 4: 1}, 0)
    X = est.transform([a, b])
    assert np.abs(X[0] - X[1]).sum() == pytest.approx(float(est.distance(a, b))) == 6.0
    with pytest.raises(TypeError):
        LambdaEmbedding().fit(cycle_metric(3))


def test_embedding_table_blocks():
    dense = DenseBlock(np.array([[0], [3]]), 2, (Fraction(1),), ("c",))
    part = PartitionBlock(np.array([0, 1]), Fraction(4), "P")
    T = EmbeddingTable(["a", "b"], 1, [dense, part])
    assert T.dim == 3 and T.pnorm_p(0, 1) == Fraction(3, 2) + 4
    assert T.coordinates() == [[0, 2, 0], [Fraction(3, 2), 0, 2]]
    assert isometry_defect(T, [[0, Fraction(11, 2)], [Fraction(11, 2), 0]]) == 0
    assert "point,c,P[0],P[1]" in T.to_csv()
