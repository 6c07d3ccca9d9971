"""scikit-learn style wrappers around the functional API.

The estimators hold hyperparameters in ``__init__`` and learned state in
trailing-underscore attributes; all exact work is delegated to the modules.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from ._validation import as_fraction
from .analysis import compression_check, compression_fit, lifting_modulus, poly_fit
from .lift import LambdaStructure
from .metric import DenseMap, FiniteMetricSpace
from .walls import Infeasible, WallsStructure, canonical_walls, cut_decompose, cycle_walls, discrete_walls, embed_lp, path_walls
from .wreath import PointSet, WreathInstance

__all__ = ["WallsEmbedding", "LambdaEmbedding", "CompressionEstimator", "PolyLiftingEstimator", "as_metric"]


def as_metric(X) -> FiniteMetricSpace:
    """A :class:`FiniteMetricSpace` from itself or from a square matrix of exact entries."""
    if isinstance(X, FiniteMetricSpace):
        return X
    A = np.asarray(X, dtype=object)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square distance matrix, got shape {A.shape}")
    rows = []
    for row in A:
        out = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                if not float(v).is_integer():
                    raise ValueError(f"non-integral float {v!r}; pass Fractions or 'num/den' strings")
                v = int(v)
            out.append(as_fraction(v))
        rows.append(out)
    return FiniteMetricSpace(list(range(len(rows))), rows)


def _walls_for(choice, space: FiniteMetricSpace) -> WallsStructure:
    if isinstance(choice, WallsStructure):
        return choice
    n = len(space)
    table = {"cycle": cycle_walls, "path": path_walls, "discrete": discrete_walls}
    if choice == "canonical":
        return canonical_walls(space)
    if choice in table:
        return table[choice](n, space.points)
    raise ValueError(f"unknown walls choice {choice!r}")


class WallsEmbedding(TransformerMixin, BaseEstimator):
    """Isometric ``l_p`` coordinates (``||.||_p^p`` equals the metric) of an L1-embeddable finite metric.

    ``fit`` takes a square distance matrix; ``transform`` takes point indices.
    """

    def __init__(self, p: int = 1, cut_cap: int = 12):
        self.p = p
        self.cut_cap = cut_cap

    def fit(self, X, y=None):
        M = as_metric(X)
        res = cut_decompose(M, cap=self.cut_cap)
        if isinstance(res, Infeasible):
            raise ValueError(f"metric is not a nonnegative sum of cuts (certificate value {res.violation})")
        self.walls_ = res
        self.table_ = embed_lp(res, self.p)
        self.n_features_out_ = self.table_.dim
        return self

    def transform(self, X):
        """Rows for the point indices in ``X``; ``None`` means every point."""
        check_is_fitted(self, "table_")
        coords = np.array(self.table_.coordinates(), dtype=float).reshape(len(self.table_.points), -1)
        if X is None:
            return coords
        idx = np.asarray(X, dtype=np.intp).ravel()
        return coords[idx]

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).transform(None)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "table_")
        return np.array(self.table_.columns(), dtype=object)


class LambdaEmbedding(TransformerMixin, BaseEstimator):
    """Coordinates of the assembled walls metric over a wreath instance.

    ``fit`` takes a :class:`WreathInstance`; ``transform`` takes wreath points
    (a :class:`PointSet` or a list of points).  Columns are ``l_1`` coordinates.
    """

    def __init__(self, sigma="canonical", nu="canonical", mu="canonical", check: bool = True):
        self.sigma = sigma
        self.nu = nu
        self.mu = mu
        self.check = check

    def fit(self, X: WreathInstance, y=None):
        if not isinstance(X, WreathInstance):
            raise TypeError("LambdaEmbedding.fit expects a WreathInstance")
        self.lambda_ = LambdaStructure(X, _walls_for(self.sigma, X.X), _walls_for(self.nu, X.Y),
                                       _walls_for(self.mu, X.Z))
        return self

    def transform(self, X):
        check_is_fitted(self, "lambda_")
        W = self.lambda_.W
        P = X if isinstance(X, PointSet) else PointSet.from_points(list(X), W.n_sites, W.x0)
        T = self.lambda_.embedding(P, check=self.check)
        self.columns_ = T.columns()
        return np.array(T.coordinates(), dtype=float).reshape(len(P), -1)

    def distance(self, a, b) -> Fraction:
        check_is_fitted(self, "lambda_")
        return self.lambda_.distance(a, b)


class CompressionEstimator(RegressorMixin, BaseEstimator):
    """Fits ``(1/C) d**r - D <= e <= C d + D`` on a cloud of distance pairs.

    ``fit(d, e)``; ``predict(d)`` returns the fitted lower bound ``(1/C) d**r - D``.
    """

    def __init__(self, r: float | None = None, step: float = 0.001):
        self.r = r
        self.step = step

    def fit(self, X, y):
        d = check_array(X, ensure_2d=False, dtype=float).ravel()
        e = check_array(y, ensure_2d=False, dtype=float).ravel()
        check_consistent_length(d, e)
        fit = compression_fit(d, e, step=self.step, r=self.r)
        self.r_, self.C_, self.D_, self.feasible_ = fit.r, fit.C, fit.D, fit.feasible
        self.n_pairs_ = fit.n_pairs
        return self

    def predict(self, X):
        check_is_fitted(self, "C_")
        d = check_array(X, ensure_2d=False, dtype=float).ravel()
        return d**self.r_ / self.C_ - self.D_

    def upper(self, X):
        check_is_fitted(self, "C_")
        d = check_array(X, ensure_2d=False, dtype=float).ravel()
        return self.C_ * d + self.D_

    def score(self, X, y, sample_weight=None):
        """Fraction of pairs inside the fitted band."""
        check_is_fitted(self, "C_")
        d = check_array(X, ensure_2d=False, dtype=float).ravel()
        e = check_array(y, ensure_2d=False, dtype=float).ravel()
        inside = [compression_check(d[k : k + 1], e[k : k + 1], self.r_, self.C_, self.D_) for k in range(len(d))]
        return float(np.average(inside, weights=sample_weight)) if len(d) else 1.0


class PolyLiftingEstimator(BaseEstimator):
    """Fits ``theta(r) <= K (r**delta + 1)`` to the exhaustive lifting profile of a map.

    ``fit`` takes a :class:`DenseMap`; ``predict(r)`` evaluates the fitted envelope.
    """

    def __init__(self, grid_max: float = 4.0, step: float = 0.01):
        self.grid_max = grid_max
        self.step = step

    def fit(self, X: DenseMap, y=None):
        if not isinstance(X, DenseMap):
            raise TypeError("PolyLiftingEstimator.fit expects a DenseMap")
        self.profile_ = lifting_modulus(X)
        self.delta_, self.K_ = poly_fit(self.profile_, grid_max=self.grid_max, step=self.step)
        return self

    def predict(self, X):
        check_is_fitted(self, "delta_")
        r = check_array(X, ensure_2d=False, dtype=float).ravel()
        return self.K_ * (r**self.delta_ + 1)
