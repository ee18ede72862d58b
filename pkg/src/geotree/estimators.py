"""scikit-learn style wrappers around the tree and the price index."""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from ._validation import as_dataset, check_height, check_latlon
from .geohash import EARTH_RADIUS_M, encode_many
from .hpi import IndexSeries, OpCounter, index_from_growth, make_backend, stratify_stage, voting_stage
from .tree import GeoTree


class GeoTreeNeighbors(BaseEstimator):
    """Approximate ranged neighbours from geohash buckets.

    ``fit`` builds a :class:`~geotree.tree.GeoTree` over the training points
    (rows of ``[lat, lon]`` in degrees); queries return the training indices
    that share the deepest non-empty geohash prefix with each query point,
    or a fixed-length prefix when ``level`` is given.

    Parameters
    ----------
    height : int, default=6
        Tree height, i.e. the geohash length indexed.
    min_support : int, default=1
        Smallest acceptable bucket when searching for the deepest one.
    """

    def __init__(self, height=6, min_support=1):
        self.height = height
        self.min_support = min_support

    def fit(self, X, y=None):
        height = check_height(self.height)
        X = check_latlon(X)
        self.geohashes_ = encode_many(X[:, 0], X[:, 1], height)
        self.tree_ = GeoTree(height)
        for i, g in enumerate(self.geohashes_):
            self.tree_.insert(g, i)
        self.n_features_in_ = 2
        self.n_samples_fit_ = X.shape[0]
        return self

    def bucket_neighbors(self, X=None, level=None, return_depth=False):
        """Bucket members for each query point.

        With ``X=None`` the training points are queried and each point is
        left out of its own bucket.

        Returns an object array of index arrays, plus an array of bucket
        depths when ``return_depth`` is true.
        """
        check_is_fitted(self, "tree_")
        if X is None:
            geohashes = self.geohashes_
            own = range(len(geohashes))
        else:
            X = check_latlon(X)
            geohashes = encode_many(X[:, 0], X[:, 1], self.tree_.height)
            own = [None] * len(geohashes)

        result = np.empty(len(geohashes), dtype=object)
        depths = np.zeros(len(geohashes), dtype=int)
        for i, (g, me) in enumerate(zip(geohashes, own)):
            if level is None:
                res = self.tree_.query_maximal(g, exclude=None if me is None else (me,), min_support=self.min_support)
                ids = res.entries.ids()
            else:
                res = self.tree_.query_at_level(g, level)
                ids = [rid for rid in res.entries.ids() if rid != me]
            result[i] = np.asarray(ids, dtype=int)
            depths[i] = res.depth
        return (result, depths) if return_depth else result


class GeoTreeRegressor(RegressorMixin, BaseEstimator):
    """Predict a target from the geohash bucket around each point.

    ``strategy="median"`` predicts the median training target of the
    deepest non-empty bucket; ``"nearest"`` predicts the target of the
    closest bucket member. Points whose first geohash character matches no
    training point get the overall training median.
    """

    def __init__(self, height=6, strategy="median", min_support=1):
        self.height = height
        self.strategy = strategy
        self.min_support = min_support

    def fit(self, X, y):
        if self.strategy not in ("median", "nearest"):
            raise ValueError(f"strategy must be 'median' or 'nearest', got {self.strategy!r}")
        X = check_latlon(X)
        y = check_array(y, ensure_2d=False, dtype=np.float64)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        self.neighbors_ = GeoTreeNeighbors(self.height, self.min_support).fit(X)
        self.X_fit_ = X
        self.y_fit_ = y
        self.fallback_ = float(np.median(y))
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "neighbors_")
        X = check_latlon(X)
        buckets = self.neighbors_.bucket_neighbors(X)
        out = np.empty(X.shape[0])
        for i, idx in enumerate(buckets):
            if len(idx) == 0:
                out[i] = self.fallback_
            elif self.strategy == "median":
                out[i] = np.median(self.y_fit_[idx])
            else:
                d = _haversine_rows(X[i], self.X_fit_[idx])
                out[i] = self.y_fit_[idx[np.lexsort((idx, d))[0]]]
        return out


class HaversineNNRegressor(RegressorMixin, BaseEstimator):
    """Exact 1-nearest-neighbour regression by scanning all training points."""

    def fit(self, X, y):
        X = check_latlon(X)
        y = check_array(y, ensure_2d=False, dtype=np.float64)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have shape ({X.shape[0]},), got {y.shape}")
        self.X_fit_ = X
        self.y_fit_ = y
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "X_fit_")
        X = check_latlon(X)
        order = np.arange(len(self.y_fit_))
        return np.array([self.y_fit_[np.lexsort((order, _haversine_rows(x, self.X_fit_)))[0]] for x in X])


def _haversine_rows(point, rows) -> np.ndarray:
    phi1 = np.radians(point[0])
    phi2 = np.radians(rows[:, 0])
    h = np.sin((phi2 - phi1) / 2) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(np.radians(rows[:, 1] - point[1]) / 2) ** 2
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(1.0, h)))


class PriceIndex(BaseEstimator):
    """Mix-adjusted median price index.

    ``fit`` takes a :class:`~geotree.ingest.Dataset` (or a DataFrame with
    columns ``id, date, price, lat, lon``) and runs the voting and
    stratification stages with the chosen neighbour backend. Each stage
    gets a freshly built backend, so its timing includes the build.

    Attributes
    ----------
    series_ : IndexSeries
    growth_ : dict of (from_month, to_month) -> GrowthFactor
    votes_ : dict of record id -> same-month price ratio
    counters_ : dict of stage name -> OpCounter
    timings_ : dict of stage name -> seconds (``voting``, ``stratify``, ``overall``)
    """

    def __init__(self, backend="geotree", height=6, strategy="median", n_jobs=1):
        self.backend = backend
        self.height = height
        self.strategy = strategy
        self.n_jobs = n_jobs

    def _new_backend(self):
        return make_backend(self.backend, check_height(self.height), self.strategy)

    def fit(self, X, y=None):
        data = as_dataset(X, check_height(self.height))
        if len(data.by_month) < 2:
            raise ValueError("an index needs sales in at least two months")
        self._new_backend()  # reject bad parameters before any work

        start = time.perf_counter()
        vote_ops = OpCounter()
        self.votes_ = voting_stage(data, self._new_backend(), n_jobs=self.n_jobs, counter=vote_ops)
        t_vote = time.perf_counter()
        strat_ops = OpCounter()
        self.growth_ = stratify_stage(data, self._new_backend(), n_jobs=self.n_jobs, counter=strat_ops)
        t_strat = time.perf_counter()
        values, carried = index_from_growth(self.growth_, data.n_months)
        self.series_ = IndexSeries(data.epoch, data.month_labels(), values, carried)
        end = time.perf_counter()

        self.counters_ = {"voting": vote_ops, "stratify": strat_ops}
        self.timings_ = {"voting": t_vote - start, "stratify": t_strat - t_vote, "overall": end - start}
        self.month_labels_ = data.month_labels()
        return self

    def predict(self, X=None):
        """Index values; ``X`` may list month labels to select."""
        check_is_fitted(self, "series_")
        if X is None:
            return np.asarray(self.series_.values)
        lookup = dict(zip(self.series_.labels, self.series_.values))
        try:
            return np.array([lookup[label] for label in X])
        except KeyError as exc:
            raise ValueError(f"month {exc.args[0]!r} not covered by the index") from None
