import numpy as np
import pytest
from sklearn.base import clone

from geotree.estimators import GeoTreeNeighbors, GeoTreeRegressor, HaversineNNRegressor, PriceIndex
from geotree.geohash import encode, haversine
from geotree.hpi import NaiveBackend, compute_index
from geotree.ingest import SyntheticConfig, generate


@pytest.fixture(scope="module")
def points():
    rng = np.random.default_rng(0)
    X = np.column_stack([rng.uniform(51.5, 55, 400), rng.uniform(-10, -6, 400)])
    y = 100 + 10 * X[:, 0] + rng.normal(0, 1, 400)
    return X, y


def test_params_and_clone():
    est = GeoTreeRegressor(height=5, strategy="nearest")
    assert est.get_params() == {"height": 5, "strategy": "nearest", "min_support": 1}
    assert clone(est).get_params() == est.get_params()
    assert PriceIndex().set_params(backend="naive").backend == "naive"


def test_neighbors_self_excluded(points):
    X, _ = points
    nn = GeoTreeNeighbors(height=6).fit(X)
    buckets, depths = nn.bucket_neighbors(return_depth=True)
    for i, (idx, d) in enumerate(zip(buckets, depths)):
        assert i not in idx
        g = encode(*X[i], 6)
        assert all(encode(*X[j], 6)[:d] == g[:d] for j in idx)


def test_neighbors_level_query(points):
    X, _ = points
    nn = GeoTreeNeighbors(height=6).fit(X)
    (idx,) = nn.bucket_neighbors(X[:1], level=2)
    prefix = encode(*X[0], 2)
    assert sorted(idx) == [j for j in range(len(X)) if encode(*X[j], 2) == prefix]


def test_neighbors_min_support(points):
    X, _ = points
    buckets = GeoTreeNeighbors(height=8, min_support=5).fit(X).bucket_neighbors()
    assert all(len(b) >= 5 for b in buckets)


def test_regressor_median_and_fallback(points):
    X, y = points
    reg = GeoTreeRegressor(height=6).fit(X, y)
    pred = reg.predict(X[:20])
    assert pred.shape == (20,) and np.all(np.isfinite(pred))
    # no training point shares even the first geohash character
    assert reg.predict([[-40.0, 150.0]])[0] == np.median(y)


def test_regressor_nearest_agrees_with_exact_when_bucket_holds_it(points):
    X, y = points
    exact = HaversineNNRegressor().fit(X, y)
    approx = GeoTreeRegressor(height=3, strategy="nearest").fit(X, y)
    q = X[:30] + 0.001
    assert np.corrcoef(exact.predict(q), approx.predict(q))[0, 1] > 0.9


def test_haversine_nn_regressor_exact(points):
    X, y = points
    q = np.array([[53.0, -7.0]])
    d = [haversine(q[0], x) for x in X]
    assert HaversineNNRegressor().fit(X, y).predict(q)[0] == y[int(np.argmin(d))]


@pytest.mark.parametrize("bad", [[[91.0, 0.0]], [[0.0, 200.0]], [[1.0, 2.0, 3.0]], [[np.nan, 0.0]]])
def test_input_validation(bad):
    with pytest.raises(ValueError):
        GeoTreeNeighbors().fit(bad)


def test_bad_params():
    X = [[53.0, -6.0], [53.1, -6.1]]
    with pytest.raises(ValueError):
        GeoTreeNeighbors(height=0).fit(X)
    with pytest.raises(ValueError):
        GeoTreeRegressor(strategy="mean").fit(X, [1.0, 2.0])
    with pytest.raises(ValueError):
        GeoTreeRegressor().fit(X, [1.0])


def test_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        GeoTreeRegressor().predict([[0.0, 0.0]])
    with pytest.raises(NotFittedError):
        PriceIndex().predict()


def test_price_index_matches_functions():
    data = generate(SyntheticConfig(n_records=600, n_months=6, seed=1))
    est = PriceIndex(backend="naive").fit(data)
    assert list(est.predict()) == compute_index(data, NaiveBackend()).values
    assert est.predict(["2011-03"])[0] == est.series_.values[1]
    assert set(est.timings_) == {"voting", "stratify", "overall"}
    assert est.counters_["voting"].searches == len(data)
    with pytest.raises(ValueError):
        est.predict(["1999-01"])


def test_price_index_accepts_rows_and_frames():
    rows = [(1, "2020-01", 100.0, 53.0, -6.0), (2, "2020-02", 110.0, 53.0, -6.0)]
    assert list(PriceIndex().fit(rows).predict()) == pytest.approx([100.0, 110.0])
    pd = pytest.importorskip("pandas")
    frame = pd.DataFrame(rows, columns=["id", "date", "price", "lat", "lon"])
    assert list(PriceIndex().fit(frame).predict()) == pytest.approx([100.0, 110.0])


def test_price_index_needs_two_months():
    with pytest.raises(ValueError):
        PriceIndex().fit([(1, "2020-01", 100.0, 53.0, -6.0)])
