import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geotree.geohash import haversine
from geotree.ingest import Dataset, SaleRecord
from geotree.oracle import knn_bruteforce, nn_bruteforce, prefix_filter_bruteforce


def random_dataset(n, seed):
    rng = np.random.default_rng(seed)
    rows = [(i, "2020-01", 100.0, float(a), float(b)) for i, (a, b) in enumerate(zip(rng.uniform(-60, 60, n), rng.uniform(-170, 170, n)))]
    return Dataset.from_rows(rows)


def full_sort(query, data, exclude=()):
    return sorted((r for r in data if r.id not in exclude), key=lambda r: (haversine(query, r.location), r.id))


def test_singleton_excluded():
    data = random_dataset(1, 0)
    assert nn_bruteforce((0.0, 0.0), data, exclude={0}) is None


def test_exact_location_hit():
    data = random_dataset(20, 1)
    target = data[7]
    assert nn_bruteforce(target.location, data) is target


def test_nn_matches_sorted_head():
    data = random_dataset(100, 2)
    for q in [(10.0, 20.0), (-45.0, 100.0), (0.0, 0.0)]:
        assert nn_bruteforce(q, data) is full_sort(q, data)[0]


def test_knn_k1_is_nn_and_prefix_of_sort():
    data = random_dataset(50, 3)
    q = (5.0, -5.0)
    assert knn_bruteforce(q, 1, data) == [nn_bruteforce(q, data)]
    assert knn_bruteforce(q, 5, data) == full_sort(q, data)[:5]
    assert knn_bruteforce(q, 500, data, exclude={0, 1}) == full_sort(q, data, {0, 1})


def test_knn_rejects_k0():
    with pytest.raises(ValueError):
        knn_bruteforce((0.0, 0.0), 0, random_dataset(3, 0))


def test_ties_go_to_lower_id():
    recs = [SaleRecord(i, 0, "2020-01", 1.0, 0.0, lon, "s") for i, lon in [(5, 1.0), (2, -1.0), (9, 1.0)]]
    assert nn_bruteforce((0.0, 0.0), recs).id == 2


def test_prefix_filter(sample_dataset):
    assert len(prefix_filter_bruteforce("", sample_dataset, 6)) == 9
    assert [r.geohash for r in prefix_filter_bruteforce("gd", sample_dataset, 6)] == ["gd7j98", "gd7jyb"]
    assert prefix_filter_bruteforce("zz", sample_dataset, 6) == []
    with pytest.raises(ValueError):
        prefix_filter_bruteforce("gc7j98z", sample_dataset, 6)


@settings(max_examples=50)
@given(st.integers(1, 30), st.integers(0, 10_000), st.tuples(st.floats(-90, 90), st.floats(-180, 180)))
def test_nn_is_minimal_and_knn_sorted(n, seed, q):
    data = random_dataset(n, seed)
    best = nn_bruteforce(q, data)
    d = haversine(q, best.location)
    assert all(d <= haversine(q, r.location) for r in data)
    ds = [haversine(q, r.location) for r in knn_bruteforce(q, n, data)]
    assert ds == sorted(ds)
