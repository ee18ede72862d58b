import pytest

import _acceptance_log
from geotree.geohash import BASE32, decode
from geotree.ingest import Dataset, SaleRecord

# The nine-geohash example set from the GeoTree description. It uses the
# letter 'a', which no real geohash contains, so trees over it need a wider
# alphabet. MAPPED_GEOHASHES swaps 'a' for 'b' to get decodable cells with
# the same prefix structure.
SAMPLE_GEOHASHES = ["gc7j98", "gc7j98", "gd7j98", "ac7j98", "gc9aaj", "gc7j9d", "ac7j98", "gd7jya", "gc9aaj"]
MAPPED_GEOHASHES = [g.replace("a", "b") for g in SAMPLE_GEOHASHES]
SAMPLE_ALPHABET = BASE32 + "a"


@pytest.fixture
def sample_geohashes():
    return list(SAMPLE_GEOHASHES)


@pytest.fixture
def sample_dataset():
    """The mapped sample geohashes as sales located at their cell centres."""
    records = []
    for i, g in enumerate(MAPPED_GEOHASHES):
        lat, lon = decode(g).centroid
        records.append(SaleRecord(i, 0, "2011-02", 100.0 + i, lat, lon, g))
    return Dataset(records, height=6, epoch="2011-02")


def pytest_terminal_summary(terminalreporter):
    results = _acceptance_log.RESULTS
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, name in _acceptance_log.CRITERIA.items():
        checks = results.get(n)
        if checks is None:
            tr.write_line(f"[NOT RUN] {n}. {name}")
            continue
        ok = all(c[0] for c in checks)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {name}")
        for passed, detail in checks:
            tr.write_line(f"        {'ok ' if passed else 'BAD'} {detail}")
