"""Brute-force ground truth.

Everything here is a straight loop over the records. It is the reference the
tree and the price-index backends are checked against, so keep it obvious
rather than fast.
"""

from __future__ import annotations

from collections.abc import Iterable
from functools import lru_cache

from .geohash import encode, haversine
from .ingest import SaleRecord


# Memoised so repeated prefix filters over one dataset stay affordable; the
# geohash still comes from the coordinates, never from the record.
_encode = lru_cache(maxsize=1 << 18)(encode)


def _ranked(query, data: Iterable[SaleRecord], exclude) -> list[tuple[float, int, SaleRecord]]:
    exclude = set(exclude or ())
    ranked = []
    for r in data:
        if r.id in exclude:
            continue
        ranked.append((haversine(query, (r.lat, r.lon)), r.id, r))
    ranked.sort(key=lambda t: (t[0], t[1]))
    return ranked


def nn_bruteforce(query, data: Iterable[SaleRecord], exclude=()) -> SaleRecord | None:
    """Nearest record to ``query`` by haversine distance; ties go to the lower id."""
    best = None
    best_key = None
    exclude = set(exclude or ())
    for r in data:
        if r.id in exclude:
            continue
        key = (haversine(query, (r.lat, r.lon)), r.id)
        if best_key is None or key < best_key:
            best, best_key = r, key
    return best


def knn_bruteforce(query, k: int, data: Iterable[SaleRecord], exclude=()) -> list[SaleRecord]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return [r for _, _, r in _ranked(query, data, exclude)[:k]]


def prefix_filter_bruteforce(prefix: str, data: Iterable[SaleRecord], h: int) -> list[SaleRecord]:
    """Records whose location, re-encoded at length ``h``, starts with ``prefix``."""
    if len(prefix) > h:
        raise ValueError(f"prefix {prefix!r} longer than h={h}")
    return [r for r in data if _encode(r.lat, r.lon, h).startswith(prefix)]
