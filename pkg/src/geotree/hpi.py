"""Mix-adjusted median price index with swappable neighbour search.

Two stages drive the index:

* voting: for every month and every sale in it, the ratio of its price to a
  comparable sale from the same month;
* stratification: for every month, every sale in it and every earlier
  month, the ratio of its price to a comparable sale from that earlier
  month. The median ratio per month pair is the growth factor.

The index chains growth factors: ``index[m]`` is the median over earlier
months ``p`` of ``index[p] * g(p -> m)``, starting from 100.

The comparable comes from a backend. :class:`NaiveBackend` scans every sale
of the month for the haversine-nearest one. :class:`GeoTreeBackend` keeps a
:class:`~geotree.tree.GeoTree` per month and takes the median price of the
deepest non-empty bucket around the sale (or, with ``strategy="nearest"``,
the closest sale inside that bucket).

Backends are fitted once and then only read, so stage work items may run on
several threads; results are merged in month order.
"""

from __future__ import annotations

import csv
import math
import os
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import NamedTuple

from .geohash import EARTH_RADIUS_M, haversine
from .ingest import Dataset, SaleRecord
from .tree import GeoTree


@dataclass(frozen=True, slots=True)
class ComparablePrice:
    value: float
    support: int
    scb_depth: int | None = None
    distance_m: float | None = None


@dataclass
class OpCounter:
    """Work done by neighbour searches: distance evaluations for the naive
    scan, child-map lookups for the tree."""

    searches: int = 0
    distance_evals: int = 0
    map_steps: int = 0

    def merge(self, other: "OpCounter") -> None:
        self.searches += other.searches
        self.distance_evals += other.distance_evals
        self.map_steps += other.map_steps


class GrowthFactor(NamedTuple):
    value: float
    support: int


def _median_without(sorted_vals: list[float], x: float) -> float:
    """Median of ``sorted_vals`` with one occurrence of ``x`` removed."""
    i = bisect_left(sorted_vals, x)
    n = len(sorted_vals) - 1

    def at(j):
        return sorted_vals[j] if j < i else sorted_vals[j + 1]

    if n % 2:
        return at(n // 2)
    return (at(n // 2 - 1) + at(n // 2)) / 2


class _MonthScan:
    __slots__ = ("rows", "ids", "prices", "pos")

    def __init__(self, records):
        self.rows = [(math.radians(r.lat), r.lon, math.cos(math.radians(r.lat))) for r in records]
        self.ids = [r.id for r in records]
        self.prices = [r.price for r in records]
        self.pos = {r.id: i for i, r in enumerate(records)}


class NaiveBackend:
    """Exact nearest neighbour by scanning every sale of the month.

    Distances use the same arithmetic as :func:`geotree.geohash.haversine`,
    so results agree exactly with the brute-force oracle, ties included.
    """

    kind = "naive"

    def fit(self, data: Dataset) -> "NaiveBackend":
        self._months = {m: _MonthScan(recs) for m, recs in data.by_month.items()}
        self.data_ = data
        return self

    def comparable(self, house: SaleRecord, month: int, counter: OpCounter | None = None) -> ComparablePrice | None:
        scan = self._months.get(month)
        if scan is None:
            return None
        sin, rad = math.sin, math.radians
        phi1 = rad(house.lat)
        c1 = math.cos(phi1)
        lon1 = house.lon
        hs = [sin((p - phi1) / 2) ** 2 + c1 * c * sin(rad(lon - lon1) / 2) ** 2 for p, lon, c in scan.rows]
        if counter is not None:
            counter.searches += 1
            counter.distance_evals += len(hs)
        skip = scan.pos.get(house.id)
        if skip is not None:
            hs[skip] = math.inf
        lowest = min(hs)
        if lowest == math.inf:
            return None
        # distinct h values may round to the same distance, so settle
        # near-ties on the final distance and then the id
        limit = lowest * (1 + 1e-9)
        best = min(
            (2 * EARTH_RADIUS_M * math.asin(math.sqrt(min(1.0, hs[i]))), scan.ids[i], i)
            for i, v in enumerate(hs)
            if v <= limit
        )
        return ComparablePrice(scan.prices[best[2]], 1, distance_m=best[0])


class GeoTreeBackend:
    """Approximate comparable from the deepest non-empty geohash bucket.

    ``strategy="median"`` returns the bucket's median price;
    ``strategy="nearest"`` scans the bucket for the closest sale.
    """

    kind = "geotree"

    def __init__(self, height: int = 6, strategy: str = "median"):
        if strategy not in ("median", "nearest"):
            raise ValueError(f"strategy must be 'median' or 'nearest', got {strategy!r}")
        self.height = height
        self.strategy = strategy

    def fit(self, data: Dataset) -> "GeoTreeBackend":
        if data.height < self.height:
            raise ValueError(f"dataset geohashes have {data.height} characters, tree needs {self.height}")
        self._trees = {}
        for m, recs in data.by_month.items():
            tree = GeoTree(self.height)
            for r in recs:
                tree.insert(r.geohash, r.id)
            self._trees[m] = tree
        self._price = {r.id: r.price for r in data}
        self._records = data.by_id
        self._sorted: dict[tuple[int, str], list[float]] = {}
        self.data_ = data
        return self

    def _bucket_prices(self, month: int, tree: GeoTree, geohash: str, depth: int) -> list[float]:
        key = (month, geohash[:depth])
        vals = self._sorted.get(key)
        if vals is None:
            bucket = tree.query_at_level(geohash, depth).entries
            vals = self._sorted[key] = sorted(self._price[e.record_id] for e in bucket)
        return vals

    def comparable(self, house: SaleRecord, month: int, counter: OpCounter | None = None) -> ComparablePrice | None:
        tree = self._trees.get(month)
        if tree is None:
            return None
        is_member = house.id in tree
        res = tree.query_maximal(house.geohash, exclude=(house.id,) if is_member else None)
        if counter is not None:
            counter.searches += 1
            counter.map_steps += min(res.depth + 1, self.height)
        if res.depth == 0:
            return None
        if self.strategy == "nearest":
            here = house.location
            d, _, rid = min(
                (haversine(here, self._records[e.record_id].location), e.record_id, e.record_id) for e in res.entries
            )
            return ComparablePrice(self._price[rid], 1, scb_depth=res.depth, distance_m=d)
        vals = self._bucket_prices(month, tree, house.geohash, res.depth)
        value = _median_without(vals, house.price) if is_member else median(vals)
        return ComparablePrice(value, len(res.entries), scb_depth=res.depth)


def make_backend(kind: str, height: int = 6, strategy: str = "median"):
    if kind == "naive":
        return NaiveBackend()
    if kind == "geotree":
        return GeoTreeBackend(height=height, strategy=strategy)
    raise ValueError(f"unknown backend {kind!r}; expected 'naive' or 'geotree'")


def _ready(backend, data: Dataset):
    if getattr(backend, "data_", None) is not data:
        backend.fit(data)
    return backend


def _run(fn, items, n_jobs: int):
    if n_jobs == -1:
        n_jobs = os.cpu_count() or 1
    if n_jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def comparable_same_month(house: SaleRecord, month: int, backend, data: Dataset, counter: OpCounter | None = None):
    if house.month != month:
        raise ValueError(f"record {house.id} sold in month {house.month}, not {month}")
    return _ready(backend, data).comparable(house, month, counter)


def comparable_prior_month(house: SaleRecord, prior_month: int, backend, data: Dataset, counter: OpCounter | None = None):
    if prior_month >= house.month:
        raise ValueError(f"prior month {prior_month} is not before month {house.month}")
    return _ready(backend, data).comparable(house, prior_month, counter)


def voting_stage(data: Dataset, backend, n_jobs: int = 1, counter: OpCounter | None = None) -> dict[int, float]:
    """Map record id -> price / same-month comparable. Sales without a
    comparable are left out."""
    _ready(backend, data)

    def work(month):
        local = OpCounter()
        out = {}
        for house in data.by_month[month]:
            c = backend.comparable(house, month, local)
            if c is not None:
                out[house.id] = house.price / c.value
        return out, local

    table: dict[int, float] = {}
    for part, local in _run(work, list(data.by_month), n_jobs):
        table.update(part)
        if counter is not None:
            counter.merge(local)
    return table


def stratify_stage(
    data: Dataset, backend, n_jobs: int = 1, counter: OpCounter | None = None
) -> dict[tuple[int, int], GrowthFactor]:
    """Growth factor for every (earlier month, month) pair that has at least
    one comparable; missing keys are undefined pairs."""
    if len(data.by_month) < 2:
        raise ValueError("stratification needs sales in at least two months")
    _ready(backend, data)
    months = list(data.by_month)

    def work(month):
        local = OpCounter()
        priors = [p for p in months if p < month]
        ratios: dict[int, list[float]] = {p: [] for p in priors}
        for house in data.by_month[month]:
            for p in priors:
                c = backend.comparable(house, p, local)
                if c is not None:
                    ratios[p].append(house.price / c.value)
        return {(p, month): GrowthFactor(median(r), len(r)) for p, r in ratios.items() if r}, local

    growth: dict[tuple[int, int], GrowthFactor] = {}
    for part, local in _run(work, months, n_jobs):
        growth.update(part)
        if counter is not None:
            counter.merge(local)
    return growth


@dataclass
class IndexSeries:
    epoch: str | None
    labels: list[str]
    values: list[float]
    carried_forward: list[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, out) -> None:
        if isinstance(out, (str, Path)):
            with open(out, "w", newline="", encoding="utf-8") as fh:
                self.to_csv(fh)
            return
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("month", "index", "carried_forward"))
        for label, value, carried in zip(self.labels, self.values, self.carried_forward):
            writer.writerow((label, repr(value), int(carried)))

    @classmethod
    def read_csv(cls, path) -> "IndexSeries":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return cls(
            epoch=rows[0]["month"] if rows else None,
            labels=[r["month"] for r in rows],
            values=[float(r["index"]) for r in rows],
            carried_forward=[r["carried_forward"] == "1" for r in rows],
        )


def index_from_growth(growth: dict[tuple[int, int], GrowthFactor], n_months: int) -> tuple[list[float], list[bool]]:
    values = [100.0]
    carried = [False]
    for m in range(1, n_months):
        chained = [values[p] * g.value for (p, to), g in growth.items() if to == m]
        if chained:
            values.append(median(chained))
            carried.append(False)
        else:
            values.append(values[-1])
            carried.append(True)
    return values, carried


def compute_index(data: Dataset, backend, n_jobs: int = 1, counter: OpCounter | None = None) -> IndexSeries:
    """Index series from month 0 (= 100) to the last month with sales.

    A month without any defined growth factor repeats the previous value
    and is flagged ``carried_forward``.
    """
    if len(data.by_month) < 2:
        raise ValueError("an index needs sales in at least two months")
    growth = stratify_stage(data, backend, n_jobs=n_jobs, counter=counter)
    values, carried = index_from_growth(growth, data.n_months)
    return IndexSeries(data.epoch, data.month_labels(), values, carried)


def write_growth_csv(growth: dict[tuple[int, int], GrowthFactor], labels: list[str], out) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_growth_csv(growth, labels, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("from_month", "to_month", "growth", "support"))
    for (p, m), g in sorted(growth.items()):
        writer.writerow((labels[p], labels[m], repr(g.value), g.support))
