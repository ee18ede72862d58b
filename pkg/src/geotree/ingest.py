"""Sale records: CSV loading/writing and a deterministic synthetic generator.

Canonical CSV schema, UTF-8, comma separated, header required::

    id,date,price,lat,lon

``date`` is ``YYYY-MM``. ``id`` is optional on input; without it records are
numbered by row starting at 0.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .geohash import BoundingBox, GeoPoint, encode_many, validate_point

CSV_HEADER = ("id", "date", "price", "lat", "lon")
DEFAULT_HEIGHT = 12

_DATE_RE = re.compile(r"^(\d{4})-(\d{2})$")


class CSVFormatError(ValueError):
    def __init__(self, line: int, field_name: str | None, message: str):
        self.line = line
        self.field = field_name
        where = f"line {line}" + (f", field {field_name!r}" if field_name else "")
        super().__init__(f"{where}: {message}")


def month_ordinal(label: str) -> int:
    m = _DATE_RE.match(label)
    if not m or not 1 <= int(m.group(2)) <= 12:
        raise ValueError(f"expected YYYY-MM, got {label!r}")
    return int(m.group(1)) * 12 + int(m.group(2)) - 1


def month_label(ordinal: int) -> str:
    year, month0 = divmod(ordinal, 12)
    return f"{year:04d}-{month0 + 1:02d}"


@dataclass(frozen=True, slots=True)
class SaleRecord:
    id: int
    month: int
    label: str
    price: float
    lat: float
    lon: float
    geohash: str

    @property
    def location(self) -> GeoPoint:
        return GeoPoint(self.lat, self.lon)


class Dataset(Sequence):
    """Immutable, ordered collection of :class:`SaleRecord` with unique ids.

    Month indices count from ``epoch`` (the earliest month present unless
    given explicitly).
    """

    def __init__(self, records: Iterable[SaleRecord], height: int = DEFAULT_HEIGHT, epoch: str | None = None):
        self._records = tuple(records)
        self.height = height
        self.epoch = epoch
        seen = set()
        for r in self._records:
            if r.id in seen:
                raise ValueError(f"duplicate record id {r.id!r}")
            seen.add(r.id)

    @classmethod
    def from_rows(cls, rows: Iterable[tuple], height: int = DEFAULT_HEIGHT, epoch: str | None = None) -> "Dataset":
        """Build from ``(id, date_label, price, lat, lon)`` tuples."""
        rows = list(rows)
        ordinals = [month_ordinal(r[1]) for r in rows]
        if epoch is None and ordinals:
            epoch = month_label(min(ordinals))
        base = month_ordinal(epoch) if epoch else 0
        for (rid, label, price, lat, lon), o in zip(rows, ordinals):
            if o < base:
                raise ValueError(f"record {rid!r} dated {label} precedes epoch {epoch}")
            check_price(price)
            validate_point(lat, lon)
        geohashes = encode_many([r[3] for r in rows], [r[4] for r in rows], height) if rows else []
        records = [
            SaleRecord(rid, o - base, label, float(price), float(lat), float(lon), g)
            for (rid, label, price, lat, lon), o, g in zip(rows, ordinals, geohashes)
        ]
        return cls(records, height=height, epoch=epoch)

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, i):
        return self._records[i]

    def __iter__(self) -> Iterator[SaleRecord]:
        return iter(self._records)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._records == other._records and self.epoch == other.epoch

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, months={self.n_months}, height={self.height}, epoch={self.epoch!r})"

    @cached_property
    def by_month(self) -> dict[int, tuple[SaleRecord, ...]]:
        groups: dict[int, list[SaleRecord]] = {}
        for r in self._records:
            groups.setdefault(r.month, []).append(r)
        return {m: tuple(groups[m]) for m in sorted(groups)}

    @cached_property
    def by_id(self) -> dict[int, SaleRecord]:
        return {r.id: r for r in self._records}

    @property
    def n_months(self) -> int:
        """Months spanned from the epoch to the last sale, inclusive."""
        return max(self.by_month) + 1 if self._records else 0

    def month_labels(self) -> list[str]:
        base = month_ordinal(self.epoch) if self.epoch else 0
        return [month_label(base + m) for m in range(self.n_months)]

    def with_prices(self, prices: Sequence[float]) -> "Dataset":
        records = [dataclasses.replace(r, price=float(p)) for r, p in zip(self._records, prices, strict=True)]
        return Dataset(records, height=self.height, epoch=self.epoch)


def check_price(price: float) -> None:
    if not (isinstance(price, (int, float)) and math.isfinite(price) and price > 0):
        raise ValueError(f"price must be a positive finite number, got {price!r}")


def _parse_float(text: str, line: int, name: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise CSVFormatError(line, name, f"not a number: {text!r}") from None
    if not math.isfinite(value):
        raise CSVFormatError(line, name, f"not finite: {text!r}")
    return value


def read_csv(lines: Iterable[str], height: int = DEFAULT_HEIGHT) -> Dataset:
    reader = csv.reader(lines)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CSVFormatError(1, None, "missing header") from None
    missing = [c for c in CSV_HEADER[1:] if c not in header]
    if missing:
        raise CSVFormatError(1, None, f"header lacks columns {missing}")
    col = {name: header.index(name) for name in CSV_HEADER if name in header}

    rows = []
    for row_no, row in enumerate(reader):
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise CSVFormatError(line, None, f"expected {len(header)} fields, got {len(row)}")
        if "id" in col:
            try:
                rid = int(row[col["id"]])
            except ValueError:
                raise CSVFormatError(line, "id", f"not an integer: {row[col['id']]!r}") from None
        else:
            rid = row_no
        label = row[col["date"]].strip()
        try:
            month_ordinal(label)
        except ValueError as exc:
            raise CSVFormatError(line, "date", str(exc)) from None
        price = _parse_float(row[col["price"]], line, "price")
        if price <= 0:
            raise CSVFormatError(line, "price", f"must be positive, got {price!r}")
        lat = _parse_float(row[col["lat"]], line, "lat")
        lon = _parse_float(row[col["lon"]], line, "lon")
        for name, value, bound in (("lat", lat, 90.0), ("lon", lon, 180.0)):
            if abs(value) > bound:
                raise CSVFormatError(line, name, f"{value!r} outside [-{bound:g}, {bound:g}]")
        rows.append((rid, label, price, lat, lon, line))

    seen: dict[int, int] = {}
    for rid, *_, line in rows:
        if rid in seen:
            raise CSVFormatError(line, "id", f"duplicate id {rid} (first on line {seen[rid]})")
        seen[rid] = line
    return Dataset.from_rows((r[:5] for r in rows), height=height)


def load_csv(path: str | Path, height: int = DEFAULT_HEIGHT) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_csv(fh, height=height)


def write_csv(data: Dataset, out) -> None:
    """Write ``data`` in the canonical schema to a path or text stream.

    Floats are written with ``repr`` so that loading the file back yields
    identical records.
    """
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_csv(data, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in data:
        writer.writerow((r.id, r.label, repr(r.price), repr(r.lat), repr(r.lon)))


def to_csv_string(data: Dataset) -> str:
    buf = io.StringIO()
    write_csv(data, buf)
    return buf.getvalue()


# -- synthetic data ---------------------------------------------------------

IRELAND = BoundingBox(51.4, 55.4, -10.5, -6.0)


def default_trend(n_months: int) -> tuple[float, ...]:
    """Boom-then-bust multiplicative price level, 1.0 in the first month."""
    if n_months == 1:
        return (1.0,)
    return tuple(
        math.exp(0.25 * math.sin(1.5 * math.pi * m / (n_months - 1)) + 0.005 * m) for m in range(n_months)
    )


@dataclass(frozen=True)
class SyntheticConfig:
    n_records: int = 10_000
    n_months: int = 24
    seed: int = 42
    region: BoundingBox = IRELAND
    trend: tuple[float, ...] | None = None
    epoch: str = "2011-02"
    n_clusters: int = 12
    n_bumps: int = 6
    noise_sigma: float = 0.12
    height: int = DEFAULT_HEIGHT

    def __post_init__(self):
        if self.n_records < 0:
            raise ValueError(f"n_records must be >= 0, got {self.n_records}")
        if self.n_months < 1:
            raise ValueError(f"n_months must be >= 1, got {self.n_months}")
        region = BoundingBox(*self.region)
        if not (-90 <= region.lat_min < region.lat_max <= 90 and -180 <= region.lon_min < region.lon_max <= 180):
            raise ValueError(f"invalid region {tuple(region)}")
        object.__setattr__(self, "region", region)
        if self.trend is not None:
            trend = tuple(float(t) for t in self.trend)
            if len(trend) != self.n_months or not all(t > 0 and math.isfinite(t) for t in trend):
                raise ValueError("trend needs one positive factor per month")
            object.__setattr__(self, "trend", trend)
        if not 0 <= self.noise_sigma < 1:
            raise ValueError(f"noise_sigma must be in [0, 1), got {self.noise_sigma}")
        month_ordinal(self.epoch)

    @property
    def trend_factors(self) -> tuple[float, ...]:
        return self.trend if self.trend is not None else default_trend(self.n_months)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "SyntheticConfig":
        """Read a JSON object whose keys are this class's field names."""
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        if "region" in raw and isinstance(raw["region"], dict):
            raw["region"] = BoundingBox(**raw["region"])
        return cls(**raw)


@dataclass(frozen=True)
class PriceField:
    """Smooth price surface: a base level plus Gaussian bumps."""

    level: float
    centres: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    scales: np.ndarray = field(repr=False)
    lon_scale: float = 1.0

    def __call__(self, lats, lons) -> np.ndarray:
        lats = np.asarray(lats, dtype=float)[..., None]
        lons = np.asarray(lons, dtype=float)[..., None]
        d2 = (lats - self.centres[:, 0]) ** 2 + ((lons - self.centres[:, 1]) * self.lon_scale) ** 2
        return self.level + np.sum(self.amplitudes * np.exp(-d2 / (2 * self.scales**2)), axis=-1)


def _field_params(config: SyntheticConfig, rng: np.random.Generator) -> PriceField:
    reg = config.region
    centres = np.column_stack([
        rng.uniform(reg.lat_min, reg.lat_max, config.n_bumps),
        rng.uniform(reg.lon_min, reg.lon_max, config.n_bumps),
    ])
    span = min(reg.lat_max - reg.lat_min, reg.lon_max - reg.lon_min)
    return PriceField(
        level=50_000.0,
        centres=centres,
        amplitudes=rng.uniform(200_000, 700_000, config.n_bumps),
        scales=rng.uniform(0.08, 0.2, config.n_bumps) * span,
        lon_scale=math.cos(math.radians((reg.lat_min + reg.lat_max) / 2)),
    )


def price_field(config: SyntheticConfig) -> PriceField:
    """The smooth surface :func:`generate` draws prices around."""
    return _field_params(config, np.random.default_rng(config.seed))


def generate(config: SyntheticConfig) -> Dataset:
    """Deterministic synthetic sales dataset.

    Locations come from a mixture of Gaussian clusters clipped to the
    region; price = field(location) * trend[month] * noise, with log-normal
    noise truncated at three sigma. Records are ordered by month and
    numbered from 0.
    """
    rng = np.random.default_rng(config.seed)
    surface = _field_params(config, rng)
    reg = config.region
    n = config.n_records
    epoch = config.epoch
    if n == 0:
        return Dataset([], height=config.height, epoch=epoch)

    k = config.n_clusters
    centres = np.column_stack([
        rng.uniform(reg.lat_min, reg.lat_max, k),
        rng.uniform(reg.lon_min, reg.lon_max, k),
    ])
    spreads = rng.uniform(0.01, 0.06, k) * (reg.lat_max - reg.lat_min)
    weights = rng.dirichlet(np.full(k, 2.0))
    which = rng.choice(k, size=n, p=weights)
    lats = np.clip(rng.normal(centres[which, 0], spreads[which]), reg.lat_min, reg.lat_max)
    lons = np.clip(rng.normal(centres[which, 1], spreads[which] * 2), reg.lon_min, reg.lon_max)
    months = np.sort(rng.integers(0, config.n_months, n))
    sigma = config.noise_sigma
    noise = np.exp(np.clip(rng.normal(0.0, sigma, n), -3 * sigma, 3 * sigma))
    trend = np.asarray(config.trend_factors)
    prices = np.round(surface(lats, lons) * trend[months] * noise, 2)
    lats = np.round(lats, 6)
    lons = np.round(lons, 6)

    geohashes = encode_many(lats, lons, config.height)
    base = month_ordinal(epoch)
    labels = [month_label(base + m) for m in range(config.n_months)]
    records = [
        SaleRecord(i, int(m), labels[m], float(p), float(la), float(lo), g)
        for i, (m, p, la, lo, g) in enumerate(zip(months, prices, lats, lons, geohashes))
    ]
    return Dataset(records, height=config.height, epoch=epoch)
