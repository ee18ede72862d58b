"""Geohash encoding and decoding, haversine distance and common-prefix buckets.

Geohashes follow the public Niemeyer scheme: bits come from repeated binary
subdivision of the coordinate ranges, even bit positions refine longitude and
odd ones latitude, and every 5 bits become one character of ``BASE32``.
A coordinate lying exactly on a dividing line goes to the upper/right half.
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np

BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"
DECODE_MAP = {c: i for i, c in enumerate(BASE32)}
ALPHABET = frozenset(BASE32)

MAX_LENGTH = 22
EARTH_RADIUS_M = 6_371_000.0

# Largest possible haversine distance between two points sharing a geohash
# prefix of the given length: the corner-to-corner diagonal of an
# equator-adjacent cell at that length, rounded up to the millimetre.
# Length 0 is half the circumference.
_UPPER_BOUND_M = {
    0: 20015086.797,
    1: 6671695.599,
    2: 1396792.417,
    3: 221126.455,
    4: 43706.093,
    5: 6910.549,
    6: 1365.818,
    7: 215.955,
    8: 42.682,
    9: 6.749,
    10: 1.334,
    11: 0.211,
    12: 0.042,
}

# pygeohash's approximate distance per matching prefix length. These are
# rough cell sizes, not strict bounds (see distance_upper_bound).
_PYGEOHASH_APPROX_M = {
    0: 20000000,
    1: 5003530,
    2: 625441,
    3: 123264,
    4: 19545,
    5: 3803,
    6: 610,
    7: 118,
    8: 19,
    9: 3.71,
    10: 0.6,
}


class GeoPoint(NamedTuple):
    lat: float
    lon: float


class BoundingBox(NamedTuple):
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    @property
    def centroid(self) -> GeoPoint:
        return GeoPoint((self.lat_min + self.lat_max) / 2, (self.lon_min + self.lon_max) / 2)

    def contains(self, lat: float, lon: float) -> bool:
        """Membership under the encoder's convention.

        Cells are half-open, ``[min, max)``, except along the global upper
        edges (lat 90, lon 180) which have no cell above them.
        """
        lat_ok = self.lat_min <= lat < self.lat_max or lat == self.lat_max == 90.0
        lon_ok = self.lon_min <= lon < self.lon_max or lon == self.lon_max == 180.0
        return lat_ok and lon_ok

    def covers(self, other: "BoundingBox") -> bool:
        return (
            self.lat_min <= other.lat_min
            and other.lat_max <= self.lat_max
            and self.lon_min <= other.lon_min
            and other.lon_max <= self.lon_max
        )


def validate_point(lat: float, lon: float) -> None:
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ValueError(f"coordinates must be finite, got ({lat!r}, {lon!r})")
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude {lat!r} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ValueError(f"longitude {lon!r} outside [-180, 180]")


def _check_length(length: int) -> None:
    if isinstance(length, bool) or not isinstance(length, (int, np.integer)):
        raise ValueError(f"geohash length must be an integer, got {length!r}")
    if not 1 <= length <= MAX_LENGTH:
        raise ValueError(f"geohash length must be in 1..{MAX_LENGTH}, got {length}")


def validate_geohash(geohash: str) -> None:
    if not isinstance(geohash, str) or not geohash:
        raise ValueError(f"geohash must be a non-empty string, got {geohash!r}")
    if not ALPHABET.issuperset(geohash):
        bad = sorted(set(geohash) - ALPHABET)
        raise ValueError(f"geohash {geohash!r} contains invalid characters {bad}")


def encode(lat: float, lon: float, length: int = 12) -> str:
    """Encode a coordinate pair as a geohash of exactly ``length`` characters.

    >>> encode(57.64911, 10.40744, 11)
    'u4pruydqqvj'
    """
    validate_point(lat, lon)
    _check_length(length)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    chars = []
    even = True
    for _ in range(length):
        code = 0
        for _ in range(5):
            code <<= 1
            if even:
                mid = (lon_lo + lon_hi) / 2
                if lon >= mid:
                    code |= 1
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2
                if lat >= mid:
                    code |= 1
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
        chars.append(BASE32[code])
    return "".join(chars)


def encode_many(lats, lons, length: int = 12) -> list[str]:
    """Vectorised :func:`encode`; bit-for-bit identical results."""
    _check_length(length)
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    if lats.shape != lons.shape or lats.ndim != 1:
        raise ValueError("lats and lons must be 1-d arrays of equal length")
    if not (np.all(np.isfinite(lats)) and np.all(np.isfinite(lons))):
        raise ValueError("coordinates must be finite")
    if np.any(np.abs(lats) > 90.0) or np.any(np.abs(lons) > 180.0):
        raise ValueError("coordinates outside valid ranges")

    n = lats.shape[0]
    lat_lo = np.full(n, -90.0)
    lat_hi = np.full(n, 90.0)
    lon_lo = np.full(n, -180.0)
    lon_hi = np.full(n, 180.0)
    codes = np.zeros((n, length), dtype=np.uint8)
    even = True
    for i in range(length):
        code = np.zeros(n, dtype=np.uint8)
        for _ in range(5):
            if even:
                mid = (lon_lo + lon_hi) / 2
                bit = lons >= mid
                lon_lo = np.where(bit, mid, lon_lo)
                lon_hi = np.where(bit, lon_hi, mid)
            else:
                mid = (lat_lo + lat_hi) / 2
                bit = lats >= mid
                lat_lo = np.where(bit, mid, lat_lo)
                lat_hi = np.where(bit, lat_hi, mid)
            code = (code << 1) | bit.astype(np.uint8)
            even = not even
        codes[:, i] = code
    table = np.frombuffer(BASE32.encode("ascii"), dtype=np.uint8)
    raw = np.ascontiguousarray(table[codes]).view(f"S{length}").ravel()
    return [s.decode("ascii") for s in raw]


def decode(geohash: str) -> BoundingBox:
    """Return the exact cell denoted by ``geohash``."""
    validate_geohash(geohash)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for c in geohash:
        code = DECODE_MAP[c]
        for mask in (16, 8, 4, 2, 1):
            if even:
                mid = (lon_lo + lon_hi) / 2
                if code & mask:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2
                if code & mask:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return BoundingBox(lat_lo, lat_hi, lon_lo, lon_hi)


def haversine(a, b) -> float:
    """Great-circle distance in metres between two (lat, lon) points."""
    lat1, lon1 = a
    lat2, lon2 = b
    validate_point(lat1, lon1)
    validate_point(lat2, lon2)
    phi1 = math.radians(lat1)
    phi2 = math.radians(lat2)
    h = (
        math.sin((phi2 - phi1) / 2) ** 2
        + math.cos(phi1) * math.cos(phi2) * math.sin(math.radians(lon2 - lon1) / 2) ** 2
    )
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(min(1.0, h)))


def scb(a: str, b: str) -> str:
    """Smallest common bucket: the longest shared leading substring."""
    return os.path.commonprefix([a, b])


def distance_upper_bound(scb_length: int) -> float:
    """Maximum distance in metres between two points whose geohashes share
    a prefix of ``scb_length`` characters."""
    try:
        return _UPPER_BOUND_M[scb_length]
    except (KeyError, TypeError):
        raise ValueError(f"no distance bound for prefix length {scb_length!r}; supported 0..12") from None


def approximate_distance(scb_length: int) -> float:
    """pygeohash's rough distance figure for a shared prefix length (0..10).

    Kept for comparison with published figures; unlike
    :func:`distance_upper_bound` it is exceeded by real point pairs.
    """
    try:
        return _PYGEOHASH_APPROX_M[scb_length]
    except (KeyError, TypeError):
        raise ValueError(f"no approximate distance for prefix length {scb_length!r}; supported 0..10") from None
