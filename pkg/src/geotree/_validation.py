"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .ingest import Dataset
from .tree import MAX_HEIGHT


def check_latlon(X, ensure_min_samples: int = 1) -> np.ndarray:
    """Validate an ``(n, 2)`` array of latitude/longitude in degrees."""
    X = check_array(X, dtype=np.float64, ensure_min_samples=ensure_min_samples)
    if X.shape[1] != 2:
        raise ValueError(f"expected 2 columns (lat, lon), got {X.shape[1]}")
    if np.any(np.abs(X[:, 0]) > 90):
        raise ValueError("latitude outside [-90, 90]")
    if np.any(np.abs(X[:, 1]) > 180):
        raise ValueError("longitude outside [-180, 180]")
    return X


def check_height(height) -> int:
    if isinstance(height, bool) or not isinstance(height, (int, np.integer)) or not 1 <= height <= MAX_HEIGHT:
        raise ValueError(f"height must be an integer in 1..{MAX_HEIGHT}, got {height!r}")
    return int(height)


def as_dataset(data, height: int) -> Dataset:
    """Accept a :class:`Dataset`, a DataFrame with the canonical columns, or
    an iterable of ``(id, date, price, lat, lon)`` tuples."""
    if isinstance(data, Dataset):
        if data.height < height:
            raise ValueError(f"dataset geohashes have {data.height} characters, need at least {height}")
        return data
    if hasattr(data, "itertuples"):
        missing = {"id", "date", "price", "lat", "lon"} - set(data.columns)
        if missing:
            raise ValueError(f"frame lacks columns {sorted(missing)}")
        rows = data[["id", "date", "price", "lat", "lon"]].itertuples(index=False, name=None)
        return Dataset.from_rows(((int(i), str(d), float(p), float(la), float(lo)) for i, d, p, la, lo in rows), height=max(height, 12))
    return Dataset.from_rows(data, height=max(height, 12))
