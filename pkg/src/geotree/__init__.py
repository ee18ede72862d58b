"""Geohash prefix tree for constant-time approximate neighbour buckets."""

from .estimators import GeoTreeNeighbors, GeoTreeRegressor, HaversineNNRegressor, PriceIndex
from .geohash import (
    BoundingBox,
    GeoPoint,
    decode,
    distance_upper_bound,
    encode,
    encode_many,
    haversine,
    scb,
)
from .hpi import GeoTreeBackend, IndexSeries, NaiveBackend, compute_index, stratify_stage, voting_stage
from .ingest import Dataset, SaleRecord, SyntheticConfig, generate, load_csv, write_csv
from .tree import BucketResult, Entry, GeoTree

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "BucketResult",
    "Dataset",
    "Entry",
    "GeoPoint",
    "GeoTree",
    "GeoTreeBackend",
    "GeoTreeNeighbors",
    "GeoTreeRegressor",
    "HaversineNNRegressor",
    "IndexSeries",
    "NaiveBackend",
    "PriceIndex",
    "SaleRecord",
    "SyntheticConfig",
    "compute_index",
    "decode",
    "distance_upper_bound",
    "encode",
    "encode_many",
    "generate",
    "haversine",
    "load_csv",
    "scb",
    "stratify_stage",
    "voting_stage",
    "write_csv",
]
