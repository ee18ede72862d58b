"""Build-time and query-time measurements for the tree.

Protocol per (height, fraction) cell: one untimed warm-up build and query
pass, then ``trials`` timed repetitions of (a) inserting every record of the
subset into a fresh tree and (b) running ``n_queries`` sequential maximal
queries at geohashes sampled from the subset, each excluding its own record.
The garbage collector is paused inside timed regions, as ``timeit`` does.
"""

from __future__ import annotations

import csv
import gc
import statistics
import time
from collections.abc import Sequence
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .tree import GeoTree


@dataclass(frozen=True)
class BenchRow:
    operation: str
    dataset_fraction: float
    n_records: int
    height: int
    trials: int
    mean_s: float
    std_s: float
    std_pct: float


REPORT_HEADER = tuple(f.name for f in fields(BenchRow))


def _timed(fn) -> float:
    enabled = gc.isenabled()
    gc.disable()
    try:
        start = time.perf_counter()
        fn()
        return time.perf_counter() - start
    finally:
        if enabled:
            gc.enable()


def build_tree(geohashes: Sequence[str], ids: Sequence, height: int) -> GeoTree:
    tree = GeoTree(height)
    insert = tree.insert
    for g, i in zip(geohashes, ids):
        insert(g, i)
    return tree


def time_build(geohashes: Sequence[str], ids: Sequence, height: int) -> tuple[float, GeoTree]:
    box = []
    elapsed = _timed(lambda: box.append(build_tree(geohashes, ids, height)))
    return elapsed, box[0]


def time_queries(tree: GeoTree, queries: Sequence[tuple[str, object]]) -> float:
    """Total seconds for the queries run back to back on this thread."""
    query = tree.query_maximal

    def run():
        for g, rid in queries:
            query(g, exclude=(rid,))

    return _timed(run)


def _row(op, fraction, n, height, samples) -> BenchRow:
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return BenchRow(op, fraction, n, height, len(samples), mean, std, 100.0 * std / mean if mean > 0 else 0.0)


def run_bench(
    geohashes: Sequence[str],
    heights: Sequence[int] = (4, 5, 6, 7, 8),
    fractions: Sequence[float] = (0.1, 1.0),
    trials: int = 10,
    n_queries: int = 100,
    seed: int = 0,
    progress=None,
) -> list[BenchRow]:
    """Measure build and query time for every (height, fraction) pair.

    Fraction subsets are prefixes of one seeded shuffle, so smaller subsets
    are contained in larger ones.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    for f in fractions:
        if not 0 < f <= 1:
            raise ValueError(f"fractions must be in (0, 1], got {f}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(geohashes))
    shuffled = [geohashes[i] for i in order]
    ids = order.tolist()

    rows = []
    for height in heights:
        for fraction in fractions:
            n = max(1, round(fraction * len(shuffled)))
            sub, sub_ids = shuffled[:n], ids[:n]
            picks = rng.integers(0, n, n_queries)
            queries = [(sub[j], sub_ids[j]) for j in picks]

            _, tree = time_build(sub, sub_ids, height)
            time_queries(tree, queries)
            del tree

            builds, lookups = [], []
            for _ in range(trials):
                gc.collect()
                elapsed, tree = time_build(sub, sub_ids, height)
                builds.append(elapsed)
                lookups.append(time_queries(tree, queries))
                del tree
            rows.append(_row("build", fraction, n, height, builds))
            rows.append(_row(f"query_x{n_queries}", fraction, n, height, lookups))
            if progress is not None:
                progress(rows[-2])
                progress(rows[-1])
    return rows


def write_report(rows: Sequence[BenchRow], out) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_report(rows, fh)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for row in rows:
        writer.writerow(astuple(row))


def read_report(path) -> list[BenchRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_HEADER:
            raise ValueError(f"unexpected report header {reader.fieldnames}")
        return [
            BenchRow(
                r["operation"], float(r["dataset_fraction"]), int(r["n_records"]), int(r["height"]),
                int(r["trials"]), float(r["mean_s"]), float(r["std_s"]), float(r["std_pct"]),
            )
            for r in reader
        ]
