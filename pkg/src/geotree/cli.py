"""Command-line entry point: ``geotree {gen,build,query,index,bench}``."""

from __future__ import annotations

import argparse
import sys
import time

from . import bench as benchmod
from .estimators import PriceIndex
from .hpi import write_growth_csv
from .ingest import DEFAULT_HEIGHT, SyntheticConfig, generate, load_csv, write_csv
from .tree import MAX_HEIGHT, GeoTree


def _height(text: str) -> int:
    value = int(text)
    if not 1 <= value <= MAX_HEIGHT:
        raise argparse.ArgumentTypeError(f"height must be in 1..{MAX_HEIGHT}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _int_list(text: str) -> list[int]:
    return [_height(t) for t in text.split(",") if t]


def _fraction_list(text: str) -> list[float]:
    out = []
    for t in text.split(","):
        t = t.strip()
        value = float(t[:-1]) / 100 if t.endswith("%") else float(t)
        if not 0 < value <= 1:
            raise argparse.ArgumentTypeError(f"fraction {t!r} not in (0, 1]")
        out.append(value)
    return out


def _config(args) -> SyntheticConfig:
    overrides = {"n_records": args.n, "n_months": args.months, "seed": args.seed}
    if args.config:
        return SyntheticConfig.from_file(args.config, **overrides)
    return SyntheticConfig(**{k: v for k, v in overrides.items() if v is not None})


def _load_tree(path: str, height: int):
    data = load_csv(path, height=max(height, DEFAULT_HEIGHT))
    start = time.perf_counter()
    tree = GeoTree(height)
    for r in data:
        tree.insert(r.geohash, r.id)
    return data, tree, time.perf_counter() - start


def cmd_gen(args) -> int:
    data = generate(_config(args))
    write_csv(data, args.out)
    print(f"wrote {len(data)} records to {args.out}")
    return 0


def cmd_build(args) -> int:
    data, tree, elapsed = _load_tree(args.data, args.height)
    print(f"records\t{tree.size()}")
    print(f"height\t{tree.height}")
    print(f"stored_references\t{tree.stored_reference_count()}")
    print(f"build_seconds\t{elapsed:.6f}")
    return 0


def cmd_query(args) -> int:
    _, tree, _ = _load_tree(args.data, args.height)
    geohash = args.geohash
    if args.maximal:
        if len(geohash) < args.height:
            raise ValueError(f"geohash {geohash!r} shorter than tree height {args.height}")
        res = tree.query_maximal(geohash, exclude=args.exclude, min_support=args.min_support)
    else:
        if args.level > args.height:
            raise ValueError(f"level {args.level} exceeds tree height {args.height}")
        res = tree.query_at_level(geohash, args.level)
    ids = sorted(res.entries.ids())
    print(f"prefix\t{res.prefix}")
    print(f"depth\t{res.depth}")
    print(f"count\t{len(ids)}")
    print("ids\t" + ",".join(str(i) for i in ids))
    return 0


def cmd_index(args) -> int:
    data = load_csv(args.data, height=max(args.height, DEFAULT_HEIGHT))
    est = PriceIndex(backend=args.backend, height=args.height, strategy=args.strategy, n_jobs=args.threads)
    est.fit(data)
    est.series_.to_csv(args.out)
    if args.growth_out:
        write_growth_csv(est.growth_, est.month_labels_, args.growth_out)
    tag = "+" if args.backend == "geotree" else ""
    print(f"{'stage':<12}{'seconds':>12}{'searches':>12}")
    for stage in ("voting", "stratify"):
        ops = est.counters_[stage]
        print(f"{stage.capitalize() + tag:<12}{est.timings_[stage]:>12.4f}{ops.searches:>12}")
    print(f"{'Overall' + tag:<12}{est.timings_['overall']:>12.4f}")
    carried = sum(est.series_.carried_forward)
    if carried:
        print(f"{carried} month(s) carried forward", file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    if args.data:
        geohashes = [r.geohash for r in load_csv(args.data, height=max(max(args.heights), DEFAULT_HEIGHT))]
    else:
        data = generate(SyntheticConfig(n_records=args.gen, n_months=args.months, seed=args.seed))
        geohashes = [r.geohash for r in data]

    def show(row):
        print(
            f"{row.operation:<11} h={row.height} frac={row.dataset_fraction:g} n={row.n_records} "
            f"mean={row.mean_s:.6f}s std={row.std_s:.6f}s ({row.std_pct:.2f}%)",
            file=sys.stderr,
        )

    rows = benchmod.run_bench(
        geohashes, heights=args.heights, fractions=args.fractions, trials=args.trials,
        n_queries=args.queries, seed=args.seed, progress=show,
    )
    if args.out:
        benchmod.write_report(rows, args.out)
    else:
        benchmod.write_report(rows, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geotree", description="Geohash prefix-tree index and price-index tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic sales CSV")
    p.add_argument("--n", type=_non_negative, help="number of records (default 10000)")
    p.add_argument("--months", type=_positive, help="number of months (default 24)")
    p.add_argument("--seed", type=int, help="random seed (default 42)")
    p.add_argument("--config", help="JSON file with SyntheticConfig fields; flags override it")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build a tree and report its size")
    p.add_argument("--data", required=True)
    p.add_argument("--height", type=_height, default=6)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="query a bucket")
    p.add_argument("--data", required=True)
    p.add_argument("--height", type=_height, default=6)
    p.add_argument("--geohash", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--level", type=_positive)
    mode.add_argument("--maximal", action="store_true")
    p.add_argument("--exclude", type=int, nargs="*", default=[], help="record ids to leave out (maximal only)")
    p.add_argument("--min-support", type=_positive, default=1)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("index", help="compute the price index")
    p.add_argument("--data", required=True)
    p.add_argument("--backend", choices=("naive", "geotree"), default="geotree")
    p.add_argument("--height", type=_height, default=6)
    p.add_argument("--strategy", choices=("median", "nearest"), default="median")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--out", required=True, help="index series CSV")
    p.add_argument("--growth-out", help="optional growth-factor CSV")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("bench", help="time tree build and queries")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--gen", type=_positive, metavar="N", help="generate N synthetic records")
    p.add_argument("--months", type=_positive, default=24)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--heights", type=_int_list, default=[4, 5, 6, 7, 8])
    p.add_argument("--fractions", type=_fraction_list, default=[0.1, 1.0])
    p.add_argument("--trials", type=_positive, default=10)
    p.add_argument("--queries", type=_positive, default=100)
    p.add_argument("--out", help="report CSV (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"geotree {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
