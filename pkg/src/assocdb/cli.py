"""Command-line interface.

Subcommands cover the two benchmarks (``ingest``, ``query``) and one-shot
table operations (``put``, ``get``, ``delete``, ``tables``). The server
config comes from ``--config`` or the ``ASSOCDB_CONFIG`` environment
variable; without either, a fresh in-memory server with default batching
is used (set ``data_dir`` in the config to persist tables across
invocations).

Row and column selectors on the command line use the trailing-delimiter
key list syntax ("v01,", "al*,", "a : b ,") or a bare ":" for all keys.

Exit codes: 0 success, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .arrays import read_tsv_triples, spec_from_string
from .bench import (
    DEGREE_TABLE,
    EDGE_TABLE,
    QUERY_CLASSES,
    TRANSPOSE_TABLE,
    IngestPlan,
    QueryPlan,
    run_ingest,
    run_query,
    write_csv,
)
from .connector import DbServer, TableBinding, TablePair, dbsetup

__all__ = ["build_parser", "main"]

CONFIG_ENV = "ASSOCDB_CONFIG"


class _UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError(f"empty integer list: {text!r}")
    return values


def _str_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assocdb",
        description="Associative-array tables, graph ingest, and query benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config",
        metavar="PATH",
        default=None,
        help=f"server config file (fallback: ${CONFIG_ENV}; else in-memory defaults)",
    )

    gen = argparse.ArgumentParser(add_help=False)
    gen.add_argument("--scales", type=_int_list, default=[12], metavar="LIST",
                     help="comma-separated graph scales (default 12)")
    gen.add_argument("--workers", type=_int_list, default=[1], metavar="LIST",
                     help="comma-separated worker counts (default 1)")
    gen.add_argument("--edge-factor", type=int, default=16, metavar="N",
                     help="edges per vertex (default 16)")
    gen.add_argument("--batch-chars", type=int, default=None, metavar="N",
                     help="batch budget in bytes of row+col+value (default from config)")
    gen.add_argument("--seed", type=int, default=20180101, metavar="N",
                     help="base seed for all randomness (default 20180101)")

    p_ingest = sub.add_parser(
        "ingest", parents=[common, gen],
        help="run the parallel ingest benchmark over a (scale x workers) grid",
    )
    p_ingest.add_argument("--out", metavar="PATH", default="ingest_results.csv",
                          help="CSV output path (default ingest_results.csv)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_query = sub.add_parser(
        "query", parents=[common, gen],
        help="run the degree-stratified query benchmark (needs a prior ingest)",
    )
    p_query.add_argument("--targets", type=_int_list, default=[1, 10, 100, 1000, 10000],
                         metavar="LIST", help="degree targets (default 1,10,100,1000,10000)")
    p_query.add_argument("--classes", type=_str_list, default=list(QUERY_CLASSES),
                         metavar="LIST", help="query classes (default SVR,SVC,MVR,MVC)")
    p_query.add_argument("--count", type=int, default=5, metavar="N",
                         help="vertices per multi-vertex query (default 5)")
    p_query.add_argument("--ingest-first", action="store_true",
                         help="run one ingest (first --scales/--workers value) before querying")
    p_query.add_argument("--out", metavar="PATH", default="query_results.csv",
                         help="CSV output path (default query_results.csv)")
    p_query.set_defaults(func=cmd_query)

    p_put = sub.add_parser("put", parents=[common],
                           help="ingest a TSV triple file into a table or pair")
    p_put.add_argument("table", help="target table name")
    p_put.add_argument("file", help="TSV triple file (row<TAB>col<TAB>value)")
    p_put.add_argument("--transpose", metavar="NAME", default=None,
                       help="also maintain this transpose table (pair ingest)")
    p_put.add_argument("--degree", action="store_true",
                       help="treat the table as a sum-combined degree table")
    p_put.set_defaults(func=cmd_put)

    p_get = sub.add_parser("get", parents=[common],
                           help="print a row/column query as TSV triples")
    p_get.add_argument("table", help="table to query")
    p_get.add_argument("rows", help='row selector: key list like "v01," or ":"')
    p_get.add_argument("cols", nargs="?", default=":",
                       help='column selector (default ":")')
    p_get.add_argument("--transpose", metavar="NAME", default=None,
                       help="transpose table; routes column queries through it")
    p_get.set_defaults(func=cmd_get)

    p_delete = sub.add_parser("delete", parents=[common], help="drop tables (idempotent)")
    p_delete.add_argument("tables", nargs="+", help="table names to drop")
    p_delete.set_defaults(func=cmd_delete)

    p_tables = sub.add_parser("tables", parents=[common], help="list table names")
    p_tables.set_defaults(func=cmd_tables)

    return parser


def _open_db(args) -> DbServer:
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        return dbsetup(None, path)
    return DbServer()


def _drop_bench_tables(db: DbServer) -> None:
    for name in (EDGE_TABLE, TRANSPOSE_TABLE, DEGREE_TABLE):
        db.store.delete_table(name)


def cmd_ingest(args) -> int:
    try:
        plans = [
            IngestPlan(
                workers=k,
                scale=s,
                edge_factor=args.edge_factor,
                seed=args.seed,
                batch_chars=args.batch_chars,
            )
            for s in args.scales
            for k in args.workers
        ]
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    db = _open_db(args)
    records = []
    for plan in plans:
        _drop_bench_tables(db)
        result = run_ingest(plan, db)
        records.extend(result)
        aggregate = result[-1]
        print(
            f"ingest scale={plan.scale} workers={plan.workers}: "
            f"{aggregate.edges} edges in {aggregate.seconds:.3f}s "
            f"({aggregate.rate:,.0f} edges/s)"
        )
    write_csv(records, args.out)
    db.flush()
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_query(args) -> int:
    try:
        qplan = QueryPlan(
            targets=tuple(args.targets),
            multi_count=args.count,
            classes=tuple(args.classes),
            seed=args.seed,
        )
        iplan = None
        if args.ingest_first:
            iplan = IngestPlan(
                workers=args.workers[0],
                scale=args.scales[0],
                edge_factor=args.edge_factor,
                seed=args.seed,
                batch_chars=args.batch_chars,
            )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    db = _open_db(args)
    if iplan is not None:
        _drop_bench_tables(db)
        run_ingest(iplan, db)
    records = run_query(qplan, db)
    for record in records:
        print(
            f"query {record.cls} target={record.target_degree}: "
            f"{record.edges} edges in {record.seconds:.6f}s ({record.rate:,.0f} edges/s)"
        )
    write_csv(records, args.out)
    db.flush()
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_put(args) -> int:
    if args.degree and args.transpose:
        raise _UsageError("--degree cannot be combined with --transpose")
    db = _open_db(args)
    rows, cols, values = read_tsv_triples(args.file)
    if args.degree:
        binding = db.bind_degree_table(args.table)
    elif args.transpose:
        binding = db.bind_pair(args.table, args.transpose)
    else:
        binding = db.bind_table(args.table)
    stats = binding.put_triple(rows, cols, values)
    db.flush()
    print(f"wrote {stats.entries} entries in {stats.batches} batches ({stats.seconds:.3f}s)")
    return 0


def cmd_get(args) -> int:
    try:
        rows = spec_from_string(args.rows)
        cols = spec_from_string(args.cols)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    db = _open_db(args)
    if args.transpose:
        binding = TablePair(db, args.table, args.transpose)
    else:
        binding = TableBinding(db, args.table)
    result = binding.query(rows, cols)
    out = sys.stdout
    for r, c, v in zip(*result.triples()):
        out.write(f"{r}\t{c}\t{v}\n")
    return 0


def cmd_delete(args) -> int:
    db = _open_db(args)
    for name in args.tables:
        db.store.delete_table(name)
    db.flush()
    return 0


def cmd_tables(args) -> int:
    db = _open_db(args)
    for name in db.store.list_tables():
        print(name)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
