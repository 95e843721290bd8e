"""Ingest and query benchmarks over the embedded store.

Two experiments:

* ingest -- k workers each generate a scale-s edge list under a distinct
  seed (base seed + worker index), then start together behind a barrier
  and write their adjacency array into a shared edge-table pair and their
  degree counts into a shared degree table. Timing covers the write calls
  only. The edge pair is bound with the sum combiner so overlapping edges
  from different workers accumulate multiplicity, making final contents
  independent of scheduling.

* query -- against a previously ingested graph, pick vertices whose
  degree is closest to each target and time row/column queries: single
  vertex row (SVR), single vertex column (SVC), and the five-vertex
  multi variants (MVR, MVC). Row queries select by out-degree, column
  queries by in-degree, and the chosen vertices stay fixed across the
  classes at one target.

Throughput is edges per second: generated edges for ingest (doubled for
the pair, since both the adjacency and its transpose are written) and
multiplicity-expanded returned edges for query. Records go to CSV with
the schema ``experiment,class,k,scale,target_degree,edges,seconds,rate``.
"""

from __future__ import annotations

import csv
import random
import threading
from dataclasses import dataclass
from time import perf_counter

from .arrays import ALL, KeyList, parse_decimal
from .connector import DbServer, TableBinding, TablePair
from .graphgen import GRAPH500_PROBS, GenParams, degrees, generate, to_adjacency

__all__ = [
    "BenchRecord",
    "DEGREE_TABLE",
    "EDGE_TABLE",
    "IngestPlan",
    "QUERY_CLASSES",
    "QueryPlan",
    "TRANSPOSE_TABLE",
    "read_csv",
    "run_ingest",
    "run_query",
    "select_vertices",
    "write_csv",
]

EDGE_TABLE = "edges"
TRANSPOSE_TABLE = "edgesT"
DEGREE_TABLE = "degrees"

QUERY_CLASSES = ("SVR", "SVC", "MVR", "MVC")

CSV_HEADER = ["experiment", "class", "k", "scale", "target_degree", "edges", "seconds", "rate"]


@dataclass(frozen=True)
class IngestPlan:
    """One ingest grid point: k workers, each a scale-s edge-factor-d graph."""

    workers: int = 1
    scale: int = 12
    edge_factor: int = 16
    seed: int = 20180101
    batch_chars: int | None = None
    probs: tuple[float, float, float, float] = GRAPH500_PROBS

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.batch_chars is not None and self.batch_chars < 1:
            raise ValueError("batch_chars must be >= 1")
        # delegate scale/edge_factor/probs validation
        self.worker_params(0)

    @property
    def total_edges(self) -> int:
        """Generated edges across all workers: k * d * 2**s."""
        return self.workers * (self.edge_factor << self.scale)

    def worker_params(self, index: int) -> GenParams:
        return GenParams(
            scale=self.scale,
            edge_factor=self.edge_factor,
            seed=self.seed + index,
            probs=self.probs,
        )


@dataclass(frozen=True)
class QueryPlan:
    """Degree targets, query classes, and vertex count for multi queries."""

    targets: tuple[int, ...] = (1, 10, 100, 1000, 10000)
    multi_count: int = 5
    classes: tuple[str, ...] = QUERY_CLASSES
    seed: int = 20180101

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if any(t < 1 for t in targets):
            raise ValueError(f"targets must be positive, got {targets}")
        if any(a >= b for a, b in zip(targets, targets[1:])):
            raise ValueError(f"targets must be strictly increasing, got {targets}")
        classes = tuple(dict.fromkeys(self.classes))
        object.__setattr__(self, "classes", classes)
        for c in classes:
            if c not in QUERY_CLASSES:
                raise ValueError(f"unknown query class {c!r}; choose from {QUERY_CLASSES}")
        if self.multi_count < 1:
            raise ValueError("multi_count must be >= 1")


@dataclass(frozen=True)
class BenchRecord:
    """One measurement row; ``rate`` is always edges / seconds."""

    experiment: str
    cls: str
    workers: int | None
    scale: int | None
    target_degree: int | None
    edges: int
    seconds: float
    rate: float

    @classmethod
    def timed(cls, experiment, label, workers, scale, target_degree, edges, seconds):
        if seconds <= 0:
            raise ValueError("elapsed time must be positive")
        return cls(experiment, label, workers, scale, target_degree, edges, seconds,
                   edges / seconds)


def run_ingest(
    plan: IngestPlan,
    db: DbServer,
    edge_table: str = EDGE_TABLE,
    transpose_table: str = TRANSPOSE_TABLE,
    degree_table: str = DEGREE_TABLE,
) -> list[BenchRecord]:
    """Run one parallel ingest; returns one record per worker plus an aggregate.

    Refuses to run if any target table already has entries, so edge
    counts stay meaningful. Generation happens before the workers hit the
    barrier; elapsed time covers only put/put_triple calls. The aggregate
    record counts k * d * 2**s * 2 edges (adjacency plus transpose) over
    the slowest worker's elapsed time.
    """
    pair = db.bind_pair(edge_table, transpose_table, combiner="sum")
    deg = db.bind_degree_table(degree_table)
    for name in (edge_table, transpose_table, degree_table):
        if db.store.entry_count(name):
            raise RuntimeError(f"table {name!r} is not empty; refusing to ingest over it")

    payloads = []
    for i in range(plan.workers):
        edges = generate(plan.worker_params(i))
        adjacency = to_adjacency(edges)
        out_deg, in_deg = degrees(edges)
        triples = out_deg + in_deg
        payloads.append(
            (
                adjacency,
                [t[0] for t in triples],
                [t[1] for t in triples],
                [t[2] for t in triples],
            )
        )

    barrier = threading.Barrier(plan.workers)
    elapsed = [0.0] * plan.workers
    failures: list[BaseException] = []

    def work(index: int) -> None:
        adjacency, rows, cols, values = payloads[index]
        try:
            barrier.wait()
            t0 = perf_counter()
            pair.put(adjacency, batch_chars=plan.batch_chars)
            deg.put_triple(rows, cols, values, batch_chars=plan.batch_chars)
            elapsed[index] = max(perf_counter() - t0, 1e-9)
        except BaseException as exc:  # surfaced after join
            failures.append(exc)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(plan.workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        raise failures[0]

    per_worker_edges = 2 * (plan.edge_factor << plan.scale)
    records = [
        BenchRecord.timed(
            "ingest", f"worker{i}", plan.workers, plan.scale, None,
            per_worker_edges, elapsed[i],
        )
        for i in range(plan.workers)
    ]
    records.append(
        BenchRecord.timed(
            "ingest", "aggregate", plan.workers, plan.scale, None,
            plan.workers * per_worker_edges, max(elapsed),
        )
    )
    return records


def select_vertices(
    degree_binding: TableBinding,
    target: int,
    count: int,
    which: str = "OutDeg",
    seed: int = 0,
) -> list[str]:
    """Vertex keys whose ``which`` degree is closest to ``target``.

    Vertices are grouped by |degree - target|; whole groups are taken in
    increasing distance, and the boundary group is sampled by a seeded
    RNG so the choice is reproducible. Asking for more vertices than
    exist returns them all. Keys come back sorted.
    """
    if which not in ("OutDeg", "InDeg"):
        raise ValueError(f"which must be OutDeg or InDeg, got {which!r}")
    store = degree_binding.server.store
    entries = store.scan(degree_binding.name, col_exact=which)
    if not entries:
        raise RuntimeError(f"degree table {degree_binding.name!r} has no {which} entries")
    if count >= len(entries):
        return sorted(e.row for e in entries)

    by_distance: dict[int, list[str]] = {}
    for e in entries:
        d = abs(int(parse_decimal(e.value)) - target)
        by_distance.setdefault(d, []).append(e.row)

    chosen: list[str] = []
    for dist in sorted(by_distance):
        group = sorted(by_distance[dist])
        need = count - len(chosen)
        if len(group) <= need:
            chosen.extend(group)
        else:
            rng = random.Random(f"{seed}|{target}|{which}|{dist}")
            chosen.extend(rng.sample(group, need))
        if len(chosen) == count:
            break
    return sorted(chosen)


def run_query(
    plan: QueryPlan,
    db: DbServer,
    edge_table: str = EDGE_TABLE,
    transpose_table: str = TRANSPOSE_TABLE,
    degree_table: str = DEGREE_TABLE,
) -> list[BenchRecord]:
    """Run the degree-stratified query benchmark against ingested tables.

    For each target degree: SVR/MVR query one/five rows of the edge pair
    (vertices picked by out-degree), SVC/MVC query one/five columns
    (picked by in-degree; the pair routes those scans to the transpose
    table). Each timed query is preceded by one untimed warm-up. Edges
    returned counts the numeric sum of the result's values, i.e. with
    edge multiplicities expanded.
    """
    store = db.store
    for name in (edge_table, transpose_table, degree_table):
        if not store.has_table(name) or not store.entry_count(name):
            raise RuntimeError(f"table {name!r} is missing or empty; ingest first")
    pair = TablePair(db, edge_table, transpose_table)
    deg = TableBinding(db, degree_table)

    records: list[BenchRecord] = []
    for target in plan.targets:
        row_vertices = select_vertices(deg, target, plan.multi_count, "OutDeg", plan.seed)
        col_vertices = select_vertices(deg, target, plan.multi_count, "InDeg", plan.seed)
        selections = {
            "SVR": (KeyList((row_vertices[0],)), ALL),
            "SVC": (ALL, KeyList((col_vertices[0],))),
            "MVR": (KeyList(tuple(row_vertices)), ALL),
            "MVC": (ALL, KeyList(tuple(col_vertices))),
        }
        for cls in plan.classes:
            rows, cols = selections[cls]
            pair.query(rows, cols)  # warm-up, untimed
            t0 = perf_counter()
            result = pair.query(rows, cols)
            dt = max(perf_counter() - t0, 1e-9)
            edges = int(round(sum(parse_decimal(v) for v in result.triples()[2])))
            records.append(
                BenchRecord.timed("query", cls, None, None, target, edges, dt)
            )
    return records


def write_csv(records, path) -> None:
    """Write records with the fixed header; floats use repr for round-trip."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.experiment,
                    r.cls,
                    "" if r.workers is None else r.workers,
                    "" if r.scale is None else r.scale,
                    "" if r.target_degree is None else r.target_degree,
                    r.edges,
                    repr(r.seconds),
                    repr(r.rate),
                ]
            )


def read_csv(path) -> list[BenchRecord]:
    """Parse a benchmark CSV back into records."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        out = []
        for line in reader:
            if len(line) != len(CSV_HEADER):
                raise ValueError(f"{path}: malformed row {line!r}")
            experiment, cls, k, scale, target, edges, seconds, rate = line
            out.append(
                BenchRecord(
                    experiment,
                    cls,
                    int(k) if k else None,
                    int(scale) if scale else None,
                    int(target) if target else None,
                    int(edges),
                    float(seconds),
                    float(rate),
                )
            )
    return out
