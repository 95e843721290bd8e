"""Binding layer between associative arrays and store tables.

The workflow mirrors the classic connector style:

    dbinit()                              # no-op hook, kept for script parity
    db = dbsetup("mydb", "db.conf")
    edges = db["edges", "edgesT"]         # table pair: main plus transpose
    deg = db.bind_degree_table("deg")     # sum-combined counts table
    edges.put(array)                      # batched ingest, transpose kept in sync
    row = edges["v01,", :]                # row query against the main table
    col = edges[:, "v02,"]                # column query, routed to the transpose
    delete(edges)

A :class:`TablePair` binds a main table together with its transpose
table; ``put`` writes each entry to the main table and the swapped entry
to the transpose table, and column queries (rows unconstrained) scan the
transpose by row instead of filtering a full scan.

Ingest is chunked into atomic batches so that the summed UTF-8 byte
length of row+col+value per batch stays within the server's batch
budget (default 500,000); a single oversize triple still ships alone.
Query results come back as string-mode arrays holding the values exactly
as stored; callers convert to numeric explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from time import perf_counter

from .arrays import (
    ALL,
    AllKeys,
    AssocArray,
    KeyList,
    KeyPositional,
    KeyPrefix,
    KeyRange,
    KeySpec,
    as_keyspec,
    format_decimal,
    from_triples,
)
from .kvstore import MutationBatch, Store, StoreEntry

__all__ = [
    "ConfigError",
    "DEFAULT_BATCH_CHARS",
    "DbServer",
    "IngestStats",
    "TableBinding",
    "TablePair",
    "dbinit",
    "dbsetup",
    "delete",
    "parse_config",
    "put",
    "put_triple",
    "query",
]

DEFAULT_BATCH_CHARS = 500_000

_CONFIG_KEYS = {"instance", "data_dir", "batch_chars"}


class ConfigError(ValueError):
    """A server config file is missing or malformed."""


def dbinit() -> None:
    """No-op initialization hook.

    The embedded store needs no separate runtime start-up; this entry
    point exists so scripted workflows can call it unconditionally.
    """


def parse_config(path) -> dict:
    """Parse a ``key=value`` config file.

    Recognized keys: ``instance``, ``data_dir`` (empty means pure
    in-memory), ``batch_chars`` (positive integer). ``#`` starts a
    comment line; unknown keys are errors.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno} is not key=value: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}: unknown key {key!r} on line {lineno}")
        if key == "batch_chars":
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(f"{path}: batch_chars must be an integer") from None
            if value < 1:
                raise ConfigError(f"{path}: batch_chars must be positive")
        cfg[key] = value
    return cfg


def dbsetup(instance: str | None, config_path) -> "DbServer":
    """Open a server handle configured from ``config_path``.

    ``instance`` names the handle; if None, the config's ``instance`` key
    (or "local") is used.
    """
    cfg = parse_config(config_path)
    if instance is None:
        instance = cfg.get("instance") or "local"
    return DbServer(
        instance,
        batch_chars=cfg.get("batch_chars", DEFAULT_BATCH_CHARS),
        data_dir=cfg.get("data_dir") or None,
    )


@dataclass(frozen=True)
class IngestStats:
    """Outcome of one put: store entries written, batches shipped, seconds."""

    entries: int
    batches: int
    seconds: float


class DbServer:
    """Connection handle carrying the store and the default batch budget.

    Indexing binds tables the same way arrays are indexed: ``db["t"]``
    returns a single-table binding, ``db["t", "tT"]`` a table pair.
    Binding creates missing tables.
    """

    def __init__(self, instance: str = "local", *, store: Store | None = None,
                 batch_chars: int = DEFAULT_BATCH_CHARS, data_dir=None):
        if batch_chars < 1:
            raise ValueError("batch_chars must be >= 1")
        self.instance = instance
        self.batch_chars = batch_chars
        self.data_dir = Path(data_dir) if data_dir else None
        self.store = store if store is not None else Store(self.data_dir)

    def __getitem__(self, names):
        if isinstance(names, str):
            return self.bind_table(names)
        if isinstance(names, tuple) and len(names) == 2:
            return self.bind_pair(names[0], names[1])
        raise TypeError("index with a table name or a (main, transpose) pair of names")

    def _ensure_table(self, name: str, combiner, enforce: bool) -> None:
        if self.store.has_table(name):
            if enforce and self.store.combiner_of(name) != combiner:
                # create_table raises the canonical conflict error
                self.store.create_table(name, combiner)
        else:
            self.store.create_table(name, combiner)

    def bind_table(self, name: str) -> "TableBinding":
        """Bind ``name``, creating it as a plain table if missing."""
        self._ensure_table(name, None, enforce=False)
        return TableBinding(self, name)

    def bind_pair(self, name: str, transpose_name: str, combiner=None) -> "TablePair":
        """Bind a main/transpose pair, creating missing members.

        When ``combiner`` is given explicitly, existing tables must carry
        it too; the default binds whatever is there.
        """
        if name == transpose_name:
            raise ValueError("a table pair needs two distinct table names")
        enforce = combiner is not None
        self._ensure_table(name, combiner, enforce)
        self._ensure_table(transpose_name, combiner, enforce)
        return TablePair(self, name, transpose_name)

    def bind_degree_table(self, name: str) -> "TableBinding":
        """Bind ``name`` as a sum-combined counts table (created if missing)."""
        self._ensure_table(name, "sum", enforce=True)
        return TableBinding(self, name)

    def flush(self) -> None:
        """Persist all tables to the data directory, if one is configured."""
        if self.data_dir is not None:
            self.store.save_dir()

    def __repr__(self):
        return f"<DbServer {self.instance!r} tables={len(self.store.list_tables())}>"


# ---------------------------------------------------------------------------
# ingest plumbing

def _stringify(values) -> list[str]:
    out = []
    for v in values:
        out.append(v if isinstance(v, str) else format_decimal(v))
    return out


def _chunks(rows, cols, values, budget: int):
    """Greedy chunking by summed UTF-8 byte length of row+col+value."""
    cur: list[tuple[str, str, str]] = []
    size = 0
    for r, c, v in zip(rows, cols, values):
        sz = len(r.encode("utf-8")) + len(c.encode("utf-8")) + len(v.encode("utf-8"))
        if cur and size + sz > budget:
            yield cur
            cur = []
            size = 0
        cur.append((r, c, v))
        size += sz
    if cur:
        yield cur


def _ship(server: DbServer, targets, rows, cols, values, batch_chars) -> IngestStats:
    # targets: [(table_name, swapped)] -- swapped writes (col, row, value)
    budget = server.batch_chars if batch_chars is None else batch_chars
    if budget < 1:
        raise ValueError("batch budget must be >= 1")
    store = server.store
    written = 0
    batches = 0
    t0 = perf_counter()
    for chunk in _chunks(rows, cols, values, budget):
        for table, swapped in targets:
            if swapped:
                entries = [StoreEntry(c, r, v) for r, c, v in chunk]
            else:
                entries = [StoreEntry(r, c, v) for r, c, v in chunk]
            store.apply_batch(MutationBatch(table, entries))
            batches += 1
        written += len(chunk) * len(targets)
    return IngestStats(written, batches, max(perf_counter() - t0, 1e-9))


# ---------------------------------------------------------------------------
# query plumbing

def _prefix_upper(prefix: str) -> str | None:
    """Smallest string that sorts after every extension of ``prefix``.

    None means no finite bound exists (all max code points); callers then
    fall back to a full scan.
    """
    for i in range(len(prefix) - 1, -1, -1):
        cp = ord(prefix[i])
        if cp < 0x10FFFF:
            return prefix[:i] + chr(cp + 1)
    return None


def _scan_by_rowspec(store: Store, table: str, spec: KeySpec) -> list[StoreEntry]:
    if isinstance(spec, AllKeys):
        return store.scan(table)
    if isinstance(spec, KeyList):
        out: list[StoreEntry] = []
        for k in sorted(set(spec.keys)):
            out.extend(store.scan(table, row_range=(k, k)))
        return out
    if isinstance(spec, KeyRange):
        return store.scan(table, row_range=(spec.start, spec.end))
    if isinstance(spec, KeyPrefix):
        if not spec.prefix:
            return store.scan(table)
        upper = _prefix_upper(spec.prefix)
        if upper is None:
            entries = store.scan(table)
        else:
            entries = store.scan(table, row_range=(spec.prefix, upper))
        return [e for e in entries if e.row.startswith(spec.prefix)]
    if isinstance(spec, KeyPositional):
        raise ValueError("ordinal key specs are not supported for table queries")
    raise TypeError(f"unknown key spec: {spec!r}")


def _col_predicate(spec: KeySpec):
    if isinstance(spec, KeyList):
        wanted = set(spec.keys)
        return lambda c: c in wanted
    if isinstance(spec, KeyRange):
        return lambda c: spec.start <= c <= spec.end
    if isinstance(spec, KeyPrefix):
        return lambda c: c.startswith(spec.prefix)
    if isinstance(spec, KeyPositional):
        raise ValueError("ordinal key specs are not supported for table queries")
    raise TypeError(f"unknown key spec: {spec!r}")


class TableBinding:
    """Handle on a single store table.

    The binding itself is cheap and stateless; every operation validates
    against the store at call time.
    """

    def __init__(self, server: DbServer, name: str):
        self.server = server
        self.name = name

    def _targets(self):
        return [(self.name, False)]

    def put(self, array: AssocArray, batch_chars: int | None = None) -> IngestStats:
        """Write every triple of ``array``, chunked into atomic batches.

        Numeric values are serialized as decimals. What lands in the
        table follows the table's semantics: plain tables overwrite,
        sum tables accumulate.
        """
        rows, cols, values = array.triples()
        return _ship(self.server, self._targets(), rows, cols, _stringify(values), batch_chars)

    def put_triple(self, rows, cols, values, batch_chars: int | None = None) -> IngestStats:
        """Write raw triples in order, without folding duplicates first."""
        rows = list(rows)
        cols = list(cols)
        values = list(values)
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("triple lists differ in length")
        return _ship(self.server, self._targets(), rows, cols, _stringify(values), batch_chars)

    def query(self, rows=ALL, cols=ALL) -> AssocArray:
        """Entries matching the row and column specs, as a string-mode array."""
        rows = as_keyspec(rows)
        cols = as_keyspec(cols)
        entries = _scan_by_rowspec(self.server.store, self.name, rows)
        if not isinstance(cols, AllKeys):
            keep = _col_predicate(cols)
            entries = [e for e in entries if keep(e.col)]
        return from_triples(
            [e.row for e in entries],
            [e.col for e in entries],
            [e.value for e in entries],
            collision="last",
        )

    def __getitem__(self, item) -> AssocArray:
        if not isinstance(item, tuple) or len(item) != 2:
            raise TypeError("query with a (rows, cols) pair, e.g. t['v01,', :]")
        return self.query(item[0], item[1])

    def delete(self) -> None:
        self.server.store.delete_table(self.name)

    def entry_count(self) -> int:
        return self.server.store.entry_count(self.name)

    def __repr__(self):
        return f"<TableBinding {self.name!r}>"


class TablePair(TableBinding):
    """Handle on a main table plus its transpose table.

    ``put`` keeps the two write-consistent within one ingest (the pair of
    batches is not atomic across tables; readers during an ingest may
    briefly observe main/transpose divergence). Column queries with
    unconstrained rows scan the transpose table by row and swap the
    result back.
    """

    def __init__(self, server: DbServer, name: str, transpose_name: str):
        if name == transpose_name:
            raise ValueError("a table pair needs two distinct table names")
        super().__init__(server, name)
        self.transpose_name = transpose_name

    def _targets(self):
        return [(self.name, False), (self.transpose_name, True)]

    def query(self, rows=ALL, cols=ALL) -> AssocArray:
        rows = as_keyspec(rows)
        cols = as_keyspec(cols)
        if isinstance(rows, AllKeys) and not isinstance(cols, AllKeys):
            # Column query: scan the transpose by row spec, swap back.
            entries = _scan_by_rowspec(self.server.store, self.transpose_name, cols)
            return from_triples(
                [e.col for e in entries],
                [e.row for e in entries],
                [e.value for e in entries],
                collision="last",
            )
        return super().query(rows, cols)

    def delete(self) -> None:
        self.server.store.delete_table(self.name)
        self.server.store.delete_table(self.transpose_name)

    def __repr__(self):
        return f"<TablePair {self.name!r}/{self.transpose_name!r}>"


# ---------------------------------------------------------------------------
# free-function verbs matching the classic workflow

def put(t: TableBinding, array: AssocArray, batch_chars: int | None = None) -> IngestStats:
    return t.put(array, batch_chars)


def put_triple(t: TableBinding, rows, cols, values, batch_chars: int | None = None) -> IngestStats:
    return t.put_triple(rows, cols, values, batch_chars)


def query(t: TableBinding, rows=ALL, cols=ALL) -> AssocArray:
    return t.query(rows, cols)


def delete(t: TableBinding) -> None:
    t.delete()
