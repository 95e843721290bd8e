"""Embedded store: named tables of sorted (row, column) -> value entries.

Semantics follow Bigtable-style sorted stores at single-node scale:

* a table maps (row, col) string pairs to string values and iterates in
  (row, col) byte order;
* writes arrive in :class:`MutationBatch` groups that apply atomically --
  a concurrent scan sees all of a batch or none of it;
* a table may carry the ``"sum"`` combiner, in which case incoming values
  are parsed as decimals and added to whatever is already stored;
* scans cover an inclusive row range with an optional exact or prefix
  column filter and iterate over a consistent snapshot taken at scan
  start.

Tables live in memory. Persistence is explicit via snapshot files (one
header line naming the table and combiner, then sorted TSV triples), or
via a store-level data directory that is reloaded on open.

Rows and columns must not contain tab or newline bytes and values must
not contain newlines; those bytes are reserved by the snapshot format.
"""

from __future__ import annotations

import os
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple
from urllib.parse import quote

from .arrays import format_decimal, parse_decimal

__all__ = [
    "CombinerConflictError",
    "MutationBatch",
    "SnapshotFormatError",
    "Store",
    "StoreEntry",
    "StoreError",
    "TableMissingError",
]

_COMBINERS = (None, "sum")


class StoreError(Exception):
    """Base class for store failures."""


class TableMissingError(StoreError):
    """An operation addressed a table that does not exist."""


class CombinerConflictError(StoreError):
    """A table exists with a different combiner than requested."""


class SnapshotFormatError(StoreError):
    """A snapshot file could not be parsed."""


class StoreEntry(NamedTuple):
    row: str
    col: str
    value: str


@dataclass
class MutationBatch:
    """An ordered group of writes applied atomically to one table."""

    table: str
    entries: list[StoreEntry]

    @classmethod
    def from_triples(cls, table: str, rows, cols, values) -> "MutationBatch":
        rows = list(rows)
        cols = list(cols)
        values = list(values)
        if not (len(rows) == len(cols) == len(values)):
            raise ValueError("triple lists differ in length")
        return cls(table, [StoreEntry(r, c, v) for r, c, v in zip(rows, cols, values)])


class _Table:
    __slots__ = ("name", "combiner", "data", "lock", "_sorted")

    def __init__(self, name: str, combiner):
        self.name = name
        self.combiner = combiner
        self.data: dict[tuple[str, str], str] = {}
        self.lock = threading.Lock()
        self._sorted: list[tuple[str, str]] | None = None

    def sorted_keys_locked(self) -> list[tuple[str, str]]:
        # Caller holds self.lock. The sorted view is rebuilt lazily after
        # mutations; scan-heavy phases reuse it for free.
        if self._sorted is None:
            self._sorted = sorted(self.data)
        return self._sorted


def _check_table_name(name):
    if not isinstance(name, str) or not name:
        raise ValueError("table name must be a non-empty string")
    if "\t" in name or "\n" in name:
        raise ValueError(f"table name contains a reserved byte: {name!r}")


def _check_entry(e: StoreEntry):
    if not isinstance(e.row, str) or not isinstance(e.col, str) or not isinstance(e.value, str):
        raise ValueError(f"entry fields must be str: {e!r}")
    if "\t" in e.row or "\n" in e.row or "\t" in e.col or "\n" in e.col:
        raise ValueError(f"row/col contains a reserved byte: ({e.row!r}, {e.col!r})")
    if "\n" in e.value:
        raise ValueError(f"value at ({e.row!r}, {e.col!r}) contains a newline")


class Store:
    """A set of named tables sharing one process.

    Independent tables never contend: each table has its own mutex, and
    the store-level lock only guards the table map (create/delete/list).
    If ``data_dir`` is given, any ``*.tsv`` snapshots found there are
    restored on open and :meth:`save_dir` writes the current state back.
    """

    def __init__(self, data_dir=None):
        self._tables: dict[str, _Table] = {}
        self._lock = threading.RLock()
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(self.data_dir.glob("*.tsv")):
                self.restore(path)

    # -- table lifecycle ----------------------------------------------------

    def create_table(self, name: str, combiner=None) -> None:
        """Create ``name``; re-creating with the same combiner is a no-op."""
        _check_table_name(name)
        if combiner not in _COMBINERS:
            raise ValueError(f"unknown combiner {combiner!r}")
        with self._lock:
            existing = self._tables.get(name)
            if existing is not None:
                if existing.combiner != combiner:
                    raise CombinerConflictError(
                        f"table {name!r} exists with combiner {existing.combiner!r}, "
                        f"requested {combiner!r}"
                    )
                return
            self._tables[name] = _Table(name, combiner)

    def delete_table(self, name: str) -> None:
        """Drop ``name`` if present; deleting a missing table is a no-op."""
        with self._lock:
            self._tables.pop(name, None)

    def has_table(self, name: str) -> bool:
        with self._lock:
            return name in self._tables

    def list_tables(self) -> list[str]:
        with self._lock:
            return sorted(self._tables)

    def combiner_of(self, name: str):
        return self._table(name).combiner

    def entry_count(self, name: str) -> int:
        t = self._table(name)
        with t.lock:
            return len(t.data)

    def _table(self, name: str) -> _Table:
        with self._lock:
            try:
                return self._tables[name]
            except KeyError:
                raise TableMissingError(f"no such table: {name!r}") from None

    # -- reads and writes ----------------------------------------------------

    def apply_batch(self, batch: MutationBatch) -> None:
        """Apply every write in ``batch`` atomically.

        Plain tables overwrite: the last write to a (row, col) wins, in
        batch order. Sum tables add the incoming decimal to the stored
        one. Validation happens before any write, so a bad entry leaves
        the table untouched.
        """
        t = self._table(batch.table)
        entries = list(batch.entries)
        for e in entries:
            _check_entry(e)
        if t.combiner == "sum":
            incoming = [parse_decimal(e.value) for e in entries]
            with t.lock:
                for e, v in zip(entries, incoming):
                    k = (e.row, e.col)
                    old = t.data.get(k)
                    t.data[k] = format_decimal(v if old is None else parse_decimal(old) + v)
                if entries:
                    t._sorted = None
        else:
            with t.lock:
                for e in entries:
                    t.data[(e.row, e.col)] = e.value
                if entries:
                    t._sorted = None

    def scan(
        self,
        name: str,
        row_range: tuple[str, str] | None = None,
        col_exact: str | None = None,
        col_prefix: str | None = None,
    ) -> list[StoreEntry]:
        """Entries in (row, col) order within the inclusive row range.

        ``row_range=None`` scans the whole table. At most one of
        ``col_exact`` / ``col_prefix`` may be given. The returned list is
        a consistent snapshot: entries written by a concurrently applied
        batch appear either all or not at all.
        """
        if col_exact is not None and col_prefix is not None:
            raise ValueError("col_exact and col_prefix are mutually exclusive")
        t = self._table(name)
        with t.lock:
            keys = t.sorted_keys_locked()
            if row_range is None:
                lo, hi = 0, len(keys)
            else:
                start, end = row_range
                lo = bisect_left(keys, start, key=lambda k: k[0])
                hi = bisect_right(keys, end, key=lambda k: k[0])
            data = t.data
            if col_exact is not None:
                return [
                    StoreEntry(r, c, data[(r, c)]) for r, c in keys[lo:hi] if c == col_exact
                ]
            if col_prefix is not None:
                return [
                    StoreEntry(r, c, data[(r, c)])
                    for r, c in keys[lo:hi]
                    if c.startswith(col_prefix)
                ]
            return [StoreEntry(r, c, data[(r, c)]) for r, c in keys[lo:hi]]

    # -- persistence ----------------------------------------------------------

    def snapshot(self, name: str, path) -> None:
        """Write ``name`` to ``path``: a header line, then sorted triples."""
        t = self._table(name)
        with t.lock:
            keys = list(t.sorted_keys_locked())
            values = [t.data[k] for k in keys]
        combiner = t.combiner or "none"
        parts = [f"#table:{t.name}\tcombiner:{combiner}\n"]
        parts.extend(f"{r}\t{c}\t{v}\n" for (r, c), v in zip(keys, values))
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("".join(parts))

    def restore(self, path) -> str:
        """Recreate a table from a snapshot file; returns the table name.

        The table must not already exist in this store.
        """
        try:
            with open(path, "r", encoding="utf-8", newline="") as f:
                text = f.read()
        except OSError as exc:
            raise StoreError(f"cannot read snapshot {path}: {exc}") from exc
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or not lines[0].startswith("#table:"):
            raise SnapshotFormatError(f"{path}: missing table header")
        header = lines[0].split("\t")
        if len(header) != 2 or not header[1].startswith("combiner:"):
            raise SnapshotFormatError(f"{path}: malformed header {lines[0]!r}")
        name = header[0][len("#table:") :]
        combiner_name = header[1][len("combiner:") :]
        if combiner_name not in ("none", "sum"):
            raise SnapshotFormatError(f"{path}: unknown combiner {combiner_name!r}")
        combiner = None if combiner_name == "none" else "sum"

        data: dict[tuple[str, str], str] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise SnapshotFormatError(f"{path}: line {lineno} is not a 3-column triple")
            k = (parts[0], parts[1])
            if k in data:
                raise SnapshotFormatError(f"{path}: duplicate entry at line {lineno}")
            if combiner == "sum":
                parse_decimal(parts[2])
            data[k] = parts[2]

        with self._lock:
            if name in self._tables:
                raise StoreError(f"cannot restore over existing table {name!r}")
            _check_table_name(name)
            t = _Table(name, combiner)
            t.data = data
            self._tables[name] = t
        return name

    def save_dir(self) -> None:
        """Snapshot every table into the data directory, removing stale files."""
        if self.data_dir is None:
            raise StoreError("store was opened without a data directory")
        with self._lock:
            names = list(self._tables)
        keep = set()
        for name in names:
            fname = quote(name, safe="") + ".tsv"
            keep.add(fname)
            tmp = self.data_dir / (fname + ".tmp")
            self.snapshot(name, tmp)
            os.replace(tmp, self.data_dir / fname)
        for path in self.data_dir.glob("*.tsv"):
            if path.name not in keep:
                path.unlink()
