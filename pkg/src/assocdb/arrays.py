"""Sparse 2-D arrays with sorted string keys.

The central type is :class:`AssocArray`: a sparse two-dimensional array
whose rows and columns are indexed by strings rather than integers.
Entries are (row key, column key, value) triples. Keys sort in raw byte
order; for UTF-8 text Python's native string comparison produces exactly
that order, so arrays and sorted table scans always agree.

Arrays come in two value modes:

* numeric -- every value is a finite 64-bit float; exact zero is never
  stored (zero means "absent", as in any sparse matrix).
* string  -- values are arbitrary strings compared byte-for-byte.

All operations return new arrays and never mutate their inputs, so
instances can be shared freely between threads.

Row and column selectors are :class:`KeySpec` values. The string form
accepted by :func:`spec_from_string` follows the trailing-delimiter key
list convention: the final character of the string is the field
delimiter, a three-field list ``"a : b "`` denotes an inclusive range,
and a single field ending in ``*`` denotes a prefix match.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

__all__ = [
    "ALL",
    "AllKeys",
    "AssocArray",
    "KeyList",
    "KeyPositional",
    "KeyPrefix",
    "KeyRange",
    "KeySpec",
    "as_keyspec",
    "format_decimal",
    "from_triples",
    "parse_decimal",
    "parse_keylist",
    "read_tsv",
    "read_tsv_triples",
    "spec_from_string",
    "write_tsv",
]


# ---------------------------------------------------------------------------
# Value formatting
#
# Numeric values cross the table boundary as decimal strings. The format
# below is the one canonical rendering used everywhere (stored tables,
# TSV files), so byte-level comparisons of serialized data are meaningful.

def format_decimal(value) -> str:
    """Render a number as its shortest round-trip decimal string.

    Integral values print without a fractional part ("3", not "3.0"),
    which keeps accumulated counts readable in stored tables.
    """
    f = float(value)
    if not math.isfinite(f):
        raise ValueError(f"non-finite value has no decimal form: {value!r}")
    if abs(f) <= 2**53 and f == int(f):
        return str(int(f))
    return repr(f)


def parse_decimal(text) -> float:
    """Parse a decimal string to a finite float, or raise ValueError."""
    try:
        f = float(text)
    except (TypeError, ValueError):
        raise ValueError(f"not a decimal number: {text!r}") from None
    if not math.isfinite(f):
        raise ValueError(f"not a finite number: {text!r}")
    return f


# ---------------------------------------------------------------------------
# Key specs

class KeySpec:
    """Base class for row/column selectors."""

    __slots__ = ()


class AllKeys(KeySpec):
    """Match every key. Use the module constant ``ALL``."""

    __slots__ = ()

    def __repr__(self):
        return "ALL"


ALL = AllKeys()


@dataclass(frozen=True)
class KeyList(KeySpec):
    """Match exactly the listed keys; keys not present are ignored."""

    keys: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "keys", tuple(self.keys))
        for k in self.keys:
            if not isinstance(k, str):
                raise TypeError(f"key list entries must be str, got {k!r}")


@dataclass(frozen=True)
class KeyRange(KeySpec):
    """Match keys in [start, end], inclusive on both ends (byte order)."""

    start: str
    end: str

    def __post_init__(self):
        if not isinstance(self.start, str) or not isinstance(self.end, str):
            raise TypeError("range bounds must be str")
        if self.start > self.end:
            raise ValueError(f"range start {self.start!r} sorts after end {self.end!r}")


@dataclass(frozen=True)
class KeyPrefix(KeySpec):
    """Match keys starting with ``prefix``; the empty prefix matches all."""

    prefix: str

    def __post_init__(self):
        if not isinstance(self.prefix, str):
            raise TypeError("prefix must be str")


@dataclass(frozen=True)
class KeyPositional(KeySpec):
    """Match keys by 1-based ordinal among the keys present, inclusive."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise ValueError(
                f"positional bounds must satisfy 1 <= start <= end, got {self.start}:{self.end}"
            )


def parse_keylist(s: str) -> list[str]:
    """Split a trailing-delimiter key list into its fields.

    The final character of ``s`` is the delimiter; the trailing empty
    field it produces is dropped. ``"alice bob "`` -> ``["alice", "bob"]``,
    ``"e1,"`` -> ``["e1"]``.
    """
    if not s:
        raise ValueError("malformed key list: empty string")
    return s.split(s[-1])[:-1]


def spec_from_string(s: str) -> KeySpec:
    """Parse key-list syntax into a :class:`KeySpec`.

    ``":"`` alone selects everything; ``["a", ":", "b"]`` fields select the
    inclusive range a..b; a single field ending in ``*`` selects by prefix;
    anything else is a literal key list.
    """
    if s == ":":
        return ALL
    fields = parse_keylist(s)
    if len(fields) == 3 and fields[1] == ":":
        return KeyRange(fields[0], fields[2])
    if len(fields) == 1 and fields[0].endswith("*"):
        return KeyPrefix(fields[0][:-1])
    return KeyList(tuple(fields))


def as_keyspec(obj) -> KeySpec:
    """Coerce ``obj`` to a KeySpec: passes specs through, parses strings,
    and accepts the bare ``:`` slice as ALL."""
    if isinstance(obj, KeySpec):
        return obj
    if isinstance(obj, str):
        return spec_from_string(obj)
    if isinstance(obj, slice) and obj.start is None and obj.stop is None and obj.step is None:
        return ALL
    raise TypeError(
        f"cannot interpret {obj!r} as a key spec; use a KeySpec, a key-list "
        "string, or ':' (ordinal selection is KeyPositional)"
    )


def _match_keys(keys: tuple[str, ...], spec: KeySpec) -> list[str]:
    """Keys from the sorted tuple ``keys`` selected by ``spec``, in order."""
    if isinstance(spec, AllKeys):
        return list(keys)
    if isinstance(spec, KeyList):
        wanted = set(spec.keys)
        return [k for k in keys if k in wanted]
    if isinstance(spec, KeyRange):
        lo = bisect_left(keys, spec.start)
        hi = bisect_right(keys, spec.end)
        return list(keys[lo:hi])
    if isinstance(spec, KeyPrefix):
        if not spec.prefix:
            return list(keys)
        out = []
        for i in range(bisect_left(keys, spec.prefix), len(keys)):
            if not keys[i].startswith(spec.prefix):
                break
            out.append(keys[i])
        return out
    if isinstance(spec, KeyPositional):
        return list(keys[spec.start - 1 : spec.end])
    raise TypeError(f"unknown key spec: {spec!r}")


# ---------------------------------------------------------------------------
# The array

_NUMBER_TYPES = (int, float)


class AssocArray:
    """Immutable sparse 2-D array keyed by sorted strings.

    Build instances with :func:`from_triples` or :func:`read_tsv`; the
    constructor itself is internal. Key tuples are always strictly
    sorted, every key is referenced by at least one entry, and numeric
    arrays never store an exact zero.
    """

    __slots__ = ("_data", "_row_keys", "_col_keys", "_numeric")

    def __init__(self, data: dict, numeric):
        # Internal: `data` must already satisfy the invariants and is owned
        # by the new instance.
        self._data = data
        self._row_keys = tuple(sorted({r for r, _ in data}))
        self._col_keys = tuple(sorted({c for _, c in data}))
        self._numeric = numeric if data else None

    @classmethod
    def _build(cls, data: dict, numeric) -> "AssocArray":
        if numeric:
            data = {k: v for k, v in data.items() if v != 0.0}
        if not data:
            return _EMPTY
        return cls(data, numeric)

    @classmethod
    def empty(cls) -> "AssocArray":
        return _EMPTY

    # -- basic shape -------------------------------------------------------

    @property
    def row_keys(self) -> tuple[str, ...]:
        return self._row_keys

    @property
    def col_keys(self) -> tuple[str, ...]:
        return self._col_keys

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self._row_keys), len(self._col_keys))

    @property
    def nnz(self) -> int:
        return len(self._data)

    @property
    def is_empty(self) -> bool:
        return not self._data

    @property
    def is_numeric(self):
        """True / False for numeric / string mode; None for the empty array."""
        return self._numeric

    def get(self, row: str, col: str, default=None):
        return self._data.get((row, col), default)

    def triples(self) -> tuple[list[str], list[str], list]:
        """Entries as (rows, cols, values) lists in row-major sorted order."""
        items = sorted(self._data.items())
        return (
            [r for (r, _), _ in items],
            [c for (_, c), _ in items],
            [v for _, v in items],
        )

    # -- selection ---------------------------------------------------------

    def select(self, rows=ALL, cols=ALL) -> "AssocArray":
        """Sub-array of entries whose row and column keys match the specs.

        Keys of the result are re-derived from the surviving entries, so
        the no-dangling-keys invariant holds.
        """
        rows = as_keyspec(rows)
        cols = as_keyspec(cols)
        rkeys = _match_keys(self._row_keys, rows)
        ckeys = _match_keys(self._col_keys, cols)
        if len(rkeys) == len(self._row_keys) and len(ckeys) == len(self._col_keys):
            return self
        rset = set(rkeys)
        cset = set(ckeys)
        data = {k: v for k, v in self._data.items() if k[0] in rset and k[1] in cset}
        return AssocArray._build(data, self._numeric)

    def __getitem__(self, item) -> "AssocArray":
        if not isinstance(item, tuple) or len(item) != 2:
            raise TypeError("indexing requires a (rows, cols) pair, e.g. A['a,', :]")
        return self.select(item[0], item[1])

    def where_equal(self, value) -> "AssocArray":
        """Sub-array of the entries whose value equals ``value`` exactly."""
        if self.is_empty:
            return self
        if self._numeric:
            if not isinstance(value, _NUMBER_TYPES):
                raise TypeError("numeric array compared against non-number")
            value = float(value)
        elif not isinstance(value, str):
            raise TypeError("string array compared against non-string")
        data = {k: v for k, v in self._data.items() if v == value}
        return AssocArray._build(data, self._numeric)

    # -- algebra -----------------------------------------------------------

    def _check_numeric(self, other, op: str):
        for side in (self, other):
            if side._numeric is False:
                raise TypeError(f"{op} requires numeric arrays")

    def _merge(self, other, sign: float) -> "AssocArray":
        data = dict(self._data)
        for k, v in other._data.items():
            data[k] = data.get(k, 0.0) + sign * v
        return AssocArray._build(data, True)

    def __add__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        self._check_numeric(other, "addition")
        return self._merge(other, 1.0)

    def __sub__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        self._check_numeric(other, "subtraction")
        return self._merge(other, -1.0)

    def __and__(self, other):
        """Presence intersection: value 1.0 wherever both arrays have an entry."""
        if not isinstance(other, AssocArray):
            return NotImplemented
        common = self._data.keys() & other._data.keys()
        return AssocArray._build({k: 1.0 for k in common}, True)

    def __or__(self, other):
        """Presence union: value 1.0 wherever either array has an entry."""
        if not isinstance(other, AssocArray):
            return NotImplemented
        keys = self._data.keys() | other._data.keys()
        return AssocArray._build({k: 1.0 for k in keys}, True)

    def __matmul__(self, other):
        """(+, *) semiring product joining column keys to row keys by equality."""
        if not isinstance(other, AssocArray):
            return NotImplemented
        self._check_numeric(other, "matrix multiply")
        rows_of_b: dict[str, list[tuple[str, float]]] = {}
        for (r, c), v in other._data.items():
            rows_of_b.setdefault(r, []).append((c, v))
        acc: dict[tuple[str, str], float] = {}
        for (r, c), va in self._data.items():
            for c2, vb in rows_of_b.get(c, ()):
                k = (r, c2)
                acc[k] = acc.get(k, 0.0) + va * vb
        return AssocArray._build(acc, True)

    def transpose(self) -> "AssocArray":
        data = {(c, r): v for (r, c), v in self._data.items()}
        return AssocArray._build(data, self._numeric)

    @property
    def T(self) -> "AssocArray":
        return self.transpose()

    def to_numeric(self) -> "AssocArray":
        """Parse string values as decimals, returning a numeric array.

        Exact zeros are dropped per the sparse-value invariant.
        """
        if self._numeric or self.is_empty:
            return self
        data = {k: parse_decimal(v) for k, v in self._data.items()}
        return AssocArray._build(data, True)

    # -- comparison --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, AssocArray):
            return NotImplemented
        return self._numeric == other._numeric and self._data == other._data

    def __ne__(self, other):
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    __hash__ = None

    def isclose(self, other, tol: float = 1e-9) -> bool:
        """Same keys, with numeric values within ``tol`` (strings exact)."""
        if not isinstance(other, AssocArray):
            return False
        if self._data.keys() != other._data.keys():
            return False
        for k, v in self._data.items():
            w = other._data[k]
            if isinstance(v, str) or isinstance(w, str):
                if v != w:
                    return False
            elif abs(v - w) > tol:
                return False
        return True

    def validate(self) -> None:
        """Walk the structure and raise ValueError on any broken invariant."""
        rows = {r for r, _ in self._data}
        cols = {c for _, c in self._data}
        if tuple(sorted(rows)) != self._row_keys:
            raise ValueError("row keys out of sync with entries")
        if tuple(sorted(cols)) != self._col_keys:
            raise ValueError("column keys out of sync with entries")
        if self._data and self._numeric is None:
            raise ValueError("non-empty array without a value mode")
        if not self._data and self._numeric is not None:
            raise ValueError("empty array carries a value mode")
        for (r, c), v in self._data.items():
            if not isinstance(r, str) or not isinstance(c, str):
                raise ValueError(f"non-string key ({r!r}, {c!r})")
            if self._numeric:
                if not isinstance(v, float) or not math.isfinite(v):
                    raise ValueError(f"numeric entry ({r!r}, {c!r}) holds {v!r}")
                if v == 0.0:
                    raise ValueError(f"explicit zero stored at ({r!r}, {c!r})")
            elif self._numeric is False and not isinstance(v, str):
                raise ValueError(f"string entry ({r!r}, {c!r}) holds {v!r}")

    def __repr__(self):
        mode = {True: "numeric", False: "string", None: "empty"}[self._numeric]
        return f"<AssocArray {self.shape[0]}x{self.shape[1]} {mode} nnz={self.nnz}>"


_EMPTY = AssocArray({}, None)


def from_triples(rows, cols, values, collision: str | None = None) -> AssocArray:
    """Build an array from parallel (row, col, value) lists.

    Values must be all strings or all numbers. Duplicate (row, col) pairs
    are folded by ``collision``: ``"sum"`` (numeric only) or ``"last"``
    (input order). The default is "sum" for numeric values and "last" for
    strings. Numeric zeros, including zero-valued sums, are dropped.
    """
    rows = list(rows)
    cols = list(cols)
    values = list(values)
    if not (len(rows) == len(cols) == len(values)):
        raise ValueError(
            f"triple lists differ in length: {len(rows)}/{len(cols)}/{len(values)}"
        )
    if not values:
        return _EMPTY

    numeric = not isinstance(values[0], str)
    if collision is None:
        collision = "sum" if numeric else "last"
    if collision not in ("sum", "last"):
        raise ValueError(f"unknown collision policy {collision!r}")
    if collision == "sum" and not numeric:
        raise ValueError("collision policy 'sum' requires numeric values")

    data: dict[tuple[str, str], object] = {}
    for r, c, v in zip(rows, cols, values):
        if not isinstance(r, str) or not isinstance(c, str):
            raise TypeError(f"keys must be str, got ({r!r}, {c!r})")
        if numeric:
            if isinstance(v, str):
                raise ValueError("mixed string and numeric values in one construction")
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"non-finite value at ({r!r}, {c!r}): {v!r}")
        elif not isinstance(v, str):
            raise ValueError("mixed string and numeric values in one construction")
        k = (r, c)
        if collision == "sum" and k in data:
            data[k] += v
        else:
            data[k] = v
    return AssocArray._build(data, numeric)


# ---------------------------------------------------------------------------
# TSV triple files
#
# One entry per line: row <TAB> col <TAB> value <LF>, UTF-8. The same
# constraints as stored tables apply: no tabs or newlines in keys, no
# newlines in values (tabs in values survive because only the first two
# tabs split a line).

def write_tsv(array: AssocArray, path) -> None:
    """Write the array's triples to ``path`` in row-major sorted order."""
    rows, cols, values = array.triples()
    lines = []
    for r, c, v in zip(rows, cols, values):
        s = v if isinstance(v, str) else format_decimal(v)
        if "\t" in r or "\n" in r or "\t" in c or "\n" in c:
            raise ValueError(f"key contains a reserved byte: ({r!r}, {c!r})")
        if "\n" in s:
            raise ValueError(f"value at ({r!r}, {c!r}) contains a newline")
        lines.append(f"{r}\t{c}\t{s}\n")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("".join(lines))


def read_tsv_triples(path) -> tuple[list[str], list[str], list[str]]:
    """Read raw (rows, cols, values) string lists from a triple file.

    Duplicate (row, col) pairs are returned as-is, in file order.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        text = f.read()
    rows: list[str] = []
    cols: list[str] = []
    values: list[str] = []
    if text:
        lines = text.split("\n")
        if lines[-1] == "":
            lines.pop()
        for lineno, line in enumerate(lines, start=1):
            parts = line.split("\t", 2)
            if len(parts) != 3:
                raise ValueError(f"{path}: line {lineno} is not a 3-column triple")
            rows.append(parts[0])
            cols.append(parts[1])
            values.append(parts[2])
    return rows, cols, values


def read_tsv(path, numeric: bool = False, collision: str | None = None) -> AssocArray:
    """Read a triple file written by :func:`write_tsv` (or by hand).

    Values are kept as strings unless ``numeric`` is set, in which case
    they are parsed as decimals.
    """
    rows, cols, values = read_tsv_triples(path)
    if numeric:
        values = [parse_decimal(v) for v in values]
    return from_triples(rows, cols, values, collision=collision)
