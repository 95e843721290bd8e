"""Shared helpers: random array generators and dense brute-force oracles."""

from __future__ import annotations

import numpy as np

from assocdb import AssocArray, from_triples

ROW_POOL = [f"r{i:02d}" for i in range(24)]
COL_POOL = [f"c{i:02d}" for i in range(24)]

# key/value alphabets for string-valued arrays; keys avoid the bytes the
# store reserves (tab/newline), values only avoid newline
KEY_CHARS = "abcdefgXYZ0123456789 :;/|*-_.~éλ中"
VALUE_CHARS = KEY_CHARS + "\t'\"\\"


def random_numeric_array(rng, max_rows=20, max_cols=20, max_entries=60) -> AssocArray:
    n = rng.randrange(0, max_entries + 1)
    rows = [rng.choice(ROW_POOL[:max_rows]) for _ in range(n)]
    cols = [rng.choice(COL_POOL[:max_cols]) for _ in range(n)]
    values = []
    for _ in range(n):
        v = round(rng.uniform(-5.0, 5.0), 3)
        values.append(v if v != 0.0 else 1.0)
    return from_triples(rows, cols, values, collision="sum")


def random_key(rng, max_len=12) -> str:
    return "".join(rng.choice(KEY_CHARS) for _ in range(rng.randrange(1, max_len)))


def random_string_array(rng, n_entries) -> AssocArray:
    rows = [random_key(rng) for _ in range(n_entries)]
    cols = [random_key(rng) for _ in range(n_entries)]
    values = [
        "".join(rng.choice(VALUE_CHARS) for _ in range(rng.randrange(0, 16)))
        for _ in range(n_entries)
    ]
    return from_triples(rows, cols, values, collision="last")


def from_triple_list(triples) -> AssocArray:
    """Build an array from a list of (row, col, value) tuples."""
    return from_triples(
        [t[0] for t in triples], [t[1] for t in triples], [t[2] for t in triples]
    )


def to_dense(array: AssocArray, row_keys, col_keys) -> np.ndarray:
    """Dense matrix of ``array`` over explicit key orderings (absent = 0)."""
    ri = {k: i for i, k in enumerate(row_keys)}
    ci = {k: i for i, k in enumerate(col_keys)}
    m = np.zeros((len(row_keys), len(col_keys)))
    rows, cols, values = array.triples()
    for r, c, v in zip(rows, cols, values):
        m[ri[r], ci[c]] = v
    return m


def union_keys(a: AssocArray, b: AssocArray):
    rows = sorted(set(a.row_keys) | set(b.row_keys))
    cols = sorted(set(a.col_keys) | set(b.col_keys))
    return rows, cols


def sparsify(matrix: np.ndarray, row_keys, col_keys) -> AssocArray:
    """Inverse of :func:`to_dense`: nonzero cells become entries."""
    rows, cols, values = [], [], []
    for i, r in enumerate(row_keys):
        for j, c in enumerate(col_keys):
            if matrix[i, j] != 0.0:
                rows.append(r)
                cols.append(c)
                values.append(float(matrix[i, j]))
    return from_triples(rows, cols, values)
