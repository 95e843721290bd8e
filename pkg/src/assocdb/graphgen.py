"""Deterministic power-law graph generation.

Edges are drawn by recursive quadrant (Kronecker) sampling without the
final vertex permutation: at each of the ``scale`` levels one uniform
draw picks a quadrant with probabilities (a, b, c, d), contributing one
bit to the start vertex id and one to the end vertex id. Defaults are
the classic Graph500 constants (0.57, 0.19, 0.19, 0.05). A graph of
scale ``s`` and edge factor ``d`` has 2**s vertices and exactly d * 2**s
edges; self-loops and duplicate edges are kept.

Randomness is counter-based: edge ``i`` consumes a fixed block of Philox
output addressed by (seed, i), so regeneration is bit-identical and
generation can be split across edge-index ranges with identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Philox

from .arrays import AssocArray, from_triples

__all__ = [
    "GRAPH500_PROBS",
    "EdgeList",
    "GenParams",
    "degrees",
    "edge_block",
    "generate",
    "to_adjacency",
    "vertex_key",
    "write_edges",
]

GRAPH500_PROBS = (0.57, 0.19, 0.19, 0.05)


@dataclass(frozen=True)
class GenParams:
    """Generator parameters: 2**scale vertices, edge_factor * 2**scale edges."""

    scale: int
    edge_factor: int = 16
    seed: int = 20180101
    probs: tuple[float, float, float, float] = GRAPH500_PROBS

    def __post_init__(self):
        if not 1 <= self.scale <= 60:
            raise ValueError(f"scale must be in 1..60, got {self.scale}")
        if self.edge_factor < 1:
            raise ValueError(f"edge_factor must be >= 1, got {self.edge_factor}")
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != 4 or any(p < 0 for p in probs):
            raise ValueError(f"probs must be four non-negative reals, got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ValueError(f"probs must sum to 1 within 1e-12, got sum {sum(probs)!r}")

    @property
    def num_vertices(self) -> int:
        return 1 << self.scale

    @property
    def num_edges(self) -> int:
        return self.edge_factor << self.scale


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Ordered (start, end) vertex-id pairs for one parameter set."""

    params: GenParams
    starts: np.ndarray = field(repr=False)
    ends: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.starts)

    def __iter__(self):
        return zip(self.starts.tolist(), self.ends.tolist())

    def __repr__(self):
        return f"<EdgeList scale={self.params.scale} edges={len(self)}>"


def edge_block(params: GenParams, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Generate edges ``lo..hi-1`` of the list defined by ``params``.

    Blocks tile: concatenating adjacent blocks equals one larger block.
    """
    if not 0 <= lo <= hi <= params.num_edges:
        raise ValueError(f"edge range {lo}:{hi} out of bounds")
    n = hi - lo
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    scale = params.scale
    # Each edge owns a fixed run of counter steps (4 uint64 outputs per
    # step), so edge i's draws are addressable regardless of blocking.
    steps = -(-scale // 4)
    bg = Philox(key=params.seed % (1 << 64), counter=lo * steps)
    raw = bg.random_raw(n * steps * 4).reshape(n, steps * 4)
    u = (raw[:, :scale] >> np.uint64(11)) * (2.0**-53)

    a, b, c, _ = params.probs
    t1, t2, t3 = a, a + b, a + b + c
    starts = np.zeros(n, np.int64)
    ends = np.zeros(n, np.int64)
    for level in range(scale):
        col = u[:, level]
        quadrant = (
            (col >= t1).astype(np.int64) + (col >= t2).astype(np.int64) + (col >= t3)
        )
        starts = (starts << 1) | (quadrant >> 1)
        ends = (ends << 1) | (quadrant & 1)
    return starts, ends


def generate(params: GenParams) -> EdgeList:
    """The full deterministic edge list for ``params``."""
    starts, ends = edge_block(params, 0, params.num_edges)
    return EdgeList(params, starts, ends)


def vertex_key(vertex_id: int, scale: int) -> str:
    """Zero-padded decimal key whose byte order equals numeric order.

    The width is the digit count of the largest vertex id (2**scale - 1).
    """
    if not 0 <= vertex_id < (1 << scale):
        raise ValueError(f"vertex id {vertex_id} out of range for scale {scale}")
    width = len(str((1 << scale) - 1))
    return f"{vertex_id:0{width}d}"


def to_adjacency(edges: EdgeList) -> AssocArray:
    """Adjacency array of the edge list; entry values are multiplicities."""
    scale = edges.params.scale
    width = len(str((1 << scale) - 1))
    rows = [f"{v:0{width}d}" for v in edges.starts.tolist()]
    cols = [f"{v:0{width}d}" for v in edges.ends.tolist()]
    return from_triples(rows, cols, [1.0] * len(rows), collision="sum")


def degrees(edges: EdgeList) -> tuple[list[tuple[str, str, int]], list[tuple[str, str, int]]]:
    """Per-vertex (key, "OutDeg"/"InDeg", count) triples over the raw list.

    Duplicate edges and self-loops count; only vertices with a nonzero
    count appear. The triples feed straight into a degree table via
    ``put_triple``.
    """
    params = edges.params
    out_counts = np.bincount(edges.starts, minlength=params.num_vertices)
    in_counts = np.bincount(edges.ends, minlength=params.num_vertices)
    width = len(str(params.num_vertices - 1))
    out = [
        (f"{v:0{width}d}", "OutDeg", int(c))
        for v, c in enumerate(out_counts.tolist())
        if c
    ]
    inn = [
        (f"{v:0{width}d}", "InDeg", int(c))
        for v, c in enumerate(in_counts.tolist())
        if c
    ]
    return out, inn


def write_edges(edges: EdgeList, path) -> None:
    """Debug dump: one ``start<TAB>end`` decimal pair per line."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(
            "".join(f"{s}\t{e}\n" for s, e in zip(edges.starts.tolist(), edges.ends.tolist()))
        )
