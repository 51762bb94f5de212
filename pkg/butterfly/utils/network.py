"""Butterfly network BF(r): layer coordinates, recursive numbering and matrices.

Vertex ``(x, i)`` has internal id ``i * 2**r + x``. The recursive numbering
``f`` maps the same vertex to ``1..(r+1)*2**r`` so that the adjacency matrix
splits into two copies of A_{r-1} plus identity blocks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple

import numpy as np

from butterfly.core.config import AppConfig
from butterfly.core.errors import DomainError, ResourceLimitError
from butterfly.utils.graph import Graph, VertexSet
from butterfly.utils.linalg import ExactMatrix, FieldTag

logger = logging.getLogger(__name__)

Ordering = Literal["layer", "recursive"]

# Rough per-vertex footprint of Graph + labeling (tuples, ints, numpy maps).
BYTES_PER_VERTEX = 320


class LayerVertex(NamedTuple):
    """Butterfly coordinate: row ``x`` (bit i-1 is x_i) on level ``i``."""

    x: int
    i: int


def g_of(x: int) -> int:
    """Unique g with 2**(g-1) <= x < 2**g; g_of(0) is -1."""
    if x < 0:
        raise DomainError(f"g is undefined for negative x={x}")
    if x == 0:
        return -1
    return x.bit_length()


def f_of(x: int, i: int) -> int:
    """Recursive vertex number of ``(x, i)``.

    Peels the top set bit of x while ``i < g(x)``; each peel adds
    ``g * 2**(g-1)``.
    """
    if x < 0 or i < 0:
        raise DomainError(f"f is undefined for ({x}, {i})")
    offset = 0
    g = g_of(x)
    while i < g:
        offset += g * 2 ** (g - 1)
        x -= 2 ** (g - 1)
        g = g_of(x)
    return offset + i * 2**i + x + 1


def vertex_count(r: int) -> int:
    return (r + 1) * 2**r


@dataclass(frozen=True, eq=False)
class ButterflyLabeling:
    """Mutually inverse maps between internal ids and recursive numbers."""

    r: int
    to_recursive: np.ndarray
    to_layer: np.ndarray

    @classmethod
    def tabulate(cls, r: int) -> "ButterflyLabeling":
        width = 2**r
        n = vertex_count(r)
        to_recursive = np.empty(n, dtype=np.int64)
        for i in range(r + 1):
            for x in range(width):
                to_recursive[i * width + x] = f_of(x, i)
        to_layer = np.full(n, -1, dtype=np.int64)
        to_layer[to_recursive - 1] = np.arange(n, dtype=np.int64)
        if to_layer.min() < 0:
            raise AssertionError(f"recursive numbering of BF({r}) is not a bijection")
        to_recursive.flags.writeable = False
        to_layer.flags.writeable = False
        return cls(r=r, to_recursive=to_recursive, to_layer=to_layer)


@dataclass(frozen=True, eq=False)
class ButterflyNetwork:
    """BF(r) together with both labelings."""

    r: int
    graph: Graph
    labeling: ButterflyLabeling

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def width(self) -> int:
        return 2**self.r

    def vertex_id(self, x: int, i: int) -> int:
        if not (0 <= x < self.width and 0 <= i <= self.r):
            raise DomainError(f"({x}, {i}) is not a vertex of BF({self.r})")
        return i * self.width + x

    def layer_vertex(self, v: int) -> LayerVertex:
        if not 0 <= v < self.n:
            raise DomainError(f"vertex {v} is outside BF({self.r})")
        i, x = divmod(v, self.width)
        return LayerVertex(x, i)

    def recursive_label(self, v: int) -> int:
        return int(self.labeling.to_recursive[v])

    def from_recursive(self, label: int) -> int:
        if not 1 <= label <= self.n:
            raise DomainError(f"recursive label {label} is outside [1, {self.n}]")
        return int(self.labeling.to_layer[label - 1])

    def recursive_set(self, labels: Iterable[int]) -> VertexSet:
        return VertexSet.from_ids(self.n, (self.from_recursive(k) for k in labels))

    def recursive_labels(self, s: VertexSet) -> tuple[int, ...]:
        return tuple(sorted(self.recursive_label(v) for v in s.ids()))

    def level(self, i: int) -> VertexSet:
        mask = np.zeros(self.n, dtype=bool)
        mask[i * self.width : (i + 1) * self.width] = True
        return VertexSet(self.n, mask)


def estimate_bytes(r: int) -> int:
    return vertex_count(r) * BYTES_PER_VERTEX


def butterfly_edges(r: int) -> Iterable[tuple[int, int]]:
    """Edges of E_1 .. E_r as internal id pairs."""
    width = 2**r
    for i in range(1, r + 1):
        bit = 1 << (i - 1)
        lower, upper = (i - 1) * width, i * width
        for x in range(width):
            yield lower + x, upper + x
            yield lower + x, upper + (x ^ bit)


def generate(r: int, config: AppConfig | None = None) -> ButterflyNetwork:
    """Build BF(r) with (r+1)*2**r vertices and r*2**(r+1) edges."""
    if r < 1:
        raise DomainError(f"butterfly order must be positive, got r={r}")
    config = config or AppConfig()
    if r > config.limits.max_r:
        raise ResourceLimitError(f"r={r} exceeds the configured maximum {config.limits.max_r}")
    if estimate_bytes(r) > config.memory_cap_bytes:
        raise ResourceLimitError(
            f"BF({r}) needs about {estimate_bytes(r) // 2**20} MiB, cap is {config.memory_cap_mb} MiB"
        )
    graph = Graph.from_edges(vertex_count(r), butterfly_edges(r))
    logger.debug("generated BF(%d): %d vertices, %d edges", r, graph.n, graph.edge_count)
    return ButterflyNetwork(r=r, graph=graph, labeling=ButterflyLabeling.tabulate(r))


def adjacency_matrix(
    net: ButterflyNetwork,
    ordering: Ordering = "layer",
    field: FieldTag | None = None,
) -> ExactMatrix:
    """Adjacency matrix; under ``recursive`` ordering row k is the vertex numbered k+1."""
    field = field or FieldTag.rationals()
    if ordering == "layer":
        return ExactMatrix.from_graph(net.graph, field)
    if ordering == "recursive":
        return ExactMatrix.from_graph(net.graph, field, order=net.labeling.to_layer.tolist())
    raise DomainError(f"unknown ordering {ordering!r}")
