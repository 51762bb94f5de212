"""Simple undirected graphs and vertex sets shared by every other module."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import networkx as nx
import numpy as np

from butterfly.core.errors import DomainError


class VertexSet:
    """Immutable subset of ``0..n-1`` stored as a dense boolean mask."""

    __slots__ = ("n", "_mask")

    def __init__(self, n: int, mask: np.ndarray) -> None:
        if mask.shape != (n,):
            raise DomainError(f"mask of shape {mask.shape} does not match n={n}")
        self.n = n
        self._mask = mask.astype(bool, copy=True)
        self._mask.flags.writeable = False

    @classmethod
    def empty(cls, n: int) -> "VertexSet":
        return cls(n, np.zeros(n, dtype=bool))

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, np.ones(n, dtype=bool))

    @classmethod
    def from_ids(cls, n: int, ids: Iterable[int]) -> "VertexSet":
        idx = np.fromiter((int(v) for v in ids), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise DomainError(f"vertex ids must lie in [0, {n})")
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        return cls(n, mask)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    def ids(self) -> tuple[int, ...]:
        return tuple(int(v) for v in np.flatnonzero(self._mask))

    def issubset(self, other: "VertexSet") -> bool:
        self._check_universe(other)
        return not bool(np.any(self._mask & ~other._mask))

    def complement(self) -> "VertexSet":
        return VertexSet(self.n, ~self._mask)

    def _check_universe(self, other: "VertexSet") -> None:
        if other.n != self.n:
            raise DomainError(f"vertex sets over different universes ({self.n} vs {other.n})")

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self._mask | other._mask)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self._mask & other._mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._check_universe(other)
        return VertexSet(self.n, self._mask & ~other._mask)

    def __contains__(self, v: object) -> bool:
        return isinstance(v, (int, np.integer)) and 0 <= v < self.n and bool(self._mask[v])

    def __len__(self) -> int:
        return int(np.count_nonzero(self._mask))

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._mask, other._mask))

    def __hash__(self) -> int:
        return hash((self.n, self._mask.tobytes()))

    def __repr__(self) -> str:
        ids = self.ids()
        shown = ", ".join(map(str, ids[:12])) + (", ..." if len(ids) > 12 else "")
        return f"VertexSet(n={self.n}, {{{shown}}})"


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Build instances with :meth:`from_edges` or :meth:`from_networkx`; the
    constructor trusts its arguments.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    edge_count: int = field(default=0)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 0:
            raise DomainError("vertex count must be nonnegative")
        neighbors: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u == v:
                raise DomainError(f"self-loop at vertex {u}")
            neighbors[u].add(v)
            neighbors[v].add(u)
        adjacency = tuple(tuple(sorted(nbrs)) for nbrs in neighbors)
        edge_count = sum(len(nbrs) for nbrs in adjacency) // 2
        return cls(n=n, adjacency=adjacency, edge_count=edge_count)

    @classmethod
    def from_networkx(cls, graph: nx.Graph) -> "Graph":
        """Relabel nodes of ``graph`` to ``0..n-1`` in sorted order."""
        nodes = sorted(graph.nodes)
        index = {node: k for k, node in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((index[u], index[v]) for u, v in graph.edges))

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.edges())
        return graph

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in ascending order."""
        for u, nbrs in enumerate(self.adjacency):
            for v in nbrs:
                if u < v:
                    yield u, v

    def degree(self, v: int) -> int:
        _check_vertex(self, v)
        return len(self.adjacency[v])


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.n:
        raise DomainError(f"vertex {v} is outside [0, {g.n})")


def open_neighborhood(g: Graph, v: int) -> VertexSet:
    """N(v): all vertices adjacent to ``v``."""
    _check_vertex(g, v)
    return VertexSet.from_ids(g.n, g.adjacency[v])


def closed_neighborhood(g: Graph, s: VertexSet) -> VertexSet:
    """N[S] = S together with every neighbor of a member of S."""
    if s.n != g.n:
        raise DomainError(f"vertex set over {s.n} vertices used with a graph on {g.n}")
    mask = s.mask.copy()
    for v in s.ids():
        mask[list(g.adjacency[v])] = True
    return VertexSet(g.n, mask)


def max_degree(g: Graph) -> int:
    if g.n == 0:
        raise DomainError("maximum degree of the empty graph is undefined")
    return max(len(nbrs) for nbrs in g.adjacency)


def write_edgelist(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def _parse_int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise DomainError(f"{where}: '{token}' is not an integer") from None


def read_edgelist(text: str) -> Graph:
    rows = [(k, line.split()) for k, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not rows or len(rows[0][1]) != 2:
        raise DomainError("edge list must start with a line 'n m'")
    n, m = (_parse_int(tok, f"line {rows[0][0]}") for tok in rows[0][1])
    edges = []
    for k, tokens in rows[1:]:
        if len(tokens) != 2:
            raise DomainError(f"line {k}: expected 'u v', got {len(tokens)} tokens")
        edges.append((_parse_int(tokens[0], f"line {k}"), _parse_int(tokens[1], f"line {k}")))
    if len(edges) != m:
        raise DomainError(f"header announces {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def load_graph(path: Path) -> Graph:
    return read_edgelist(Path(path).read_text(encoding="utf-8"))


def read_vertex_set(n: int, text: str) -> VertexSet:
    return VertexSet.from_ids(n, [_parse_int(tok, "vertex set") for tok in text.replace(",", " ").split()])


def to_dot(g: Graph, labels: Mapping[int, str] | None = None, highlight: VertexSet | None = None) -> str:
    """Graphviz DOT text; highlighted vertices are drawn filled."""
    lines = ["graph G {", "  node [shape=circle];"]
    for v in range(g.n):
        attrs = [f'label="{labels[v]}"'] if labels and v in labels else []
        if highlight is not None and v in highlight:
            attrs.append("style=filled")
            attrs.append("fillcolor=black")
            attrs.append("fontcolor=white")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {v}{suffix};")
    lines.extend(f"  {u} -- {v};" for u, v in g.edges())
    lines.append("}")
    return "\n".join(lines) + "\n"
