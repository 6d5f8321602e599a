"""Static underlying graphs and the generators used in the experiments.

Nodes are dense 0-indexed integers. Edges are canonical ``(min, max)`` pairs
kept in sorted order; the position of an edge in ``StaticGraph.edges`` is its
index in every liveness vector built on top of the graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Base class for graph validation failures."""


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class NodeRangeError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    pass


class EdgeListFormatError(GraphError):
    """Malformed edge-list text; ``lineno`` is 1-based."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class DegreeStats:
    min_degree: int
    max_degree: int


@dataclass(frozen=True, eq=False)
class StaticGraph:
    """A simple, undirected, connected graph.

    Build instances with :func:`build_graph` (or a generator); the constructor
    itself does not validate.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    # incident_edges[v][j] is the edge index joining v and adjacency[v][j]
    incident_edges: tuple[tuple[int, ...], ...]
    _edge_index: dict = field(repr=False, compare=False)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def edge_index(self, u: int, v: int) -> int:
        """Index of edge ``{u, v}``; raises ``KeyError`` if absent."""
        return self._edge_index[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edge_index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"StaticGraph(n={self.n}, m={self.m})"


def _is_connected(n: int, adjacency: Sequence[Sequence[int]]) -> bool:
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == n


def build_graph(n: int, edge_list: Iterable[tuple[int, int]]) -> StaticGraph:
    """Validate an edge list and return the corresponding :class:`StaticGraph`.

    Raises
    ------
    SelfLoopError, DuplicateEdgeError, NodeRangeError, DisconnectedGraphError
    """
    if n < 2:
        raise NodeRangeError(f"need at least 2 nodes, got n={n}")
    canon = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise NodeRangeError(f"edge ({u}, {v}) has a node outside [0, {n})")
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}")
        e = (u, v) if u < v else (v, u)
        if e in canon:
            raise DuplicateEdgeError(f"duplicate edge {e}")
        canon.add(e)

    edges = tuple(sorted(canon))
    adj: list[list[int]] = [[] for _ in range(n)]
    inc: list[list[int]] = [[] for _ in range(n)]
    for idx, (u, v) in enumerate(edges):
        adj[u].append(v)
        inc[u].append(idx)
        adj[v].append(u)
        inc[v].append(idx)
    # neighbor order is ascending node id; keep edge ids aligned with it
    for v in range(n):
        order = sorted(range(len(adj[v])), key=adj[v].__getitem__)
        adj[v] = [adj[v][j] for j in order]
        inc[v] = [inc[v][j] for j in order]

    if not _is_connected(n, adj):
        raise DisconnectedGraphError(f"graph on {n} nodes with {len(edges)} edges is not connected")

    return StaticGraph(
        n=n,
        edges=edges,
        adjacency=tuple(tuple(a) for a in adj),
        incident_edges=tuple(tuple(i) for i in inc),
        _edge_index={e: i for i, e in enumerate(edges)},
    )


def gen_path(n: int) -> StaticGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def gen_clique(n: int) -> StaticGraph:
    return build_graph(n, combinations(range(n), 2))


def gen_random_threshold(n: int, threshold: float, rng: np.random.Generator) -> StaticGraph:
    """Path backbone ``0-1-...-(n-1)`` plus each other pair with probability ``threshold``.

    Non-backbone pairs are visited in lexicographic order, one uniform draw each.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    edges = [(i, i + 1) for i in range(n - 1)]
    extra = [(i, j) for i in range(n) for j in range(i + 2, n)]
    if extra:
        keep = rng.random(len(extra)) < threshold
        edges.extend(e for e, k in zip(extra, keep) if k)
    return build_graph(n, edges)


def gen_lollipop(n: int, k: int) -> StaticGraph:
    """Clique on ``0..k-1``, path on ``k..n-1``, joined by the cut-edge ``{k-1, k}``."""
    if not 2 <= k <= n - 1:
        raise ValueError(f"clique size k must satisfy 2 <= k <= n-1, got k={k}, n={n}")
    edges = list(combinations(range(k), 2))
    edges.extend((i, i + 1) for i in range(k - 1, n - 1))
    return build_graph(n, edges)


def degree_stats(g: StaticGraph) -> DegreeStats:
    degrees = [len(a) for a in g.adjacency]
    return DegreeStats(min(degrees), max(degrees))


def format_edge_list(g: StaticGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> StaticGraph:
    """Parse the ``n m`` header + ``u v`` lines format.

    Blank lines are ignored. Structural problems (bad tokens, wrong edge count)
    raise :class:`EdgeListFormatError` with the offending line number; graph
    validity problems raise the matching :class:`GraphError` subclass.
    """
    rows = [(i, line.split()) for i, line in enumerate(text.splitlines(), start=1)]
    rows = [(i, toks) for i, toks in rows if toks]
    if not rows:
        raise EdgeListFormatError(1, "empty edge list")

    def ints(lineno: int, toks: list[str]) -> tuple[int, int]:
        if len(toks) != 2:
            raise EdgeListFormatError(lineno, f"expected 2 fields, got {len(toks)}")
        try:
            a, b = int(toks[0]), int(toks[1])
        except ValueError:
            raise EdgeListFormatError(lineno, f"non-integer field in {' '.join(toks)!r}") from None
        if a < 0 or b < 0:
            raise EdgeListFormatError(lineno, "negative value")
        return a, b

    head_line, head = rows[0]
    n, m = ints(head_line, head)
    body = rows[1:]
    if len(body) != m:
        last = body[-1][0] if body else head_line
        raise EdgeListFormatError(last, f"header declares {m} edges, found {len(body)}")
    edges = []
    for lineno, toks in body:
        u, v = ints(lineno, toks)
        if u >= n or v >= n:
            raise EdgeListFormatError(lineno, f"node id out of range for n={n}")
        edges.append((u, v))
    return build_graph(n, edges)


def read_edge_list(path: str | Path) -> StaticGraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: StaticGraph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))
