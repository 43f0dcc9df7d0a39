"""Undirected simple graphs, edge-list I/O and community modularity.

Every other module consumes :class:`Graph`. Nodes are always the dense range
``0..N-1``; labels from an input file are kept in ``labels`` so results can be
mapped back to the caller's ids.
"""
from __future__ import annotations

import hashlib
import io
import json
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO


class GraphError(ValueError):
    """Raised for invalid graph structure (self-loops, bad node ids)."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on nodes ``0..N-1``."""

    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.adjacency)
        if n == 0:
            raise GraphError("graph must have at least one node")
        for x, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise GraphError(f"neighbors of {x} must be sorted and unique")
            for y in nbrs:
                if y == x:
                    raise GraphError(f"self-loop at node {x}")
                if not 0 <= y < n:
                    raise GraphError(f"node {x} has out-of-range neighbor {y}")
                if x not in self.adjacency[y]:
                    raise GraphError(f"edge ({x}, {y}) is not symmetric")
        if self.labels is not None and len(self.labels) != n:
            raise GraphError("labels must have one entry per node")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[int] | None = None) -> "Graph":
        """Build a graph on ``n`` nodes; duplicate edges are collapsed."""
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) outside 0..{n - 1}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs),
                   None if labels is None else tuple(labels))

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def degree(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(self.degree) // 2

    @property
    def mean_degree(self) -> float:
        return 2 * self.edge_count / self.node_count

    def edges(self) -> list[tuple[int, int]]:
        """Each edge once as ``(u, v)`` with ``u < v``, sorted."""
        return [(x, y) for x, nbrs in enumerate(self.adjacency) for y in nbrs if x < y]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic graph in which node ``x`` becomes ``perm[x]``."""
        if sorted(perm) != list(range(self.node_count)):
            raise GraphError("perm must be a permutation of 0..N-1")
        return Graph.from_edges(self.node_count, ((perm[u], perm[v]) for u, v in self.edges()))

    def original_label(self, x: int) -> int:
        return x if self.labels is None else self.labels[x]

    def metadata(self) -> dict:
        hist = Counter(self.degree)
        return {
            "n": self.node_count,
            "edges": self.edge_count,
            "mean_degree": self.mean_degree,
            "degree_histogram": {str(k): hist[k] for k in sorted(hist)},
        }

    def digest(self) -> str:
        """SHA-256 of the canonical edge list; stable across runs."""
        return hashlib.sha256(to_edge_list(self).encode()).hexdigest()


def from_edge_list(text: str | TextIO) -> Graph:
    """Parse ``u v`` lines into a :class:`Graph`.

    Blank lines and lines starting with ``#`` are ignored. Node ids may be any
    non-negative integers; they are compacted to ``0..N-1`` in increasing order
    of the original id and the originals kept in ``Graph.labels``.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    raw: list[tuple[int, int]] = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, s, "expected two node ids")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(lineno, s, "node ids must be integers") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(lineno, s, "node ids must be non-negative")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at node {u}")
        raw.append((u, v))
    if not raw:
        raise GraphError("edge list contains no edges")
    ids = sorted({u for e in raw for u in e})
    index = {u: i for i, u in enumerate(ids)}
    return Graph.from_edges(len(ids), ((index[u], index[v]) for u, v in raw), labels=ids)


def to_edge_list(g: Graph, original_labels: bool = False) -> str:
    lab = g.original_label if original_labels else (lambda x: x)
    return "".join(f"{lab(u)} {lab(v)}\n" for u, v in g.edges())


def metadata_json(g: Graph) -> str:
    return json.dumps(g.metadata(), indent=2)


def is_connected(g: Graph) -> bool:
    seen = [False] * g.node_count
    seen[0] = True
    queue = deque([0])
    reached = 1
    while queue:
        x = queue.popleft()
        for y in g.adjacency[x]:
            if not seen[y]:
                seen[y] = True
                reached += 1
                queue.append(y)
    return reached == g.node_count


def disjoint_union(graphs: Sequence[Graph]) -> tuple[Graph, list[int]]:
    """Union of ``graphs`` with node blocks laid out in order.

    Returns the union and the offset of each input's block.
    """
    offsets, edges, n = [], [], 0
    for h in graphs:
        offsets.append(n)
        edges.extend((u + n, v + n) for u, v in h.edges())
        n += h.node_count
    return Graph.from_edges(n, edges), offsets


@dataclass(frozen=True)
class Partition:
    """Community label per node; labels are the contiguous range ``0..C-1``."""

    community_id: tuple[int, ...]

    def __post_init__(self):
        labels = set(self.community_id)
        if not labels or labels != set(range(len(labels))):
            raise GraphError("community labels must form a contiguous range from 0")

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """Compact arbitrary hashable labels to ``0..C-1`` by first appearance."""
        index: dict = {}
        return cls(tuple(index.setdefault(c, len(index)) for c in labels))

    @property
    def community_count(self) -> int:
        return max(self.community_id) + 1

    def relabel(self, perm: Sequence[int]) -> "Partition":
        out = [0] * len(self.community_id)
        for x, c in enumerate(self.community_id):
            out[perm[x]] = c
        return Partition(tuple(out))


def modularity(g: Graph, p: Partition) -> float:
    """Newman modularity ``Q = sum_c [e_c/m - (d_c/2m)^2]``."""
    if len(p.community_id) != g.node_count:
        raise GraphError("partition must label every node")
    m = g.edge_count
    if m == 0:
        raise GraphError("modularity is undefined for a graph without edges")
    inside = [0] * p.community_count
    degree = [0] * p.community_count
    cid = p.community_id
    for x, nbrs in enumerate(g.adjacency):
        degree[cid[x]] += len(nbrs)
    for u, v in g.edges():
        if cid[u] == cid[v]:
            inside[cid[u]] += 1
    return sum(e / m - (d / (2 * m)) ** 2 for e, d in zip(inside, degree))
