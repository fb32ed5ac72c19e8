"""Undirected simple graphs over dense integer node indices.

Everything downstream (group synthesis, projection, scoring) works on
``UndirectedGraph``: an immutable edge set over nodes ``0..N-1`` with an
optional label table for graphs read from files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph data (self-loops, out-of-range nodes, bad edge lists)."""


@dataclass(frozen=True)
class UndirectedGraph:
    node_count: int
    edges: frozenset = frozenset()
    labels: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.node_count < 0:
            raise GraphError("node_count must be nonnegative")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise GraphError(f"edge ({u}, {v}) outside [0, {self.node_count})")
            canon.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "edges", frozenset(canon))
        if self.labels is not None and len(self.labels) != self.node_count:
            raise GraphError("label table length differs from node_count")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None):
        return cls(n, frozenset(edges), tuple(labels) if labels is not None else None)

    @classmethod
    def from_adjacency(cls, adj: np.ndarray, labels=None):
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise GraphError("adjacency must be square")
        a = adj != 0
        if a.diagonal().any():
            raise GraphError("adjacency has nonzero diagonal")
        iu, ju = np.nonzero(np.triu(a | a.T, 1))
        return cls(adj.shape[0], frozenset(zip(iu.tolist(), ju.tolist())), labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Boolean N x N adjacency matrix (read-only)."""
        a = np.zeros((self.node_count, self.node_count), dtype=bool)
        if self.edges:
            e = np.array(sorted(self.edges))
            a[e[:, 0], e[:, 1]] = True
            a[e[:, 1], e[:, 0]] = True
        a.flags.writeable = False
        return a

    @cached_property
    def neighbors(self) -> tuple[frozenset, ...]:
        nb = [set() for _ in range(self.node_count)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(frozenset(s) for s in nb)

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def edge_indicator(self) -> np.ndarray:
        """0/1 vector over the C(N,2) unordered dyads in upper-triangle order."""
        iu = np.triu_indices(self.node_count, 1)
        return self.adjacency[iu]

    def is_connected(self) -> bool:
        if self.node_count == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.node_count

    def label_of(self, i: int) -> str:
        return str(self.labels[i]) if self.labels is not None else str(i)


@dataclass(frozen=True)
class GraphStats:
    size: int
    density: float
    transitivity: float
    n_maximal_cliques: int


def density(g: UndirectedGraph) -> float:
    n = g.node_count
    if n < 2:
        return 0.0
    return g.n_edges / (n * (n - 1) / 2)


def transitivity(g: UndirectedGraph) -> float:
    """Global clustering: 3 * triangles / connected triples (0 if no triples)."""
    a = g.adjacency.astype(np.int64)
    deg = a.sum(axis=1)
    triples = int((deg * (deg - 1) // 2).sum())
    if triples == 0:
        return 0.0
    # trace(A^3) counts each triangle 6 times
    closed = int(np.einsum("ij,ji->", a @ a, a))
    return (closed // 2) / triples


def maximal_cliques(g: UndirectedGraph) -> list[tuple[int, ...]]:
    """All maximal cliques, each a sorted tuple, in lexicographic order.

    Bron-Kerbosch with Tomita pivoting over integer bitsets, with the outer
    level run in degeneracy order. Isolated nodes are reported as 1-cliques.
    """
    n = g.node_count
    nbr = [0] * n
    for u, v in g.edges:
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u

    out: list[tuple[int, ...]] = []

    def members(bits: int) -> list[int]:
        res = []
        while bits:
            low = bits & -bits
            res.append(low.bit_length() - 1)
            bits ^= low
        return res

    def expand(r: list[int], p: int, x: int) -> None:
        if not p and not x:
            out.append(tuple(sorted(r)))
            return
        # pivot maximizing |P & N(u)| over P | X
        best, best_cnt = -1, -1
        for u in members(p | x):
            c = (p & nbr[u]).bit_count()
            if c > best_cnt:
                best, best_cnt = u, c
        for v in members(p & ~nbr[best]):
            r.append(v)
            expand(r, p & nbr[v], x & nbr[v])
            r.pop()
            p &= ~(1 << v)
            x |= 1 << v

    p_all = (1 << n) - 1
    x = 0
    for v in _degeneracy_order(g):
        bit = 1 << v
        expand([v], p_all & nbr[v], x & nbr[v])
        p_all &= ~bit
        x |= bit
    out.sort()
    return out


def _degeneracy_order(g: UndirectedGraph) -> list[int]:
    deg = {v: len(g.neighbors[v]) for v in range(g.node_count)}
    removed = set()
    order = []
    for _ in range(g.node_count):
        v = min((d, u) for u, d in deg.items() if u not in removed)[1]
        order.append(v)
        removed.add(v)
        for w in g.neighbors[v]:
            if w not in removed:
                deg[w] -= 1
        del deg[v]
    return order


def graph_stats(g: UndirectedGraph, cliques: Sequence | None = None) -> GraphStats:
    if cliques is None:
        cliques = maximal_cliques(g)
    return GraphStats(g.node_count, density(g), transitivity(g), len(cliques))


def load_edge_list(text: str) -> UndirectedGraph:
    """Parse the whitespace edge-list format.

    One edge per line as two node labels; ``#`` starts a comment line. A line
    holding a single label declares a node without edges (used to keep
    isolated nodes on round trips). Labels map to indices in order of first
    appearance; duplicate edges collapse.
    """
    index: dict[str, int] = {}
    edges = set()

    def idx(tok: str) -> int:
        if tok not in index:
            index[tok] = len(index)
        return index[tok]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) == 1:
            idx(toks[0])
            continue
        if len(toks) != 2:
            raise GraphError(f"line {lineno}: expected 1 or 2 node labels, got {len(toks)}")
        if toks[0] == toks[1]:
            raise GraphError(f"line {lineno}: self-loop on node {toks[0]!r}")
        edges.add((idx(toks[0]), idx(toks[1])))
    labels = tuple(index)
    return UndirectedGraph.from_edges(len(labels), edges, labels)


def save_edge_list(g: UndirectedGraph) -> str:
    lines = [f"{g.label_of(u)} {g.label_of(v)}" for u, v in sorted(g.edges)]
    touched = {u for e in g.edges for u in e}
    lines += [g.label_of(v) for v in range(g.node_count) if v not in touched]
    return "\n".join(lines) + ("\n" if lines else "")
