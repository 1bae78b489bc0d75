"""Undirected connected graphs on [0, n): adjacency, Laplacian, smoothness.

Vertices are 0-based.  Edges are unordered pairs stored as sorted tuples.
The Laplacian is the combinatorial one, L = diag(W 1) - W, applied edge-wise
so that large sparse graphs never require a dense matrix; dense W and L are
available for the certificate computations, which only ever see small n.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph must have at least one vertex")
        seen = set()
        norm = []
        for e in self.edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) outside vertex range")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if not self._connected():
            raise ValueError("graph must be connected")

    def _connected(self) -> bool:
        if self.n == 1:
            return True
        parent = list(range(self.n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            parent[find(i)] = find(j)
        root = find(0)
        return all(find(v) == root for v in range(self.n))

    @cached_property
    def _edge_arrays(self):
        ei = np.fromiter((e[0] for e in self.edges), dtype=np.int64, count=len(self.edges))
        ej = np.fromiter((e[1] for e in self.edges), dtype=np.int64, count=len(self.edges))
        return ei, ej

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        ei, ej = self._edge_arrays
        np.add.at(deg, ei, 1)
        np.add.at(deg, ej, 1)
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max())

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        ei, ej = self._edge_arrays
        W[ei, ej] = 1.0
        W[ej, ei] = 1.0
        return W

    def laplacian(self) -> np.ndarray:
        W = self.adjacency()
        return np.diag(W.sum(axis=1)) - W


def path_graph(n: int) -> GraphSpec:
    return GraphSpec(n=n, edges=tuple((i, i + 1) for i in range(n - 1)))


def grid_graph(d: int, m: int, radius: int = 1) -> GraphSpec:
    """Neighborhood graph on the m^d grid: vertices are lexicographic ranks,
    edges join multi-indices at Chebyshev distance <= radius.  Max degree is
    (2*radius + 1)^d - 1 away from the boundary."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    shape = (m,) * d
    n = m ** d
    coords = np.array(np.unravel_index(np.arange(n), shape)).T  # (n, d)
    edges = []
    for a in range(n):
        ca = coords[a]
        for b in range(a + 1, n):
            if np.max(np.abs(coords[b] - ca)) <= radius:
                edges.append((a, b))
    return GraphSpec(n=n, edges=tuple(edges))


def adjacency_apply(graph: GraphSpec, g: np.ndarray) -> np.ndarray:
    v = np.asarray(g)
    if v.shape != (graph.n,):
        raise ValueError(f"vector length {v.shape} does not match n = {graph.n}")
    ei, ej = graph._edge_arrays
    out = np.zeros(graph.n, dtype=v.dtype)
    np.add.at(out, ei, v[ej])
    np.add.at(out, ej, v[ei])
    return out


def laplacian_apply(graph: GraphSpec, g: np.ndarray) -> np.ndarray:
    """(L g)_i = sum over neighbors j of (g_i - g_j), computed edge-wise."""
    v = np.asarray(g)
    if v.shape != (graph.n,):
        raise ValueError(f"vector length {v.shape} does not match n = {graph.n}")
    return graph.degrees * v - adjacency_apply(graph, v)


def quadratic_form(graph: GraphSpec, g: np.ndarray) -> float:
    """g* L g as the edge sum of |g_i - g_j|^2 (always real)."""
    v = np.asarray(g)
    ei, ej = graph._edge_arrays
    return float(np.sum(np.abs(v[ei] - v[ej]) ** 2))


def edge_smoothness(h: np.ndarray, graph: GraphSpec) -> float:
    """Largest chordal gap max over edges of |h_i - h_j|, in [0, 2] for unit signals."""
    v = np.asarray(h)
    if v.shape != (graph.n,):
        raise ValueError(f"signal length {v.shape} does not match n = {graph.n}")
    ei, ej = graph._edge_arrays
    if len(graph.edges) == 0:
        return 0.0
    return float(np.max(np.abs(v[ei] - v[ej])))
