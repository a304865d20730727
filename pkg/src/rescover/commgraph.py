"""Undirected robot communication graphs: random generation (connected by
construction), diameter, and the clique partition used by the group-wise
baseline."""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np

from .environment import as_rng


class CommGraph:
    """Undirected simple graph on robot ids 0..n-1. Immutable after init."""

    def __init__(self, n: int, edges):
        if n < 1:
            raise ValueError("graph needs at least one node")
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) outside node range")
            norm.add((min(u, v), max(u, v)))
        self.n = n
        self.edges = frozenset(norm)
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in sorted(norm):
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(nb)) for nb in adj)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def __repr__(self) -> str:
        return f"CommGraph(n={self.n}, edges={len(self.edges)})"


def _decode_pruefer(seq: np.ndarray, n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[int(x)] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        x = int(x)
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((min(u, v), max(u, v)))
    return edges


def random_connected_graph(n: int, edge_probability: float, rng) -> CommGraph:
    """Uniform random spanning tree plus each remaining edge independently
    with probability ``edge_probability``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= edge_probability <= 1.0):
        raise ValueError("edge_probability must be in [0, 1]")
    rng = as_rng(rng)
    if n == 1:
        return CommGraph(1, [])
    if n == 2:
        tree = [(0, 1)]
    else:
        seq = rng.integers(0, n, size=n - 2)
        tree = _decode_pruefer(seq, n)
    edges = set(tree)
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < edge_probability:
                edges.add((u, v))
    return CommGraph(n, edges)


def _bfs_dist(g: CommGraph, src: int) -> list[int]:
    dist = [-1] * g.n
    dist[src] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def is_connected(g: CommGraph) -> bool:
    return all(d >= 0 for d in _bfs_dist(g, 0))


def diameter(g: CommGraph) -> int:
    """Exact diameter via all-pairs BFS. Raises on disconnected input."""
    best = 0
    for src in range(g.n):
        dist = _bfs_dist(g, src)
        if any(d < 0 for d in dist):
            raise ValueError("graph is not connected")
        best = max(best, max(dist))
    return best


def clique_partition(g: CommGraph) -> list[list[int]]:
    """Greedy partition into cliques: repeatedly grow a maximal clique from
    the lowest unassigned id, adding the lowest compatible id each step."""
    unassigned = set(range(g.n))
    groups = []
    while unassigned:
        seed = min(unassigned)
        clique = [seed]
        for u in sorted(unassigned - {seed}):
            if all(g.has_edge(u, w) for w in clique):
                clique.append(u)
        groups.append(sorted(clique))
        unassigned -= set(clique)
    return groups


def write_edge_list(g: CommGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{g.n}\n")
        for u, v in sorted(g.edges):
            fh.write(f"{u} {v}\n")


def read_edge_list(path) -> CommGraph:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty edge list: {path}")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        edges.append((int(u), int(v)))
    return CommGraph(n, edges)
