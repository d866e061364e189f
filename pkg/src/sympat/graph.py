"""Undirected network topologies and their Laplacians."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np


class TopologyError(ValueError):
    """Raised when an edge list does not describe a valid connected graph."""


@dataclass(frozen=True)
class Topology:
    """Simple undirected graph on nodes ``0..node_count-1``.

    Edges are stored as sorted 0-based pairs ``(i, j)`` with ``i < j``.
    """

    node_count: int
    edges: tuple[tuple[int, int], ...]

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.node_count, self.node_count))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a

    def neighbors(self, i: int) -> list[int]:
        out = [j for a, j in self.edges if a == i]
        out += [a for a, j in self.edges if j == i]
        return sorted(out)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def edge_list_1based(self) -> list[list[int]]:
        return [[i + 1, j + 1] for i, j in self.edges]


def _normalise_edges(node_count: int, edge_list: Iterable, one_based: bool) -> tuple[tuple[int, int], ...]:
    offset = 1 if one_based else 0
    seen = set()
    for pair in edge_list:
        pair = tuple(pair)
        if len(pair) != 2:
            raise TopologyError(f"edge {pair!r} must have exactly two endpoints")
        i, j = (int(p) - offset for p in pair)
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise TopologyError(
                f"edge {pair!r} has an endpoint outside 1..{node_count}"
                if one_based else f"edge {pair!r} has an endpoint outside 0..{node_count - 1}"
            )
        if i == j:
            raise TopologyError(f"self-loop on node {pair[0]} is not allowed")
        seen.add((min(i, j), max(i, j)))
    return tuple(sorted(seen))


def build_topology(node_count: int, edge_list: Iterable, one_based: bool = True,
                   require_connected: bool = True) -> Topology:
    """Validate an edge list and return a :class:`Topology`.

    Edge labels are 1-based by default, as in scenario files. Duplicate
    edges (in either orientation) are merged.
    """
    if int(node_count) != node_count or node_count < 1:
        raise TopologyError(f"node_count must be a positive integer, got {node_count!r}")
    node_count = int(node_count)
    topo = Topology(node_count, _normalise_edges(node_count, edge_list, one_based))
    if require_connected and not is_connected(topo):
        unreached = sorted(set(range(node_count)) - _reachable(topo))
        raise TopologyError(
            "graph is disconnected; nodes not reachable from node 1: "
            + ", ".join(str(u + 1) for u in unreached)
        )
    return topo


def _reachable(t: Topology) -> set[int]:
    adj: dict[int, list[int]] = {i: [] for i in range(t.node_count)}
    for i, j in t.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def is_connected(t: Topology) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    return len(_reachable(t)) == t.node_count


def laplacian(t: Topology) -> np.ndarray:
    """Graph Laplacian ``diag(degree) - adjacency``."""
    a = t.adjacency()
    return np.diag(a.sum(axis=1)) - a


def algebraic_connectivity(t: Topology) -> float:
    """Second-smallest Laplacian eigenvalue (0 for a single node)."""
    if t.node_count == 1:
        return 0.0
    return float(np.linalg.eigvalsh(laplacian(t))[1])
