"""Thresholded link graphs, gebits, shell profiles and spanning trees.

A gebit is a connected component of the graph obtained by keeping only the
strong entries of a relational matrix.  Its geometry is summarized by shell
counts: the number of nodes at each breadth-first distance from a root.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .relational import check_antisymmetric

__all__ = [
    "ThresholdSpec",
    "LinkGraph",
    "Gebit",
    "ShellProfile",
    "SpanningTree",
    "extract_links",
    "connected_components",
    "shell_profile",
    "spanning_tree",
]


@dataclass(frozen=True)
class ThresholdSpec:
    """Edge selection rule: keep |B_ij| >= tau, or the top quantile of
    off-diagonal magnitudes (ties included)."""

    mode: str
    value: float

    def __post_init__(self) -> None:
        if self.mode == "absolute":
            if self.value < 0:
                raise ValueError("invalid threshold spec: absolute threshold must be >= 0")
        elif self.mode == "quantile":
            if not 0.0 < self.value <= 1.0:
                raise ValueError("invalid threshold spec: quantile must be in (0, 1]")
        else:
            raise ValueError(f"invalid threshold spec: unknown mode {self.mode!r}")

    @classmethod
    def absolute(cls, tau: float) -> "ThresholdSpec":
        return cls("absolute", float(tau))

    @classmethod
    def quantile(cls, q: float) -> "ThresholdSpec":
        return cls("quantile", float(q))


class LinkGraph:
    """Undirected simple graph on nodes 0..n-1, no self-loops.

    Edges are stored canonically as sorted (i, j) pairs with i < j, and
    adjacency lists are kept in ascending node order so traversals are
    deterministic.
    """

    __slots__ = ("n", "edges", "_adj")

    def __init__(self, n: int, edges=()):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be >= 0")
        canon = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range for n={n}")
            canon.add((a, b) if a < b else (b, a))
        self.n = n
        self.edges = tuple(sorted(canon))
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        self._adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._adj[i]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def restricted_to(self, nodes) -> "LinkGraph":
        keep = set(nodes)
        return LinkGraph(self.n, (e for e in self.edges if e[0] in keep and e[1] in keep))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinkGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"LinkGraph(n={self.n}, edges={len(self.edges)})"


@dataclass(frozen=True)
class Gebit:
    """A connected unit of linked nodes, with its induced subgraph."""

    nodes: tuple[int, ...]
    subgraph: LinkGraph

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("gebit must have at least one node")
        object.__setattr__(self, "nodes", tuple(sorted(int(v) for v in self.nodes)))

    @property
    def size(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class ShellProfile:
    """Shell counts D_1..D_L around a root, with D_0 = 1 implicit.

    total_n counts the root, so 1 + sum(shells) == total_n and every shell
    up to the depth L holds at least one node.
    """

    total_n: int
    shells: tuple[int, ...]

    def __post_init__(self) -> None:
        shells = tuple(int(v) for v in self.shells)
        object.__setattr__(self, "shells", shells)
        if len(shells) < 1:
            raise ValueError("profile must have depth >= 1")
        if any(v < 1 for v in shells):
            raise ValueError("every shell count must be >= 1")
        if 1 + sum(shells) != self.total_n:
            raise ValueError(
                f"shell counts sum to {sum(shells)} but total_n={self.total_n} requires {self.total_n - 1}"
            )

    @property
    def depth(self) -> int:
        return len(self.shells)


@dataclass(frozen=True)
class SpanningTree:
    """Breadth-first spanning tree: a root plus a child -> parent map."""

    root: int
    parent: dict[int, int] = field(default_factory=dict)

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted((min(c, p), max(c, p)) for c, p in self.parent.items()))

    def node_count(self) -> int:
        return 1 + len(self.parent)

    def depth_counts(self) -> tuple[int, ...]:
        """Number of nodes at each tree depth 1..L (mirrors shell counts)."""
        depth = {self.root: 0}

        def resolve(v: int) -> int:
            chain = []
            while v not in depth:
                chain.append(v)
                v = self.parent[v]
            base = depth[v]
            for u in reversed(chain):
                base += 1
                depth[u] = base
            return base

        for node in self.parent:
            resolve(node)
        max_depth = max(depth.values(), default=0)
        counts = [0] * max_depth
        for v, k in depth.items():
            if k:
                counts[k - 1] += 1
        return tuple(counts)


def extract_links(B, spec: ThresholdSpec) -> LinkGraph:
    """Keep the strong entries of an antisymmetric matrix as graph edges.

    Absolute mode keeps pairs with |B_ij| >= tau.  Quantile mode keeps the
    top q fraction of the off-diagonal magnitudes; ties with the cutoff value
    are all included, which makes the edge set monotone in q.
    """
    B = check_antisymmetric(B)
    n = B.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    mags = np.abs(B[rows, cols])
    if spec.mode == "absolute":
        keep = mags >= spec.value
    else:
        if mags.size == 0:
            keep = np.zeros(0, dtype=bool)
        else:
            m = math.ceil(spec.value * mags.size)
            cutoff = np.partition(mags, mags.size - m)[mags.size - m]
            keep = mags >= cutoff
    return LinkGraph(n, zip(rows[keep].tolist(), cols[keep].tolist()))


def connected_components(g: LinkGraph) -> list[Gebit]:
    """Partition all nodes into maximal connected components.

    Components are sorted by descending size, then by their smallest node id.
    """
    seen = [False] * g.n
    comps: list[tuple[int, ...]] = []
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = True
        nodes = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    nodes.append(v)
                    queue.append(v)
        comps.append(tuple(sorted(nodes)))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return [Gebit(nodes=c, subgraph=g.restricted_to(c)) for c in comps]


def _bfs_distances(gebit: Gebit, root: int) -> dict[int, int]:
    if root not in set(gebit.nodes):
        raise ValueError(f"root {root} is not a node of the gebit")
    dist = {root: 0}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in gebit.subgraph.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def shell_profile(gebit: Gebit, root: int) -> ShellProfile:
    """Count nodes at each breadth-first distance from the root."""
    dist = _bfs_distances(gebit, root)
    depth = max(dist.values())
    if depth == 0:
        raise ValueError("single-node gebit has no shells")
    shells = [0] * depth
    for k in dist.values():
        if k:
            shells[k - 1] += 1
    return ShellProfile(total_n=len(gebit.nodes), shells=tuple(shells))


def spanning_tree(gebit: Gebit, root: int) -> SpanningTree:
    """Breadth-first spanning tree with ascending-id neighbor order.

    Node counts at each tree depth coincide with the shell profile.
    """
    if root not in set(gebit.nodes):
        raise ValueError(f"root {root} is not a node of the gebit")
    parent: dict[int, int] = {}
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in gebit.subgraph.neighbors(u):
            if v not in seen:
                seen.add(v)
                parent[v] = u
                queue.append(v)
    return SpanningTree(root=root, parent=parent)
