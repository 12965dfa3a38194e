"""Graph representation and the generator families used throughout.

Graphs are simple and undirected, nodes labeled 0..n-1, stored in a
canonical form (sorted adjacency tuples) so structural equality is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

__all__ = [
    "Graph",
    "make_cycle",
    "make_two_cycle",
    "make_cycle_plus_random",
    "make_exp_stabilization_graph",
    "make_exp_periodicity_graph",
    "double_graph",
    "graph_to_json",
    "graph_from_json",
    "graph_to_text",
    "graph_from_text",
]


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph in canonical adjacency-list form."""

    n: int
    adj: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise ValueError(f"need at least one node, got n={n}")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return Graph(n, tuple(tuple(sorted(s)) for s in nbrs))

    def validate(self) -> None:
        """Check simplicity, symmetry and canonical ordering; raise on violation."""
        if len(self.adj) != self.n:
            raise ValueError("adjacency length does not match n")
        for u, nb in enumerate(self.adj):
            if list(nb) != sorted(set(nb)):
                raise ValueError(f"adjacency of {u} not sorted/unique")
            for v in nb:
                if v == u:
                    raise ValueError(f"self-loop at {u}")
                if not (0 <= v < self.n):
                    raise ValueError(f"neighbor {v} out of range")
                if u not in self.adj[v]:
                    raise ValueError(f"asymmetric edge ({u},{v})")

    @property
    def m(self) -> int:
        return sum(len(nb) for nb in self.adj) // 2

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def edges(self) -> list[tuple[int, int]]:
        """Edges as (u, v) with u < v, sorted lexicographically."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.adj], dtype=np.int64)

    @cached_property
    def arcs(self) -> tuple[np.ndarray, np.ndarray]:
        """Directed arc arrays (src, dst), each undirected edge in both directions."""
        src = np.empty(2 * self.m, dtype=np.int64)
        dst = np.empty(2 * self.m, dtype=np.int64)
        k = 0
        for u, nb in enumerate(self.adj):
            for v in nb:
                src[k] = u
                dst[k] = v
                k += 1
        return src, dst

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Per-node neighborhood as an int bitmask (bit v set iff v is a neighbor)."""
        masks = []
        for nb in self.adj:
            m = 0
            for v in nb:
                m |= 1 << v
            masks.append(m)
        return tuple(masks)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = bytearray(self.n)
        stack = [0]
        seen[0] = 1
        count = 1
        while stack:
            u = stack.pop()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = 1
                    count += 1
                    stack.append(v)
        return count == self.n

    @cached_property
    def is_cycle(self) -> bool:
        """True iff this graph is a connected cycle (all degrees 2, n >= 3)."""
        return (
            self.n >= 3
            and all(len(nb) == 2 for nb in self.adj)
            and self.is_connected()
        )

    @cached_property
    def is_standard_cycle(self) -> bool:
        """True iff node i is adjacent to (i +/- 1) mod n, the labeling cycle ops assume."""
        if self.n < 3:
            return False
        return all(
            self.adj[i] == tuple(sorted({(i - 1) % self.n, (i + 1) % self.n}))
            for i in range(self.n)
        )


def make_cycle(n: int) -> Graph:
    """Cycle graph: node i adjacent to (i+1) mod n."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def make_two_cycle(n: int) -> Graph:
    """Cycle plus an edge between every pair of nodes at distance 2 (degree 4)."""
    if n < 5:
        raise ValueError(f"two-cycle needs n >= 5, got {n}")
    edges = [(i, (i + 1) % n) for i in range(n)]
    edges += [(i, (i + 2) % n) for i in range(n)]
    return Graph.from_edges(n, edges)


def make_cycle_plus_random(n: int, seed: int) -> Graph:
    """Cycle plus, for each node in index order, two random extra neighbors.

    The two endpoints are drawn without replacement from the node's current
    non-neighbors, so the result stays simple and is deterministic per seed.
    """
    if n < 8:
        raise ValueError(f"cycle-plus-random needs n >= 8, got {n}")
    rng = np.random.default_rng(seed)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        j = (i + 1) % n
        nbrs[i].add(j)
        nbrs[j].add(i)
    for v in range(n):
        candidates = [u for u in range(n) if u != v and u not in nbrs[v]]
        for _ in range(2):
            k = int(rng.integers(0, len(candidates)))
            u = candidates.pop(k)
            nbrs[v].add(u)
            nbrs[u].add(v)
    return Graph(n, tuple(tuple(sorted(s)) for s in nbrs))


def make_exp_stabilization_graph(n: int) -> tuple[Graph, dict]:
    """Two stars bridged by an independent set; RMM stabilizes exponentially slowly.

    Layout: hub v_b = 0 with kappa-1 leaves (1..kappa-1), hub v_w = kappa with
    n-2*kappa-1 leaves, and kappa independent nodes at the top of the index
    range, each adjacent to both hubs.  kappa = floor(n/3) - 1.

    Returns (graph, parts) where parts maps "S_b", "S_w", "I" to node lists and
    "v_b", "v_w" to the hub ids.
    """
    if n < 9:
        raise ValueError(f"construction needs n >= 9, got {n}")
    kappa = n // 3 - 1
    v_b = 0
    v_w = kappa
    s_b = list(range(0, kappa))
    s_w = list(range(kappa, n - kappa))
    ind = list(range(n - kappa, n))
    edges = [(v_b, leaf) for leaf in s_b[1:]]
    edges += [(v_w, leaf) for leaf in s_w[1:]]
    for u in ind:
        edges.append((u, v_b))
        edges.append((u, v_w))
    g = Graph.from_edges(n, edges)
    parts = {"S_b": s_b, "S_w": s_w, "I": ind, "v_b": v_b, "v_w": v_w, "kappa": kappa}
    return g, parts


def make_exp_periodicity_graph(n: int) -> tuple[Graph, dict]:
    """Path bridging a white-side 3-clique and a blue-side clique; RMM periodicity 2^kappa.

    kappa is the largest multiple of 4 strictly below n-6.  Layout: path nodes
    0..kappa-1, 3-clique at kappa..kappa+2 with attachment u_w = kappa, and an
    (n-3-kappa)-clique on the remaining nodes with attachment u_b = kappa+3.
    """
    if n < 11:
        raise ValueError(f"construction needs n >= 11, got {n}")
    kappa = ((n - 7) // 4) * 4
    if kappa < 4:
        raise ValueError(f"construction needs n >= 11, got {n}")
    path = list(range(kappa))
    c_w = list(range(kappa, kappa + 3))
    c_b = list(range(kappa + 3, n))
    u_w = c_w[0]
    u_b = c_b[0]
    edges = [(i, i + 1) for i in range(kappa - 1)]
    edges += [(a, b) for i, a in enumerate(c_w) for b in c_w[i + 1 :]]
    edges += [(a, b) for i, a in enumerate(c_b) for b in c_b[i + 1 :]]
    edges.append((path[0], u_w))
    edges.append((path[-1], u_b))
    g = Graph.from_edges(n, edges)
    parts = {"P": path, "C_w": c_w, "C_b": c_b, "u_w": u_w, "u_b": u_b, "kappa": kappa}
    return g, parts


def double_graph(g: Graph) -> Graph:
    """Two copies of g, with a cross edge {v, v+n} wherever deg(v) is even.

    Every degree of the result is odd, so majority updates never tie.
    """
    n = g.n
    edges = []
    for u, v in g.edges():
        edges.append((u, v))
        edges.append((u + n, v + n))
    for v in range(n):
        if g.degree(v) % 2 == 0:
            edges.append((v, v + n))
    return Graph.from_edges(2 * n, edges)


# --- serialization ---------------------------------------------------------


def graph_to_json(g: Graph) -> str:
    return json.dumps({"n": g.n, "edges": [[u, v] for u, v in g.edges()]})


def graph_from_json(text: str) -> Graph:
    obj = json.loads(text)
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise ValueError("graph JSON must be an object with 'n' and 'edges'")
    return Graph.from_edges(int(obj["n"]), [(int(u), int(v)) for u, v in obj["edges"]])


def graph_to_text(g: Graph) -> str:
    lines = [str(g.n)]
    lines += [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty graph text")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph.from_edges(n, edges)
