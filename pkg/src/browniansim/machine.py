"""Abstract machine model and layered configuration graphs.

A general machine is a finite set of configurations with a successor map;
each configuration carries a (work, metadata, output) register triple.  The
undirected embedding of a machine connects every configuration to its
successors and predecessors; layered graphs partition the nodes so edges
only join consecutive layers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

VALID_METADATA = (-1, 0, 1)


class NotLayered(Exception):
    """An edge joins nodes whose BFS layers are not consecutive."""


@dataclass(frozen=True)
class RegisterTriple:
    work: bytes = b""
    metadata: int = 0
    output: bytes = b""

    def __post_init__(self):
        if self.metadata not in VALID_METADATA:
            raise ValueError(f"metadata must be in {VALID_METADATA}, got {self.metadata}")


@dataclass
class GeneralMachine:
    """Finite configuration space with a successor map.

    Node ids are dense integers 0..n-1; registers live in a side table.
    """

    successors: list[tuple[int, ...]]
    registers: list[RegisterTriple]

    def __post_init__(self):
        n = len(self.successors)
        if len(self.registers) != n:
            raise ValueError("successors and registers must have equal length")
        for u, succ in enumerate(self.successors):
            for v in succ:
                if not 0 <= v < n:
                    raise ValueError(f"successor {v} of node {u} out of range")

    @property
    def n(self) -> int:
        return len(self.successors)


def is_deterministic(m: GeneralMachine) -> bool:
    """True iff every configuration has at most one successor."""
    return all(len(s) <= 1 for s in m.successors)


def is_reversible(m: GeneralMachine) -> bool:
    """True iff deterministic and no two configurations share a successor."""
    if not is_deterministic(m):
        return False
    seen: set[int] = set()
    for succ in m.successors:
        for v in succ:
            if v in seen:
                return False
            seen.add(v)
    return True


def terminal_configs(m: GeneralMachine) -> set[int]:
    """Configurations with no successor."""
    return {u for u, succ in enumerate(m.successors) if not succ}


class Graph:
    """Undirected graph over dense integer nodes with register side tables.

    Edges are stored once in canonical (min, max) orientation.
    """

    def __init__(self, n: int, edges, registers: list[RegisterTriple] | None = None):
        self.n = int(n)
        canon = {(min(u, v), max(u, v)) for u, v in edges if u != v}
        self.edges = np.array(sorted(canon), dtype=np.int64).reshape(-1, 2)
        self.registers = registers if registers is not None else [RegisterTriple()] * self.n
        if len(self.registers) != self.n:
            raise ValueError("one register triple per node required")
        self._csr: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def metadata(self) -> np.ndarray:
        return np.array([r.metadata for r in self.registers], dtype=np.int8)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric CSR adjacency (each undirected edge in both directions)."""
        if self._csr is None:
            if len(self.edges):
                src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
                dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
                order = np.lexsort((dst, src))
                src, dst = src[order], dst[order]
            else:
                src = dst = np.empty(0, dtype=np.int64)
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst.astype(np.int64))
        return self._csr

    def degrees(self) -> np.ndarray:
        indptr, _ = self.csr()
        return np.diff(indptr)

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr()
        return indices[indptr[u]:indptr[u + 1]]


class LayeredGraph(Graph):
    """Graph plus a layer partition; every edge spans consecutive layers."""

    def __init__(self, n, edges, layer_of, registers=None, check: bool = True):
        super().__init__(n, edges, registers)
        self.layer_of = np.asarray(layer_of, dtype=np.int64)
        if len(self.layer_of) != self.n:
            raise ValueError("layer_of must assign every node")
        if check:
            diff = np.abs(self.layer_of[self.edges[:, 0]] - self.layer_of[self.edges[:, 1]])
            bad = np.nonzero(diff != 1)[0]
            if len(bad):
                u, v = self.edges[bad[0]]
                raise NotLayered(f"edge ({u},{v}) spans layers "
                                 f"{self.layer_of[u]} and {self.layer_of[v]}")

    @property
    def n_layers(self) -> int:
        return int(self.layer_of.max()) + 1 if self.n else 0

    def layers(self) -> list[np.ndarray]:
        return [np.nonzero(self.layer_of == i)[0] for i in range(self.n_layers)]

    def layer_sizes(self) -> np.ndarray:
        return np.bincount(self.layer_of, minlength=self.n_layers)


def embed(m: GeneralMachine) -> Graph:
    """Undirected configuration graph: {U,W} is an edge iff W ∈ f(U) or U ∈ f(W)."""
    edges = [(u, v) for u, succ in enumerate(m.successors) for v in succ]
    return Graph(m.n, edges, list(m.registers))


def layer_decompose(g: Graph, roots) -> LayeredGraph:
    """BFS layer assignment with `roots` as layer 0.

    Raises NotLayered if any edge joins same-layer or non-consecutive-layer
    nodes (equivalently: the graph has an odd cycle through the BFS tree),
    or if some node is unreachable from the roots.
    """
    layer = np.full(g.n, -1, dtype=np.int64)
    queue = deque()
    for r in roots:
        layer[r] = 0
        queue.append(int(r))
    indptr, indices = g.csr()
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if layer[v] < 0:
                layer[v] = layer[u] + 1
                queue.append(int(v))
    if (layer < 0).any():
        missing = int(np.nonzero(layer < 0)[0][0])
        raise NotLayered(f"node {missing} unreachable from roots")
    return LayeredGraph(g.n, g.edges, layer, g.registers, check=True)


def bfs_eccentricity(g: Graph, source: int) -> int:
    """Largest BFS distance from `source` (used to measure graph diameter)."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    indptr, indices = g.csr()
    while queue:
        u = queue.popleft()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(int(v))
    return int(dist.max())


def dump_graph(g: Graph, layer_of=None) -> str:
    """Line-oriented text dump: `node <id> <layer> <metadata>` then `edge <u> <v>`."""
    if layer_of is None:
        layer_of = g.layer_of if isinstance(g, LayeredGraph) else np.zeros(g.n, dtype=np.int64)
    meta = g.metadata()
    lines = [f"node {u} {layer_of[u]} {meta[u]}" for u in range(g.n)]
    lines += [f"edge {u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> LayeredGraph:
    """Parse the dump format back into a LayeredGraph (registers carry metadata only)."""
    nodes: dict[int, tuple[int, int]] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "node" and len(parts) == 4:
            nodes[int(parts[1])] = (int(parts[2]), int(parts[3]))
        elif parts[0] == "edge" and len(parts) == 3:
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    n = max(nodes) + 1 if nodes else 0
    if set(nodes) != set(range(n)):
        raise ValueError("node ids must be dense 0..n-1")
    layer_of = np.array([nodes[u][0] for u in range(n)], dtype=np.int64)
    registers = [RegisterTriple(metadata=nodes[u][1]) for u in range(n)]
    return LayeredGraph(n, edges, layer_of, registers, check=False)
