"""Kinetic engine: Metropolis rates, Boltzmann equilibrium, and walks.

A physical embedding assigns each configuration a free energy dG and each
directed edge the Metropolis rate

    rate(A -> B) = k * exp(-(dG_B - dG_A)/kT)   if dG_A < dG_B
                 = k                            otherwise

When all dG are equal (the adiabatic case) every rate equals k and the walk
is unbiased with a uniform stationary distribution.  Continuous-time walks
use exact-jump simulation; small graphs can be cross-checked against the
dense master-equation solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import kernel
from .machine import Graph, LayeredGraph
from .rng import derive_stream

EXACT_SIZE_LIMIT = 2000


class SizeLimit(Exception):
    pass


def metropolis_rate(dG_A: float, dG_B: float, k_rate: float = 1.0, kT: float = 1.0) -> float:
    """Transition rate A -> B under Metropolis dynamics."""
    if kT <= 0:
        raise ValueError("kT must be positive")
    if dG_A < dG_B:
        return k_rate * math.exp(-(dG_B - dG_A) / kT)
    return k_rate


@dataclass
class Embedding:
    """Graph plus per-node free energies and rate constants."""

    graph: Graph
    dG: np.ndarray
    kT: float = 1.0
    k_rate: float = 1.0
    _rates: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.dG = np.asarray(self.dG, dtype=np.float64)
        if len(self.dG) != self.graph.n:
            raise ValueError("one dG per node required")
        if self.kT <= 0 or self.k_rate <= 0:
            raise ValueError("kT and k_rate must be positive")

    @classmethod
    def adiabatic(cls, graph: Graph, kT: float = 1.0, k_rate: float = 1.0) -> "Embedding":
        return cls(graph, np.zeros(graph.n), kT, k_rate)

    @property
    def is_adiabatic(self) -> bool:
        return bool(np.all(self.dG == self.dG[0])) if self.graph.n else True

    def csr_rates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR adjacency plus the per-directed-edge Metropolis rate."""
        indptr, indices = self.graph.csr()
        if self._rates is None:
            src = np.repeat(np.arange(self.graph.n), np.diff(indptr))
            diff = (self.dG[indices] - self.dG[src]) / self.kT
            self._rates = self.k_rate * np.exp(-np.maximum(diff, 0.0))
        return indptr, indices, self._rates


def boltzmann(e: Embedding) -> np.ndarray:
    """Equilibrium probability vector: exp(-dG/kT) normalized."""
    w = np.exp(-(e.dG - e.dG.min()) / e.kT)
    return w / w.sum()


@dataclass
class WalkTrace:
    """Seeded walk trajectory: ordered (time, node) events, first at t=0."""

    events: list[tuple[float, int]]
    seed: int

    @property
    def end_node(self) -> int:
        return self.events[-1][1]


def simulate_ct(e: Embedding, start: int, duration: float, seed: int,
                record_layers: np.ndarray | None = None) -> WalkTrace:
    """Exact-jump simulation for `duration` time units.

    Records every jump, or only layer crossings when `record_layers` maps
    nodes to layers.  The trajectory is a pure function of the seed; it
    equals trial 0 of the batch samplers under master seed `seed`.
    """
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    indptr, indices, rates = e.csr_rates()
    walker = kernel.CTWalker(indptr, indices, rates, start, derive_stream(seed, 0))
    events = [(0.0, int(start))]
    last_layer = None if record_layers is None else record_layers[start]
    while walker.t_next <= duration:
        t = walker.t_next
        node = int(walker.advance_to(t))
        if record_layers is None:
            events.append((t, node))
        elif record_layers[node] != last_layer:
            last_layer = record_layers[node]
            events.append((t, node))
    return WalkTrace(events, seed)


def occupancy_sample(e: Embedding, start: int, duration: float, trials: int,
                     seed: int) -> np.ndarray:
    """Empirical occupancy after `duration`, over independent seeded trials."""
    indptr, indices, rates = e.csr_rates()
    ends = kernel.ct_end_nodes(indptr, indices, rates, start, duration, trials, seed)
    return np.bincount(ends, minlength=e.graph.n) / trials


def simulate_discrete(graph: Graph, start: int, steps: int, seed: int,
                      laziness: float = 0.0) -> int:
    """Lazy uniform-neighbor walk; returns the end node."""
    if not 0.0 <= laziness < 1.0:
        raise ValueError("laziness must be in [0, 1)")
    indptr, indices = graph.csr()
    out = kernel.discrete_end_nodes(indptr, indices, start, steps, laziness, 1, seed)
    return int(out[0])


def discrete_sample(graph: Graph, start: int, steps: int, trials: int, seed: int,
                    laziness: float = 0.0) -> np.ndarray:
    indptr, indices = graph.csr()
    ends = kernel.discrete_end_nodes(indptr, indices, start, steps, laziness, trials, seed)
    return np.bincount(ends, minlength=graph.n) / trials


def generator_matrix(e: Embedding) -> np.ndarray:
    """Dense CTMC generator Q with Q[u, v] = rate(u -> v)."""
    n = e.graph.n
    if n > EXACT_SIZE_LIMIT:
        raise SizeLimit(f"{n} nodes exceeds the dense limit {EXACT_SIZE_LIMIT}")
    indptr, indices, rates = e.csr_rates()
    Q = np.zeros((n, n))
    for u in range(n):
        for eix in range(indptr[u], indptr[u + 1]):
            Q[u, indices[eix]] += rates[eix]
    np.fill_diagonal(Q, Q.diagonal() - Q.sum(axis=1))
    return Q


def exact_occupancy(e: Embedding, start: int, t: float) -> np.ndarray:
    """Master-equation solution p(t) from an indicator start distribution."""
    Q = generator_matrix(e)
    p0 = np.zeros(e.graph.n)
    p0[start] = 1.0
    return p0 @ expm(Q * t)


def detailed_balance_residual(e: Embedding) -> float:
    """max |p_A rate(A->B) - p_B rate(B->A)| at the Boltzmann distribution."""
    p = boltzmann(e)
    indptr, indices, rates = e.csr_rates()
    residual = 0.0
    for u in range(e.graph.n):
        for eix in range(indptr[u], indptr[u + 1]):
            v = indices[eix]
            back = None
            for fix in range(indptr[v], indptr[v + 1]):
                if indices[fix] == u:
                    back = rates[fix]
                    break
            residual = max(residual, abs(p[u] * rates[eix] - p[v] * back))
    return residual


# ---------------------------------------------------------------------------
# Layer-projected walks
# ---------------------------------------------------------------------------

def layer_chain_csr(n_layers: int, k_rate: float = 1.0):
    """CSR arrays of the path chain a 2-in/2-out layered walk projects to.

    Every node of such a graph has two edges into each adjacent layer, so the
    layer index is itself a Markov chain on a path with rate 2k per direction.
    """
    indptr = np.zeros(n_layers + 1, dtype=np.int64)
    indices = []
    for i in range(n_layers):
        nbrs = [j for j in (i - 1, i + 1) if 0 <= j < n_layers]
        indices.extend(nbrs)
        indptr[i + 1] = indptr[i] + len(nbrs)
    rates = np.full(len(indices), 2.0 * k_rate)
    return indptr, np.array(indices, dtype=np.int64), rates


def layer_propagator(n_layers: int, t: float, k_rate: float = 1.0) -> np.ndarray:
    """Transition matrix P(t) of the projected path chain; rows are starts."""
    indptr, indices, rates = layer_chain_csr(n_layers, k_rate)
    Q = np.zeros((n_layers, n_layers))
    for u in range(n_layers):
        for eix in range(indptr[u], indptr[u + 1]):
            Q[u, indices[eix]] += rates[eix]
    np.fill_diagonal(Q, Q.diagonal() - Q.sum(axis=1))
    return expm(Q * t)


def layer_occupancy_exact(n_layers: int, start_layer: int, t: float,
                          k_rate: float = 1.0) -> np.ndarray:
    """Exact layer distribution at time t for the projected path chain."""
    return layer_propagator(n_layers, t, k_rate)[start_layer]


def layer_hitting_profile(g: LayeredGraph, start_layer: int, duration: float,
                          trials: int, seed: int, k_rate: float = 1.0) -> np.ndarray:
    """P(layer visited within `duration`) per layer, from `start_layer`.

    Uses the exact layer projection of the adiabatic walk, so it requires the
    2-in/2-out internal degree regularity of the sampler constructions.
    """
    n_layers = g.n_layers
    indptr, indices, rates = layer_chain_csr(n_layers, k_rate)
    lo, hi = kernel.ct_extremes(indptr, indices, rates, start_layer, duration, trials, seed)
    profile = np.empty(n_layers)
    for layer in range(n_layers):
        if layer <= start_layer:
            profile[layer] = np.mean(lo <= layer)
        else:
            profile[layer] = np.mean(hi >= layer)
    return profile
