"""Observer measurement protocols and efficiency estimation.

The Las Vegas observer samples the machine's metadata every `wait` time
units.  Once a nonzero metadata value has been seen, a measurement is
accepted exactly when its metadata is the negation of the last accepted
one; accepted outputs are then independent draws from the target
distribution.  The Monte Carlo observer records every measurement, using
the single metadata bit to select which half of the output register holds
the current sample.

Measurements are zero-duration reads: the underlying trajectory is a pure
function of the seed and is never perturbed by observation, so the same
seed replayed with a different schedule walks the same path.

Efficiency estimation exploits the layer symmetry of the constructions:
metadata is constant on layers and the layer index of the walk is itself a
Markov chain on a path, so worst-case-over-starts probabilities can be
computed on the projected chain (sampled, or exactly via the master
equation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .builder import LVGraph, MCGraph
from .dynamics import Embedding, layer_chain_csr, layer_propagator
from .machine import LayeredGraph
from .rng import derive_stream


class MeasurementBudgetExhausted(Exception):
    pass


class Unachievable(Exception):
    pass


@dataclass
class ProtocolParams:
    wait: float
    max_measurements: int = 1_000_000
    c: float = 1.0
    delta: float = 0.75
    epsilon: float = 0.5

    def __post_init__(self):
        if self.wait <= 0:
            raise ValueError("wait must be positive")


@dataclass(frozen=True)
class SampleRecord:
    value: bytes
    metadata_at_read: int
    measurement_index: int
    sim_time: float


@dataclass
class Measurement:
    index: int
    sim_time: float
    metadata: int
    value: bytes
    accepted: bool


@dataclass
class LVResult:
    accepted: list[SampleRecord]
    measurements: list[Measurement]
    attempts: list[int] = field(default_factory=list)
    jump_events: int = 0


_CHUNK = 8192


class LVAcceptor:
    """Pure Las Vegas acceptance rule over a metadata reading stream.

    Readings are rejected until the first nonzero metadata value; afterwards
    a reading is accepted exactly when it is the negation of the remembered
    value, which then flips.  `attempts` counts readings since the last
    acceptance (the initialization phase is not counted as attempts).
    """

    def __init__(self):
        self.m_prev = 0
        self.since_accept = 0

    def feed(self, m: int) -> bool:
        if self.m_prev == 0:
            if m != 0:
                self.m_prev = m
            return False
        self.since_accept += 1
        if m == -self.m_prev:
            self.m_prev = m
            return True
        return False

    def pop_attempts(self) -> int:
        count = self.since_accept
        self.since_accept = 0
        return count


def lv_protocol(embedding: Embedding, params: ProtocolParams, seed: int,
                start: int = 0, target_accepted: int | None = None) -> LVResult:
    """Run the Las Vegas measurement procedure.

    Measures every `params.wait` until the budget is spent or
    `target_accepted` samples were accepted; raises
    MeasurementBudgetExhausted if a target was set but not reached.
    """
    graph = embedding.graph
    if not isinstance(graph, LVGraph):
        raise TypeError("lv_protocol needs an LVGraph measurement map")
    meta = graph.metadata()
    indptr, indices, rates = embedding.csr_rates()
    walker = kernel.CTWalker(indptr, indices, rates, start, derive_stream(seed, 0))
    result = LVResult([], [])
    acceptor = LVAcceptor()
    done = 0
    t = 0.0
    while done < params.max_measurements:
        batch = min(_CHUNK, params.max_measurements - done)
        nodes = walker.measure_seq(params.wait, batch, t_origin=t)
        for offset in range(batch):
            node = int(nodes[offset])
            idx = done + offset
            sim_time = t + (offset + 1) * params.wait
            m = int(meta[node])
            value = graph.registers[node].output
            accepted = acceptor.feed(m)
            result.measurements.append(Measurement(idx, sim_time, m, value, accepted))
            if accepted:
                result.accepted.append(SampleRecord(value, m, idx, sim_time))
                result.attempts.append(acceptor.pop_attempts())
                if target_accepted is not None and len(result.accepted) >= target_accepted:
                    result.jump_events = int(walker.jumps)
                    return result
        done += batch
        t += batch * params.wait
    result.jump_events = int(walker.jumps)
    if target_accepted is not None and len(result.accepted) < target_accepted:
        raise MeasurementBudgetExhausted(
            f"{len(result.accepted)} accepted samples after "
            f"{params.max_measurements} measurements")
    return result


def mc_protocol(embedding: Embedding, params: ProtocolParams, count: int,
                seed: int, start: int = 0,
                stats_out: dict | None = None) -> list[SampleRecord]:
    """Run the Monte Carlo measurement procedure: every measurement records.

    Waits `params.c * params.wait` between measurements.  The metadata bit
    selects the output slot: -1 (recorded as 0) reads the minus machine's
    output, +1 (recorded as 1) the plus machine's.  `stats_out`, when given,
    receives the walk's jump-event count.
    """
    graph = embedding.graph
    if not isinstance(graph, MCGraph):
        raise TypeError("mc_protocol needs an MCGraph measurement map")
    meta = graph.metadata()
    indptr, indices, rates = embedding.csr_rates()
    walker = kernel.CTWalker(indptr, indices, rates, start, derive_stream(seed, 0))
    gap = params.c * params.wait
    records = []
    done = 0
    t = 0.0
    while done < count:
        batch = min(_CHUNK, count - done)
        nodes = walker.measure_seq(gap, batch, t_origin=t)
        for offset in range(batch):
            node = int(nodes[offset])
            m = int(meta[node])
            o_plus, o_minus = graph.output_pairs[node]
            value = o_plus if m == 1 else o_minus
            records.append(SampleRecord(
                value, 1 if m == 1 else 0, done + offset, t + (offset + 1) * gap))
        done += batch
        t += batch * gap
    if stats_out is not None:
        stats_out["jump_events"] = int(walker.jumps)
    return records


# ---------------------------------------------------------------------------
# Efficiency estimation and wait calibration
# ---------------------------------------------------------------------------

def layer_metadata(graph: LayeredGraph) -> np.ndarray:
    """Per-layer metadata; requires metadata constant on every layer."""
    meta = graph.metadata()
    out = np.zeros(graph.n_layers, dtype=np.int8)
    for layer, nodes in enumerate(graph.layers()):
        values = set(int(meta[u]) for u in nodes)
        if len(values) != 1:
            raise ValueError(f"layer {layer} mixes metadata values {values}")
        out[layer] = values.pop()
    return out


def estimate_lv_efficiency(graph: LayeredGraph, wait: float, trials: int, seed: int,
                           k_rate: float = 1.0) -> tuple[float, float]:
    """Worst-case-over-starts probabilities of reading -1 and +1 after `wait`.

    Simulates the layer-projected walk from every starting layer.
    """
    lmeta = layer_metadata(graph)
    n_layers = graph.n_layers
    indptr, indices, rates = layer_chain_csr(n_layers, k_rate)
    p_minus = 1.0
    p_plus = 1.0
    for start in range(n_layers):
        ends = kernel.ct_end_nodes(indptr, indices, rates, start, wait, trials,
                                   derive_stream(seed, start))
        end_meta = lmeta[ends]
        p_minus = min(p_minus, float(np.mean(end_meta == -1)))
        p_plus = min(p_plus, float(np.mean(end_meta == 1)))
    return p_minus, p_plus


def exact_lv_efficiency(graph: LayeredGraph, wait: float,
                        k_rate: float = 1.0) -> tuple[float, float]:
    """Master-equation version of estimate_lv_efficiency on the layer chain."""
    lmeta = layer_metadata(graph)
    P = layer_propagator(graph.n_layers, wait, k_rate)
    p_minus = P[:, lmeta == -1].sum(axis=1).min()
    p_plus = P[:, lmeta == 1].sum(axis=1).min()
    return float(p_minus), float(p_plus)


def stationary_holding_mass(graph: LayeredGraph) -> tuple[float, float]:
    """Uniform-stationary mass of the -1 and +1 metadata regions."""
    meta = graph.metadata()
    return float(np.mean(meta == -1)), float(np.mean(meta == 1))


def calibrate_wait(graph: LayeredGraph, target_prob: float, seed: int,
                   trials: int = 2000, k_rate: float = 1.0, exact: bool = False,
                   wait0: float = 1.0, grid_factor: float = 2.0 ** 0.25,
                   max_waits: int = 200) -> float:
    """Smallest wait on a geometric grid with min(p-, p+) >= target_prob.

    Raises Unachievable when the target exceeds the stationary mass of
    either holding region (no wait can reach it).
    """
    mass_minus, mass_plus = stationary_holding_mass(graph)
    if target_prob >= min(mass_minus, mass_plus):
        raise Unachievable(
            f"target {target_prob} >= stationary holding mass "
            f"{min(mass_minus, mass_plus):.4f}")
    wait = wait0
    for step in range(max_waits):
        if exact:
            p_minus, p_plus = exact_lv_efficiency(graph, wait, k_rate)
        else:
            p_minus, p_plus = estimate_lv_efficiency(
                graph, wait, trials, derive_stream(seed, step), k_rate)
        if min(p_minus, p_plus) >= target_prob:
            return wait
        wait *= grid_factor
    raise Unachievable(f"target {target_prob} not reached within {max_waits} grid steps")
