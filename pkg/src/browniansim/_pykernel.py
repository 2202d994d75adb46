"""Pure-Python random-walk kernels.

Reference implementation of the hot loops.  The compiled module
`browniansim._ctkernel` mirrors these routines operation-for-operation
(same RNG draws in the same order), so both backends produce identical
walks from identical seeds.  Graphs are CSR adjacency: `indptr[u]` ..
`indptr[u+1]` slices `indices` into the out-neighbors of `u`, and
`edge_rates` holds the per-directed-edge transition rate, aligned with
`indices`.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import GOLDEN, MASK64, derive_stream, mix64

BACKEND = "python"


def _next_u64(state: int) -> tuple[int, int]:
    state = (state + GOLDEN) & MASK64
    return state, mix64(state)


def _uniform(state: int) -> tuple[int, float]:
    state, x = _next_u64(state)
    return state, ((x >> 11) + 1) * 2.0**-53


def _as_list(arr, kind):
    return [kind(x) for x in arr]


def _pick_edge(indptr, indices, edge_rates, u: int, state: int) -> tuple[int, int]:
    """Choose an out-edge of u proportionally to its rate. Returns (state, v)."""
    lo, hi = indptr[u], indptr[u + 1]
    total = 0.0
    for e in range(lo, hi):
        total += edge_rates[e]
    state, unif = _uniform(state)
    target = unif * total
    acc = 0.0
    v = indices[hi - 1]
    for e in range(lo, hi):
        acc += edge_rates[e]
        if target <= acc:
            v = indices[e]
            break
    return state, v


def _exit_rate(indptr, edge_rates, u: int) -> float:
    lo, hi = indptr[u], indptr[u + 1]
    total = 0.0
    for e in range(lo, hi):
        total += edge_rates[e]
    return total


class CTWalker:
    """Continuous-time walker with persistent state.

    The trajectory is a pure function of (graph, start, stream seed); reads
    via `advance_to`/`measure_seq` never consume randomness, so measurement
    schedules do not perturb the walk.
    """

    def __init__(self, indptr, indices, edge_rates, start: int, stream_state: int):
        self.indptr = _as_list(indptr, int)
        self.indices = _as_list(indices, int)
        self.edge_rates = _as_list(edge_rates, float)
        self.node = int(start)
        self.state = stream_state & MASK64
        self.time = 0.0
        self.jumps = 0
        self.t_next = self._draw_next_jump()

    def _draw_next_jump(self) -> float:
        rate = _exit_rate(self.indptr, self.edge_rates, self.node)
        if rate <= 0.0:
            return math.inf
        self.state, unif = _uniform(self.state)
        return self.time - math.log(unif) / rate

    def advance_to(self, t: float) -> int:
        while self.t_next <= t:
            self.time = self.t_next
            self.state, self.node = _pick_edge(
                self.indptr, self.indices, self.edge_rates, self.node, self.state
            )
            self.jumps += 1
            self.t_next = self._draw_next_jump()
        return self.node

    def measure_seq(self, wait: float, count: int, t_origin: float | None = None):
        """Nodes occupied at times t_origin + wait, t_origin + 2*wait, ..."""
        t = self.time if t_origin is None else t_origin
        out = np.empty(count, dtype=np.int64)
        for i in range(count):
            t += wait
            out[i] = self.advance_to(t)
        return out


def ct_end_nodes(indptr, indices, edge_rates, start, duration, n_trials, master_seed):
    """End node of `n_trials` independent walks of length `duration`."""
    out = np.empty(n_trials, dtype=np.int64)
    for trial in range(n_trials):
        walker = CTWalker(indptr, indices, edge_rates, start, derive_stream(master_seed, trial))
        out[trial] = walker.advance_to(duration)
    return out


def ct_extremes(indptr, indices, edge_rates, start, duration, n_trials, master_seed):
    """Per-trial min and max node id visited within `duration`."""
    lo_out = np.empty(n_trials, dtype=np.int64)
    hi_out = np.empty(n_trials, dtype=np.int64)
    for trial in range(n_trials):
        walker = CTWalker(indptr, indices, edge_rates, start, derive_stream(master_seed, trial))
        lo = hi = start
        while walker.t_next <= duration:
            walker.advance_to(walker.t_next)
            lo = min(lo, walker.node)
            hi = max(hi, walker.node)
        lo_out[trial] = lo
        hi_out[trial] = hi
    return lo_out, hi_out


def first_passage_nodes(indptr, indices, start, is_target, n_trials, master_seed, max_steps):
    """Discrete uniform-neighbor walk until a target node is hit.

    Returns the hit node per trial, or -1 if max_steps was exhausted.
    """
    indptr = _as_list(indptr, int)
    indices = _as_list(indices, int)
    is_target = _as_list(is_target, bool)
    out = np.empty(n_trials, dtype=np.int64)
    for trial in range(n_trials):
        state = derive_stream(master_seed, trial)
        u = start
        result = -1
        for _ in range(max_steps):
            lo, hi = indptr[u], indptr[u + 1]
            deg = hi - lo
            state, x = _next_u64(state)
            u = indices[lo + ((x * deg) >> 64)]
            if is_target[u]:
                result = u
                break
        out[trial] = result
    return out


def discrete_end_nodes(indptr, indices, start, steps, laziness, n_trials, master_seed):
    """Lazy uniform-neighbor walk; with probability `laziness` a step stays put."""
    indptr = _as_list(indptr, int)
    indices = _as_list(indices, int)
    out = np.empty(n_trials, dtype=np.int64)
    for trial in range(n_trials):
        state = derive_stream(master_seed, trial)
        u = start
        for _ in range(steps):
            state, unif = _uniform(state)
            if unif <= laziness:
                continue
            lo, hi = indptr[u], indptr[u + 1]
            deg = hi - lo
            if deg == 0:
                continue
            state, x = _next_u64(state)
            u = indices[lo + ((x * deg) >> 64)]
        out[trial] = u
    return out
