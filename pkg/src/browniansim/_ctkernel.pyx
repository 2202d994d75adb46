# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled random-walk kernels.

Mirrors `browniansim._pykernel` draw-for-draw: identical SplitMix64 streams
and identical floating-point operations, so walks agree bit-for-bit with the
pure-Python backend.
"""

from libc.math cimport INFINITY, log

import numpy as np

BACKEND = "cython"

ctypedef unsigned long long u64
ctypedef long long i64

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV2_53 = 1.0 / 9007199254740992.0


cdef inline u64 mix64(u64 z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 next_u64(u64* state) noexcept nogil:
    state[0] = state[0] + GOLDEN
    return mix64(state[0])


cdef inline double uniform01(u64* state) noexcept nogil:
    return ((next_u64(state) >> 11) + 1) * INV2_53


cdef inline u64 c_derive_stream(u64 master, u64 index) noexcept nogil:
    return mix64(master ^ mix64((index + 1) * GOLDEN))


cdef inline double exit_rate(i64[::1] indptr, double[::1] edge_rates, i64 u) noexcept nogil:
    cdef double total = 0.0
    cdef i64 e
    for e in range(indptr[u], indptr[u + 1]):
        total += edge_rates[e]
    return total


cdef inline i64 pick_edge(i64[::1] indptr, i64[::1] indices, double[::1] edge_rates,
                          i64 u, u64* state) noexcept nogil:
    cdef i64 lo = indptr[u]
    cdef i64 hi = indptr[u + 1]
    cdef double total = 0.0
    cdef i64 e
    for e in range(lo, hi):
        total += edge_rates[e]
    cdef double target = uniform01(state) * total
    cdef double acc = 0.0
    cdef i64 v = indices[hi - 1]
    for e in range(lo, hi):
        acc += edge_rates[e]
        if target <= acc:
            v = indices[e]
            break
    return v


cdef class CTWalker:
    """Continuous-time walker with persistent state (see _pykernel.CTWalker)."""

    cdef i64[::1] indptr
    cdef i64[::1] indices
    cdef double[::1] edge_rates
    cdef public i64 node
    cdef public double time
    cdef public double t_next
    cdef public i64 jumps
    cdef u64 _state

    def __init__(self, indptr, indices, edge_rates, start, stream_state):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.edge_rates = np.ascontiguousarray(edge_rates, dtype=np.float64)
        self.node = start
        self._state = stream_state
        self.time = 0.0
        self.jumps = 0
        self.t_next = self._draw_next_jump()

    @property
    def state(self):
        return self._state

    cdef double _draw_next_jump(self):
        cdef double rate = exit_rate(self.indptr, self.edge_rates, self.node)
        if rate <= 0.0:
            return INFINITY
        return self.time - log(uniform01(&self._state)) / rate

    cpdef i64 advance_to(self, double t):
        while self.t_next <= t:
            self.time = self.t_next
            self.node = pick_edge(self.indptr, self.indices, self.edge_rates,
                                  self.node, &self._state)
            self.jumps += 1
            self.t_next = self._draw_next_jump()
        return self.node

    def measure_seq(self, double wait, i64 count, t_origin=None):
        cdef double t = self.time if t_origin is None else <double>t_origin
        out = np.empty(count, dtype=np.int64)
        cdef i64[::1] view = out
        cdef i64 i
        for i in range(count):
            t += wait
            view[i] = self.advance_to(t)
        return out


def ct_end_nodes(indptr, indices, edge_rates, start, duration, n_trials, master_seed):
    cdef i64[::1] c_indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] c_indices = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] c_rates = np.ascontiguousarray(edge_rates, dtype=np.float64)
    cdef i64 c_start = start
    cdef double c_dur = duration
    cdef i64 n = n_trials
    cdef u64 seed = master_seed
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] view = out
    cdef i64 trial, u
    cdef u64 state
    cdef double t, t_next, rate
    with nogil:
        for trial in range(n):
            state = c_derive_stream(seed, <u64>trial)
            u = c_start
            t = 0.0
            rate = exit_rate(c_indptr, c_rates, u)
            t_next = INFINITY if rate <= 0.0 else t - log(uniform01(&state)) / rate
            while t_next <= c_dur:
                t = t_next
                u = pick_edge(c_indptr, c_indices, c_rates, u, &state)
                rate = exit_rate(c_indptr, c_rates, u)
                t_next = INFINITY if rate <= 0.0 else t - log(uniform01(&state)) / rate
            view[trial] = u
    return out


def ct_extremes(indptr, indices, edge_rates, start, duration, n_trials, master_seed):
    cdef i64[::1] c_indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] c_indices = np.ascontiguousarray(indices, dtype=np.int64)
    cdef double[::1] c_rates = np.ascontiguousarray(edge_rates, dtype=np.float64)
    cdef i64 c_start = start
    cdef double c_dur = duration
    cdef i64 n = n_trials
    cdef u64 seed = master_seed
    lo_out = np.empty(n, dtype=np.int64)
    hi_out = np.empty(n, dtype=np.int64)
    cdef i64[::1] lo_view = lo_out
    cdef i64[::1] hi_view = hi_out
    cdef i64 trial, u, lo, hi
    cdef u64 state
    cdef double t, t_next, rate
    with nogil:
        for trial in range(n):
            state = c_derive_stream(seed, <u64>trial)
            u = c_start
            lo = u
            hi = u
            t = 0.0
            rate = exit_rate(c_indptr, c_rates, u)
            t_next = INFINITY if rate <= 0.0 else t - log(uniform01(&state)) / rate
            while t_next <= c_dur:
                t = t_next
                u = pick_edge(c_indptr, c_indices, c_rates, u, &state)
                if u < lo:
                    lo = u
                if u > hi:
                    hi = u
                rate = exit_rate(c_indptr, c_rates, u)
                t_next = INFINITY if rate <= 0.0 else t - log(uniform01(&state)) / rate
            lo_view[trial] = lo
            hi_view[trial] = hi
    return lo_out, hi_out


def first_passage_nodes(indptr, indices, start, is_target, n_trials, master_seed, max_steps):
    cdef i64[::1] c_indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] c_indices = np.ascontiguousarray(indices, dtype=np.int64)
    cdef unsigned char[::1] c_target = np.ascontiguousarray(is_target, dtype=np.uint8)
    cdef i64 c_start = start
    cdef i64 n = n_trials
    cdef u64 seed = master_seed
    cdef i64 c_max = max_steps
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] view = out
    cdef i64 trial, u, step, lo, deg, result
    cdef u64 state, x
    with nogil:
        for trial in range(n):
            state = c_derive_stream(seed, <u64>trial)
            u = c_start
            result = -1
            for step in range(c_max):
                lo = c_indptr[u]
                deg = c_indptr[u + 1] - lo
                x = next_u64(&state)
                u = c_indices[lo + <i64>((<u128>x * <u128>deg) >> 64)]
                if c_target[u]:
                    result = u
                    break
            view[trial] = result
    return out


def discrete_end_nodes(indptr, indices, start, steps, laziness, n_trials, master_seed):
    cdef i64[::1] c_indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef i64[::1] c_indices = np.ascontiguousarray(indices, dtype=np.int64)
    cdef i64 c_start = start
    cdef i64 c_steps = steps
    cdef double c_lazy = laziness
    cdef i64 n = n_trials
    cdef u64 seed = master_seed
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] view = out
    cdef i64 trial, u, step, lo, deg
    cdef u64 state, x
    cdef double unif
    with nogil:
        for trial in range(n):
            state = c_derive_stream(seed, <u64>trial)
            u = c_start
            for step in range(c_steps):
                unif = uniform01(&state)
                if unif <= c_lazy:
                    continue
                lo = c_indptr[u]
                deg = c_indptr[u + 1] - lo
                if deg == 0:
                    continue
                x = next_u64(&state)
                u = c_indices[lo + <i64>((<u128>x * <u128>deg) >> 64)]
            view[trial] = u
    return out
