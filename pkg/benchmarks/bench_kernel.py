#!/usr/bin/env python3
"""Benchmark the compiled walk kernel against the pure-Python fallback.

Runs the same seeded continuous-time walk workload (the Las Vegas toy
machine's graph) on both backends and reports jump-event throughput.

Usage: python benchmarks/bench_kernel.py [--duration 2000] [--trials 20]
"""

import argparse
import time

import numpy as np

from browniansim import _pykernel
from browniansim.builder import lv_from_tm
from browniansim.dynamics import Embedding, simulate_ct
from browniansim.toys import OR_2BIT
from browniansim.turing import parse_tm

try:
    from browniansim import _ctkernel
except ImportError:
    _ctkernel = None


def count_events(emb, duration, seed):
    return len(simulate_ct(emb, 0, duration, seed).events) - 1


def bench(kernel_mod, indptr, indices, rates, duration, trials):
    t0 = time.perf_counter()
    kernel_mod.ct_end_nodes(indptr, indices, rates, 0, duration, trials, 12345)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--duration", type=float, default=2000.0)
    parser.add_argument("--trials", type=int, default=200)
    args = parser.parse_args()

    graph = lv_from_tm(parse_tm(OR_2BIT), 2)
    emb = Embedding.adiabatic(graph)
    indptr, indices, rates = emb.csr_rates()

    # estimate events per trial from one recorded trajectory
    events_per_trial = count_events(emb, args.duration, seed=12345)
    total_events = events_per_trial * args.trials
    print(f"graph: {graph.n} nodes, {graph.n_edges} edges; "
          f"~{events_per_trial} events/trial x {args.trials} trials")

    results = {}
    py_trials = max(1, args.trials // 10)
    py_time = bench(_pykernel, indptr, indices, rates, args.duration, py_trials)
    results["python"] = events_per_trial * py_trials / py_time
    print(f"python : {results['python'] / 1e6:8.2f} M events/s "
          f"({py_time:.2f}s for {py_trials} trials)")

    if _ctkernel is not None:
        ct_time = bench(_ctkernel, indptr, indices, rates, args.duration,
                        args.trials)
        results["cython"] = total_events / ct_time
        print(f"cython : {results['cython'] / 1e6:8.2f} M events/s "
              f"({ct_time:.2f}s for {args.trials} trials)")
        print(f"speedup: {results['cython'] / results['python']:.1f}x")
        a = _ctkernel.ct_end_nodes(indptr, indices, rates, 0, 100.0, 50, 7)
        b = _pykernel.ct_end_nodes(indptr, indices, rates, 0, 100.0, 50, 7)
        print(f"bit-identical walks: {np.array_equal(a, b)}")
    else:
        print("cython : not built")


if __name__ == "__main__":
    main()
