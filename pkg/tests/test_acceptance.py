"""Acceptance criteria, one test per criterion.

Each test prints a `[criterion N] PASS` line once all its assertions hold
(run with `pytest -s` to see them).  Tolerances are the ones stated in the
project brief; seeds are fixed so every run is reproducible.
"""

import math
import time

import numpy as np
import pytest

from browniansim import kernel
from browniansim.builder import (
    ChainSet,
    add_holding,
    assemble_las_vegas,
    bitstrings,
    build_randomizer,
    lv_from_tm,
    mc_from_tm,
    pad_chains,
    randomizer_exact_first_passage,
    randomizer_uniformity_check,
    check_degree_regularity,
)
from browniansim.counter import CounterParams, build_counter, verify_counter
from browniansim.dynamics import (
    Embedding,
    boltzmann,
    detailed_balance_residual,
    exact_occupancy,
    layer_chain_csr,
    occupancy_sample,
    simulate_ct,
)
from browniansim.machine import Graph, RegisterTriple, layer_decompose
from browniansim.observer import (
    ProtocolParams,
    calibrate_wait,
    estimate_lv_efficiency,
    exact_lv_efficiency,
    lv_protocol,
    mc_protocol,
)
from browniansim.stats import (
    chi2_critical,
    lag_independence,
    lag_independence_df,
    tv_distance,
    tv_distance_subset_oracle,
)
from browniansim.tmbuilder import (
    AugmentParams,
    assemble_lv_tm,
    assemble_mc_tm,
    augment_with_counters,
    lv_initial_config,
    m2_leftmost_config,
    reachable_graph,
)
from browniansim.toys import OR_2BIT, TRIVIAL_1BIT
from browniansim.turing import check_reversible, parse_tm

OR2_TARGET = {b"0": 0.25, b"1": 0.75}


def report(n, text):
    print(f"\n[criterion {n}] PASS: {text}")


# ---------------------------------------------------------------------------
# 1. Counter correctness
# ---------------------------------------------------------------------------

def test_criterion_1_counter():
    t0 = time.time()
    ratios = {}
    for k in range(1, 9):
        rep = verify_counter(CounterParams(k))
        assert rep.increments == 2**k
        assert rep.halt_state == "a" and rep.halt_head == 0
        spec, _ = build_counter(CounterParams(k))
        assert check_reversible(spec).ok()
        ratios[k] = rep.total_steps / 2**k
    assert abs(ratios[8] - ratios[4]) / ratios[4] < 0.25
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report(1, f"counter k=1..8 exact increments, reversible, "
              f"steps/2^k ratio drift {abs(ratios[8]-ratios[4])/ratios[4]:.3f} "
              f"< 25% ({elapsed:.2f}s)")


# ---------------------------------------------------------------------------
# 2. Randomizer uniformity
# ---------------------------------------------------------------------------

def test_criterion_2_randomizer():
    t0 = time.time()
    for r in (1, 2, 3):
        marginal = randomizer_exact_first_passage(r)
        uniform = {b: 1.0 / 2**r for b in bitstrings(r)}
        exact_tv = tv_distance(marginal, uniform)
        assert exact_tv < 1e-10
        sampled_tv = randomizer_uniformity_check(r, walks=100_000, seed=20 + r)
        assert sampled_tv < 0.02
    elapsed = time.time() - t0
    assert elapsed < 30.0
    report(2, f"first-passage first-r bits exactly uniform (r=1..3), "
              f"sampled TV < 0.02 at 1e5 walks ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 3. Las Vegas end-to-end
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def or2_lv_graph():
    return lv_from_tm(parse_tm(OR_2BIT), 2)  # T = 5 <= 20


def test_criterion_3_lv_end_to_end(or2_lv_graph):
    t0 = time.time()
    graph = or2_lv_graph
    wait = calibrate_wait(graph, 0.25, seed=303, exact=True)
    emb = Embedding.adiabatic(graph)

    # (a) >= 2e4 accepted samples within TV 0.02 of {0: 1/4, 1: 3/4}
    params = ProtocolParams(wait=wait, max_measurements=120_000)
    result = lv_protocol(emb, params, seed=304, target_accepted=20_000)
    values = [rec.value for rec in result.accepted]
    assert len(values) >= 20_000
    emp = {v: values.count(v) for v in set(values)}
    tv = tv_distance(emp, OR2_TARGET)
    assert tv < 0.02

    # (b) per-measurement efficiency at the calibrated wait
    p_minus, p_plus = exact_lv_efficiency(graph, wait)
    assert min(p_minus, p_plus) >= 0.25

    # (c) attempts-to-sample tail within the geometric bound
    attempts = np.array(result.attempts)
    for k in range(1, 11):
        assert np.mean(attempts > k) <= 0.75**k + 0.02

    # (d) lag-1 independence below the 1% critical value in >= 95% of runs
    passes = 0
    for i in range(20):
        sub = lv_protocol(emb, ProtocolParams(wait=wait, max_measurements=12_000),
                          seed=500 + i, target_accepted=2_000)
        vals = [rec.value for rec in sub.accepted]
        stat = lag_independence(vals)
        if stat < chi2_critical(lag_independence_df(vals), 0.01):
            passes += 1
    assert passes >= 19
    report(3, f"LV or2: tv={tv:.4f} (<0.02) over {len(values)} samples, "
              f"efficiency min={min(p_minus, p_plus):.3f} (>=1/4), geometric "
              f"tail ok to k=10, lag-1 independent in {passes}/20 runs "
              f"({time.time()-t0:.1f}s)")


# ---------------------------------------------------------------------------
# 4. Quadratic wait scaling
# ---------------------------------------------------------------------------

def synthetic_lv(T, r):
    chains = {b: [RegisterTriple(work=b.encode(), output=b.encode())]
              for b in bitstrings(r)}
    cs = add_holding(pad_chains(ChainSet(r, chains), T), 2 * T + r + 1)
    return assemble_las_vegas(build_randomizer(r), cs)


def test_criterion_4_quadratic_scaling():
    t0 = time.time()
    small = synthetic_lv(8, 2)
    large = synthetic_lv(16, 4)
    w_small = calibrate_wait(small, 0.25, seed=41, exact=True)
    w_large = calibrate_wait(large, 0.25, seed=42, exact=True)
    ratio = w_large / w_small
    assert 3.0 <= ratio <= 5.3
    # sampled cross-check of the exact efficiencies at the chosen waits
    sm = estimate_lv_efficiency(small, w_small, trials=2_000, seed=43)
    ex = exact_lv_efficiency(small, w_small)
    assert abs(min(sm) - min(ex)) < 0.05
    report(4, f"calibrated waits {w_small:.0f} -> {w_large:.0f}, "
              f"ratio {ratio:.2f} in [3.0, 5.3] ({time.time()-t0:.1f}s)")


# ---------------------------------------------------------------------------
# 5. Monte Carlo end-to-end
# ---------------------------------------------------------------------------

def test_criterion_5_mc_end_to_end():
    t0 = time.time()
    graph = mc_from_tm(parse_tm(OR_2BIT), 2)
    emb = Embedding.adiabatic(graph)

    # (c) exhaustive check: every configuration has exactly one holding half,
    # and the half selected by the metadata always carries a sample
    assert set(int(reg.metadata) for reg in graph.registers) == {-1, 1}
    for reg, (o_plus, o_minus) in zip(graph.registers, graph.output_pairs):
        assert (o_plus if reg.metadata == 1 else o_minus)
    # the product graph is one walk-connected component
    indptr, indices = graph.csr()
    seen = np.zeros(graph.n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in indices[indptr[u]:indptr[u + 1]]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    assert seen.all()

    # (a)+(b) every measurement records; TV nonincreasing in the wait
    wait = calibrate_wait(graph, 0.25, seed=51, exact=True)
    tvs = []
    for c in (2.0, 4.0):
        records = mc_protocol(emb, ProtocolParams(wait=wait, c=c), 20_000, seed=52)
        assert len(records) == 20_000
        assert all(rec.value for rec in records)
        values = [rec.value for rec in records]
        emp = {v: values.count(v) for v in set(values)}
        tvs.append(tv_distance(emp, OR2_TARGET))
    assert tvs[1] <= tvs[0] + 0.02
    assert tvs[1] < 0.05
    report(5, f"MC or2: 2x20000 records, TV {tvs[0]:.4f} -> {tvs[1]:.4f} "
              f"(nonincreasing, < 0.05), exactly-one-holding over all "
              f"{graph.n} configurations ({time.time()-t0:.1f}s)")


# ---------------------------------------------------------------------------
# 6. Kinetics oracle
# ---------------------------------------------------------------------------

def random_graph_embedding(n, seed):
    rng = np.random.default_rng(seed)
    edges = {(i, i + 1) for i in range(n - 1)}
    while len(edges) < 2 * n:
        u, v = rng.integers(n, size=2)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return Embedding(Graph(n, edges), rng.uniform(0.0, 2.0, n))


def test_criterion_6_kinetics_oracle():
    t0 = time.time()
    e = random_graph_embedding(200, seed=61)
    horizon = 8.0
    p_exact = exact_occupancy(e, 0, horizon)
    p_samp = occupancy_sample(e, 0, horizon, trials=100_000, seed=62)
    tv_mid = 0.5 * np.abs(p_exact - p_samp).sum()
    assert tv_mid < 0.02
    p_eq = exact_occupancy(e, 0, 5000.0)
    tv_eq = 0.5 * np.abs(p_eq - boltzmann(e)).sum()
    assert tv_eq < 0.02
    assert detailed_balance_residual(e) < 1e-10
    adia = Embedding.adiabatic(e.graph)
    p_adia = exact_occupancy(adia, 0, 5000.0)
    assert 0.5 * np.abs(p_adia - 1.0 / adia.graph.n).sum() < 1e-6
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report(6, f"200-node random embedding: sampled-vs-exact TV {tv_mid:.4f}, "
              f"equilibrium TV {tv_eq:.2e}, detailed balance "
              f"{detailed_balance_residual(e):.1e}, adiabatic uniform "
              f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 7. TM-level vs general-level structure
# ---------------------------------------------------------------------------

def test_criterion_7_tm_matches_general():
    t0 = time.time()
    widths = {}
    for name, text, T, r in (("trivial", TRIVIAL_1BIT, 1, 1),
                             ("or2", OR_2BIT, 4, 2)):
        M = parse_tm(text)
        asm = assemble_lv_tm(M, AugmentParams.lv(T, r))
        init = lv_initial_config(asm, "0" * r)
        graph, configs = reachable_graph(
            asm.spec, [init], metadata_fn=lambda c: asm.metadata_of(c.state))
        roots = [i for i, c in enumerate(configs)
                 if c.state.startswith("halt:") and "~" in c.state]
        lay = layer_decompose(graph, roots)
        check_degree_regularity(lay, per_side=2)
        chain_nodes = asm.aug.chain_steps + 1
        assert lay.n_layers == 2 * chain_nodes + 2 * r + 2
        assert set(lay.layer_sizes().tolist()) == {2 ** (r + 1)}
        # general construction: same constant width, shorter chains
        general = lv_from_tm(M, r)
        assert set(general.layer_sizes().tolist()) == {2 ** (r + 1)}
        abstract_chain = (general.n_layers - (r + 1)) // 2
        assert chain_nodes >= abstract_chain  # longer holding region
        widths[name] = 2 ** (r + 1)

        mc = assemble_mc_tm(M, AugmentParams.mc(T, r))
        g2, cfg2 = reachable_graph(mc.m2, [m2_leftmost_config(mc.aug, "0" * r)])
        lay2 = layer_decompose(g2, [i for i, c in enumerate(cfg2)
                                    if c.state.startswith("rb@")
                                    and c.heads[0] == 0])
        check_degree_regularity(lay2, per_side=2)
        layer_of = {cfg2[i]: int(lay2.layer_of[i]) for i in range(g2.n)}
        gp, cfgp = reachable_graph(mc.spec, [mc.initial_config("0" * r)])
        sums = np.array([sum(layer_of[half] for half in mc.split_config(c))
                         for c in cfgp])
        assert sums.min() == sums.max() == lay2.n_layers - 1
        for u, v in gp.edges:
            assert sums[u] == sums[v]
    elapsed = time.time() - t0
    assert elapsed < 60.0
    report(7, f"LV machine graphs layer-decompose with 2/2 regularity and "
              f"constant widths {widths}; MC coupled graphs conserve i+j "
              f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# 8. Structural invariants suite
# ---------------------------------------------------------------------------

def test_criterion_8_invariants():
    t0 = time.time()
    # tv_distance equals the exhaustive-subset oracle on domains <= 12
    rng = np.random.default_rng(81)
    for size in (2, 7, 12):
        support = [f"v{i}" for i in range(size)]
        for _ in range(15):
            p = {s: float(rng.uniform(0.01, 1.0)) for s in support}
            q = {s: float(rng.uniform(0.01, 1.0)) for s in support}
            assert abs(tv_distance(p, q) -
                       tv_distance_subset_oracle(p, q)) < 1e-12

    # walk reproducibility: identical seeds give identical traces
    e = random_graph_embedding(50, seed=82)
    assert simulate_ct(e, 0, 20.0, seed=83).events == \
        simulate_ct(e, 0, 20.0, seed=83).events

    # layer projection: the layer index of the full-graph walk matches the
    # path-chain walk in distribution (two-sample KS at 5%)
    graph = lv_from_tm(parse_tm(OR_2BIT), 2)
    horizon = 60.0
    trials = 20_000
    emb = Embedding.adiabatic(graph)
    start_node = int(np.nonzero(graph.layer_of == 0)[0][0])
    indptr, indices, rates = emb.csr_rates()
    ends = kernel.ct_end_nodes(indptr, indices, rates, start_node, horizon,
                               trials, 84)
    full_layers = graph.layer_of[ends]
    lp, li, lr = layer_chain_csr(graph.n_layers)
    chain_layers = kernel.ct_end_nodes(lp, li, lr, 0, horizon, trials, 85)
    grid = np.arange(graph.n_layers + 1)
    cdf_a = np.searchsorted(np.sort(full_layers), grid, side="right") / trials
    cdf_b = np.searchsorted(np.sort(chain_layers), grid, side="right") / trials
    ks = np.abs(cdf_a - cdf_b).max()
    ks_crit = 1.358 * math.sqrt(2.0 / trials)
    assert ks < ks_crit

    # detailed balance at machine scale (rate/Boltzmann consistency)
    for seed in (86, 87, 88):
        assert detailed_balance_residual(random_graph_embedding(40, seed)) < 1e-12

    report(8, f"subset-oracle TV equivalence (<=12 values), seeded-trace "
              f"reproducibility, layer-projection KS {ks:.4f} < "
              f"{ks_crit:.4f}, detailed balance to 1e-12; full property "
              f"suite in the module tests ({time.time()-t0:.1f}s)")
