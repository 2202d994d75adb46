"""Randomizer, chain, and sampler-graph construction tests."""

import numpy as np
import pytest

from browniansim.builder import (
    ChainSet,
    ChainTooLong,
    LayerMismatch,
    StructureError,
    add_holding,
    assemble_las_vegas,
    assemble_mc_submachine,
    bitstrings,
    build_randomizer,
    chains_from_tm,
    check_degree_regularity,
    couple_mc,
    lv_from_tm,
    mc_from_tm,
    mc_negate_holding,
    pad_chains,
    randomizer_exact_first_passage,
    randomizer_node,
    randomizer_uniformity_check,
)
from browniansim.machine import RegisterTriple, bfs_eccentricity, layer_decompose
from browniansim.stats import EmptySample, tv_distance
from browniansim.toys import OR_2BIT
from browniansim.turing import parse_tm


def trivial_chainset(r, length=1):
    chains = {b: [RegisterTriple(work=b.encode(), output=b.encode())
                  for _ in range(length)]
              for b in bitstrings(r)}
    return ChainSet(r, chains)


# ---------------------------------------------------------------------------
# Randomizer
# ---------------------------------------------------------------------------

def test_randomizer_r1_counts():
    g = build_randomizer(1)
    assert g.n == 8
    assert g.n_edges == 8


def test_randomizer_r2_counts():
    g = build_randomizer(2)
    assert g.n == 24
    assert g.n_edges == 32


def test_randomizer_left_column_degree():
    g = build_randomizer(1)
    for b in bitstrings(2):
        node = randomizer_node(1, 0, b)
        assert len(g.neighbors(node)) == 2


@pytest.mark.parametrize("r", [1, 2, 3])
def test_randomizer_exact_uniform(r):
    marginal = randomizer_exact_first_passage(r)
    uniform = {b: 1.0 / 2**r for b in bitstrings(r)}
    assert tv_distance(marginal, uniform) < 1e-10


def test_randomizer_exact_uniform_any_start():
    marginal = randomizer_exact_first_passage(2, start="101")
    uniform = {b: 1.0 / 4 for b in bitstrings(2)}
    assert tv_distance(marginal, uniform) < 1e-10


def test_randomizer_sampled_uniform():
    assert randomizer_uniformity_check(1, 50000, seed=11) < 0.02
    assert randomizer_uniformity_check(3, 100000, seed=12) < 0.02


def test_randomizer_zero_walks():
    with pytest.raises(EmptySample):
        randomizer_uniformity_check(1, 0, seed=1)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

def test_chains_from_or2():
    cs = chains_from_tm(parse_tm(OR_2BIT), 2)
    assert cs.length == 5
    assert {b: c[-1].output for b, c in cs.chains.items()} == {
        "00": b"0", "10": b"1", "01": b"1", "11": b"1"}


def test_pad_chains_noop():
    cs = trivial_chainset(1, length=4)
    assert pad_chains(cs, 4).length == 4


def test_pad_chains_extends_single():
    cs = pad_chains(trivial_chainset(1, length=1), 5)
    assert all(len(c) == 5 for c in cs.chains.values())
    for b, chain in cs.chains.items():
        assert all(reg.output == b.encode() for reg in chain)


def test_pad_chains_mixed_lengths():
    chains = {"0": [RegisterTriple()] * 2, "1": [RegisterTriple()] * 5}
    cs = ChainSet(1, chains)
    assert all(len(c) == 5 for c in pad_chains(cs, 5).chains.values())


def test_pad_chains_too_long():
    with pytest.raises(ChainTooLong):
        pad_chains(trivial_chainset(1, length=6), 5)


def test_add_holding_lengths():
    cs = pad_chains(trivial_chainset(1, 2), 3)
    held = add_holding(cs, 4)
    assert held.length == 7
    assert held.holding_start == 3


def test_add_holding_zero_identity():
    cs = pad_chains(trivial_chainset(1, 2), 3)
    held = add_holding(cs, 0)
    assert held.length == 3
    assert held.holding_start is None


# ---------------------------------------------------------------------------
# Las Vegas assembly
# ---------------------------------------------------------------------------

def lv_toy(r=1, T=1):
    cs = add_holding(pad_chains(trivial_chainset(r), T), 2 * T + r + 1)
    return assemble_las_vegas(build_randomizer(r), cs)


def test_lv_layer_count_formula():
    for r, T in ((1, 1), (1, 3), (2, 5)):
        g = lv_toy(r, T)
        assert g.n_layers == 6 * T + 3 * r + 3


def test_lv_constant_width():
    g = lv_toy(2, 4)
    assert set(g.layer_sizes().tolist()) == {2 ** 3}


def test_lv_degree_regularity():
    check_degree_regularity(lv_toy(2, 3), per_side=2)


def test_lv_layer_decomposes():
    g = lv_toy(1, 2)
    roots = np.nonzero(g.layer_of == 0)[0]
    layer_decompose(g, roots)


def test_lv_metadata_geography():
    g = lv_toy(1, 2)
    meta = g.metadata()
    layers = g.layer_of
    hold = 2 * 2 + 1 + 1  # 2T + r + 1
    for u in range(g.n):
        if meta[u] == -1:
            assert layers[u] < hold
        elif meta[u] == 1:
            assert layers[u] >= g.n_layers - hold
        else:
            assert hold <= layers[u] < g.n_layers - hold


def test_lv_diameter_golden():
    # the layer count equals 6T + 3r + 3, but the graph diameter is larger:
    # same-side chains with different seed bits connect only through the
    # randomizer, giving eccentricity 2(3T + r + 1) + 2r from an extreme node
    for r, T in ((1, 1), (2, 2)):
        g = lv_toy(r, T)
        extreme = int(np.nonzero(g.layer_of == 0)[0][0])
        assert bfs_eccentricity(g, extreme) == 2 * (3 * T + r + 1) + 2 * r


def test_lv_requires_holding():
    cs = pad_chains(trivial_chainset(1), 2)
    with pytest.raises(ValueError):
        assemble_las_vegas(build_randomizer(1), cs)


def test_lv_from_tm_or2():
    g = lv_from_tm(parse_tm(OR_2BIT), 2)
    assert g.n_layers == 6 * 5 + 3 * 2 + 3
    assert g.n == g.n_layers * 8


# ---------------------------------------------------------------------------
# Monte Carlo assembly
# ---------------------------------------------------------------------------

def mc_sub(r=1, T=2):
    cs = add_holding(pad_chains(trivial_chainset(r), T), T + r + 1)
    return assemble_mc_submachine(build_randomizer(r), cs)


def test_mc_layer_count():
    for r, T in ((1, 1), (1, 2), (2, 5)):
        assert mc_sub(r, T).n_layers == 2 * T + 2 * r + 2


def test_mc_rejects_t0():
    with pytest.raises(ChainTooLong):
        pad_chains(trivial_chainset(1, length=1), 0)


def test_mc_degree_regularity():
    check_degree_regularity(mc_sub(2, 3), per_side=2)


def test_mc_metadata_one_sided():
    g = mc_sub(1, 2)
    meta = g.metadata()
    assert set(meta.tolist()) == {0, 1}


def test_couple_metadata_pm1():
    sub = mc_sub(1, 2)
    mc = couple_mc(sub, mc_negate_holding(sub))
    assert set(int(r.metadata) for r in mc.registers) == {-1, 1}


def test_couple_layer_sum_invariant():
    sub = mc_sub(1, 2)
    mc = couple_mc(sub, mc_negate_holding(sub))
    L = sub.n_layers
    comp = np.array(mc.component_layers)
    assert np.all(comp.sum(axis=1) == L - 1)
    for u, v in mc.edges:
        assert comp[u].sum() == comp[v].sum()


def test_couple_node_count_formula():
    sub = mc_sub(1, 2)
    mc = couple_mc(sub, mc_negate_holding(sub))
    sizes = sub.layer_sizes()
    expected = sum(int(sizes[i]) * int(sizes[len(sizes) - 1 - i])
                   for i in range(len(sizes)))
    assert mc.n == expected


def test_couple_layer_mismatch():
    a = mc_sub(1, 2)
    b = mc_sub(1, 3)
    with pytest.raises(LayerMismatch):
        couple_mc(a, mc_negate_holding(b))


def test_couple_product_degree():
    sub = mc_sub(1, 2)
    mc = couple_mc(sub, mc_negate_holding(sub))
    check_degree_regularity(mc, per_side=4)


def test_mc_from_tm_or2():
    g = mc_from_tm(parse_tm(OR_2BIT), 2)
    assert set(int(r.metadata) for r in g.registers) == {-1, 1}
    assert all(pair[0] or pair[1] for pair in g.output_pairs)
