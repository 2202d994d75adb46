"""Measurement protocol and efficiency calibration tests."""

import numpy as np
import pytest

from browniansim.builder import lv_from_tm, mc_from_tm
from browniansim.dynamics import Embedding, layer_propagator
from browniansim.observer import (
    LVAcceptor,
    MeasurementBudgetExhausted,
    ProtocolParams,
    Unachievable,
    calibrate_wait,
    estimate_lv_efficiency,
    exact_lv_efficiency,
    layer_metadata,
    lv_protocol,
    mc_protocol,
    stationary_holding_mass,
)
from browniansim.stats import tv_distance
from browniansim.toys import COPY_1BIT, OR_2BIT
from browniansim.turing import parse_tm


@pytest.fixture(scope="module")
def copy_graph():
    return lv_from_tm(parse_tm(COPY_1BIT), 1)


@pytest.fixture(scope="module")
def or2_graph():
    return lv_from_tm(parse_tm(OR_2BIT), 2)


# ---------------------------------------------------------------------------
# Acceptance rule
# ---------------------------------------------------------------------------

def feed_all(metas):
    acc = LVAcceptor()
    return [acc.feed(m) for m in metas]


def test_acceptor_waits_for_nonzero_then_flip():
    # spec example: (0, 0, +1) then (-1) accepts at the -1 reading
    assert feed_all([0, 0, 1, -1]) == [False, False, False, True]


def test_acceptor_never_accepts_constant():
    assert feed_all([1] * 10) == [False] * 10


def test_acceptor_alternates():
    acc = LVAcceptor()
    results = [acc.feed(m) for m in [0, -1, -1, 1, 1, -1, 0, 1]]
    assert results == [False, False, False, True, False, True, False, True]
    assert acc.m_prev == 1


def test_acceptor_attempt_counting():
    acc = LVAcceptor()
    for m in [0, 1]:  # initialization, not attempts
        acc.feed(m)
    attempts = []
    for m in [1, 0, -1, 1]:
        if acc.feed(m):
            attempts.append(acc.pop_attempts())
    assert attempts == [3, 1]


# ---------------------------------------------------------------------------
# Protocols
# ---------------------------------------------------------------------------

def test_lv_protocol_uniform_bit(copy_graph):
    wait = calibrate_wait(copy_graph, 0.25, seed=5, exact=True)
    params = ProtocolParams(wait=wait, max_measurements=20000)
    result = lv_protocol(Embedding.adiabatic(copy_graph), params, seed=9)
    values = [r.value for r in result.accepted]
    assert len(values) > 3000
    emp = {v: values.count(v) for v in set(values)}
    assert tv_distance(emp, {b"0": 0.5, b"1": 0.5}) < 0.02


def test_lv_protocol_alternation(copy_graph):
    params = ProtocolParams(wait=50.0, max_measurements=3000)
    result = lv_protocol(Embedding.adiabatic(copy_graph), params, seed=3)
    metas = [r.metadata_at_read for r in result.accepted]
    assert all(a == -b for a, b in zip(metas, metas[1:]))
    assert all(m != 0 for m in metas)


def test_lv_protocol_budget_error(copy_graph):
    params = ProtocolParams(wait=1.0, max_measurements=10)
    with pytest.raises(MeasurementBudgetExhausted):
        lv_protocol(Embedding.adiabatic(copy_graph), params, seed=1,
                    target_accepted=10**6)


def test_lv_protocol_measurement_log(copy_graph):
    params = ProtocolParams(wait=30.0, max_measurements=500)
    result = lv_protocol(Embedding.adiabatic(copy_graph), params, seed=2)
    assert len(result.measurements) == 500
    assert sum(m.accepted for m in result.measurements) == len(result.accepted)
    assert len(result.attempts) == len(result.accepted)


def test_mc_protocol_count_zero():
    graph = mc_from_tm(parse_tm(COPY_1BIT), 1)
    records = mc_protocol(Embedding.adiabatic(graph),
                          ProtocolParams(wait=10.0), 0, seed=1)
    assert records == []


def test_mc_protocol_every_measurement_records():
    graph = mc_from_tm(parse_tm(OR_2BIT), 2)
    params = ProtocolParams(wait=30.0, c=2.0)
    records = mc_protocol(Embedding.adiabatic(graph), params, 500, seed=4)
    assert len(records) == 500
    assert all(rec.value in (b"0", b"1") for rec in records)
    assert all(rec.metadata_at_read in (0, 1) for rec in records)


def test_mc_protocol_longer_wait_not_worse():
    graph = mc_from_tm(parse_tm(OR_2BIT), 2)
    target = {b"0": 0.25, b"1": 0.75}
    emb = Embedding.adiabatic(graph)
    wait = calibrate_wait(graph, 0.25, seed=6, exact=True)
    tvs = []
    for c in (1.0, 2.0):
        records = mc_protocol(emb, ProtocolParams(wait=wait, c=c), 8000, seed=8)
        values = [rec.value for rec in records]
        emp = {v: values.count(v) for v in set(values)}
        tvs.append(tv_distance(emp, target))
    assert tvs[1] <= tvs[0] + 0.02


# ---------------------------------------------------------------------------
# Efficiency
# ---------------------------------------------------------------------------

def test_stationary_mass_third(copy_graph):
    m_minus, m_plus = stationary_holding_mass(copy_graph)
    assert m_minus == pytest.approx(1 / 3, abs=1e-9)
    assert m_plus == pytest.approx(1 / 3, abs=1e-9)


def test_exact_efficiency_long_wait_reaches_stationary(copy_graph):
    p_minus, p_plus = exact_lv_efficiency(copy_graph, wait=100000.0)
    assert p_minus == pytest.approx(1 / 3, abs=1e-3)
    assert p_plus == pytest.approx(1 / 3, abs=1e-3)


def test_short_wait_keeps_start_region(copy_graph):
    # from a start inside the +1 region, a near-zero wait still reads +1
    lmeta = layer_metadata(copy_graph)
    P = layer_propagator(copy_graph.n_layers, 1e-6)
    plus_start = int(np.nonzero(lmeta == 1)[0][-1])
    assert P[plus_start, lmeta == 1].sum() > 0.999


def test_sampled_vs_exact_efficiency(copy_graph):
    wait = 30.0
    exact = exact_lv_efficiency(copy_graph, wait)
    sampled = estimate_lv_efficiency(copy_graph, wait, trials=4000, seed=12)
    assert sampled[0] == pytest.approx(exact[0], abs=0.03)
    assert sampled[1] == pytest.approx(exact[1], abs=0.03)


def test_calibrate_reaches_quarter(copy_graph):
    wait = calibrate_wait(copy_graph, 0.25, seed=5, exact=True)
    p_minus, p_plus = exact_lv_efficiency(copy_graph, wait)
    assert min(p_minus, p_plus) >= 0.25


def test_calibrate_unachievable(copy_graph):
    with pytest.raises(Unachievable):
        calibrate_wait(copy_graph, 0.99, seed=5, exact=True)


def test_trajectory_independent_of_schedule(copy_graph):
    # same seed, halved wait: every other reading matches (snapshot purity)
    from browniansim import kernel
    from browniansim.rng import derive_stream

    emb = Embedding.adiabatic(copy_graph)
    indptr, indices, rates = emb.csr_rates()
    coarse = kernel.CTWalker(indptr, indices, rates, 0, derive_stream(7, 0))
    fine = kernel.CTWalker(indptr, indices, rates, 0, derive_stream(7, 0))
    a = coarse.measure_seq(20.0, 40)
    b = fine.measure_seq(10.0, 80)
    assert np.array_equal(a, b[1::2])
