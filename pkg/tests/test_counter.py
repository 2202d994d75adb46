"""Counter machine: golden step counts from an independent oracle."""

import pytest

from browniansim.counter import (
    COUNTER_TEXT,
    CounterParams,
    build_counter,
    verify_counter,
)
from browniansim.turing import check_reversible, parse_tm, run, step_backward


def oracle_counter(k):
    """Independent brute-force simulation of the six rules (no TMSpec)."""
    tape = ["_"] + ["0"] * k + ["_"]
    head = k + 1
    state = "b"
    steps = 0
    increments = 0
    while True:
        if state == "b" and tape[head] == "_":
            increments += 1
        sym = tape[head]
        if state == "b":
            head -= 1
            state = "a"
        elif state == "a" and sym == "1":
            tape[head] = "0"
            state = "b"
        elif state == "a" and sym == "0":
            tape[head] = "1"
            state = "g"
        elif state == "x" and sym == "0":
            state = "g"
        elif state == "x" and sym == "_":
            state = "b"
        elif state == "g":
            head += 1
            state = "x"
        else:
            return increments, steps
        steps += 1


# frozen from oracle_counter before the main build
GOLDEN_STEPS = {1: 7, 2: 21, 3: 51, 4: 113, 8: 2025}


def test_oracle_matches_frozen_goldens():
    for k, steps in GOLDEN_STEPS.items():
        inc, total = oracle_counter(k)
        assert inc == 2**k
        assert total == steps


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7, 8])
def test_increments_are_exactly_2k(k):
    report = verify_counter(CounterParams(k))
    assert report.increments == 2**k
    assert report.halt_state == "a"
    assert report.halt_head == 0
    assert set(report.halt_tape) == {"0", "_"}


@pytest.mark.parametrize("k", GOLDEN_STEPS)
def test_total_steps_match_oracle(k):
    assert verify_counter(CounterParams(k)).total_steps == GOLDEN_STEPS[k]


def test_build_counter_shape():
    spec, config = build_counter(CounterParams(3))
    assert config.tapes == ("_000_",)
    assert config.heads == (4,)
    assert config.state == "b"
    assert len(spec.rules) == 6


def test_counter_text_matches_builder():
    spec, _ = build_counter(CounterParams(1))
    assert parse_tm(COUNTER_TEXT) == spec


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6, 7, 8])
def test_reversible_all_k(k):
    spec, _ = build_counter(CounterParams(k))
    assert check_reversible(spec).ok()


def test_linear_time_ratio():
    # amortized-linear: steps/2^k at k=8 within 25% of the k=4 ratio
    r4 = verify_counter(CounterParams(4)).total_steps / 2**4
    r8 = verify_counter(CounterParams(8)).total_steps / 2**8
    assert abs(r8 - r4) / r4 < 0.25


def test_backward_recovers_initial():
    spec, config = build_counter(CounterParams(2))
    trace, status = run(spec, config, 1000)
    assert status == "halted"
    current = trace[-1]
    for expected in reversed(trace[:-1]):
        current = step_backward(spec, current)
        assert current == expected


def test_k_must_be_positive():
    with pytest.raises(ValueError):
        CounterParams(0)
