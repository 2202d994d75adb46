"""Reversible binary up-counter machine.

Single tape holding k zero bits (least significant bit on the right), head
starting on the blank to the right of them, start state `b`.  The machine
increments the tape value 2^k times and halts in state `a` reading the left
blank with all bits back to zero.  An increment attempt begins whenever the
machine sits in state `b` on a blank cell, so counting those configurations
(including the initial one) counts increments.
"""

from __future__ import annotations

from dataclasses import dataclass

from .turing import MoveRule, TMConfiguration, TMSpec, WriteRule, run

COUNTER_TEXT = """\
tapes 1
blank _
alphabet 0 1 _
states a b g x
start b
move  b -> a [L]
write a [1] -> b [0]
write a [0] -> g [1]
write x [0] -> g [0]
write x [_] -> b [_]
move  g -> x [R]
"""


class IncrementMismatch(Exception):
    pass


@dataclass(frozen=True)
class CounterParams:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def build_counter(params: CounterParams) -> tuple[TMSpec, TMConfiguration]:
    """The six-rule counter and its initial configuration `_0^k_` (head on the
    right blank, state b)."""
    spec = TMSpec(
        tape_count=1,
        states=("a", "b", "g", "x"),
        alphabet=("0", "1", "_"),
        blank="_",
        rules=(
            MoveRule("b", "a", ("L",)),
            WriteRule("a", ("1",), "b", ("0",)),
            WriteRule("a", ("0",), "g", ("1",)),
            WriteRule("x", ("0",), "g", ("0",)),
            WriteRule("x", ("_",), "b", ("_",)),
            MoveRule("g", "x", ("R",)),
        ),
        start_state="b",
    )
    tape = "_" + "0" * params.k + "_"
    config = TMConfiguration("b", (tape,), (params.k + 1,))
    return spec, config


@dataclass
class CounterReport:
    k: int
    increments: int
    total_steps: int
    halt_state: str
    halt_tape: str
    halt_head: int


def verify_counter(params: CounterParams, max_steps: int | None = None) -> CounterReport:
    """Simulate to halt; count increments and validate the halting shape.

    Raises StepLimit if the machine does not halt in time and
    IncrementMismatch if the increment count differs from 2^k or the halt
    configuration is not state `a` on the left blank with an all-zero tape.
    """
    spec, config = build_counter(params)
    if max_steps is None:
        max_steps = 64 * 2**params.k + 64
    trace, status = run(spec, config, max_steps)
    increments = sum(
        1 for c in trace if c.state == "b" and c.tapes[0][c.heads[0]] == "_"
    )
    final = trace[-1]
    expected_tape = "_" + "0" * params.k + "_"
    if status != "halted":
        raise IncrementMismatch(f"unexpected status {status}")
    if increments != 2**params.k:
        raise IncrementMismatch(f"counted {increments} increments, expected {2**params.k}")
    if final.state != "a" or final.heads[0] != 0 or final.tapes[0] != expected_tape:
        raise IncrementMismatch(f"unexpected halt configuration {final}")
    return CounterReport(
        k=params.k,
        increments=increments,
        total_steps=len(trace) - 1,
        halt_state=final.state,
        halt_tape=final.tapes[0],
        halt_head=final.heads[0],
    )
