"""Concrete Turing-machine-level sampler constructions.

augment_with_counters interleaves a reversible up-counter on a fresh
computation-counting tape between the input machine's steps.  The counter
starts at (counter capacity) - (per-input step count), overflows exactly on
the final step, and hands off to a per-terminal-state output-counting phase
that holds the finished output while a second counter runs to overflow and
a final halting state.  All runs therefore take the same number of steps,
and every hand-off rule is gated on a counter-tape blank so configurations
never acquire neighbors outside their own chain in the undirected
embedding.

assemble_lv_tm combines four tagged copies (two of the machine, two of its
chiral inversion) through nondeterministic input-randomizing rules; its
reachable configuration space is the layered Las Vegas graph.  The paired
randomizer states carry the copy choice so every internal configuration has
exactly two neighbors per side, mirroring the two linked chain copies of
the abstract construction.

assemble_mc_tm builds one right-sided sub-machine and couples two copies of
it so one steps forward exactly when the other steps backward.  The coupled
rule set pairs write rules with reversed write rules and move rules with
reversed move rules; the Monte Carlo augmentation therefore alternates
write and move steps strictly along every chain (inserting no-op padding
states at the seams) and equalizes the holding and non-holding segment
lengths exactly, so every reachable coupled configuration has exactly one
half holding a finished sample.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .builder import LayerMismatch, bitstrings, standard_initial_config
from .machine import Graph, RegisterTriple
from .turing import (
    MoveRule,
    Rule,
    StepLimit,
    TMConfiguration,
    TMSpec,
    WriteRule,
    check_reversible,
    predecessors,
    run,
    run_traced,
    successors,
)

RESERVED_CHARS = ":@~&*"

HALT_PREFIX = "halt:"


def out_block_states(tag: str, mc: bool) -> tuple[str, ...]:
    base = ("og", "ox", "oc", "oc2", "oa", "ob") if mc else ("og", "ox", "oc", "oa", "ob")
    return tuple(f"{s}:{tag}" for s in base) + (f"halt:{tag}",)


class NotReversibleInput(Exception):
    pass


class StepBoundViolated(Exception):
    pass


def _next_pow2_geq(x: int) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


@dataclass(frozen=True)
class AugmentParams:
    T: int
    r: int
    T_comp: int
    T_out: int
    mode: str
    comp_init: int = 0

    @classmethod
    def lv(cls, T: int, r: int) -> "AugmentParams":
        T_comp = _next_pow2_geq(max(T, 1))
        T_out = _next_pow2_geq(2 * T_comp + r + 1)
        return cls(T, r, T_comp, T_out, "lv", comp_init=0)

    @classmethod
    def mc(cls, T: int, r: int) -> "AugmentParams":
        p = _next_pow2_geq(T + r + 1)
        return cls(T, r, p, p, "mc", comp_init=r + 1)


# ---------------------------------------------------------------------------
# Rule emission helpers
# ---------------------------------------------------------------------------

def _wild(m: int) -> tuple[str, ...]:
    return ("*",) * m


def _nvec(m: int) -> tuple[str, ...]:
    return ("N",) * m


def _wrule(s: str, t: str, m: int, tape: int, read: str, write: str) -> WriteRule:
    reads = list(_wild(m))
    writes = list(_wild(m))
    reads[tape] = read
    writes[tape] = write
    return WriteRule(s, tuple(reads), t, tuple(writes))


def _mrule(s: str, t: str, m: int, tape: int, d: str) -> MoveRule:
    moves = list(_nvec(m))
    moves[tape] = d
    return MoveRule(s, t, tuple(moves))


def _extend_rule(rule: Rule, extra: int) -> Rule:
    if isinstance(rule, WriteRule):
        return WriteRule(rule.state, rule.reads + _wild(extra),
                         rule.new_state, rule.writes + _wild(extra))
    return MoveRule(rule.state, rule.new_state, rule.moves + _nvec(extra))


def _collect_states(rules, *extra) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for s in extra:
        seen.setdefault(s)
    for rule in rules:
        seen.setdefault(rule.state)
        seen.setdefault(rule.new_state)
    return tuple(seen)


# ---------------------------------------------------------------------------
# Input machine analysis
# ---------------------------------------------------------------------------

def state_types(M: TMSpec) -> dict[str, str]:
    """'M' for states whose outgoing rule moves heads, 'W' otherwise."""
    types: dict[str, str] = {}
    for rule in M.rules:
        kind = "M" if isinstance(rule, MoveRule) else "W"
        prev = types.setdefault(rule.state, kind)
        if prev != kind:
            raise NotReversibleInput(
                f"state {rule.state} mixes write and move rules")
    return types


def terminal_patterns(M: TMSpec, r: int, max_steps: int,
                      out_len: int = 4) -> dict[str, set[tuple[str, ...]]]:
    """Halting (state, read-vector) patterns reached over all r-bit inputs."""
    patterns: dict[str, set[tuple[str, ...]]] = {}
    for bits in bitstrings(r):
        try:
            trace, status = run(M, standard_initial_config(M, bits, out_len), max_steps)
        except StepLimit as exc:
            raise StepBoundViolated(f"input {bits}: {exc}") from exc
        if status != "halted":
            raise StepBoundViolated(f"input {bits} hit a tape boundary")
        final = trace[-1]
        patterns.setdefault(final.state, set()).add(final.reads())
    return patterns


def _validate_input_machine(M: TMSpec, params: AugmentParams) -> int:
    """Check reversibility, naming, and the step bound; returns the uniform
    per-input step count (all inputs must take equally many steps)."""
    if M.tape_count < 2:
        raise NotReversibleInput("machine needs input and output tapes")
    report = check_reversible(M)
    if not report.ok():
        raise NotReversibleInput(f"input machine fails rule-level check: "
                                 f"{report.witnesses[:1]}")
    for s in M.states:
        if any(ch in s for ch in RESERVED_CHARS):
            raise NotReversibleInput(f"state name {s!r} uses a reserved character")
    steps = set()
    for bits in bitstrings(params.r):
        try:
            trace, status = run(M, standard_initial_config(M, bits), 4 * params.T + 16)
        except StepLimit as exc:
            raise StepBoundViolated(f"input {bits}: {exc}") from exc
        if status != "halted":
            raise StepBoundViolated(f"input {bits} hit a tape boundary")
        if len(trace) - 1 > params.T:
            raise StepBoundViolated(
                f"input {bits} ran {len(trace) - 1} steps, bound T={params.T}")
        steps.add(len(trace) - 1)
    if len(steps) != 1:
        raise StepBoundViolated(
            f"inputs take different step counts {sorted(steps)}; the "
            "construction requires input-independent run length")
    return steps.pop()


# ---------------------------------------------------------------------------
# Counter augmentation
# ---------------------------------------------------------------------------

@dataclass
class AugmentedTM:
    """Counter-augmented machine with its bookkeeping.

    `holding_states` marks the output-holding segment (used for metadata);
    `chain_steps` is the input-independent run length in steps.
    """

    spec: TMSpec
    params: AugmentParams
    source: TMSpec
    k_comp: int
    k_out: int
    comp_init: int
    holding_states: frozenset[str]
    start_type: str
    entry_pads: int
    eq_pads: int
    chain_steps: int

    @property
    def comp_tape(self) -> int:
        return self.source.tape_count

    @property
    def out_tape(self) -> int:
        return self.source.tape_count + 1

    def initial_config(self, bits: str, out_len: int = 4) -> TMConfiguration:
        base = standard_initial_config(self.source, bits, out_len)
        comp_digits = format(self.comp_init, f"0{self.k_comp}b") if self.k_comp else ""
        comp = self.source.blank + comp_digits + self.source.blank
        out = self.source.blank + "0" * self.k_out + self.source.blank
        return TMConfiguration(
            base.state,
            base.tapes + (comp, out),
            base.heads + (self.k_comp + 1, 0),
        )


def _emit_rules(M: TMSpec, params: AugmentParams, term: dict, types: dict,
                terminal_triggers: bool, eq_pads: int, eq_holding: bool,
                tail_pad: bool):
    """Generate the augmented rule set; returns (rules, holding_states).

    Rules that hand control between the machine and the counter carry a
    blank-read gate on the computation-counting tape, and move rules are
    retargeted through a pass-through state, so that in the undirected
    embedding no configuration acquires neighbors outside its own chain.
    Output-counting blocks are emitted per terminal state: chains never
    share a state once their contents can no longer distinguish them.
    """
    mc = params.mode == "mc"
    mt = M.tape_count + 2
    comp, out = M.tape_count, M.tape_count + 1
    rules: list[Rule] = []
    holding: set[str] = set()
    terminal_states = sorted(term)

    def rtype(state: str) -> str:
        return types.get(state, "W")

    def comp_gate(rule: WriteRule) -> WriteRule:
        reads = list(rule.reads)
        writes = list(rule.writes)
        reads[comp] = writes[comp] = M.blank
        return WriteRule(rule.state, tuple(reads), rule.new_state, tuple(writes))

    def gadget(tag: str, return_state: str | None) -> None:
        ca, cb, cg, cx = f"ca:{tag}", f"cb:{tag}", f"cg:{tag}", f"cx:{tag}"
        rules.append(_mrule(ca, cb, mt, comp, "L"))
        rules.append(_wrule(cb, ca, mt, comp, "1", "0"))
        rules.append(_wrule(cb, cg, mt, comp, "0", "1"))
        if tag in terminal_states:
            rules.append(_wrule(cb, f"om:{tag}", mt, comp, "_", "_"))
        rules.append(_mrule(cg, cx, mt, comp, "R"))
        rules.append(_wrule(cx, cg, mt, comp, "0", "0"))
        if return_state is None:
            return
        if mc and rtype(return_state) == "W":
            rp = f"rp:{return_state}"
            rules.append(_wrule(cx, rp, mt, comp, "_", "_"))
            rules.append(MoveRule(rp, return_state, _nvec(mt)))
        else:
            rules.append(_wrule(cx, return_state, mt, comp, "_", "_"))

    # intercept every state entry with an increment of the computation
    # counter; move rules go through a pass-through state so the increment
    # entry is always a gated write
    intercepted = sorted({r.new_state for r in M.rules})
    move_targets = []
    for rule in M.rules:
        ext = _extend_rule(rule, 2)
        target = rule.new_state
        if isinstance(rule, MoveRule):
            rules.append(MoveRule(ext.state, f"tp:{target}", ext.moves))
            if target not in move_targets:
                move_targets.append(target)
        else:
            rules.append(comp_gate(
                WriteRule(ext.state, ext.reads, f"ca:{target}", ext.writes)))
    for target in move_targets:
        rules.append(comp_gate(
            WriteRule(f"tp:{target}", _wild(mt), f"ca:{target}", _wild(mt))))
    for A in intercepted:
        gadget(A, A)

    # machines halting without a single computation step trigger the final
    # increment from their terminal reads
    if terminal_triggers:
        for s in terminal_states:
            for sigma in sorted(term[s]):
                rules.append(comp_gate(
                    WriteRule(s, sigma + _wild(2), f"ca:{s}", sigma + _wild(2))))
            if s not in intercepted:
                gadget(s, None)

    # per-terminal-state output-counting phase entered at counter overflow
    for s in terminal_states:
        om, om2 = f"om:{s}", f"om2:{s}"
        og, ox, oc, oc2 = f"og:{s}", f"ox:{s}", f"oc:{s}", f"oc2:{s}"
        oa, ob, halt, h2 = f"oa:{s}", f"ob:{s}", f"halt:{s}", f"h2:{s}"
        holding.update(out_block_states(s, mc))
        if mc:
            rules.append(MoveRule(om, om2, _nvec(mt)))
            first = f"eq:{s}:0" if eq_pads else og
            rules.append(_wrule(om2, first, mt, out, "_", "_"))
            for i in range(eq_pads):
                nxt = f"eq:{s}:{i + 1}" if i + 1 < eq_pads else og
                if i % 2 == 0:
                    rules.append(MoveRule(f"eq:{s}:{i}", nxt, _nvec(mt)))
                else:
                    rules.append(_wrule(f"eq:{s}:{i}", nxt, mt, out, "_", "_"))
            if eq_holding:
                holding.update(f"eq:{s}:{i}" for i in range(eq_pads))
        else:
            rules.append(_wrule(om, og, mt, out, "_", "_"))
        rules.append(_mrule(og, ox, mt, out, "R"))
        rules.append(_wrule(ox, og, mt, out, "0", "0"))
        rules.append(_wrule(ox, oc, mt, out, "_", "_"))
        if mc:
            rules.append(MoveRule(oc, oc2, _nvec(mt)))
            rules.append(_wrule(oc2, oa, mt, out, "_", "_"))
        else:
            rules.append(_wrule(oc, oa, mt, out, "_", "_"))
        rules.append(_mrule(oa, ob, mt, out, "L"))
        rules.append(_wrule(ob, oa, mt, out, "1", "0"))
        rules.append(_wrule(ob, og, mt, out, "0", "1"))
        if tail_pad:
            rules.append(_wrule(ob, h2, mt, out, "_", "_"))
            rules.append(MoveRule(h2, halt, _nvec(mt)))
            holding.add(h2)
        else:
            rules.append(_wrule(ob, halt, mt, out, "_", "_"))
    return rules, frozenset(holding)


def _build_augmented(M: TMSpec, params: AugmentParams, terminal_triggers: bool,
                     eq_pads: int, eq_holding: bool, tail_pad: bool,
                     term, types) -> tuple[TMSpec, frozenset]:
    rules, holding = _emit_rules(M, params, term, dict(types), terminal_triggers,
                                 eq_pads, eq_holding, tail_pad)
    alphabet = list(M.alphabet)
    for sym in ("0", "1"):
        if sym not in alphabet:
            alphabet.insert(0, sym)
    spec = TMSpec(
        tape_count=M.tape_count + 2,
        states=_collect_states(rules, M.start_state),
        alphabet=tuple(alphabet),
        blank=M.blank,
        rules=tuple(rules),
        start_state=M.start_state,
    )
    return spec, holding


def _rule_kind(rule: Rule) -> str:
    return "W" if isinstance(rule, WriteRule) else "M"


def augment_with_counters(M: TMSpec, params: AugmentParams) -> AugmentedTM:
    """Add computation- and output-counting tapes per the construction.

    The computation counter starts at T_comp - (per-input step count), so it
    overflows exactly on the final step and every run takes the same number
    of steps with no idle phase.  In Monte Carlo mode the emitted machine
    also alternates write and move steps strictly and pads the output phase
    until holding and non-holding segments have exactly equal length.
    """
    m_steps = _validate_input_machine(M, params)
    types = state_types(M)
    term = terminal_patterns(M, params.r, 4 * params.T + 16)
    k_comp = params.T_comp.bit_length() - 1
    k_out = params.T_out.bit_length() - 1
    start_type = types.get(M.start_state, "W")
    entry_pads = (1 + (1 if start_type == "M" else 0)) if params.mode == "mc" else 0
    step_budget = 64 * (params.T_comp * (k_comp + 2) + params.T_out * (k_out + 2)) + 512
    terminal_triggers = m_steps == 0
    comp_init = params.T_comp - max(m_steps, 1)

    def simulate(spec: TMSpec, holding: frozenset, bits: str):
        aug_stub = AugmentedTM(spec, params, M, k_comp, k_out, comp_init, holding,
                               start_type, entry_pads, 0, 0)
        c0 = aug_stub.initial_config(bits)
        try:
            trace, fired, status = run_traced(spec, c0, step_budget)
        except StepLimit as exc:
            raise StepBoundViolated(f"input {bits}: {exc}") from exc
        if status != "halted" or not trace[-1].state.startswith(HALT_PREFIX):
            raise StepBoundViolated(
                f"augmented machine did not reach a halting state on input {bits}")
        return trace, fired

    if params.mode == "lv":
        spec, holding = _build_augmented(M, params, terminal_triggers,
                                         0, False, False, term, types)
        lengths = set()
        chain_steps = 0
        for bits in bitstrings(params.r):
            trace, _fired = simulate(spec, holding, bits)
            lengths.add(len(trace) - 1)
            chain_steps = len(trace) - 1
        if len(lengths) != 1:
            raise StepBoundViolated(f"run lengths differ across inputs: {lengths}")
        return AugmentedTM(spec, params, M, k_comp, k_out, comp_init, holding,
                           start_type, entry_pads, 0, chain_steps)

    # Monte Carlo mode: measure the holding/non-holding split (randomizer and
    # entry pads included) and insert padding states until it is exactly even
    def split(trace, holding):
        hold_from = next(i for i, c in enumerate(trace) if c.state in holding)
        nonhold = (2 * params.r + 2) + entry_pads + hold_from
        return len(trace) - hold_from, nonhold

    spec, holding = _build_augmented(M, params, terminal_triggers,
                                     0, False, False, term, types)
    trace, _fired = simulate(spec, holding, "0" * params.r)
    hold, nonhold = split(trace, holding)
    delta = hold - nonhold
    tail_pad = delta % 2 != 0
    if tail_pad:
        delta += 1
    eq_pads, eq_holding = abs(delta), delta < 0
    spec, holding = _build_augmented(M, params, terminal_triggers,
                                     eq_pads, eq_holding, tail_pad, term, types)

    lengths = set()
    chain_steps = 0
    for bits in bitstrings(params.r):
        trace, fired = simulate(spec, holding, bits)
        kinds = [_rule_kind(rule) for rule in fired]
        for a, b in zip(kinds, kinds[1:]):
            if a == b:
                raise StepBoundViolated(f"write/move alternation broken: {a}{b}")
        hold, nonhold = split(trace, holding)
        if hold != nonhold:
            raise StepBoundViolated(f"holding split {hold} != {nonhold}")
        lengths.add(len(trace) - 1)
        chain_steps = len(trace) - 1
    if len(lengths) != 1:
        raise LayerMismatch(f"run lengths differ across inputs: {lengths}")
    return AugmentedTM(spec, params, M, k_comp, k_out, comp_init, holding,
                       start_type, entry_pads, eq_pads, chain_steps)


# ---------------------------------------------------------------------------
# Chiral inversion
# ---------------------------------------------------------------------------

_FLIP = {"L": "R", "R": "L", "N": "N"}


def chiral_invert(spec: TMSpec, exempt_tapes: tuple[int, ...]) -> TMSpec:
    """Flip move directions on all tapes except `exempt_tapes`."""
    rules = []
    for rule in spec.rules:
        if isinstance(rule, MoveRule):
            moves = tuple(
                d if i in exempt_tapes else _FLIP[d]
                for i, d in enumerate(rule.moves))
            rules.append(MoveRule(rule.state, rule.new_state, moves))
        else:
            rules.append(rule)
    return replace(spec, rules=tuple(rules))


def aug_exempt_tapes(aug: AugmentedTM) -> tuple[int, ...]:
    """Output, computation-counting, and output-counting tapes keep their
    directions under chiral inversion."""
    return (1, aug.comp_tape, aug.out_tape)


def mirror_config(config: TMConfiguration, flip_tapes: tuple[int, ...]) -> TMConfiguration:
    """Reverse the listed tapes' contents around their center, mirroring heads."""
    tapes = list(config.tapes)
    heads = list(config.heads)
    for i in flip_tapes:
        tapes[i] = tapes[i][::-1]
        heads[i] = len(tapes[i]) - 1 - heads[i]
    return TMConfiguration(config.state, tuple(tapes), tuple(heads))


# ---------------------------------------------------------------------------
# Las Vegas assembly
# ---------------------------------------------------------------------------

RA, RB, ENT, EN2 = "ra", "rb", "ent", "en2"


def _tag(state: str, copy: int, bar: bool = False) -> str:
    return f"{state}~@{copy}" if bar else f"{state}@{copy}"


def _retag_rule(rule: Rule, copy: int, bar: bool, target_copy: int) -> Rule:
    if isinstance(rule, WriteRule):
        return WriteRule(_tag(rule.state, copy, bar), rule.reads,
                         _tag(rule.new_state, target_copy, bar), rule.writes)
    return MoveRule(_tag(rule.state, copy, bar),
                    _tag(rule.new_state, target_copy, bar), rule.moves)


def _copied_rules(spec: TMSpec, bar: bool) -> list[Rule]:
    """Two tagged copies plus the cross-copy sibling of every rule."""
    out = []
    for copy in (0, 1):
        for rule in spec.rules:
            out.append(_retag_rule(rule, copy, bar, copy))
            out.append(_retag_rule(rule, copy, bar, 1 - copy))
    return out


@dataclass
class AssembledTM:
    spec: TMSpec
    meta: dict[str, int]
    aug: AugmentedTM
    kind: str

    def metadata_of(self, state: str) -> int:
        return self.meta.get(state, 0)

    def meta_sidecar(self) -> str:
        lines = [f"meta {s} {m}" for s, m in sorted(self.meta.items())]
        return "\n".join(lines) + "\n"


def assemble_lv_tm(M: TMSpec, params: AugmentParams | None = None,
                   aug: AugmentedTM | None = None) -> AssembledTM:
    """Four tagged copies joined by input-randomizing rules (Las Vegas)."""
    if aug is None:
        aug = augment_with_counters(M, params or AugmentParams.lv(8, 1))
    if aug.params.mode != "lv":
        raise ValueError("assemble_lv_tm needs lv-mode augmentation")
    m1 = aug.spec
    m1bar = chiral_invert(m1, aug_exempt_tapes(aug))
    mt = m1.tape_count
    rules: list[Rule] = []
    rules += _copied_rules(m1, bar=False)
    rules += _copied_rules(m1bar, bar=True)

    start = m1.start_state
    blank = m1.blank
    for a in (0, 1):
        ra, rb = _tag(RA, a), _tag(RB, a)
        for v in ("0", "1"):
            for w in ("0", "1"):
                rules.append(_wrule(ra, rb, mt, 0, v, w))
        for b in (0, 1):
            rules.append(_mrule(rb, _tag(RA, b), mt, 0, "R"))
            rules.append(_wrule(ra, _tag(start, b), mt, 0, blank, blank))
            rules.append(_wrule(_tag(start, a, bar=True), _tag(RB, b), mt, 0,
                                blank, blank))

    spec = TMSpec(
        tape_count=mt,
        states=_collect_states(rules),
        alphabet=m1.alphabet,
        blank=blank,
        rules=tuple(rules),
        start_state=_tag(start, 0),
    )
    meta: dict[str, int] = {}
    for a in (0, 1):
        for s in aug.holding_states:
            meta[_tag(s, a)] = 1
            meta[_tag(s, a, bar=True)] = -1
    return AssembledTM(spec, meta, aug, "lv")


def lv_initial_config(asm: AssembledTM, bits: str, out_len: int = 4) -> TMConfiguration:
    base = asm.aug.initial_config(bits, out_len)
    return TMConfiguration(_tag(base.state, 0), base.tapes, base.heads)


# ---------------------------------------------------------------------------
# Monte Carlo assembly
# ---------------------------------------------------------------------------

def build_mc_submachine_tm(aug: AugmentedTM) -> TMSpec:
    """Two cross-linked copies behind per-copy randomizer states (no mirror)."""
    if aug.params.mode != "mc":
        raise ValueError("needs mc-mode augmentation")
    m1 = aug.spec
    mt = m1.tape_count
    start = m1.start_state
    blank = m1.blank
    rules: list[Rule] = []
    rules += _copied_rules(m1, bar=False)
    first = EN2 if aug.start_type == "M" else start
    for a in (0, 1):
        ra, rb = _tag(RA, a), _tag(RB, a)
        for v in ("0", "1"):
            for w in ("0", "1"):
                rules.append(_wrule(ra, rb, mt, 0, v, w))
        for b in (0, 1):
            rules.append(_mrule(rb, _tag(RA, b), mt, 0, "R"))
            rules.append(_wrule(ra, _tag(ENT, b), mt, 0, blank, blank))
            rules.append(MoveRule(_tag(ENT, a), _tag(first, b), _nvec(mt)))
            if aug.start_type == "M":
                rules.append(WriteRule(_tag(EN2, a), _wild(mt),
                                       _tag(start, b), _wild(mt)))
    return TMSpec(
        tape_count=mt,
        states=_collect_states(rules),
        alphabet=m1.alphabet,
        blank=blank,
        rules=tuple(rules),
        start_state=_tag(RB, 0),
    )


def m2_leftmost_config(aug: AugmentedTM, bits: str, out_len: int = 4) -> TMConfiguration:
    """Sub-machine configuration at the reflecting randomizer end."""
    base = aug.initial_config(bits, out_len)
    heads = (0,) + base.heads[1:]
    return TMConfiguration(_tag(RB, 0), base.tapes, heads)


def m2_terminal_config(aug: AugmentedTM, bits: str, copy: int = 0,
                       out_len: int = 4) -> TMConfiguration:
    """Sub-machine halt configuration for the given input."""
    trace, status = run(aug.spec, aug.initial_config(bits, out_len), 10**7)
    if status != "halted":
        raise StepBoundViolated("augmented machine did not halt")
    final = trace[-1]
    return TMConfiguration(_tag(final.state, copy), final.tapes, final.heads)


_INV = {"L": "R", "R": "L", "N": "N"}


def couple_mc_tm(m2: TMSpec, start_state: str) -> TMSpec:
    """Product machine running one copy forward and one backward.

    Write rules pair with reversed write rules and move rules with reversed
    move rules; tapes are the first copy's followed by the second copy's.
    """
    mt = m2.tape_count
    writes = [r for r in m2.rules if isinstance(r, WriteRule)]
    moves = [r for r in m2.rules if isinstance(r, MoveRule)]
    rules: list[Rule] = []
    for r0 in writes:
        for r1 in writes:
            rules.append(WriteRule(
                f"{r0.state}&{r1.new_state}", r0.reads + r1.writes,
                f"{r0.new_state}&{r1.state}", r0.writes + r1.reads))
    for r0 in moves:
        for r1 in moves:
            rules.append(MoveRule(
                f"{r0.state}&{r1.new_state}",
                f"{r0.new_state}&{r1.state}",
                r0.moves + tuple(_INV[d] for d in r1.moves)))
    return TMSpec(
        tape_count=2 * mt,
        states=_collect_states(rules, start_state),
        alphabet=m2.alphabet,
        blank=m2.blank,
        rules=tuple(rules),
        start_state=start_state,
    )


def _base_state(tagged: str) -> str:
    name = tagged.split("@", 1)[0]
    return name[:-1] if name.endswith("~") else name


@dataclass
class AssembledMC:
    spec: TMSpec
    m2: TMSpec
    aug: AugmentedTM
    kind: str = "mc"

    def metadata_of(self, product_state: str) -> int:
        s0, s1 = product_state.split("&", 1)
        h0 = _base_state(s0) in self.aug.holding_states
        h1 = _base_state(s1) in self.aug.holding_states
        if h0 == h1:
            raise LayerMismatch(
                f"product state {product_state} has {int(h0) + int(h1)} holding halves")
        return 1 if h0 else -1

    def meta_sidecar(self) -> str:
        """`meta <state> <m>` lines for every product state whose metadata is
        defined (states with zero or two holding halves are unreachable from
        the coupled initial configuration and are skipped)."""
        lines = []
        for s in sorted(self.spec.states):
            try:
                lines.append(f"meta {s} {self.metadata_of(s)}")
            except LayerMismatch:
                continue
        return "\n".join(lines) + "\n"

    def initial_config(self, bits: str, out_len: int = 4) -> TMConfiguration:
        left = m2_leftmost_config(self.aug, bits, out_len)
        right = m2_terminal_config(self.aug, bits, copy=0, out_len=out_len)
        return TMConfiguration(
            f"{left.state}&{right.state}",
            left.tapes + right.tapes,
            left.heads + right.heads,
        )

    def split_config(self, config: TMConfiguration):
        mt = self.m2.tape_count
        s0, s1 = config.state.split("&", 1)
        c0 = TMConfiguration(s0, config.tapes[:mt], config.heads[:mt])
        c1 = TMConfiguration(s1, config.tapes[mt:], config.heads[mt:])
        return c0, c1


def assemble_mc_tm(M: TMSpec, params: AugmentParams | None = None) -> AssembledMC:
    aug = augment_with_counters(M, params or AugmentParams.mc(8, 1))
    m2 = build_mc_submachine_tm(aug)
    left = m2_leftmost_config(aug, "0" * aug.params.r)
    right = m2_terminal_config(aug, "0" * aug.params.r, copy=0)
    return AssembledMC(couple_mc_tm(m2, f"{left.state}&{right.state}"), m2, aug)


def lv_machine_graph(asm: AssembledTM, out_len: int = 4):
    """Layered measurement graph of an assembled Las Vegas machine.

    BFS-extracts the reachable configuration space, layers it from the
    inverted copies' halting configurations, and wraps it with the
    measurement map so the observer protocols can run on it directly.
    Returns (graph, configs).
    """
    from .builder import LVGraph
    from .machine import layer_decompose

    r = asm.aug.params.r
    init = lv_initial_config(asm, "0" * r, out_len)
    graph, configs = reachable_graph(
        asm.spec, [init],
        metadata_fn=lambda c: asm.metadata_of(c.state),
        output_fn=lambda c: c.tapes[1].replace(asm.spec.blank, "").encode())
    roots = [i for i, c in enumerate(configs)
             if c.state.startswith(HALT_PREFIX) and "~" in c.state]
    layered = layer_decompose(graph, roots)
    rand_lo = asm.aug.chain_steps + 1
    lv = LVGraph(graph.n, graph.edges, layered.layer_of, graph.registers,
                 rand_layers=(rand_lo, rand_lo + 2 * r + 1))
    return lv, configs


# ---------------------------------------------------------------------------
# Reachable configuration graphs
# ---------------------------------------------------------------------------

def reachable_graph(spec: TMSpec, inits, metadata_fn=None, output_fn=None,
                    max_nodes: int = 500_000):
    """BFS the physical-embedding component of the initial configurations.

    Edges are undirected, so exploration follows rules both forward and
    backward; returns (Graph, configs).
    """
    metadata_fn = metadata_fn or (lambda c: 0)
    output_fn = output_fn or (lambda c: b"")
    index: dict[TMConfiguration, int] = {}
    configs: list[TMConfiguration] = []
    edges: set[tuple[int, int]] = set()
    frontier = []

    def visit(c: TMConfiguration) -> int:
        if c not in index:
            if len(configs) >= max_nodes:
                raise MemoryError(f"reachable set exceeds {max_nodes} nodes")
            index[c] = len(configs)
            configs.append(c)
            frontier.append(c)
        return index[c]

    for c in inits:
        visit(c)
    while frontier:
        current, frontier = frontier, []
        for c in current:
            u = index[c]
            for s in successors(spec, c):
                v = visit(s)
                edges.add((min(u, v), max(u, v)))
            for s in predecessors(spec, c):
                v = visit(s)
                edges.add((min(u, v), max(u, v)))
    registers = [
        RegisterTriple(work=c.state.encode(), metadata=metadata_fn(c),
                       output=output_fn(c))
        for c in configs
    ]
    return Graph(len(configs), edges, registers), configs
