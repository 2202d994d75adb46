"""Multi-tape Turing machine model, text format, and interpreter.

Rules come in two forms: write rules `(s, reads) -> (s', writes)` that match
per-tape symbols under the heads and rewrite them in place, and move rules
`s -> (s', directions)` that match any symbols and shift each head by at
most one cell.  Tapes are bounded arrays; a move off either end yields the
Boundary outcome rather than a transition, which keeps the configuration
space finite.

Write-rule vectors may use the pass-through marker `*` on tapes the rule
does not act on: a `*` read matches anything and the paired `*` write leaves
the cell unchanged.  A rule must use `*` on both sides of the same tape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

WILDCARD = "*"
DIRECTIONS = ("L", "N", "R")


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ArityError(ParseError):
    pass


class UnknownSymbol(ParseError):
    pass


class NondeterministicMatch(Exception):
    pass


class StepLimit(Exception):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ChainCollision(Exception):
    pass


@dataclass(frozen=True)
class WriteRule:
    state: str
    reads: tuple[str, ...]
    new_state: str
    writes: tuple[str, ...]


@dataclass(frozen=True)
class MoveRule:
    state: str
    new_state: str
    moves: tuple[str, ...]


Rule = WriteRule | MoveRule


class _Outcome:
    """Singleton non-configuration results of stepping."""

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return self.name


HALTED = _Outcome("Halted")
BOUNDARY = _Outcome("Boundary")
INITIAL = _Outcome("Initial")


@dataclass(frozen=True)
class TMConfiguration:
    state: str
    tapes: tuple[str, ...]
    heads: tuple[int, ...]

    def __post_init__(self):
        for i, (tape, head) in enumerate(zip(self.tapes, self.heads)):
            if not 0 <= head < len(tape):
                raise ValueError(f"head {i} at {head} outside tape of length {len(tape)}")

    def reads(self) -> tuple[str, ...]:
        return tuple(tape[head] for tape, head in zip(self.tapes, self.heads))


@dataclass
class TMSpec:
    tape_count: int
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    blank: str
    rules: tuple[Rule, ...]
    start_state: str
    _by_state: dict = field(default_factory=dict, repr=False, compare=False)
    _by_target: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._by_state = {}
        self._by_target = {}
        for rule in self.rules:
            self._by_state.setdefault(rule.state, []).append(rule)
            self._by_target.setdefault(rule.new_state, []).append(rule)

    def rules_from(self, state: str) -> list[Rule]:
        return self._by_state.get(state, [])

    def rules_into(self, state: str) -> list[Rule]:
        return self._by_target.get(state, [])


def _matches(rule: Rule, config: TMConfiguration) -> bool:
    if rule.state != config.state:
        return False
    if isinstance(rule, MoveRule):
        return True
    return all(p == WILDCARD or p == s for p, s in zip(rule.reads, config.reads()))


def _apply_forward(rule: Rule, config: TMConfiguration):
    if isinstance(rule, WriteRule):
        tapes = list(config.tapes)
        for i, w in enumerate(rule.writes):
            if w != WILDCARD:
                head = config.heads[i]
                tapes[i] = tapes[i][:head] + w + tapes[i][head + 1:]
        return TMConfiguration(rule.new_state, tuple(tapes), config.heads)
    heads = []
    for i, d in enumerate(rule.moves):
        h = config.heads[i] + {"L": -1, "N": 0, "R": 1}[d]
        if not 0 <= h < len(config.tapes[i]):
            return BOUNDARY
        heads.append(h)
    return TMConfiguration(rule.new_state, config.tapes, tuple(heads))


def _matches_backward(rule: Rule, config: TMConfiguration) -> bool:
    if rule.new_state != config.state:
        return False
    if isinstance(rule, MoveRule):
        return True
    return all(p == WILDCARD or p == s for p, s in zip(rule.writes, config.reads()))


def _apply_backward(rule: Rule, config: TMConfiguration):
    if isinstance(rule, WriteRule):
        tapes = list(config.tapes)
        for i, r in enumerate(rule.reads):
            if r != WILDCARD:
                head = config.heads[i]
                tapes[i] = tapes[i][:head] + r + tapes[i][head + 1:]
        return TMConfiguration(rule.state, tuple(tapes), config.heads)
    heads = []
    for i, d in enumerate(rule.moves):
        h = config.heads[i] - {"L": -1, "N": 0, "R": 1}[d]
        if not 0 <= h < len(config.tapes[i]):
            return BOUNDARY
        heads.append(h)
    return TMConfiguration(rule.state, config.tapes, tuple(heads))


def step_forward(spec: TMSpec, config: TMConfiguration):
    """Apply the unique matching rule; HALTED if none, BOUNDARY on edge moves."""
    matching = [r for r in spec.rules_from(config.state) if _matches(r, config)]
    if not matching:
        return HALTED
    if len(matching) > 1:
        raise NondeterministicMatch(f"{len(matching)} rules match {config.state}")
    return _apply_forward(matching[0], config)


def successors(spec: TMSpec, config: TMConfiguration) -> list[TMConfiguration]:
    """All successor configurations (nondeterministic machines allowed)."""
    out = []
    for rule in spec.rules_from(config.state):
        if _matches(rule, config):
            nxt = _apply_forward(rule, config)
            if nxt is not BOUNDARY:
                out.append(nxt)
    return out


def step_backward(spec: TMSpec, config: TMConfiguration):
    """Apply the unique reversed rule; INITIAL if no rule can reach `config`."""
    matching = [r for r in spec.rules_into(config.state) if _matches_backward(r, config)]
    if not matching:
        return INITIAL
    if len(matching) > 1:
        raise NondeterministicMatch(f"{len(matching)} reversed rules match {config.state}")
    return _apply_backward(matching[0], config)


def predecessors(spec: TMSpec, config: TMConfiguration) -> list[TMConfiguration]:
    """All configurations with a rule into `config` (nondeterministic allowed)."""
    out = []
    for rule in spec.rules_into(config.state):
        if _matches_backward(rule, config):
            prev = _apply_backward(rule, config)
            if prev is not BOUNDARY:
                out.append(prev)
    return out


@dataclass
class ReversibilityReport:
    forward_deterministic: bool
    backward_deterministic: bool
    witnesses: list[tuple[str, Rule, Rule]]

    def ok(self) -> bool:
        return self.forward_deterministic and self.backward_deterministic


def _patterns_unify(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
    return all(x == WILDCARD or y == WILDCARD or x == y for x, y in zip(a, b))


def check_reversible(spec: TMSpec) -> ReversibilityReport:
    """Rule-level determinism report.

    Forward: no two rules may fire from the same (state, read vector); a move
    rule matches every read, so it clashes with any other rule from its state.
    Backward: all rules into a state must be of one form; write rules into a
    state must carry pairwise-distinct written vectors (`*` entries compare
    as the pass-through marker, so rules acting on disjoint tapes are treated
    as distinguishable); at most one move rule may enter a state.
    """
    witnesses: list[tuple[str, Rule, Rule]] = []
    forward = True
    for state in {r.state for r in spec.rules}:
        rules = spec.rules_from(state)
        for i, a in enumerate(rules):
            for b in rules[i + 1:]:
                if isinstance(a, MoveRule) or isinstance(b, MoveRule):
                    forward = False
                    witnesses.append(("forward", a, b))
                elif _patterns_unify(a.reads, b.reads):
                    forward = False
                    witnesses.append(("forward", a, b))
    backward = True
    for state in {r.new_state for r in spec.rules}:
        rules = spec.rules_into(state)
        moves = [r for r in rules if isinstance(r, MoveRule)]
        writes = [r for r in rules if isinstance(r, WriteRule)]
        if moves and writes:
            backward = False
            witnesses.append(("backward", moves[0], writes[0]))
        if len(moves) > 1:
            backward = False
            witnesses.append(("backward", moves[0], moves[1]))
        for i, a in enumerate(writes):
            for b in writes[i + 1:]:
                if a.writes == b.writes:
                    backward = False
                    witnesses.append(("backward", a, b))
    return ReversibilityReport(forward, backward, witnesses)


def run(spec: TMSpec, config: TMConfiguration, max_steps: int):
    """Iterate step_forward; returns (trace, status) with status in
    {"halted", "boundary"}.  Raises StepLimit if max_steps is exhausted."""
    trace = [config]
    for _ in range(max_steps):
        nxt = step_forward(spec, config)
        if nxt is HALTED:
            return trace, "halted"
        if nxt is BOUNDARY:
            return trace, "boundary"
        trace.append(nxt)
        config = nxt
    if step_forward(spec, config) is HALTED:
        return trace, "halted"
    raise StepLimit(f"not halted within {max_steps} steps", trace=trace)


def run_traced(spec: TMSpec, config: TMConfiguration, max_steps: int):
    """Like run(), additionally returning the rule fired at each step."""
    trace = [config]
    fired: list[Rule] = []
    for _ in range(max_steps):
        matching = [r for r in spec.rules_from(config.state) if _matches(r, config)]
        if not matching:
            return trace, fired, "halted"
        if len(matching) > 1:
            raise NondeterministicMatch(f"{len(matching)} rules match {config.state}")
        nxt = _apply_forward(matching[0], config)
        if nxt is BOUNDARY:
            return trace, fired, "boundary"
        trace.append(nxt)
        fired.append(matching[0])
        config = nxt
    if step_forward(spec, config) is HALTED:
        return trace, fired, "halted"
    raise StepLimit(f"not halted within {max_steps} steps", trace=trace)


def chains(spec: TMSpec, inputs: list[TMConfiguration], max_steps: int):
    """One forward trace per input; verifies traces are pairwise node-disjoint."""
    seen: dict[TMConfiguration, int] = {}
    result = []
    for idx, config in enumerate(inputs):
        trace, _status = run(spec, config, max_steps)
        for c in trace:
            if c in seen and seen[c] != idx:
                raise ChainCollision(
                    f"inputs {seen[c]} and {idx} reach the same configuration {c.state}")
            seen[c] = idx
        result.append(trace)
    return result


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _parse_vector(text: str, tapes: int, line: int) -> tuple[str, ...]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected [..] vector, got {text!r}", line)
    parts = [p.strip() for p in text[1:-1].split(",")] if text != "[]" else []
    if len(parts) != tapes:
        raise ArityError(f"vector {text} has {len(parts)} entries, need {tapes}", line)
    return tuple(parts)


def parse_tm(text: str) -> TMSpec:
    """Parse the line-oriented machine format (see module docstring)."""
    tapes: int | None = None
    blank: str | None = None
    alphabet: list[str] = []
    states: list[str] = []
    start: str | None = None
    rules: list[Rule] = []

    def check_symbols(vec, line, allow_wild):
        for s in vec:
            if s == WILDCARD:
                if not allow_wild:
                    raise UnknownSymbol(f"{WILDCARD!r} not allowed here", line)
            elif s not in alphabet:
                raise UnknownSymbol(f"symbol {s!r} not in alphabet", line)

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        keyword, rest = parts[0], (parts[1] if len(parts) > 1 else "")
        if keyword == "tapes":
            tapes = int(rest)
            if tapes < 1:
                raise ParseError("tape count must be positive", lineno)
        elif keyword == "blank":
            blank = rest.strip()
        elif keyword == "alphabet":
            alphabet = rest.split()
            if WILDCARD in alphabet:
                raise ParseError(f"{WILDCARD!r} is reserved", lineno)
        elif keyword == "states":
            states = rest.split()
        elif keyword == "start":
            start = rest.strip()
            if start not in states:
                raise ParseError(f"start state {start!r} not declared", lineno)
        elif keyword in ("write", "move"):
            if tapes is None or not alphabet or not states:
                raise ParseError("rules must follow tapes/alphabet/states", lineno)
            if "->" not in rest:
                raise ParseError("rule needs '->'", lineno)
            lhs, rhs = (s.strip() for s in rest.split("->", 1))
            if keyword == "write":
                lstate, lvec = (lhs.split(None, 1) + [""])[:2]
                rstate, rvec = (rhs.split(None, 1) + [""])[:2]
                reads = _parse_vector(lvec, tapes, lineno)
                writes = _parse_vector(rvec, tapes, lineno)
                check_symbols(reads, lineno, allow_wild=True)
                check_symbols(writes, lineno, allow_wild=True)
                for i, (r, w) in enumerate(zip(reads, writes)):
                    if (r == WILDCARD) != (w == WILDCARD):
                        raise ParseError(
                            f"tape {i}: {WILDCARD!r} must appear on both sides", lineno)
                if lstate not in states or rstate not in states:
                    raise ParseError(f"undeclared state in rule {line!r}", lineno)
                rules.append(WriteRule(lstate, reads, rstate, writes))
            else:
                lstate = lhs
                rstate, rvec = (rhs.split(None, 1) + [""])[:2]
                moves = _parse_vector(rvec, tapes, lineno)
                for d in moves:
                    if d not in DIRECTIONS:
                        raise ParseError(f"direction {d!r} not in {DIRECTIONS}", lineno)
                if lstate not in states or rstate not in states:
                    raise ParseError(f"undeclared state in rule {line!r}", lineno)
                rules.append(MoveRule(lstate, rstate, moves))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", lineno)

    if tapes is None:
        raise ParseError("missing 'tapes' declaration")
    if blank is None:
        raise ParseError("missing 'blank' declaration")
    if blank not in alphabet:
        raise ParseError(f"blank {blank!r} not in alphabet")
    if start is None:
        raise ParseError("missing 'start' declaration")
    return TMSpec(tapes, tuple(states), tuple(alphabet), blank, tuple(rules), start)


def format_tm(spec: TMSpec) -> str:
    """Canonical printer; `parse_tm(format_tm(s))` reproduces `s`."""
    lines = [
        f"tapes {spec.tape_count}",
        f"blank {spec.blank}",
        "alphabet " + " ".join(spec.alphabet),
        "states " + " ".join(spec.states),
        f"start {spec.start_state}",
    ]
    for rule in spec.rules:
        if isinstance(rule, WriteRule):
            lines.append(
                f"write {rule.state} [{','.join(rule.reads)}] -> "
                f"{rule.new_state} [{','.join(rule.writes)}]")
        else:
            lines.append(
                f"move {rule.state} -> {rule.new_state} [{','.join(rule.moves)}]")
    return "\n".join(lines) + "\n"
