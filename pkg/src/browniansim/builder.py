"""Sampler machine constructions over general configuration graphs.

The randomizer is an (r+1)-column butterfly: one node per (r+1)-bit string
per column, with edges between columns i and i+1 joining strings that are
equal or differ only at position i.  A first-passage crossing leaves the
first r bits uniformly random; bit r is an ancillary bit that provides two
attachment points per r-bit input.

The Las Vegas machine hangs two linked copies of every input's computation
chain (padded to length T, then extended with 2T+r+1 output-holding nodes)
off both sides of the randomizer.  Cross-links between paired copies give
every internal node exactly two neighbors in each adjacent layer, so the
walk projects to an unbiased walk on the layer line.  Holding nodes carry
metadata -1 on the left side and +1 on the right.

The Monte Carlo machine links chains (holding length T+r+1) to the right
side only, metadata 1 on holding nodes, and couples two mirrored copies so
one steps forward exactly when the other steps backward; the coupled
metadata is then always -1 or +1 and exactly one half carries a sample.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .machine import Graph, LayeredGraph, RegisterTriple
from .stats import EmptySample, tv_distance
from . import kernel
from .turing import TMConfiguration, TMSpec, chains as tm_chains


class ChainTooLong(Exception):
    pass


class StructureError(Exception):
    pass


class LayerMismatch(Exception):
    pass


def bitstrings(n: int) -> list[str]:
    return [format(i, f"0{n}b")[::-1] for i in range(2**n)] if n else [""]


# ---------------------------------------------------------------------------
# Randomizer
# ---------------------------------------------------------------------------

def build_randomizer(r: int) -> LayeredGraph:
    """(r+1)-column butterfly over (r+1)-bit strings; layer = column."""
    if r < 1:
        raise ValueError("r must be >= 1")
    strings = bitstrings(r + 1)
    index = {(col, b): col * len(strings) + i
             for col in range(r + 1) for i, b in enumerate(strings)}
    n = len(index)
    edges = []
    for col in range(r):
        for b in strings:
            flipped = b[:col] + ("1" if b[col] == "0" else "0") + b[col + 1:]
            for nb in (b, flipped):
                edges.append((index[(col, b)], index[(col + 1, nb)]))
    layer_of = np.array([col for col in range(r + 1) for _ in strings], dtype=np.int64)
    registers = [RegisterTriple(work=b.encode())
                 for col in range(r + 1) for b in strings]
    return LayeredGraph(n, edges, layer_of, registers)


def randomizer_node(r: int, col: int, b: str) -> int:
    """Node id of string `b` in column `col` (matches build_randomizer)."""
    strings = bitstrings(r + 1)
    return col * len(strings) + strings.index(b)


def randomizer_exact_first_passage(r: int, start: str | None = None) -> dict[str, float]:
    """Absorbing-chain first-passage distribution over the first r bits.

    Starts from column-0 node `start` (default all zeros), absorbs at column
    r, and marginalizes the hit distribution onto the first r bits.
    """
    g = build_randomizer(r)
    strings = bitstrings(r + 1)
    width = len(strings)
    start_node = randomizer_node(r, 0, start or "0" * (r + 1))
    transient = [u for u in range(g.n) if u < r * width]
    absorbing = [u for u in range(g.n) if u >= r * width]
    tpos = {u: i for i, u in enumerate(transient)}
    apos = {u: i for i, u in enumerate(absorbing)}
    Q = np.zeros((len(transient), len(transient)))
    R = np.zeros((len(transient), len(absorbing)))
    indptr, indices = g.csr()
    for u in transient:
        deg = indptr[u + 1] - indptr[u]
        for v in indices[indptr[u]:indptr[u + 1]]:
            if v in tpos:
                Q[tpos[u], tpos[v]] += 1.0 / deg
            else:
                R[tpos[u], apos[v]] += 1.0 / deg
    absorbed = np.linalg.solve(np.eye(len(transient)) - Q, R)[tpos[start_node]]
    marginal: dict[str, float] = {b[:r]: 0.0 for b in strings}
    for u, p in zip(absorbing, absorbed):
        marginal[g.registers[u].work.decode()[:r]] += p
    return marginal


def randomizer_uniformity_check(r: int, walks: int, seed: int) -> float:
    """TV distance to uniform of the sampled first-passage first-r-bit law."""
    if walks <= 0:
        raise EmptySample("need at least one walk")
    g = build_randomizer(r)
    width = 2 ** (r + 1)
    start = randomizer_node(r, 0, "0" * (r + 1))
    is_target = np.zeros(g.n, dtype=np.uint8)
    is_target[r * width:] = 1
    indptr, indices = g.csr()
    hits = kernel.first_passage_nodes(indptr, indices, start, is_target, walks, seed,
                                      max_steps=10**7)
    if (hits < 0).any():
        raise RuntimeError("first-passage walk exceeded the step budget")
    counts: dict[str, int] = {}
    for u in hits:
        b = g.registers[u].work.decode()[:r]
        counts[b] = counts.get(b, 0) + 1
    uniform = {b: 1.0 for b in bitstrings(r)}
    return tv_distance(counts, uniform)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

@dataclass
class ChainSet:
    """Per-input computation chains with registers.

    `holding_start` marks the first holding node index once add_holding has
    run; before that it is None.
    """

    r: int
    chains: dict[str, list[RegisterTriple]]
    holding_start: int | None = None

    def __post_init__(self):
        expected = set(bitstrings(self.r))
        if set(self.chains) != expected:
            raise ValueError("need exactly one chain per r-bit string")

    @property
    def length(self) -> int:
        return max(len(c) for c in self.chains.values())


def standard_initial_config(spec: TMSpec, bits: str, out_len: int = 4) -> TMConfiguration:
    """Input tape `_bits_` with the head on the right blank; blank output tape."""
    if spec.tape_count != 2:
        raise ValueError("standard layout expects (input, output) tapes")
    input_tape = spec.blank + bits + spec.blank
    output_tape = spec.blank * out_len
    return TMConfiguration(spec.start_state, (input_tape, output_tape),
                           (len(bits) + 1, 0))


def output_register(spec: TMSpec, config: TMConfiguration, tape_index: int = 1) -> bytes:
    """Output tape contents with blanks stripped."""
    return config.tapes[tape_index].replace(spec.blank, "").encode()


def chains_from_tm(spec: TMSpec, r: int, max_steps: int = 10000,
                   out_len: int = 4) -> ChainSet:
    """Run the machine on every r-bit input and package the traces."""
    inputs = [standard_initial_config(spec, b, out_len) for b in bitstrings(r)]
    traces = tm_chains(spec, inputs, max_steps)
    chain_map: dict[str, list[RegisterTriple]] = {}
    for b, trace in zip(bitstrings(r), traces):
        chain_map[b] = [
            RegisterTriple(
                work=f"{c.state}|{'|'.join(c.tapes)}|{c.heads}".encode(),
                metadata=0,
                output=output_register(spec, c),
            )
            for c in trace
        ]
    return ChainSet(r, chain_map)


def pad_chains(cs: ChainSet, T: int) -> ChainSet:
    """Elongate every chain to exactly T nodes by repeating its terminal registers."""
    padded = {}
    for b, chain in cs.chains.items():
        if len(chain) > T:
            raise ChainTooLong(f"chain {b} has {len(chain)} nodes > T={T}")
        tail = chain[-1]
        padded[b] = list(chain) + [replace(tail) for _ in range(T - len(chain))]
    return ChainSet(cs.r, padded)


def add_holding(cs: ChainSet, length: int) -> ChainSet:
    """Append `length` holding nodes preserving each chain's output register."""
    held = {}
    T = cs.length
    for b, chain in cs.chains.items():
        if len(chain) != T:
            raise ValueError("chains must be padded to equal length first")
        tail = chain[-1]
        held[b] = list(chain) + [replace(tail) for _ in range(length)]
    return ChainSet(cs.r, held, holding_start=T if length > 0 else None)


# ---------------------------------------------------------------------------
# Las Vegas assembly
# ---------------------------------------------------------------------------

class LVGraph(LayeredGraph):
    """Layered Las Vegas machine with its measurement map."""

    def __init__(self, n, edges, layer_of, registers, rand_layers: tuple[int, int]):
        super().__init__(n, edges, layer_of, registers)
        self.rand_layers = rand_layers

    def measurement(self, node: int) -> tuple[int, bytes]:
        reg = self.registers[node]
        return reg.metadata, reg.output


def check_degree_regularity(g: LayeredGraph, per_side: int) -> None:
    """Every node must have exactly `per_side` neighbors in each existing
    adjacent layer; raises StructureError otherwise."""
    top = g.n_layers - 1
    up = np.zeros(g.n, dtype=np.int64)
    down = np.zeros(g.n, dtype=np.int64)
    for u, v in g.edges:
        if g.layer_of[u] < g.layer_of[v]:
            up[u] += 1
            down[v] += 1
        else:
            up[v] += 1
            down[u] += 1
    for u in range(g.n):
        expect_up = per_side if g.layer_of[u] < top else 0
        expect_down = per_side if g.layer_of[u] > 0 else 0
        if up[u] != expect_up or down[u] != expect_down:
            raise StructureError(
                f"node {u} (layer {g.layer_of[u]}) has degree {down[u]}/{up[u]}, "
                f"expected {expect_down}/{expect_up}")


def assemble_las_vegas(rand: LayeredGraph, cs: ChainSet) -> LVGraph:
    """Attach doubled, cross-linked chains to both randomizer sides.

    Chain copies run leftward on the left side; holding nodes get metadata
    -1 (left) and +1 (right).  Requires cs padded and holding-extended.
    """
    if cs.holding_start is None:
        raise ValueError("chain set must have a holding region")
    r = cs.r
    strings = bitstrings(r)
    C = cs.length
    width = 2 ** (r + 1)
    if rand.n != (r + 1) * width:
        raise LayerMismatch("randomizer size does not match r")
    total_layers = 2 * C + (r + 1)

    n = 0
    registers: list[RegisterTriple] = []
    layer_of: list[int] = []
    edges: list[tuple[int, int]] = []

    def new_node(reg: RegisterTriple, layer: int) -> int:
        nonlocal n
        registers.append(reg)
        layer_of.append(layer)
        n += 1
        return n - 1

    # randomizer occupies layers C .. C+r
    rand_base = {}
    for u in range(rand.n):
        rand_base[u] = new_node(rand.registers[u], C + int(rand.layer_of[u]))
    for u, v in rand.edges:
        edges.append((rand_base[u], rand_base[v]))

    def add_side(side: str) -> None:
        meta = -1 if side == "left" else +1
        for b in strings:
            chain = cs.chains[b]
            copies = []
            for _copy in range(2):
                ids = []
                for t, reg in enumerate(chain):
                    layer = C - 1 - t if side == "left" else C + r + 1 + t
                    holding = t >= cs.holding_start
                    ids.append(new_node(
                        replace(reg, metadata=meta if holding else 0), layer))
                copies.append(ids)
            ca, cb = copies
            for t in range(C - 1):
                edges.append((ca[t], ca[t + 1]))
                edges.append((cb[t], cb[t + 1]))
                edges.append((ca[t], cb[t + 1]))
                edges.append((cb[t], ca[t + 1]))
            boundary_col = 0 if side == "left" else r
            for anc in ("0", "1"):
                rnode = rand_base[randomizer_node(r, boundary_col, b + anc)]
                edges.append((ca[0], rnode))
                edges.append((cb[0], rnode))

    add_side("left")
    add_side("right")

    g = LVGraph(n, edges, np.array(layer_of), registers, rand_layers=(C, C + r))
    if g.n_layers != total_layers:
        raise StructureError(f"{g.n_layers} layers, expected {total_layers}")
    check_degree_regularity(g, per_side=2)
    return g


# ---------------------------------------------------------------------------
# Monte Carlo assembly
# ---------------------------------------------------------------------------

def assemble_mc_submachine(rand: LayeredGraph, cs: ChainSet) -> LayeredGraph:
    """Randomizer with doubled chains on the right side only; metadata 1 on
    holding nodes.  Yields a (2T + 2r + 2)-layer machine."""
    if cs.holding_start is None:
        raise ValueError("chain set must have a holding region")
    r = cs.r
    T = cs.holding_start
    if T < 1:
        raise ValueError("T must be >= 1")
    strings = bitstrings(r)
    C = cs.length
    width = 2 ** (r + 1)
    if rand.n != (r + 1) * width:
        raise LayerMismatch("randomizer size does not match r")

    n = 0
    registers: list[RegisterTriple] = []
    layer_of: list[int] = []
    edges: list[tuple[int, int]] = []

    def new_node(reg, layer):
        nonlocal n
        registers.append(reg)
        layer_of.append(layer)
        n += 1
        return n - 1

    rand_base = {}
    for u in range(rand.n):
        rand_base[u] = new_node(rand.registers[u], int(rand.layer_of[u]))
    for u, v in rand.edges:
        edges.append((rand_base[u], rand_base[v]))

    for b in strings:
        chain = cs.chains[b]
        copies = []
        for _copy in range(2):
            ids = []
            for t, reg in enumerate(chain):
                holding = t >= cs.holding_start
                ids.append(new_node(
                    replace(reg, metadata=1 if holding else 0), r + 1 + t))
            copies.append(ids)
        ca, cb = copies
        for t in range(C - 1):
            edges.append((ca[t], ca[t + 1]))
            edges.append((cb[t], cb[t + 1]))
            edges.append((ca[t], cb[t + 1]))
            edges.append((cb[t], ca[t + 1]))
        for anc in ("0", "1"):
            rnode = rand_base[randomizer_node(r, r, b + anc)]
            edges.append((ca[0], rnode))
            edges.append((cb[0], rnode))

    g = LayeredGraph(n, np.array(edges), np.array(layer_of), registers)
    expected = 2 * T + 2 * r + 2
    if g.n_layers != expected:
        raise StructureError(f"{g.n_layers} layers, expected {expected}")
    check_degree_regularity(g, per_side=2)
    return g


def mc_negate_holding(m: LayeredGraph) -> LayeredGraph:
    """Copy of an MC sub-machine with holding metadata -1 instead of +1."""
    registers = [replace(reg, metadata=-reg.metadata) for reg in m.registers]
    return LayeredGraph(m.n, m.edges, m.layer_of, registers)


class MCGraph(LayeredGraph):
    """Coupled Monte Carlo product machine.

    Product node (x, y) pairs a layer-i node of the +1 machine with a layer
    (L-1-i) node of the -1 machine.  `output_pairs[v]` holds (o_plus,
    o_minus); `component_layers[v]` holds (i, j).
    """

    def __init__(self, n, edges, layer_of, registers, output_pairs, component_layers):
        super().__init__(n, edges, layer_of, registers)
        self.output_pairs = output_pairs
        self.component_layers = component_layers

    def measurement(self, node: int) -> tuple[int, tuple[bytes, bytes]]:
        return self.registers[node].metadata, self.output_pairs[node]


def lv_from_tm(spec: TMSpec, r: int, T: int | None = None,
               max_steps: int = 10000) -> LVGraph:
    """Full Las Vegas pipeline: run chains, pad, extend, assemble."""
    cs = chains_from_tm(spec, r, max_steps)
    T = cs.length if T is None else T
    cs = add_holding(pad_chains(cs, T), 2 * T + r + 1)
    return assemble_las_vegas(build_randomizer(r), cs)


def mc_from_tm(spec: TMSpec, r: int, T: int | None = None,
               max_steps: int = 10000) -> MCGraph:
    """Full Monte Carlo pipeline: sub-machine assembly plus coupling."""
    cs = chains_from_tm(spec, r, max_steps)
    T = cs.length if T is None else T
    cs = add_holding(pad_chains(cs, T), T + r + 1)
    sub = assemble_mc_submachine(build_randomizer(r), cs)
    return couple_mc(sub, mc_negate_holding(sub))


def couple_mc(m_plus: LayeredGraph, m_minus: LayeredGraph) -> MCGraph:
    """Pair layer-i nodes of m_plus with layer-(L-1-i) nodes of m_minus.

    Product edges exist exactly when both component moves are edges, so the
    sum of component layers is invariant along every edge; combined metadata
    is m_plus + m_minus and must be -1 or +1 everywhere.
    """
    L = m_plus.n_layers
    if m_minus.n_layers != L:
        raise LayerMismatch(f"layer counts differ: {L} vs {m_minus.n_layers}")
    plus_layers = m_plus.layers()
    minus_layers = m_minus.layers()

    node_id: dict[tuple[int, int], int] = {}
    registers: list[RegisterTriple] = []
    output_pairs: list[tuple[bytes, bytes]] = []
    component_layers: list[tuple[int, int]] = []
    layer_of: list[int] = []
    for i in range(L):
        j = L - 1 - i
        for x in plus_layers[i]:
            rx = m_plus.registers[x]
            for y in minus_layers[j]:
                ry = m_minus.registers[y]
                meta = rx.metadata + ry.metadata
                if meta not in (-1, 1):
                    raise StructureError(
                        f"product metadata {meta} at layers ({i},{j})")
                node_id[(int(x), int(y))] = len(registers)
                registers.append(RegisterTriple(
                    work=rx.work + b"*" + ry.work,
                    metadata=meta,
                    output=rx.output + b"," + ry.output))
                output_pairs.append((rx.output, ry.output))
                component_layers.append((i, j))
                layer_of.append(i)

    plus_adj = {u: set(map(int, m_plus.neighbors(u))) for u in range(m_plus.n)}
    minus_adj = {u: set(map(int, m_minus.neighbors(u))) for u in range(m_minus.n)}
    edges = []
    for (x, y), u in node_id.items():
        for x2 in plus_adj[x]:
            if m_plus.layer_of[x2] != m_plus.layer_of[x] + 1:
                continue
            for y2 in minus_adj[y]:
                if m_minus.layer_of[y2] != m_minus.layer_of[y] - 1:
                    continue
                edges.append((u, node_id[(x2, y2)]))

    return MCGraph(len(registers), edges, np.array(layer_of), registers,
                   output_pairs, component_layers)
