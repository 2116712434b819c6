"""Fault-tolerant subnetworks on the 7-qubit code.

Layout choices (the printed figures give counts, not gate lists):

* A syndrome bit is read with a 4-qubit cat state. The cat is grown by a
  doubling tree of CNOTs from one Hadamard, checked by one parity onto a
  fresh qubit, coupled to the four data qubits with CNOTs (cat as control),
  rotated with H and measured; the bit is the parity of the outcomes.
  If the check fires, a second cat is prepared on the same qubits and used
  without further checking.
* Every coupling measures an X-type parity. A block alternates between its
  natural frame (F0) and the Hadamard-rotated frame (F1): an extraction
  starting in F0 reads the X parities for bits 4-6, applies a transversal H
  layer, then reads bits 1-3 as X parities of the rotated block. The next
  extraction runs the other way round, so two extractions return to F0.
  Printed bits are ``s_j = p_j`` and ``s_{3+j} = p_j xor p_{3+j}`` since
  the sigma_y checks are products of the Z and X checks.
* Only ancilla qubits carry memory locations: data blocks are assumed to
  be pipelined into other work while they wait.

Classical bit names are prefixed ``g{gate}.b{block}``, then
``.a{attempt}.e{extraction}`` for extractions and ``.bit{b}`` for one
parity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .errors import UnsupportedNetworkError, UsageError
from .network import Condition, Network, NetworkBuilder, Tag, and_conditions
from .pauli import GateKind, PauliOperator, conjugate_through_gate
from .steane import SUPPORTS

K = GateKind
CAT_SIZE = 4
NORMALIZER_KINDS = (K.BIT_FLIP, K.SIGN_FLIP, K.PHASE, K.HADAMARD, K.CNOT)


def support_of_bit(bit: int) -> tuple[int, ...]:
    """Labels 1..7 checked by printed syndrome bit 1..6 (7 = A1 via its weight-3 form)."""
    if 1 <= bit <= 3:
        return SUPPORTS[bit - 1]
    if 4 <= bit <= 6:
        return SUPPORTS[bit - 4]
    if bit == 7:
        return (1, 2, 3)  # A1 times S1
    raise UsageError(f"syndrome bit {bit} out of range")


# -- cat states ---------------------------------------------------------------


def cat_tree(m: int) -> list[list[tuple[int, int]]]:
    """CNOT layers of the doubling tree that spreads qubit 0 over ``m`` qubits."""
    layers = []
    have = 1
    while have < m:
        layers.append([(k, k + have) for k in range(have) if k + have < m])
        have *= 2
    return layers


@lru_cache(maxsize=None)
def verification_pair(m: int) -> tuple[int, int]:
    """Cat qubits whose parity catches every bad bit-flip pattern of one fault.

    A single fault inside the tree leaves a bit-flip pattern on the cat; a
    pattern is harmful when, up to the all-ones stabilizer, it flips two or
    more qubits. The first pair with odd overlap with every harmful pattern
    wins; failing that, the pair catching the most patterns.
    """
    layers = cat_tree(m)
    patterns = set()
    for start in range(len(layers) + 1):
        # a bit flip on any qubit after layer ``start - 1`` (after the H for start 0)
        for q in range(m):
            err = PauliOperator.single(m, q, "N")
            for layer in layers[start:]:
                for c, t in layer:
                    err = conjugate_through_gate(err, K.CNOT, (c, t), forward=True)
            x = err.x_mask
            if bin(x).count("1") * 2 > m:
                x ^= (1 << m) - 1
            if bin(x).count("1") >= 2:
                patterns.add(x)
    best, best_score = (0, 1), -1
    for i, j in combinations(range(m), 2):
        score = sum(bin(p & ((1 << i) | (1 << j))).count("1") % 2 for p in patterns)
        if score == len(patterns):
            return (i, j)
        if score > best_score:
            best, best_score = (i, j), score
    return best


def emit_cat_prep(
    nb: NetworkBuilder,
    cats: list[int],
    verify: int,
    tag: Tag,
    key: str,
    condition: Condition | None = None,
) -> None:
    """Prepare and check a cat state; the check outcome is written to ``key``.

    Slices: one per tree stage, then two verification CNOTs and the
    verification measurement. Each cat qubit is prepared in the slice just
    before its first CNOT.
    """
    m = len(cats)
    layers = cat_tree(m)
    n_tree = len(layers)
    # slice 0: prep c0; slice 1: H c0 (+ preps); slices 2..: tree layers
    plan: list[list[tuple]] = [[] for _ in range(n_tree + 2)]
    plan[0].append((K.PREPARE, cats[0]))
    plan[1].append((K.HADAMARD, cats[0]))
    for s, layer in enumerate(layers):
        for c, t in layer:
            plan[s + 2].append((K.CNOT, (cats[c], cats[t])))
            plan[s + 1].append((K.PREPARE, cats[t]))
    plan[-1].append((K.PREPARE, verify))
    i, j = verification_pair(m)
    plan.append([(K.CNOT, (cats[i], verify))])
    plan.append([(K.CNOT, (cats[j], verify))])
    plan.append([(K.MEASURE, verify, {"label": key})])
    for gates in plan:
        nb.add_slice(gates, tag, condition)


def emit_bit_extraction(
    nb: NetworkBuilder,
    data: list[int],
    cats: list[int],
    verify: int,
    tag: Tag,
    prefix: str,
    bit: int,
    condition: Condition | None = None,
) -> str:
    """Emit one syndrome-bit extraction; returns the key holding the parity."""
    labels = support_of_bit(bit)
    cats = cats[: len(labels)]
    cat_tag = tag.with_(kind="cat_prep", cat_attempt=1)
    emit_cat_prep(nb, cats, verify, cat_tag, f"{prefix}.v1", condition)
    retry = and_conditions(condition, Condition.when(f"{prefix}.v1"))
    emit_cat_prep(nb, cats, verify, tag.with_(kind="cat_prep", cat_attempt=2), f"{prefix}.v2", retry)
    nb.add_slice([(K.CNOT, (c, data[lab - 1])) for c, lab in zip(cats, labels)], tag, condition)
    nb.add_slice([(K.HADAMARD, c) for c in cats], tag, condition)
    outs = [f"{prefix}.m{k + 1}" for k in range(len(cats))]
    nb.add_slice([(K.MEASURE, c, {"label": o}) for c, o in zip(cats, outs)], tag, condition)
    nb.add_rule("xor", [prefix], outs)
    return prefix


@dataclass
class BlockAncillas:
    cats: list[int]
    verify: int


def _ancillas(nb: NetworkBuilder, block: int, size: int = CAT_SIZE) -> BlockAncillas:
    cats = [nb.add_qubit("cat", block) for _ in range(size)]
    return BlockAncillas(cats, nb.add_qubit("verify", block))


def _bits_for(frame: int, with_a1: bool) -> tuple[list[int], list[int]]:
    """Bits read before and after the H layer, for a block starting in ``frame``."""
    x_bits = [4, 5, 6]
    z_bits = [1, 2, 3] + ([7] if with_a1 else [])
    return (x_bits, z_bits) if frame == 0 else (z_bits, x_bits)


def emit_syndrome_extraction(
    nb: NetworkBuilder,
    data: list[int],
    anc: BlockAncillas,
    *,
    gate: int = 0,
    block: int = 0,
    attempt: int = 1,
    extraction: int = 1,
    frame: int = 0,
    condition: Condition | None = None,
    with_a1: bool = False,
) -> list[str]:
    """Emit six (or seven) bit extractions and one H layer; returns syndrome keys."""
    base = f"g{gate}.b{block}.a{attempt}.e{extraction}"
    tag = Tag("bit_extraction", gate, block, attempt, extraction)
    first, second = _bits_for(frame, with_a1)
    parity = {}
    for b in first:
        parity[b] = emit_bit_extraction(nb, data, anc.cats, anc.verify, tag.with_(bit=b), f"{base}.bit{b}", b, condition)
    nb.add_slice([(K.HADAMARD, q) for q in data], tag.with_(kind="hadamard_layer"), condition)
    for b in second:
        parity[b] = emit_bit_extraction(nb, data, anc.cats, anc.verify, tag.with_(bit=b), f"{base}.bit{b}", b, condition)
    keys = []
    for j in (1, 2, 3):
        nb.add_rule("xor", [f"{base}.s{j}"], [parity[j]])
        keys.append(f"{base}.s{j}")
    for j in (1, 2, 3):
        nb.add_rule("xor", [f"{base}.s{3 + j}"], [parity[j], parity[3 + j]])
        keys.append(f"{base}.s{3 + j}")
    if with_a1:
        # A1 = (A1 S1) S1
        nb.add_rule("xor", [f"{base}.s7"], [parity[7], parity[1]])
        keys.append(f"{base}.s7")
    return keys


def emit_recovery(
    nb: NetworkBuilder,
    data: list[int],
    anc: BlockAncillas,
    *,
    gate: int = 0,
    block: int = 0,
    with_a1: bool = False,
    attempts: int = 2,
) -> None:
    """Two extractions; on disagreement two more; then decode and correct."""
    base = f"g{gate}.b{block}"
    kw = dict(gate=gate, block=block, with_a1=with_a1)
    e1 = emit_syndrome_extraction(nb, data, anc, attempt=1, extraction=1, frame=0, **kw)
    e2 = emit_syndrome_extraction(nb, data, anc, attempt=1, extraction=2, frame=1, **kw)
    if attempts == 1:
        final = e2
    else:
        retry = f"{base}.retry"
        nb.add_rule("differ", [retry], e1 + e2)
        cond = Condition.when(retry)
        e3 = emit_syndrome_extraction(nb, data, anc, attempt=2, extraction=1, frame=0, condition=cond, **kw)
        e4 = emit_syndrome_extraction(nb, data, anc, attempt=2, extraction=2, frame=1, condition=cond, **kw)
        final = [f"{base}.syn{k + 1}" for k in range(len(e2))]
        nb.add_rule("select", final, [retry] + e2 + e4)
    corr = [f"{base}.c{j}.x" for j in range(1, 8)] + [f"{base}.c{j}.z" for j in range(1, 8)]
    nb.add_rule("decode", corr, final)
    nb.add_slice(
        [(K.CORRECTION, q, {"label": f"{base}.c{j}"}) for j, q in enumerate(data, start=1)],
        Tag("correction", gate, block),
    )


# -- public builders ------------------------------------------------------------


def build_cat_prep(attempt: int = 1, size: int = CAT_SIZE) -> Network:
    """A stand-alone checked cat; the second attempt runs when the first check fires."""
    if attempt not in (1, 2):
        raise UsageError("cat preparation attempt must be 1 or 2")
    nb = NetworkBuilder(f"cat_prep_{attempt}")
    anc = _ancillas(nb, 0, size)
    tag = Tag("cat_prep", cat_attempt=attempt)
    cond = None
    if attempt == 2:
        emit_cat_prep(nb, anc.cats, anc.verify, tag.with_(cat_attempt=1), "v1")
        cond = Condition.when("v1")
    emit_cat_prep(nb, anc.cats, anc.verify, tag, f"v{attempt}", cond)
    nb.acceptance = None
    return nb.build()


def build_syndrome_bit_extraction(bit: int, extraction: int = 1, attempt: int = 1) -> Network:
    """One block plus its ancillas, reading one printed syndrome bit.

    Bits 4-6 are read as X parities of the block in its natural frame; bits
    1-3 as X parities of the H-rotated block (the frame an extraction is in
    when it reaches them).
    """
    nb = NetworkBuilder(f"bit_{bit}")
    data = nb.add_block(0)
    anc = _ancillas(nb, 0, len(support_of_bit(bit)))
    tag = Tag("bit_extraction", attempt=attempt, extraction=extraction, bit=bit)
    emit_bit_extraction(nb, data, anc.cats, anc.verify, tag, f"g0.b0.a{attempt}.e{extraction}.bit{bit}", bit)
    return nb.build()


def build_syndrome_extraction(attempt: int = 1, extraction: int = 1, frame: int = 0, with_a1: bool = False) -> Network:
    nb = NetworkBuilder("syndrome_extraction")
    data = nb.add_block(0)
    anc = _ancillas(nb, 0)
    emit_syndrome_extraction(nb, data, anc, attempt=attempt, extraction=extraction, frame=frame, with_a1=with_a1)
    return nb.build()


def build_recovery() -> Network:
    nb = NetworkBuilder("recovery")
    data = nb.add_block(0)
    emit_recovery(nb, data, _ancillas(nb, 0))
    return nb.build()


def build_transversal_gate(kind: GateKind) -> Network:
    if kind not in NORMALIZER_KINDS:
        raise UnsupportedNetworkError(f"{kind.value} is not a transversal normalizer gate")
    nb = NetworkBuilder(f"transversal_{kind.name.lower()}")
    a = nb.add_block(0)
    if kind is K.CNOT:
        b = nb.add_block(1)
        gates = [(kind, (qa, qb)) for qa, qb in zip(a, b)]
    else:
        gates = [(kind, q) for q in a]
    nb.add_slice(gates, Tag("encoded_op", block=None))
    return nb.build()


def build_encoded_gate(kind: GateKind = GateKind.CNOT, following: bool = True) -> Network:
    """Recoveries of the input blocks, the transversal gate, and (optionally)
    the first recovery attempt of the next encoded gate on each output block."""
    if kind not in NORMALIZER_KINDS:
        raise UnsupportedNetworkError(f"{kind.value} is not a transversal normalizer gate")
    nb = NetworkBuilder(f"encoded_{kind.name.lower()}")
    n_blocks = 2 if kind is K.CNOT else 1
    blocks = [nb.add_block(b) for b in range(n_blocks)]
    ancs = [_ancillas(nb, b) for b in range(n_blocks)]
    for b in range(n_blocks):
        emit_recovery(nb, blocks[b], ancs[b], block=b)
    if kind is K.CNOT:
        gates = [(kind, (qa, qb)) for qa, qb in zip(*blocks)]
    else:
        gates = [(kind, q) for q in blocks[0]]
    nb.add_slice(gates, Tag("encoded_op", block=None))
    if following:
        for b in range(n_blocks):
            for e, frame in ((1, 0), (2, 1)):
                emit_syndrome_extraction(nb, blocks[b], ancs[b], gate=1, block=b, attempt=1, extraction=e, frame=frame)
    return nb.build()


def build_encoded_zero_prep() -> Network:
    """Reset a block to encoded |0>: prepare each qubit, then a recovery that
    also reads A1 (through its weight-3 form ``A1 S1``) and flips the block
    with a transversal bit flip when A1 comes out -1."""
    nb = NetworkBuilder("encoded_zero_prep")
    data = nb.add_block(0)
    anc = _ancillas(nb, 0)
    nb.add_slice([(K.PREPARE, q) for q in data], Tag("data_prep"))
    emit_recovery(nb, data, anc, with_a1=True)
    return nb.build()


def build_pi8_prep() -> Network:
    """Two rounds of measuring the encoded H with a 7-qubit cat and a
    transversal controlled-H, with a recovery between them. The state is
    rejected unless the rounds agree; a -1 outcome is fixed by the encoded
    bit-and-sign flip."""
    nb = NetworkBuilder("pi8_prep")
    data = nb.add_block(0)
    anc = _ancillas(nb, 0)
    big = BlockAncillas([nb.add_qubit("cat", 0) for _ in range(7)], nb.add_qubit("verify", 0))
    rounds = []
    for r in (1, 2):
        prefix = f"pi8.r{r}"
        tag = Tag("pi8_measurement", round=r)
        emit_cat_prep(nb, big.cats, big.verify, tag.with_(cat_attempt=1), f"{prefix}.v1")
        emit_cat_prep(
            nb, big.cats, big.verify, tag.with_(cat_attempt=2), f"{prefix}.v2", Condition.when(f"{prefix}.v1")
        )
        nb.add_slice([(K.CONTROLLED_H, (c, q)) for c, q in zip(big.cats, data)], tag)
        nb.add_slice([(K.HADAMARD, c) for c in big.cats], tag)
        outs = [f"{prefix}.m{k}" for k in range(1, 8)]
        nb.add_slice([(K.MEASURE, c, {"label": o}) for c, o in zip(big.cats, outs)], tag)
        nb.add_rule("xor", [prefix], outs)
        rounds.append(prefix)
        if r == 1:
            emit_recovery(nb, data, anc, gate=0, block=0)
    nb.add_rule("differ", ["pi8.reject"], rounds)
    nb.acceptance = Condition.when("pi8.reject", False)
    fix = Tag("pi8_measurement", round=2)
    nb.add_slice([(K.SIGN_FLIP, q) for q in data], fix, Condition.when(rounds[0]))
    nb.add_slice([(K.BIT_FLIP, q) for q in data], fix, Condition.when(rounds[0]))
    return nb.build()


def build_pi8_analog() -> Network:
    """Unencoded version of :func:`build_pi8_prep` small enough for the oracle.

    Qubit 0 is the data qubit, prepared in |0>; qubits 1 and 2 control the
    two H measurements.
    """
    nb = NetworkBuilder("pi8_analog")
    d = nb.add_qubit("data", 0, 1)
    ctrl = [nb.add_qubit("ancilla"), nb.add_qubit("ancilla")]
    nb.add_slice([(K.PREPARE, d)], Tag("data_prep"))
    for r, c in enumerate(ctrl, start=1):
        tag = Tag("pi8_measurement", round=r)
        nb.add_slice([(K.PREPARE, c)], tag)
        nb.add_slice([(K.HADAMARD, c)], tag)
        nb.add_slice([(K.CONTROLLED_H, (c, d))], tag)
        nb.add_slice([(K.HADAMARD, c)], tag)
        nb.add_slice([(K.MEASURE, c, {"label": f"m{r}"})], tag)
    nb.add_rule("differ", ["reject"], ["m1", "m2"])
    nb.acceptance = Condition.when("reject", False)
    fix = Tag("pi8_measurement", round=2)
    # bit-and-sign flip: |5pi/8> -> -|pi/8>
    nb.add_slice([(K.SIGN_FLIP, d)], fix, Condition.when("m1"))
    nb.add_slice([(K.BIT_FLIP, d)], fix, Condition.when("m1"))
    return nb.build(memory_roles=())


PI8_ANGLE = math.pi / 8

# Standard seven-phase Toffoli circuit; "T" / "Td" are the pi/4 phase and its inverse.
_TOFFOLI_STEPS = (
    ("H", 2), ("CNOT", 1, 2), ("Td", 2), ("CNOT", 0, 2), ("T", 2), ("CNOT", 1, 2), ("Td", 2),
    ("CNOT", 0, 2), ("Td", 1), ("T", 2), ("CNOT", 0, 1), ("H", 2), ("Td", 1), ("CNOT", 0, 1),
    ("T", 0), ("S", 1),
)


def build_toffoli_gadget() -> Network:
    """Toffoli on qubits 0, 1 (controls) and 2 (target) from normalizer gates
    and |pi/8> ancillas.

    Each pi/4 phase on qubit ``d`` is teleported in: the ancilla (qubit 3) is
    prepared in |pi/8>, turned into ``T|+>`` by ``H S_i H`` followed by a
    bit flip, coupled with CNOT ``d -> ancilla`` and measured; a 1 outcome
    means ``T^dagger`` was applied, fixed by ``S_i``. The inverse phase is
    a pi/4 phase followed by ``S_i`` and a sign flip.
    """
    nb = NetworkBuilder("toffoli")
    reg = [nb.add_qubit("data", 0, j) for j in (1, 2, 3)]
    anc = nb.add_qubit("ancilla")
    tag = Tag("toffoli", block=None)
    n_t = 0
    for step in _TOFFOLI_STEPS:
        op = step[0]
        if op == "H":
            nb.add_slice([(K.HADAMARD, reg[step[1]])], tag)
        elif op == "S":
            nb.add_slice([(K.PHASE, reg[step[1]])], tag)
        elif op == "CNOT":
            nb.add_slice([(K.CNOT, (reg[step[1]], reg[step[2]]))], tag)
        else:
            n_t += 1
            d = reg[step[1]]
            key = f"t{n_t}"
            nb.add_slice([(K.PREPARE, anc, {"angle": PI8_ANGLE})], tag)
            for g in (K.HADAMARD, K.PHASE, K.HADAMARD, K.BIT_FLIP):
                nb.add_slice([(g, anc)], tag)
            nb.add_slice([(K.CNOT, (d, anc))], tag)
            nb.add_slice([(K.MEASURE, anc, {"label": key})], tag)
            nb.add_slice([(K.PHASE, d)], tag, Condition.when(key))
            if op == "Td":
                nb.add_slice([(K.PHASE, d)], tag)
                nb.add_slice([(K.SIGN_FLIP, d)], tag)
    return nb.build(memory_roles=())
