"""Time-sliced network representation, error locations, and classical control.

A :class:`Network` is a list of time slices; each slice holds gate
applications on disjoint qubits. Classical data flows through named bits:
measurements write their ``label``, :class:`ClassicalRule` objects derive
new bits after a slice, and a :class:`Condition` (a conjunction of
literals) gates conditional applications.

Error locations are placed once, when a network is finalized:

* an operational location after every gate except measurements;
* a memory location on every unit slice where a qubit is active (between
  its preparation and its measurement) but not acted on, for qubit roles
  listed in ``memory_roles``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import UsageError
from .pauli import GateKind

OPERATIONAL = "operational"
MEMORY = "memory"

TAG_KINDS = (
    "cat_prep",
    "bit_extraction",
    "hadamard_layer",
    "correction",
    "encoded_op",
    "data_prep",
    "pi8_measurement",
    "toffoli",
)


@dataclass(frozen=True)
class Tag:
    """Which subnetwork a gate or location belongs to.

    ``gate`` counts encoded gates along the computation (0 = the gate under
    analysis, 1 = the one after it). ``block`` is the code block, or
    ``None`` for operations spanning every block of the gate.
    """

    kind: str
    gate: int = 0
    block: int | None = 0
    attempt: int | None = None
    extraction: int | None = None
    bit: int | None = None
    cat_attempt: int | None = None
    round: int | None = None

    def __post_init__(self):
        if self.kind not in TAG_KINDS:
            raise UsageError(f"unknown tag kind {self.kind!r}")

    def with_(self, **changes) -> Tag:
        data = asdict(self)
        data.update(changes)
        return Tag(**data)


@dataclass(frozen=True)
class Condition:
    """Conjunction of literals ``bit == value`` over classical bits."""

    literals: tuple[tuple[str, bool], ...]

    @classmethod
    def when(cls, key: str, value: bool = True) -> Condition:
        return cls(((key, value),))

    def __and__(self, other: Condition | None) -> Condition:
        if other is None:
            return self
        return Condition(self.literals + other.literals)

    def evaluate(self, bits: Mapping[str, object]):
        """Works on scalars or on numpy arrays of trials."""
        result = True
        for key, value in self.literals:
            b = bits.get(key, False)
            term = b if value else np.logical_not(b)
            result = term if result is True else np.logical_and(result, term)
        return result

    def to_json(self):
        return [[k, v] for k, v in self.literals]


def and_conditions(a: Condition | None, b: Condition | None) -> Condition | None:
    if a is None:
        return b
    return a & b


@dataclass(frozen=True)
class GateApp:
    kind: GateKind
    qubits: tuple[int, ...]
    tag: Tag
    condition: Condition | None = None
    angle: float | None = None  # PREPARE: cos(angle)|0> + sin(angle)|1>
    label: str | None = None  # MEASURE: record key; CORRECTION: key prefix

    def __post_init__(self):
        if len(self.qubits) != self.kind.arity:
            raise UsageError(f"{self.kind.value} needs {self.kind.arity} qubit(s)")
        if len(set(self.qubits)) != len(self.qubits):
            raise UsageError("repeated qubit in one gate")
        if self.kind is GateKind.MEASURE and not self.label:
            raise UsageError("measurements need a record label")
        if self.kind is GateKind.CORRECTION and not self.label:
            raise UsageError("corrections need a classical key prefix")


@dataclass(frozen=True)
class ClassicalRule:
    """Derive classical bits from others.

    ``op`` is one of:

    * ``xor``    -- ``out[0] = XOR(inputs)``
    * ``any``    -- ``out[0] = OR(inputs)``
    * ``differ`` -- inputs are two equal-length words; ``out[0]`` is true when they differ
    * ``select`` -- inputs ``(c, a..., b...)``; ``out[i] = b[i] if c else a[i]``
    * ``decode`` -- inputs are six syndrome bits (printed order) and
      optionally the A1 bit; outputs are the 14 correction bits
      ``x1..x7, z1..z7`` from the decoding table, with every bit flip
      toggled when the corrected block would have A1 = -1
    """

    op: str
    out: tuple[str, ...]
    inputs: tuple[str, ...]


@dataclass(frozen=True)
class Qubit:
    index: int
    role: str  # data | cat | verify | ancilla
    block: int | None = None
    label: int | None = None  # 1..7 inside a code block


@dataclass(frozen=True)
class ErrorLocation:
    index: int
    slice: int
    kind: str
    qubits: tuple[int, ...]
    tag: Tag
    condition: Condition | None = None

    @property
    def conditional(self) -> bool:
        return self.condition is not None


@dataclass
class Network:
    qubits: list[Qubit]
    slices: list[list[GateApp]]
    rules: list[tuple[int, ClassicalRule]] = field(default_factory=list)
    locations: list[ErrorLocation] = field(default_factory=list)
    acceptance: Condition | None = None
    name: str = ""

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def gates(self) -> Iterable[tuple[int, GateApp]]:
        for t, slice_ in enumerate(self.slices):
            for app in slice_:
                yield t, app

    def qubits_with_role(self, role: str, block: int | None = None) -> list[int]:
        return [
            q.index for q in self.qubits if q.role == role and (block is None or q.block == block)
        ]

    def data_qubits(self, block: int) -> list[int]:
        """Data qubits of ``block`` ordered by their label 1..7."""
        qs = [q for q in self.qubits if q.role == "data" and q.block == block]
        return [q.index for q in sorted(qs, key=lambda q: q.label)]

    @property
    def blocks(self) -> list[int]:
        return sorted({q.block for q in self.qubits if q.role == "data"})

    def check(self) -> None:
        """Raise if a slice reuses a qubit or references one outside the registry."""
        for t, slice_ in enumerate(self.slices):
            seen: set[int] = set()
            for app in slice_:
                for q in app.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise UsageError(f"slice {t}: qubit {q} not in registry")
                    if q in seen:
                        raise UsageError(f"slice {t}: qubit {q} used twice")
                    seen.add(q)

    def check_transversal(self) -> bool:
        """Qubits of different blocks meet only when they carry the same label."""
        info = {q.index: q for q in self.qubits}
        for _, app in self.gates():
            if len(app.qubits) < 2:
                continue
            data = [info[q] for q in app.qubits if info[q].role == "data"]
            blocks = {d.block for d in data}
            if len(blocks) > 1 and len({d.label for d in data}) > 1:
                return False
        return True

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        def tag(t: Tag) -> dict:
            return {k: v for k, v in asdict(t).items() if v is not None or k == "block"}

        def cond(c: Condition | None):
            return None if c is None else c.to_json()

        return {
            "name": self.name,
            "qubits": [asdict(q) for q in self.qubits],
            "slices": [
                [
                    {
                        "gate": app.kind.value,
                        "qubits": list(app.qubits),
                        "condition": cond(app.condition),
                        "tag": tag(app.tag),
                        **({"angle": app.angle} if app.angle is not None else {}),
                        **({"label": app.label} if app.label is not None else {}),
                    }
                    for app in slice_
                ]
                for slice_ in self.slices
            ],
            "rules": [[t, r.op, list(r.out), list(r.inputs)] for t, r in self.rules],
            "locations": [
                {
                    "slice": loc.slice,
                    "kind": loc.kind,
                    "qubits": list(loc.qubits),
                    "tag": tag(loc.tag),
                    "condition": cond(loc.condition),
                }
                for loc in self.locations
            ],
            "acceptance": cond(self.acceptance),
        }

    @classmethod
    def from_json(cls, data: dict) -> Network:
        def cond(c):
            return None if c is None else Condition(tuple((k, bool(v)) for k, v in c))

        qubits = [Qubit(**q) for q in data["qubits"]]
        slices = [
            [
                GateApp(
                    GateKind(g["gate"]),
                    tuple(g["qubits"]),
                    Tag(**g["tag"]),
                    cond(g["condition"]),
                    g.get("angle"),
                    g.get("label"),
                )
                for g in slice_
            ]
            for slice_ in data["slices"]
        ]
        rules = [(t, ClassicalRule(op, tuple(out), tuple(inp))) for t, op, out, inp in data["rules"]]
        locations = [
            ErrorLocation(i, loc["slice"], loc["kind"], tuple(loc["qubits"]), Tag(**loc["tag"]), cond(loc["condition"]))
            for i, loc in enumerate(data["locations"])
        ]
        return cls(qubits, slices, rules, locations, cond(data.get("acceptance")), data.get("name", ""))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# -- construction -----------------------------------------------------------


class NetworkBuilder:
    """Mutable helper that assembles a :class:`Network` slice by slice.

    Every slice carries a context (tag, condition) used for memory
    locations placed in it; gates default to the same context.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.qubits: list[Qubit] = []
        self.slices: list[list[GateApp]] = []
        self.slice_context: list[tuple[Tag, Condition | None]] = []
        self.rules: list[tuple[int, ClassicalRule]] = []
        self.acceptance: Condition | None = None

    def add_qubit(self, role: str, block: int | None = None, label: int | None = None) -> int:
        q = Qubit(len(self.qubits), role, block, label)
        self.qubits.append(q)
        return q.index

    def add_block(self, block: int) -> list[int]:
        return [self.add_qubit("data", block, j) for j in range(1, 8)]

    def add_slice(
        self,
        gates: Sequence[tuple],
        tag: Tag,
        condition: Condition | None = None,
    ) -> int:
        """Append a slice. ``gates`` holds ``(kind, qubits, **extras)``-style tuples.

        Each entry is ``(kind, qubits)`` or ``(kind, qubits, extras)`` where
        ``extras`` is a dict with optional ``angle``, ``label``, ``tag``,
        ``condition`` overrides.
        """
        apps = []
        for entry in gates:
            kind, qubits = entry[0], entry[1]
            extras = entry[2] if len(entry) > 2 else {}
            if isinstance(qubits, int):
                qubits = (qubits,)
            apps.append(
                GateApp(
                    kind,
                    tuple(qubits),
                    extras.get("tag", tag),
                    and_conditions(condition, extras.get("condition")),
                    extras.get("angle"),
                    extras.get("label"),
                )
            )
        self.slices.append(apps)
        self.slice_context.append((tag, condition))
        return len(self.slices) - 1

    def add_rule(self, op: str, out: Sequence[str], inputs: Sequence[str]) -> None:
        if not self.slices:
            raise UsageError("rules run after a slice; add one first")
        self.rules.append((len(self.slices) - 1, ClassicalRule(op, tuple(out), tuple(inputs))))

    def build(self, memory_roles: Iterable[str] = ("cat", "verify")) -> Network:
        net = Network(list(self.qubits), [list(s) for s in self.slices], list(self.rules),
                      acceptance=self.acceptance, name=self.name)
        net.check()
        net.locations = place_locations(net, self.slice_context, frozenset(memory_roles))
        return net


def place_locations(
    network: Network,
    slice_context: Sequence[tuple[Tag, Condition | None]],
    memory_roles: frozenset[str],
) -> list[ErrorLocation]:
    """Deterministic location placement from network structure."""
    roles = [q.role for q in network.qubits]
    # Activity windows: a qubit is live from a preparation up to the next measurement.
    live_at: list[set[int]] = [set() for _ in network.slices]
    n = network.n_qubits
    prepared_at: list[int | None] = [None] * n
    for t, slice_ in enumerate(network.slices):
        for app in slice_:
            q = app.qubits[0]
            if app.kind is GateKind.PREPARE:
                if prepared_at[q] is None:
                    prepared_at[q] = t
            elif app.kind is GateKind.MEASURE and prepared_at[q] is not None:
                for s in range(prepared_at[q], t + 1):
                    live_at[s].add(q)
                prepared_at[q] = None
    for q, start in enumerate(prepared_at):
        if start is not None:
            for s in range(start, len(network.slices)):
                live_at[s].add(q)

    locations: list[ErrorLocation] = []
    for t, slice_ in enumerate(network.slices):
        busy: set[int] = set()
        for app in slice_:
            busy.update(app.qubits)
            if app.kind is not GateKind.MEASURE:
                locations.append(
                    ErrorLocation(len(locations), t, OPERATIONAL, app.qubits, app.tag, app.condition)
                )
        tag, cond = slice_context[t]
        for q in sorted(live_at[t] - busy):
            if roles[q] in memory_roles:
                locations.append(ErrorLocation(len(locations), t, MEMORY, (q,), tag, cond))
    return locations


# -- counting -----------------------------------------------------------------

LocationFilter = Callable[[ErrorLocation], bool]


def exclude_second_cat_attempt(loc: ErrorLocation) -> bool:
    return not (loc.tag.kind == "cat_prep" and loc.tag.cat_attempt == 2)


def count_locations(network: Network, keep: LocationFilter | None = None) -> tuple[int, int]:
    """(operational, memory) tallies of the locations passing ``keep``."""
    ops = mem = 0
    for loc in network.locations:
        if keep is not None and not keep(loc):
            continue
        if loc.kind == OPERATIONAL:
            ops += 1
        else:
            mem += 1
    return ops, mem


def coverage_ok(network: Network, memory_roles: Iterable[str] = ("cat", "verify")) -> bool:
    """Each qubit-slice cell is a gate, a memory location, or inactive -- never two."""
    memory = {(loc.slice, loc.qubits[0]) for loc in network.locations if loc.kind == MEMORY}
    for t, slice_ in enumerate(network.slices):
        for app in slice_:
            for q in app.qubits:
                if (t, q) in memory:
                    return False
    return len(memory) == sum(1 for loc in network.locations if loc.kind == MEMORY)


# -- classical processing -----------------------------------------------------


def apply_rule(rule: ClassicalRule, bits: dict) -> None:
    """Evaluate ``rule`` in place on ``bits`` (bools or numpy bool arrays)."""
    get = [bits.get(k, False) for k in rule.inputs]
    if rule.op == "xor":
        acc = get[0]
        for b in get[1:]:
            acc = np.logical_xor(acc, b)
        bits[rule.out[0]] = acc
    elif rule.op == "any":
        acc = get[0]
        for b in get[1:]:
            acc = np.logical_or(acc, b)
        bits[rule.out[0]] = acc
    elif rule.op == "differ":
        half = len(get) // 2
        acc = False
        for a, b in zip(get[:half], get[half:]):
            acc = np.logical_or(acc, np.logical_xor(a, b))
        bits[rule.out[0]] = acc
    elif rule.op == "select":
        c, rest = get[0], get[1:]
        half = len(rest) // 2
        for key, a, b in zip(rule.out, rest[:half], rest[half:]):
            bits[key] = np.where(c, b, a)
    elif rule.op == "decode":
        from .steane import decode_arrays

        xs, zs = decode_arrays()
        index = 0
        for k, b in enumerate(get[:6]):
            index = index + (np.asarray(b, dtype=np.int64) << k)
        # with A1 as a seventh input, also flip the block back to A1 = +1
        flip = False
        if len(get) == 7:
            flip = np.logical_xor(get[6], xs[index].any(axis=-1))
        for q in range(7):
            bits[rule.out[q]] = np.logical_xor(xs[index, q], flip)
            bits[rule.out[7 + q]] = zs[index, q]
    else:
        raise UsageError(f"unknown classical rule {rule.op!r}")
    for key in rule.out:
        if np.ndim(bits[key]) == 0:
            bits[key] = bool(bits[key])
