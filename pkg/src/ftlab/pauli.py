"""Standard errors with exact phases, and how they move through gates.

A :class:`PauliOperator` on ``n`` qubits is stored as

    i**phase * (X**x_0 Z**z_0) (x) (X**x_1 Z**z_1) (x) ...

with qubit 0 the leftmost tensor factor. ``X`` is the bit flip ``N`` and
``Z`` the sign flip ``S``; a qubit carrying both is written ``B`` and its
matrix is ``X Z = -i sigma_y``. The text form is a phase prefix (``+``,
``i``, ``-``, ``-i``) followed by one letter per qubit from ``INSB``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

from .errors import UnsupportedPropagationError, UsageError

if TYPE_CHECKING:
    from .network import Condition, ErrorLocation, Network

_PHASE_PREFIX = ("+", "i", "-", "-i")
_LETTERS = "INSB"


@dataclass(frozen=True)
class PauliOperator:
    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0  # exponent of i, 0..3

    def __post_init__(self):
        if self.n_qubits < 0:
            raise UsageError("negative qubit count")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise UsageError("mask wider than the qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliOperator:
        """One standard error (``N``, ``S`` or ``B``) on ``qubit`` of an ``n``-qubit register."""
        if not 0 <= qubit < n:
            raise UsageError(f"qubit {qubit} out of range for {n} qubits")
        code = _LETTERS.index(letter)
        return cls(n, (code & 1) << qubit, (code >> 1) << qubit)

    @classmethod
    def from_masks(cls, n: int, xs: Iterable[int] = (), zs: Iterable[int] = (), phase: int = 0):
        x = 0
        z = 0
        for q in xs:
            x |= 1 << q
        for q in zs:
            z |= 1 << q
        return cls(n, x, z, phase)

    @classmethod
    def from_string(cls, text: str) -> PauliOperator:
        """Parse the ``+INSB`` text form."""
        for prefix in ("-i", "+", "i", "-"):
            if text.startswith(prefix):
                body = text[len(prefix):]
                phase = _PHASE_PREFIX.index(prefix)
                break
        else:
            raise UsageError(f"missing phase prefix in {text!r}")
        x = z = 0
        for q, ch in enumerate(body):
            if ch not in _LETTERS:
                raise UsageError(f"bad letter {ch!r} in {text!r}")
            code = _LETTERS.index(ch)
            x |= (code & 1) << q
            z |= (code >> 1) << q
        return cls(len(body), x, z, phase)

    @classmethod
    def from_sigma(cls, text: str) -> PauliOperator:
        """Build from a Hermitian Pauli string over ``IXYZ`` (``Y = i X Z``)."""
        x = z = 0
        phase = 0
        for q, ch in enumerate(text):
            if ch == "X":
                x |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
                phase += 1
            elif ch != "I":
                raise UsageError(f"bad sigma letter {ch!r}")
        return cls(len(text), x, z, phase)

    def __str__(self) -> str:
        letters = "".join(_LETTERS[self.letter_code(q)] for q in range(self.n_qubits))
        return _PHASE_PREFIX[self.phase] + letters

    def letter_code(self, qubit: int) -> int:
        return ((self.x_mask >> qubit) & 1) | (((self.z_mask >> qubit) & 1) << 1)

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    def is_identity(self, ignore_phase: bool = True) -> bool:
        return self.x_mask == 0 and self.z_mask == 0 and (ignore_phase or self.phase == 0)

    def same_type(self, other: PauliOperator) -> bool:
        """Equality of masks, global phase ignored."""
        return (self.n_qubits, self.x_mask, self.z_mask) == (other.n_qubits, other.x_mask, other.z_mask)

    def commutes_with(self, other: PauliOperator) -> bool:
        _check_sizes(self, other)
        return ((self.x_mask & other.z_mask).bit_count() + (self.z_mask & other.x_mask).bit_count()) % 2 == 0

    def restrict(self, qubits: Sequence[int]) -> PauliOperator:
        """The factor on ``qubits`` (in the given order), dropping the phase."""
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x_mask >> q) & 1) << i
            z |= ((self.z_mask >> q) & 1) << i
        return PauliOperator(len(qubits), x, z)

    def embed(self, n: int, qubits: Sequence[int]) -> PauliOperator:
        """Place this operator on ``qubits`` of an ``n``-qubit register."""
        if len(qubits) != self.n_qubits:
            raise UsageError("embedding needs one target qubit per operator qubit")
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x_mask >> i) & 1) << q
            z |= ((self.z_mask >> i) & 1) << q
        return PauliOperator(n, x, z, self.phase)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return multiply(self, other)


def _check_sizes(a: PauliOperator, b: PauliOperator) -> None:
    if a.n_qubits != b.n_qubits:
        raise UsageError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Exact operator product ``a @ b``."""
    _check_sizes(a, b)
    # Z^z X^x = (-1)^(x z) X^x Z^z when moving b's bit flips left past a's sign flips
    swaps = (a.z_mask & b.x_mask).bit_count()
    return PauliOperator(
        a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, a.phase + b.phase + 2 * swaps
    )


class GateKind(enum.Enum):
    BIT_FLIP = "N"
    SIGN_FLIP = "S"
    PHASE = "S_i"
    HADAMARD = "H"
    CNOT = "N_2"
    PREPARE = "prep"
    MEASURE = "meas"
    # Outside Table 1 but needed by the builders:
    CONTROLLED_H = "CH"  # unitary, not in the normalizer group
    CORRECTION = "corr"  # standard error chosen at run time from classical data

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.CONTROLLED_H) else 1

    @property
    def is_unitary(self) -> bool:
        return self not in (GateKind.PREPARE, GateKind.MEASURE)

    @property
    def is_normalizer(self) -> bool:
        return self.is_unitary and self is not GateKind.CONTROLLED_H


# Images of X_q and Z_q under U P U^dagger, as (x, z, phase) on the gate's local qubits.
_FORWARD = {
    GateKind.BIT_FLIP: {("X", 0): (1, 0, 0), ("Z", 0): (0, 1, 2)},
    GateKind.SIGN_FLIP: {("X", 0): (1, 0, 2), ("Z", 0): (0, 1, 0)},
    GateKind.PHASE: {("X", 0): (1, 1, 1), ("Z", 0): (0, 1, 0)},
    GateKind.HADAMARD: {("X", 0): (0, 1, 0), ("Z", 0): (1, 0, 0)},
    GateKind.CNOT: {
        ("X", 0): (0b11, 0, 0),
        ("X", 1): (0b10, 0, 0),
        ("Z", 0): (0, 0b01, 0),
        ("Z", 1): (0, 0b11, 0),
    },
}
_BACKWARD = dict(_FORWARD)
_BACKWARD[GateKind.PHASE] = {("X", 0): (1, 1, 3), ("Z", 0): (0, 1, 0)}


def _conjugate_local(local: PauliOperator, table) -> PauliOperator:
    out = PauliOperator(local.n_qubits, phase=local.phase)
    for axis, mask in (("X", local.x_mask), ("Z", local.z_mask)):
        for q in range(local.n_qubits):
            if (mask >> q) & 1:
                x, z, ph = table[(axis, q)]
                out = multiply(out, PauliOperator(local.n_qubits, x, z, ph))
    return out


def conjugate_through_gate(
    err: PauliOperator, gate: GateKind, qubits: Sequence[int], forward: bool = False
) -> PauliOperator:
    """Move ``err`` across a unitary gate.

    By default (``forward=False``) this returns ``E'`` with ``E U = U E'``,
    i.e. the error that must act *before* the gate to reproduce ``err``
    acting after it. With ``forward=True`` it returns ``U E U^dagger``.
    """
    if not gate.is_unitary:
        raise UsageError(f"{gate.value} is not unitary; use measurement_effect")
    if gate is GateKind.CORRECTION:
        raise UsageError("a run-time correction has no fixed conjugation action")
    if len(qubits) != gate.arity:
        raise UsageError(f"{gate.value} acts on {gate.arity} qubit(s), got {len(qubits)}")
    local = err.restrict(qubits)
    if local.is_identity():
        return err
    if not gate.is_normalizer:
        raise UnsupportedPropagationError(f"cannot conjugate a standard error through {gate.value}")
    image = _conjugate_local(local, (_FORWARD if forward else _BACKWARD)[gate])
    keep = ~sum(1 << q for q in qubits)
    rest = PauliOperator(err.n_qubits, err.x_mask & keep, err.z_mask & keep, err.phase)
    return multiply(rest, image.embed(err.n_qubits, qubits))


def measurement_effect(err: PauliOperator, qubit: int) -> bool:
    """Whether ``err`` inverts a classical-basis measurement of ``qubit``."""
    return bool((err.x_mask >> qubit) & 1)


def _drop_qubit(err: PauliOperator, qubit: int) -> PauliOperator:
    keep = ~(1 << qubit)
    return PauliOperator(err.n_qubits, err.x_mask & keep, err.z_mask & keep, err.phase)


def propagate_to_boundary(
    network: Network,
    location: ErrorLocation,
    err: PauliOperator,
    executed: Callable[[Condition], bool] | None = None,
) -> tuple[PauliOperator, list[str]]:
    """Push an error inserted at ``location`` to the end of ``network``.

    ``err`` may be given on the location's own qubits or on the whole
    register. Measurements record a flip when the error carries a bit
    flip on the measured qubit; measured and re-prepared qubits shed their
    error component (the phase is then only meaningful up to sign).
    Conditional gates run when ``executed(condition)`` is true; by default
    they are skipped.

    Returns the error at the output boundary and the labels of flipped
    measurements, in time order.
    """
    n = network.n_qubits
    if err.n_qubits == len(location.qubits) and err.n_qubits != n:
        err = err.embed(n, location.qubits)
    elif err.n_qubits != n:
        raise UsageError("error must live on the location or on the whole register")
    flips: list[str] = []
    for slice_ in network.slices[location.slice + 1:]:
        for app in slice_:
            if app.condition is not None and not (executed and executed(app.condition)):
                continue
            if app.kind is GateKind.MEASURE:
                q = app.qubits[0]
                if measurement_effect(err, q):
                    flips.append(app.label)
                err = _drop_qubit(err, q)
            elif app.kind is GateKind.PREPARE:
                err = _drop_qubit(err, app.qubits[0])
            elif app.kind is GateKind.CORRECTION:
                continue  # a standard error: changes the sign at most
            else:
                err = conjugate_through_gate(err, app.kind, app.qubits, forward=True)
    return err, flips
