"""The 7-qubit code: printed syndrome observables, decoding table, logical action.

Qubits carry labels 1..7; label ``j`` sits at register index ``j - 1``.
``S1``-``S3`` are sign-flip checks on the supports {4,5,6,7}, {2,3,6,7},
{1,3,5,7}; ``S4``-``S6`` are the sigma_y strings on the same supports. A
bit flip on label ``j`` therefore lights ``S1..S3`` with the binary digits
of ``j`` (most significant first); a sign flip on ``k`` lights ``S4..S6``
with the digits of ``k``, and a bit flip lights them too.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import UsageError
from .pauli import PauliOperator

N = 7
SUPPORTS = ((4, 5, 6, 7), (2, 3, 6, 7), (1, 3, 5, 7))


def _mask(labels) -> int:
    return sum(1 << (j - 1) for j in labels)


GENERATORS: tuple[PauliOperator, ...] = tuple(
    [PauliOperator(N, 0, _mask(s)) for s in SUPPORTS]
    # sigma_y^{(x)4} = (i X Z)^{(x)4} = X^s Z^s with i^4 = 1
    + [PauliOperator(N, _mask(s), _mask(s)) for s in SUPPORTS]
)
ENCODED_Z = PauliOperator(N, 0, (1 << N) - 1)  # A1
ENCODED_X = PauliOperator(N, (1 << N) - 1, 0)


@dataclass(frozen=True)
class Syndrome:
    bits: tuple[bool, ...]  # S1..S6
    encoded_bit: bool | None = None  # A1, when measured

    def __post_init__(self):
        if len(self.bits) != 6:
            raise UsageError("a syndrome has six bits")
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def from_index(cls, index: int) -> Syndrome:
        """Bit ``k`` of ``index`` is ``S_{k+1}``."""
        return cls(tuple(bool((index >> k) & 1) for k in range(6)))

    @property
    def index(self) -> int:
        return sum(int(b) << k for k, b in enumerate(self.bits))

    def __xor__(self, other: Syndrome) -> Syndrome:
        return Syndrome(tuple(a != b for a, b in zip(self.bits, other.bits)))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


ZERO = Syndrome((False,) * 6)


def syndrome_of(err: PauliOperator, with_encoded: bool = False) -> Syndrome:
    if err.n_qubits != N:
        raise UsageError(f"syndromes are defined on {N} qubits, got {err.n_qubits}")
    bits = tuple(not err.commutes_with(g) for g in GENERATORS)
    enc = (not err.commutes_with(ENCODED_Z)) if with_encoded else None
    return Syndrome(bits, enc)


def minimal_errors():
    """The 64 errors with at most one bit flip and at most one sign flip (label 0 = none)."""
    for j in range(8):
        for k in range(8):
            xs = [j - 1] if j else []
            zs = [k - 1] if k else []
            yield j, k, PauliOperator.from_masks(N, xs, zs)


@lru_cache(maxsize=None)
def _table() -> dict[int, PauliOperator]:
    table = {}
    for _, _, err in minimal_errors():
        s = syndrome_of(err).index
        if s in table:
            raise AssertionError("two minimal errors share a syndrome")
        table[s] = err
    return table


def correction_for(s: Syndrome) -> PauliOperator:
    return _table()[s.index]


@lru_cache(maxsize=None)
def decode_arrays() -> tuple[np.ndarray, np.ndarray]:
    """``(x, z)`` boolean tables of shape (64, 7) indexed by ``Syndrome.index``."""
    xs = np.zeros((64, N), dtype=bool)
    zs = np.zeros((64, N), dtype=bool)
    for s, err in _table().items():
        for q in range(N):
            xs[s, q] = (err.x_mask >> q) & 1
            zs[s, q] = (err.z_mask >> q) & 1
    return xs, zs


def classify_logical(residue: PauliOperator) -> str:
    """Logical letter (``I``, ``N``, ``S`` or ``B``) of a zero-syndrome residue."""
    flip = not residue.commutes_with(ENCODED_Z)
    sign = not residue.commutes_with(ENCODED_X)
    return "INSB"[flip | (sign << 1)]


def logical_effect(err: PauliOperator, s: Syndrome = ZERO) -> PauliOperator:
    """Standard error induced on the encoded qubit after decoding.

    ``s`` is the syndrome the block already carried; its table correction
    stands in for the error that produced it.
    """
    combined = syndrome_of(err) ^ s
    residue = err * correction_for(s) * correction_for(combined)
    if any(syndrome_of(residue).bits):
        raise AssertionError("residue left the code space")
    return PauliOperator.from_string("+" + classify_logical(residue))


def decoding_table_csv() -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["S1", "S2", "S3", "S4", "S5", "S6", "correction"])
    for index in range(64):
        s = Syndrome.from_index(index)
        writer.writerow([int(b) for b in s.bits] + [str(correction_for(s))])
    return out.getvalue()


@dataclass
class CheckReport:
    name: str
    passed: bool
    detail: str = ""


def codespace_check() -> list[CheckReport]:
    """Oracle-backed checks of the printed code."""
    from .oracle import pauli_matrix

    reports = []
    mats = [pauli_matrix(g) for g in GENERATORS]
    worst = max(np.abs(a @ b - b @ a).max() for a in mats for b in mats)
    reports.append(CheckReport("generators commute", bool(worst < 1e-12), f"max |[Si,Sj]| = {worst:.1e}"))

    proj = np.eye(2**N, dtype=complex)
    for m in mats:
        proj = proj @ (np.eye(2**N) + m) / 2
    dim = int(round(np.trace(proj).real))
    rank = int(np.linalg.matrix_rank(proj, tol=1e-9))
    reports.append(CheckReport("code space dimension", dim == 2 and rank == 2, f"dimension {rank}"))

    a1 = pauli_matrix(ENCODED_Z)
    worst = max(np.abs(a1 @ m - m @ a1).max() for m in mats)
    reports.append(CheckReport("A1 commutes with generators", bool(worst < 1e-12), f"{worst:.1e}"))

    syndromes = {syndrome_of(e).index for _, _, e in minimal_errors()}
    reports.append(CheckReport("64 distinct syndromes", len(syndromes) == 64, f"{len(syndromes)} distinct"))

    undetected = [
        f"{letter}{q + 1}"
        for q in range(N)
        for letter in "NSB"
        if not any(syndrome_of(PauliOperator.single(N, q, letter)).bits)
    ]
    reports.append(
        CheckReport("weight-1 errors detected", not undetected, "21 of 21" if not undetected else ",".join(undetected))
    )
    return reports
