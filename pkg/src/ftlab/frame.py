"""Vectorized Pauli-frame execution of a network over a batch of trials.

The frame holds, per qubit and trial, the bit-flip and sign-flip part of
the accumulated error relative to the error-free run. Every classical
bit the builders read is deterministic (zero) without errors, so a
measurement record is just the frame's bit-flip component at that
qubit, and classical rules act directly on those flips.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import UnsupportedPropagationError, UsageError
from .network import ErrorLocation, GateApp, Network, apply_rule
from .pauli import GateKind, PauliOperator
from .steane import SUPPORTS, decode_arrays

K = GateKind


@dataclass
class Fault:
    """Errors dropped at one location for a subset of trials.

    ``codes`` packs one 2-bit code (bit flip = 1, sign flip = 2) per
    location qubit: qubit ``r`` of the location uses bits ``2r, 2r+1``.
    """

    location: ErrorLocation
    trials: np.ndarray
    codes: np.ndarray


def apply_gate(x: np.ndarray, z: np.ndarray, bits: Mapping, app: GateApp) -> None:
    mask = None
    if app.condition is not None:
        mask = np.broadcast_to(app.condition.evaluate(bits), x.shape[1:])
        if not mask.any():
            return
    kind, qs = app.kind, app.qubits
    if kind is K.MEASURE:
        q = qs[0]
        bits[app.label] = x[q].copy() if mask is None else np.where(mask, x[q], bits.get(app.label, False))
        return
    if kind is K.PREPARE:
        q = qs[0]
        if mask is None:
            x[q] = False
            z[q] = False
        else:
            x[q] &= ~mask
            z[q] &= ~mask
        return
    if kind in (K.BIT_FLIP, K.SIGN_FLIP):
        return
    if kind is K.CORRECTION:
        q = qs[0]
        cx = np.asarray(bits.get(app.label + ".x", False))
        cz = np.asarray(bits.get(app.label + ".z", False))
        if mask is not None:
            cx, cz = cx & mask, cz & mask
        x[q] ^= cx
        z[q] ^= cz
        return
    if kind is K.CONTROLLED_H:
        if x[list(qs)].any() or z[list(qs)].any():
            raise UnsupportedPropagationError("controlled-H cannot carry a Pauli frame")
        return
    if mask is None:
        mask = True
    if kind is K.HADAMARD:
        q = qs[0]
        dx = (x[q] ^ z[q]) & mask
        x[q] ^= dx
        z[q] ^= dx
    elif kind is K.PHASE:
        q = qs[0]
        z[q] ^= x[q] & mask
    elif kind is K.CNOT:
        c, t = qs
        x[t] ^= x[c] & mask
        z[c] ^= z[t] & mask
    else:
        raise UsageError(f"no frame rule for {kind.value}")


def apply_fault(x: np.ndarray, z: np.ndarray, bits: Mapping, fault: Fault) -> None:
    trials, codes = fault.trials, fault.codes
    loc = fault.location
    if loc.condition is not None:
        live = np.broadcast_to(loc.condition.evaluate(bits), x.shape[1:])[trials]
        trials, codes = trials[live], codes[live]
    for r, q in enumerate(loc.qubits):
        c = (codes >> (2 * r)) & 3
        # XOR with fancy indexing would drop repeated trials; trials are unique per fault
        x[q, trials] ^= (c & 1).astype(bool)
        z[q, trials] ^= (c >> 1).astype(bool)


@dataclass
class FrameRun:
    x: np.ndarray
    z: np.ndarray
    bits: dict = field(default_factory=dict)


def run_frame(network: Network, batch: int, faults: Sequence[Fault] = ()) -> FrameRun:
    """Execute ``network`` on ``batch`` trials with the given faults."""
    n = network.n_qubits
    x = np.zeros((n, batch), dtype=bool)
    z = np.zeros((n, batch), dtype=bool)
    bits: dict = {}
    by_slice: dict[int, list[Fault]] = {}
    for f in faults:
        by_slice.setdefault(f.location.slice, []).append(f)
    rules: dict[int, list] = {}
    for t, rule in network.rules:
        rules.setdefault(t, []).append(rule)
    for t, slice_ in enumerate(network.slices):
        for app in slice_:
            apply_gate(x, z, bits, app)
        for f in by_slice.get(t, ()):
            apply_fault(x, z, bits, f)
        for rule in rules.get(t, ()):
            apply_rule(rule, bits)
    return FrameRun(x, z, bits)


_SUPPORT_ROWS = np.array([[((j + 1) in s) for j in range(7)] for s in SUPPORTS], dtype=bool)


def decode_block(x: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ideal decoding of a block frame ``(7, B)``; returns logical (flip, sign) arrays."""
    zc = (_SUPPORT_ROWS.astype(np.int64) @ x.astype(np.int64)) & 1  # S1..S3
    xc = (_SUPPORT_ROWS.astype(np.int64) @ z.astype(np.int64)) & 1
    s = np.concatenate([zc, zc ^ xc])
    index = (s * (1 << np.arange(6))[:, None]).sum(axis=0)
    tx, tz = decode_arrays()
    rx = x ^ tx[index].T
    rz = z ^ tz[index].T
    return rx.sum(axis=0) % 2 == 1, rz.sum(axis=0) % 2 == 1


@dataclass
class TrialResult:
    accepted: bool
    logical: tuple[PauliOperator, ...]
    syndromes: dict

    @property
    def logical_identity(self) -> bool:
        return all(p.is_identity() for p in self.logical)


def _letter(flip: bool, sign: bool) -> PauliOperator:
    return PauliOperator(1, int(flip), int(sign))


def execute_pauli_frame(network: Network, assignment: Mapping[int, PauliOperator]) -> TrialResult:
    """Run one trial with ``assignment`` (location index -> error on its qubits)."""
    faults = []
    for idx, err in assignment.items():
        loc = network.locations[idx]
        if err.n_qubits != len(loc.qubits):
            raise UsageError("error must act on the location's qubits")
        faults.append(Fault(loc, np.array([0]), np.array([_pack(err)])))
    run = run_frame(network, 1, faults)
    logical = []
    for b in network.blocks:
        rows = network.data_qubits(b)
        flip, sign = decode_block(run.x[rows], run.z[rows])
        logical.append(_letter(bool(flip[0]), bool(sign[0])))
    accepted = True if network.acceptance is None else bool(network.acceptance.evaluate(run.bits))
    syndromes = {k: bool(np.asarray(v).reshape(-1)[0]) for k, v in run.bits.items() if ".s" in k or "syn" in k}
    return TrialResult(accepted, tuple(logical), syndromes)


def _pack(err: PauliOperator) -> int:
    code = 0
    for r in range(err.n_qubits):
        code |= err.letter_code(r) << (2 * r)
    return code


def logical_failures(network: Network, run: FrameRun) -> np.ndarray:
    """Per-trial flag: some block carries a logical error after ideal decoding."""
    bad = np.zeros(run.x.shape[1], dtype=bool)
    for b in network.blocks:
        rows = network.data_qubits(b)
        flip, sign = decode_block(run.x[rows], run.z[rows])
        bad |= flip | sign
    return bad


def single_fault_scan(
    network: Network,
    keep: Callable[[ErrorLocation], bool] | None = None,
) -> tuple[int, int]:
    """Inject every non-identity error at every unconditional location, one per trial.

    Returns ``(cases, logical failures)``.
    """
    locs = [loc for loc in network.locations if not loc.conditional and (keep is None or keep(loc))]
    faults = []
    start = 0
    for loc in locs:
        codes = np.arange(1, 4 ** len(loc.qubits))
        faults.append(Fault(loc, np.arange(start, start + len(codes)), codes))
        start += len(codes)
    run = run_frame(network, start, faults)
    return start, int(logical_failures(network, run).sum())
