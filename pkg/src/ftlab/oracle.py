"""Dense state-vector and matrix simulation for small networks.

Qubit 0 is the most significant bit of a basis index, matching the
left-to-right tensor order used by :class:`~ftlab.pauli.PauliOperator`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import OracleSizeError, UnsupportedNetworkError, UsageError
from .network import Network, apply_rule
from .pauli import GateKind, PauliOperator

MAX_QUBITS = 8

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_I = np.diag([1, 1j])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CH = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), H]])
TOFFOLI = np.eye(8, dtype=complex)[[0, 1, 2, 3, 4, 5, 7, 6]]

GATE_MATRICES = {
    GateKind.BIT_FLIP: X,
    GateKind.SIGN_FLIP: Z,
    GateKind.PHASE: S_I,
    GateKind.HADAMARD: H,
    GateKind.CNOT: CNOT,
    GateKind.CONTROLLED_H: CH,
}


def pauli_matrix(p: PauliOperator) -> np.ndarray:
    factors = []
    for q in range(p.n_qubits):
        m = I2
        if (p.x_mask >> q) & 1:
            m = X
        if (p.z_mask >> q) & 1:
            m = m @ Z
        factors.append(m)
    mat = reduce(np.kron, factors, np.eye(1, dtype=complex))
    return (1j**p.phase) * mat


def embed(gate: np.ndarray, qubits, n: int) -> np.ndarray:
    """Full ``2^n`` matrix of ``gate`` acting on ``qubits`` (in that order)."""
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    perm = list(qubits) + rest
    full = np.kron(gate, np.eye(2 ** (n - k), dtype=complex))
    # full acts on the permuted register; reorder axes back
    t = full.reshape([2] * (2 * n))
    inv = np.argsort(perm)
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(2**n, 2**n)


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise OracleSizeError(f"{n} qubits exceeds the oracle cap of {MAX_QUBITS}")


def unitary_of_network(network: Network) -> np.ndarray:
    n = network.n_qubits
    _check_size(n)
    u = np.eye(2**n, dtype=complex)
    for _, app in network.gates():
        if app.kind not in GATE_MATRICES or app.condition is not None:
            raise UnsupportedNetworkError(f"{app.kind.value} has no fixed unitary action")
        u = embed(GATE_MATRICES[app.kind], app.qubits, n) @ u
    return u


def apply_gate(state: np.ndarray, gate: np.ndarray, qubits, n: int) -> np.ndarray:
    k = len(qubits)
    psi = np.moveaxis(state.reshape([2] * n), list(qubits), list(range(k)))
    shape = psi.shape
    psi = (gate @ psi.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(psi, list(range(k)), list(qubits)).reshape(-1)


def _project(state: np.ndarray, qubit: int, n: int, outcome: int) -> np.ndarray:
    psi = state.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[qubit] = 1 - outcome
    psi[tuple(idx)] = 0
    return psi.reshape(-1)


def prepared_state(angle: float | None) -> np.ndarray:
    a = 0.0 if angle is None else angle
    return np.array([np.cos(a), np.sin(a)], dtype=complex)


@dataclass
class Branch:
    record: dict
    probability: float
    state: np.ndarray
    accepted: bool = True


def simulate_branches(
    network: Network,
    state: np.ndarray,
    tol: float = 1e-14,
) -> list[Branch]:
    """Enumerate every measurement branch of ``network`` on ``state``.

    Preparations on a qubit that is still entangled split the branch by an
    unrecorded measurement before the reset. Branches whose probability is
    below ``tol`` are dropped.
    """
    n = network.n_qubits
    _check_size(n)
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**n,):
        raise UsageError(f"state must have {2**n} amplitudes")
    rules_after: dict[int, list] = {}
    for t, rule in network.rules:
        rules_after.setdefault(t, []).append(rule)

    branches = [Branch({}, 1.0, state / np.linalg.norm(state))]
    for t, slice_ in enumerate(network.slices):
        for app in slice_:
            nxt = []
            for br in branches:
                if app.condition is not None and not app.condition.evaluate(br.record):
                    nxt.append(br)
                    continue
                nxt.extend(_step(br, app, n, tol))
            branches = nxt
        for rule in rules_after.get(t, ()):
            for br in branches:
                apply_rule(rule, br.record)
    if network.acceptance is not None:
        for br in branches:
            br.accepted = bool(network.acceptance.evaluate(br.record))
    return branches


def _split(br: Branch, q: int, n: int, tol: float):
    for outcome in (0, 1):
        psi = _project(br.state, q, n, outcome)
        p = float(np.vdot(psi, psi).real)
        if p * br.probability > tol:
            yield outcome, p, psi / np.sqrt(p)


def _step(br: Branch, app, n: int, tol: float):
    q = app.qubits[0]
    if app.kind is GateKind.MEASURE:
        for outcome, p, psi in _split(br, q, n, tol):
            yield Branch({**br.record, app.label: bool(outcome)}, br.probability * p, psi)
    elif app.kind is GateKind.PREPARE:
        target = prepared_state(app.angle)
        for outcome, p, psi in _split(br, q, n, tol):
            if outcome:
                psi = apply_gate(psi, X, (q,), n)
            # qubit now |0>; rotate it to the requested state
            rot = np.array([[target[0], -target[1]], [target[1], target[0]]])
            yield Branch(dict(br.record), br.probability * p, apply_gate(psi, rot, (q,), n))
    elif app.kind is GateKind.CORRECTION:
        m = I2
        if br.record.get(app.label + ".x", False):
            m = X
        if br.record.get(app.label + ".z", False):
            m = m @ Z
        yield Branch(br.record, br.probability, apply_gate(br.state, m, (q,), n))
    else:
        yield Branch(br.record, br.probability, apply_gate(br.state, GATE_MATRICES[app.kind], app.qubits, n))


def strength(family) -> float:
    """Square root of the top eigenvalue of ``sum_i A_i^dagger A_i``."""
    family = list(family)
    if not family:
        return 0.0
    total = sum(np.conj(a).T @ a for a in family)
    return float(np.sqrt(max(np.linalg.eigvalsh(total).max(), 0.0)))


def equal_up_to_global_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    if abs(v[k]) < tol:
        return bool(np.abs(u).max() <= tol)
    c = u[k] / v[k]
    if abs(abs(c) - 1) > tol:
        return False
    return bool(np.abs(u - c * v).max() <= tol)


def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1
    return psi


def drop_measured(state: np.ndarray, qubits, n: int) -> np.ndarray:
    """Project measured-out ``qubits`` onto their (definite) values and drop them."""
    psi = state.reshape([2] * n)
    k = np.unravel_index(np.argmax(np.abs(psi)), psi.shape)
    idx = tuple(k[q] if q in qubits else slice(None) for q in range(n))
    return psi[idx].reshape(-1)


def branch_operators(network: Network, register, tol: float = 1e-12) -> dict:
    """Linear map on ``register`` realized by each measurement record.

    The remaining qubits start in |0> and must end in a definite basis state
    (they have been measured or reset). Returns ``{record: (matrix, accepted)}``
    with records as sorted item tuples; ``matrix`` carries the amplitude
    ``sqrt(probability)`` of the branch.
    """
    n = network.n_qubits
    register = list(register)
    others = [q for q in range(n) if q not in register]
    dim = 2 ** len(register)
    out: dict = {}
    for col in range(dim):
        bits = format(col, f"0{len(register)}b")
        full = ["0"] * n
        for q, b in zip(register, bits):
            full[q] = b
        for br in simulate_branches(network, basis_state("".join(full)), tol=tol):
            key = tuple(sorted(br.record.items()))
            mat, _ = out.setdefault(key, (np.zeros((dim, dim), dtype=complex), br.accepted))
            reduced = drop_measured(br.state, others, n)
            # keep register order: qubits in ``register`` listed ascending within psi
            order = np.argsort(np.argsort(register))
            t = reduced.reshape([2] * len(register)).transpose(order).reshape(-1)
            mat[:, col] = np.sqrt(br.probability) * t
    return out
