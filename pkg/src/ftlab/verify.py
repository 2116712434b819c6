"""Oracle-backed verification suites: propagation table, code checks, gadgets."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import oracle, steane
from .builders import build_pi8_analog, build_toffoli_gadget
from .oracle import GATE_MATRICES, embed, equal_up_to_global_phase, pauli_matrix
from .pauli import GateKind, PauliOperator, conjugate_through_gate

K = GateKind


@dataclass(frozen=True)
class PropagationIdentity:
    """Printed ``E V = V E'`` with ``E'`` as printed (text form)."""

    text: str
    error: str
    gate: GateKind
    qubits: tuple[int, ...]
    printed: str


TABLE = (
    PropagationIdentity("SN = -NS", "+S", K.BIT_FLIP, (0,), "-S"),
    PropagationIdentity("S H = H N", "+S", K.HADAMARD, (0,), "+N"),
    PropagationIdentity("N H = H S", "+N", K.HADAMARD, (0,), "+S"),
    PropagationIdentity("S S_i = S_i S", "+S", K.PHASE, (0,), "+S"),
    PropagationIdentity("N S_i = -i S_i N", "+N", K.PHASE, (0,), "-iN"),
    PropagationIdentity("(I x S) N_2 = N_2 (S x S)", "+IS", K.CNOT, (0, 1), "+SS"),
    PropagationIdentity("(S x I) N_2 = -N_2 (S x I)", "+SI", K.CNOT, (0, 1), "-SI"),
    PropagationIdentity("(I x N) N_2 = N_2 (I x N)", "+IN", K.CNOT, (0, 1), "+IN"),
    PropagationIdentity("(N x I) N_2 = N_2 (N x N)", "+NI", K.CNOT, (0, 1), "+NN"),
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def check_identity(ident: PropagationIdentity, tol: float = 1e-12) -> dict:
    err = PauliOperator.from_string(ident.error)
    computed = conjugate_through_gate(err, ident.gate, ident.qubits)
    printed = PauliOperator.from_string(ident.printed)
    n = err.n_qubits
    v = embed(GATE_MATRICES[ident.gate], ident.qubits, n)
    exact = v.conj().T @ pauli_matrix(err) @ v
    oracle_ok = bool(np.abs(exact - pauli_matrix(computed)).max() <= tol)
    printed_ok = bool(np.abs(exact - pauli_matrix(printed)).max() <= tol)
    return {
        "identity": ident.text,
        "printed": ident.printed,
        "computed": str(computed),
        "mask_match": computed.same_type(printed),
        "phase_match": printed_ok,
        "oracle_agrees": oracle_ok,
        "verdict": "match" if printed_ok else "oracle-overridden",
    }


def table_suite() -> list[dict]:
    return [check_identity(i) for i in TABLE]


def code_suite() -> list[Check]:
    return [Check(r.name, bool(r.passed), r.detail) for r in steane.codespace_check()]


PI8 = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
PI8_MINUS = np.array([np.cos(5 * np.pi / 8), np.sin(5 * np.pi / 8)])


def gadget_suite(tol: float = 1e-10) -> list[Check]:
    checks = []
    ops = oracle.branch_operators(build_toffoli_gadget(), [0, 1, 2])
    worst = 0.0
    good = True
    for mat, _ in ops.values():
        scaled = mat * np.sqrt(len(ops))
        good &= equal_up_to_global_phase(scaled, oracle.TOFFOLI, tol)
        k = np.unravel_index(np.argmax(np.abs(oracle.TOFFOLI)), (8, 8))
        worst = max(worst, float(np.abs(scaled - scaled[k] * oracle.TOFFOLI).max()))
    checks.append(Check("toffoli gadget", bool(good), f"{len(ops)} branches, max deviation {worst:.1e}"))

    h = oracle.H
    checks.append(Check("|pi/8> is the +1 eigenvector of H", bool(np.abs(h @ PI8 - PI8).max() < 1e-12)))
    checks.append(Check("|5pi/8> is the -1 eigenvector of H", bool(np.abs(h @ PI8_MINUS + PI8_MINUS).max() < 1e-12)))
    fix = oracle.X @ oracle.Z
    checks.append(
        Check("bit-and-sign flip maps |5pi/8> to |pi/8>", equal_up_to_global_phase(fix @ PI8_MINUS, PI8, 1e-12))
    )

    net = build_pi8_analog()
    accepted = 0.0
    ok = True
    for br in oracle.simulate_branches(net, oracle.basis_state("000")):
        if not br.accepted:
            continue
        accepted += br.probability
        ok &= equal_up_to_global_phase(oracle.drop_measured(br.state, [1, 2], 3), PI8, tol)
    checks.append(Check("pi/8 purification analog", bool(ok), f"acceptance probability {accepted:.6f}"))
    return checks


def run_all() -> dict:
    table = table_suite()
    overridden = [row["identity"] for row in table if row["verdict"] != "match"]
    checks = [
        Check("propagation table agrees with the oracle", all(r["oracle_agrees"] for r in table),
              f"printed entries overridden: {'; '.join(overridden) or 'none'}"),
        *code_suite(),
        *gadget_suite(),
    ]
    return {
        "passed": all(c.passed for c in checks),
        "propagation_table": table,
        "checks": [c.to_json() for c in checks],
    }
