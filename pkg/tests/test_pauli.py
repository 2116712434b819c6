import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftlab.builders import K
from ftlab.errors import UnsupportedPropagationError, UsageError
from ftlab.network import NetworkBuilder, Tag
from ftlab.oracle import GATE_MATRICES, embed, pauli_matrix, unitary_of_network
from ftlab.pauli import (
    GateKind,
    PauliOperator,
    conjugate_through_gate,
    measurement_effect,
    multiply,
    propagate_to_boundary,
)

P = PauliOperator.from_string


def paulis(n):
    return st.builds(
        PauliOperator,
        st.just(n),
        st.integers(0, 2**n - 1),
        st.integers(0, 2**n - 1),
        st.integers(0, 3),
    )


def small_paulis(n, max_weight=2):
    for x, z in itertools.product(range(2**n), repeat=2):
        if bin(x | z).count("1") <= max_weight:
            for ph in range(4):
                yield PauliOperator(n, x, z, ph)


def test_text_round_trip():
    for text in ["+INSB", "-iSS", "iN", "-I"]:
        assert str(P(text)) == text


def test_bad_text():
    with pytest.raises(UsageError):
        P("NS")
    with pytest.raises(UsageError):
        P("+NX")


def test_sn_equals_minus_ns():
    s, n = P("+S"), P("+N")
    sn, ns = multiply(s, n), multiply(n, s)
    assert sn.same_type(ns)
    assert (sn.phase - ns.phase) % 4 == 2


def test_identity_is_neutral():
    p = P("iNSB")
    e = PauliOperator.identity(3)
    assert multiply(e, p) == p
    assert multiply(p, e) == p


def test_nn_matches_matrix_product():
    n = P("+N")
    prod = multiply(n, n)
    assert prod.is_identity()
    np.testing.assert_allclose(pauli_matrix(prod), pauli_matrix(n) @ pauli_matrix(n), atol=1e-12)


def test_mismatched_sizes():
    with pytest.raises(UsageError):
        multiply(P("+N"), P("+NN"))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_products_match_dense_matrices(n):
    ops = list(small_paulis(n))
    for a in ops[::3]:
        for b in ops[::5]:
            np.testing.assert_allclose(
                pauli_matrix(multiply(a, b)), pauli_matrix(a) @ pauli_matrix(b), atol=1e-12
            )


@given(paulis(3), paulis(3), paulis(3))
def test_associative(a, b, c):
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@given(paulis(4))
def test_square_has_empty_masks(p):
    sq = multiply(p, p)
    assert sq.is_identity()
    assert sq.phase in (0, 2)


GATES = [
    (GateKind.BIT_FLIP, (0,)),
    (GateKind.SIGN_FLIP, (1,)),
    (GateKind.PHASE, (2,)),
    (GateKind.HADAMARD, (0,)),
    (GateKind.CNOT, (0, 2)),
    (GateKind.CNOT, (2, 1)),
]


@pytest.mark.parametrize("gate,qubits", GATES)
def test_backward_conjugation_matches_oracle(gate, qubits):
    u = embed(GATE_MATRICES[gate], qubits, 3)
    for e in small_paulis(3, max_weight=3):
        e2 = conjugate_through_gate(e, gate, qubits)
        np.testing.assert_allclose(pauli_matrix(e) @ u, u @ pauli_matrix(e2), atol=1e-12)


@pytest.mark.parametrize("gate,qubits", GATES)
def test_forward_then_backward_is_identity(gate, qubits):
    for e in small_paulis(3, max_weight=3):
        there = conjugate_through_gate(e, gate, qubits, forward=True)
        assert conjugate_through_gate(there, gate, qubits) == e


def test_printed_examples():
    assert conjugate_through_gate(P("+S"), GateKind.HADAMARD, (0,)) == P("+N")
    assert conjugate_through_gate(P("+NI"), GateKind.CNOT, (0, 1)) == P("+NN")
    assert conjugate_through_gate(P("+IS"), GateKind.CNOT, (0, 1)) == P("+SS")


@pytest.mark.parametrize("gate,qubits", GATES)
def test_identity_passes_through(gate, qubits):
    e = PauliOperator.identity(3)
    assert conjugate_through_gate(e, gate, qubits) == e


def test_non_unitary_rejected():
    with pytest.raises(UsageError):
        conjugate_through_gate(P("+N"), GateKind.MEASURE, (0,))
    with pytest.raises(UnsupportedPropagationError):
        conjugate_through_gate(P("+NI"), GateKind.CONTROLLED_H, (0, 1))


def test_measurement_effect():
    assert measurement_effect(P("+N"), 0)
    assert not measurement_effect(P("+S"), 0)
    assert not measurement_effect(P("+I"), 0)
    assert measurement_effect(P("+B"), 0)


def test_measurement_of_bit_and_sign_flip_matches_oracle():
    # outcome statistics of X|psi> and XZ|psi> agree for a measured qubit
    psi = np.array([0.6, 0.8j])
    for op in ("+N", "+B"):
        out = pauli_matrix(P(op)) @ psi
        np.testing.assert_allclose(np.abs(out) ** 2, [0.64, 0.36], atol=1e-12)


def _net(steps, n):
    nb = NetworkBuilder()
    for _ in range(n):
        nb.add_qubit("data", 0, 1)
    for gates in steps:
        nb.add_slice(gates, Tag("encoded_op", block=None))
    return nb.build(memory_roles=())


def test_sign_flip_spreads_from_cnot_target():
    net = _net([[(K.HADAMARD, 0)], [(K.CNOT, (0, 1))]], 2)
    loc = net.locations[0]  # after the H; error placed on qubit 1 instead below
    err, flips = propagate_to_boundary(net, loc, P("+IS"))
    assert err.same_type(P("+SS"))
    assert flips == []


def test_identity_propagates_to_identity():
    net = _net([[(K.HADAMARD, 0)], [(K.CNOT, (0, 1))]], 2)
    err, flips = propagate_to_boundary(net, net.locations[0], PauliOperator.identity(1))
    assert err.is_identity() and flips == []


def test_bit_flip_before_measurement():
    net = _net([[(K.HADAMARD, 0)], [(K.MEASURE, 0, {"label": "m"})]], 1)
    err, flips = propagate_to_boundary(net, net.locations[0], P("+N"))
    assert err.is_identity()
    assert flips == ["m"]


def test_propagation_matches_unitary_conjugation(rng):
    steps = [[(K.HADAMARD, 0), (K.PHASE, 1)], [(K.CNOT, (0, 1))], [(K.CNOT, (1, 2)), (K.HADAMARD, 0)], [(K.PHASE, 2)]]
    net = _net(steps, 3)
    rest = _net(steps[1:], 3)
    u = unitary_of_network(rest)
    first = net.locations[0]
    for e in small_paulis(3, max_weight=3):
        out, _ = propagate_to_boundary(net, first, e)
        np.testing.assert_allclose(u @ pauli_matrix(e) @ u.conj().T, pauli_matrix(out), atol=1e-10)


def test_composition_gate_by_gate(rng):
    steps = [[(K.HADAMARD, 0)], [(K.CNOT, (0, 1))], [(K.PHASE, 1)], [(K.CNOT, (1, 2))]]
    net = _net(steps, 3)
    for e in small_paulis(3, max_weight=2):
        step = e
        for gates in steps[1:]:
            for g, q in gates:
                q = (q,) if isinstance(q, int) else q
                step = conjugate_through_gate(step, g, q, forward=True)
        whole, _ = propagate_to_boundary(net, net.locations[0], e)
        assert whole == step


def test_non_normalizer_downstream_raises():
    net = _net([[(K.HADAMARD, 0)], [(K.CONTROLLED_H, (0, 1))]], 2)
    with pytest.raises(UnsupportedPropagationError):
        propagate_to_boundary(net, net.locations[0], P("+NI"))
