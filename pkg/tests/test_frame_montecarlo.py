import numpy as np
import pytest

from ftlab import montecarlo
from ftlab.builders import K, build_pi8_prep, build_recovery
from ftlab.errors import UnsupportedPropagationError, UsageError
from ftlab.frame import Fault, decode_block, execute_pauli_frame, run_frame, single_fault_scan
from ftlab.montecarlo import (
    ErrorModelConfig,
    clopper_pearson,
    estimate_logical_error,
    fit_slope,
    generator,
    sample_instance,
    sampled_locations,
    sweep_csv,
)
from ftlab.network import NetworkBuilder, Tag
from ftlab.pauli import PauliOperator, propagate_to_boundary
from ftlab.steane import ENCODED_X, ENCODED_Z, GENERATORS, logical_effect

TAG = Tag("encoded_op", block=None)


def _random_clifford_net(rng, n=4, depth=10):
    nb = NetworkBuilder()
    for j in range(n):
        nb.add_qubit("data", 0, j + 1)
    for _ in range(depth):
        q = [int(v) for v in rng.permutation(n)]
        gates = [(K.CNOT, (q[0], q[1]))]
        gates.append(((K.HADAMARD, K.PHASE)[rng.integers(2)], q[2]))
        nb.add_slice(gates, TAG)
    return nb.build(memory_roles=())


def test_frame_agrees_with_exact_propagation(rng):
    for _ in range(5):
        net = _random_clifford_net(rng)
        for loc in net.locations[:8]:
            for code in range(1, 4 ** len(loc.qubits)):
                run = run_frame(net, 1, [Fault(loc, np.array([0]), np.array([code]))])
                local = PauliOperator(len(loc.qubits), 0, 0)
                for r in range(len(loc.qubits)):
                    c = (code >> 2 * r) & 3
                    local = local * PauliOperator.single(len(loc.qubits), r, "INSB"[c])
                out, _ = propagate_to_boundary(net, loc, local)
                assert [bool(out.x_mask >> q & 1) for q in range(4)] == list(run.x[:, 0])
                assert [bool(out.z_mask >> q & 1) for q in range(4)] == list(run.z[:, 0])


def test_decode_block_matches_table_decoder(rng):
    for _ in range(200):
        x, z = rng.integers(0, 128, size=2)
        err = PauliOperator(7, int(x), int(z))
        flip, sign = decode_block(
            np.array([[x >> q & 1] for q in range(7)], dtype=bool),
            np.array([[z >> q & 1] for q in range(7)], dtype=bool),
        )
        letter = str(logical_effect(err))[1]
        assert (bool(flip[0]), bool(sign[0])) == (letter in "NB", letter in "SB")


def test_decoder_ignores_stabilizers_and_sees_logicals():
    for g in GENERATORS:
        x = np.array([[g.x_mask >> q & 1] for q in range(7)], dtype=bool)
        z = np.array([[g.z_mask >> q & 1] for q in range(7)], dtype=bool)
        assert decode_block(x, z) == (np.array([False]), np.array([False]))
    x = np.ones((7, 1), dtype=bool)
    assert decode_block(x, ~x)[0][0]


def test_error_free_run_is_clean():
    net = build_recovery()
    run = run_frame(net, 8)
    assert not run.x.any() and not run.z.any()
    assert not any(np.any(v) for v in run.bits.values())


def test_single_faults_on_recovery_are_corrected():
    cases, bad = single_fault_scan(build_recovery())
    assert cases > 0 and bad == 0


def test_execute_one_assignment(cnot_gate_alone):
    data_loc = next(l for l in cnot_gate_alone.locations if l.tag.kind == "encoded_op")
    res = execute_pauli_frame(cnot_gate_alone, {data_loc.index: PauliOperator.from_string("+NN")})
    assert res.accepted and res.logical_identity


def test_uncorrectable_pair_is_logical(cnot_gate_alone):
    ops = [l for l in cnot_gate_alone.locations if l.tag.kind == "encoded_op"]
    assign = {ops[0].index: PauliOperator.from_string("+NI"), ops[1].index: PauliOperator.from_string("+NI")}
    res = execute_pauli_frame(cnot_gate_alone, assign)
    assert not res.logical_identity


def test_controlled_h_refuses_a_frame():
    net = build_pi8_prep()
    loc = next(l for l in net.locations if l.tag.kind == "pi8_measurement" and not l.conditional)
    with pytest.raises(UnsupportedPropagationError):
        run_frame(net, 1, [Fault(loc, np.array([0]), np.array([1]))])


# -- sampling ------------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(UsageError):
        ErrorModelConfig(p=1.5)
    with pytest.raises(UsageError):
        ErrorModelConfig(p=0.1, seed=-1)


def test_generator_keyed_by_block():
    a = generator(7, 0).integers(0, 2**32, 4)
    assert np.array_equal(a, generator(7, 0).integers(0, 2**32, 4))
    assert not np.array_equal(a, generator(7, 1).integers(0, 2**32, 4))


def test_sample_rate_and_codes(cnot_gate_alone):
    locs = sampled_locations(cnot_gate_alone, False)
    faults = sample_instance(locs, 0.01, 4096, generator(1, 0))
    hits = sum(len(f.trials) for f in faults)
    expected = 0.01 * 4096 * len(locs)
    assert abs(hits - expected) < 5 * np.sqrt(expected)
    for f in faults:
        assert len(set(f.trials.tolist())) == len(f.trials)
        assert f.codes.min() >= 1 and f.codes.max() < 4 ** len(f.location.qubits)


def test_zero_probability_never_fails():
    est = estimate_logical_error("two_qubit", 0.0, 1000, seed=3)
    assert est.failures == 0
    assert est.ci95[0] == 0.0


def test_memory_flag_adds_locations(cnot_gate_alone):
    assert len(sampled_locations(cnot_gate_alone, True)) > len(sampled_locations(cnot_gate_alone, False))


def test_unsupported_gate_class():
    with pytest.raises(UsageError):
        estimate_logical_error("pi8", 1e-3, 10)


def test_clopper_pearson_brackets_rate():
    lo, hi = clopper_pearson(10, 1000)
    assert lo < 0.01 < hi
    assert clopper_pearson(0, 100)[0] == 0.0


def test_fit_slope_of_power_law():
    ps = np.array([1e-4, 1e-3, 1e-2])
    assert fit_slope(ps, 5 * ps**2) == pytest.approx(2.0)


def test_workers_do_not_change_the_estimate():
    trials = 3 * montecarlo.BLOCK_SIZE // 4 + 2 * montecarlo.BLOCK_SIZE
    one = estimate_logical_error("two_qubit", 2e-3, trials, seed=11, workers=1)
    many = estimate_logical_error("two_qubit", 2e-3, trials, seed=11, workers=3)
    assert one == many
    assert one.trials == trials


def test_sweep_csv_columns():
    text = sweep_csv("recovery", [1e-3], 2000, seed=5)
    header, row = text.splitlines()
    assert header.split(",") == montecarlo.CSV_COLUMNS
    assert row.startswith("recovery,0.001,2000,")


def test_logical_operators_survive_decoding():
    # sanity for the decoder used by the sampler
    for err, letter in ((ENCODED_X, "N"), (ENCODED_Z, "S")):
        assert str(logical_effect(err))[1] == letter
