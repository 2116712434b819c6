import itertools

import numpy as np
import pytest

from ftlab import steane
from ftlab.errors import UsageError
from ftlab.oracle import pauli_matrix
from ftlab.pauli import PauliOperator
from ftlab.steane import (
    ENCODED_X,
    ENCODED_Z,
    GENERATORS,
    Syndrome,
    classify_logical,
    correction_for,
    decode_arrays,
    logical_effect,
    minimal_errors,
    syndrome_of,
)


def test_generators_commute_pairwise():
    for a, b in itertools.combinations(GENERATORS, 2):
        assert a.commutes_with(b)


def test_generators_hermitian_and_square_to_one():
    for g in GENERATORS:
        m = pauli_matrix(g)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)
        np.testing.assert_allclose(m @ m, np.eye(128), atol=1e-12)


def test_logical_operators():
    assert all(ENCODED_Z.commutes_with(g) and ENCODED_X.commutes_with(g) for g in GENERATORS)
    assert not ENCODED_Z.commutes_with(ENCODED_X)


@pytest.mark.parametrize("label", range(1, 8))
def test_bit_flip_syndrome_spells_label(label):
    s = syndrome_of(PauliOperator.single(7, label - 1, "N"))
    digits = [bool(label >> k & 1) for k in (2, 1, 0)]
    assert list(s.bits[:3]) == digits
    assert list(s.bits[3:]) == digits  # sigma_y strings see a bit flip too


@pytest.mark.parametrize("label", range(1, 8))
def test_sign_flip_syndrome_spells_label(label):
    s = syndrome_of(PauliOperator.single(7, label - 1, "S"))
    assert s.bits[:3] == (False,) * 3
    assert list(s.bits[3:]) == [bool(label >> k & 1) for k in (2, 1, 0)]


def test_64_distinct_syndromes():
    assert len({syndrome_of(e).index for _, _, e in minimal_errors()}) == 64


def test_syndrome_index_round_trip():
    for i in range(64):
        assert Syndrome.from_index(i).index == i
    with pytest.raises(UsageError):
        Syndrome((True,) * 5)


def test_corrections_cancel_their_syndrome():
    for i in range(64):
        s = Syndrome.from_index(i)
        assert syndrome_of(correction_for(s)) == s


def test_weight_one_errors_decode_to_identity():
    for q in range(7):
        for letter in "NSB":
            assert logical_effect(PauliOperator.single(7, q, letter)).is_identity()


def test_weight_two_bit_flips_become_logical():
    err = PauliOperator.from_masks(7, [0, 1], [])
    assert str(logical_effect(err)) == "+N"


def test_logical_classification():
    assert classify_logical(ENCODED_X) == "N"
    assert classify_logical(ENCODED_Z) == "S"
    assert classify_logical(ENCODED_X * ENCODED_Z) == "B"
    assert classify_logical(GENERATORS[0]) == "I"


def test_decode_arrays_match_table():
    xs, zs = decode_arrays()
    for i in range(64):
        c = correction_for(Syndrome.from_index(i))
        assert [bool(c.x_mask >> q & 1) for q in range(7)] == list(xs[i])
        assert [bool(c.z_mask >> q & 1) for q in range(7)] == list(zs[i])


def test_decoding_table_csv_shape():
    lines = steane.decoding_table_csv().splitlines()
    assert len(lines) == 65
    assert lines[0].startswith("S1,")


def test_wrong_block_size():
    with pytest.raises(UsageError):
        syndrome_of(PauliOperator.identity(5))


def test_codespace_checks_pass():
    assert all(r.passed for r in steane.codespace_check())
