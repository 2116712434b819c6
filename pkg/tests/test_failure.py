import math
from fractions import Fraction

import numpy as np
import pytest

from ftlab import failure
from ftlab.calibration import load_calibration, parse_calibration
from ftlab.errors import InfeasibleError, OrderingError, UsageError
from ftlab.failure import (
    FailurePattern,
    concat_effective_error,
    concat_iterated,
    count_post_recovery_pairs,
    count_recovery_pairs,
    encoded_gate_failed,
    enumerate_failing_pairs,
    gate_failed,
    levels_needed,
    naive_estimate,
    plan_concatenation,
    recovery_failed,
    syndrome_extraction_failed,
    threshold,
)
from ftlab.network import ErrorLocation, Tag, exclude_second_cat_attempt


def loc(index, kind="bit_extraction", gate=0, block=0, attempt=1, extraction=1, cat_attempt=None):
    tag = Tag(kind, gate=gate, block=block, attempt=attempt, extraction=extraction, cat_attempt=cat_attempt)
    return ErrorLocation(index, 0, "operational", (0,), tag)


def op(index):
    return ErrorLocation(index, 0, "operational", (0, 7), Tag("encoded_op", block=None))


# -- definitions on hand-built patterns ----------------------------------------------


def test_empty_pattern_never_fails():
    p = FailurePattern()
    assert not syndrome_extraction_failed(p)
    assert not recovery_failed(p)
    assert not gate_failed(p, [0, 1])


def test_second_cat_attempt_does_not_fail_extraction():
    p = FailurePattern.of([loc(0, "cat_prep", cat_attempt=2)])
    assert not syndrome_extraction_failed(p)
    assert syndrome_extraction_failed(FailurePattern.of([loc(0, "cat_prep", cat_attempt=1)]))


@pytest.mark.parametrize(
    "a,b,fails",
    [
        ((1, 1), (1, 1), False),  # same half
        ((1, 1), (1, 2), True),  # both halves of attempt 1
        ((1, 1), (2, 1), True),  # different attempts
        ((2, 1), (2, 2), False),  # both halves of attempt 2
    ],
)
def test_recovery_failure(a, b, fails):
    p = FailurePattern.of([loc(0, attempt=a[0], extraction=a[1]), loc(1, attempt=b[0], extraction=b[1])])
    assert recovery_failed(p) is fails


def test_recovery_must_be_named_when_ambiguous():
    p = FailurePattern.of([loc(0, block=0), loc(1, block=1)])
    with pytest.raises(UsageError):
        recovery_failed(p)
    assert not recovery_failed(p, 0, 0)


def test_two_region_failures_fail_the_gate():
    p = FailurePattern.of([op(0), loc(1, attempt=1, extraction=2)])
    assert gate_failed(p, [0, 1])


def test_region_failures_on_different_blocks_do_not_add():
    p = FailurePattern.of([loc(0, gate=1, block=0), loc(1, gate=1, block=1)])
    assert not gate_failed(p, [0, 1])


def test_following_failure_absorbs_its_locations():
    a = loc(0, gate=1, block=0, extraction=1)
    b = loc(1, gate=1, block=0, extraction=2)
    p = FailurePattern.of([a, b])
    assert not gate_failed(p, [0, 1])  # the next gate fails instead
    assert encoded_gate_failed(p, [0, 1], {0: False, 1: False})


def test_ordering_is_enforced():
    p = FailurePattern.of([op(0), loc(1, gate=1, block=0)])
    with pytest.raises(OrderingError):
        encoded_gate_failed(p, [0, 1])


def test_single_failure_never_fails_the_gate(cnot_gate):
    for location in cnot_gate.locations:
        assert not gate_failed(FailurePattern.of([location]), cnot_gate.blocks)


# -- enumeration against the definitions -------------------------------------------------


@pytest.mark.parametrize("memory", [False, True])
def test_enumeration_matches_definitions_on_sampled_rows(cnot_gate, memory, rng):
    """The vectorized count, row by row, against direct evaluation of the definitions."""
    locs = [
        l for l in cnot_gate.locations
        if exclude_second_cat_attempt(l) and (memory or l.kind == "operational")
    ]
    feats = failure._features(locs, cnot_gate.blocks)
    for i in rng.choice(len(locs), size=6, replace=False):
        direct = sum(
            gate_failed(FailurePattern.of([locs[i], locs[j]]), cnot_gate.blocks) for j in range(i + 1, len(locs))
        )
        assert failure._count_rows((feats, [i])) == direct


@pytest.mark.parametrize("memory,expected", [(False, 337195), (True, 743215)])
def test_enumeration_matches_closed_form(cnot_gate, memory, expected):
    cal = load_calibration()
    assert enumerate_failing_pairs(cnot_gate, with_memory=memory) == expected
    assert failure.total_f("two_qubit", memory, cal) == expected


# -- closed forms --------------------------------------------------------------------------


@pytest.mark.parametrize("L", [1, 2, 5, 121, 181])
def test_recovery_pairs_by_brute_force(L):
    # units: attempt 1 halves (L each) and attempt 2 (2L); fail when units differ
    groups = [L, L, 2 * L]
    brute = groups[0] * groups[1] + (groups[0] + groups[1]) * groups[2]
    assert count_recovery_pairs(L) == brute


def test_post_recovery_pairs_small_case():
    # region = 6L + extra locations; pairs within one following half-attempt
    # (L^2 each, four halves) or split across blocks (2 L^2) do not count
    L, extra = 3, 2
    region = 6 * L + extra
    assert count_post_recovery_pairs(L, extra) == math.comb(region, 2) - 4 * L * L - 2 * L * L


def test_printed_component_values():
    assert count_recovery_pairs(121) == 73205
    assert count_recovery_pairs(181) == 163805
    assert 5 * 140**2 == 98000 and count_recovery_pairs(140) == 98000
    assert count_recovery_pairs(210) == 220500
    assert count_post_recovery_pairs(121) == 190785
    assert count_post_recovery_pairs(181) == 415605


def test_pi8_fitted_components():
    cal = load_calibration()
    ops = failure.pair_counts("pi8", False, cal)
    mem = failure.pair_counts("pi8", True, cal)
    assert (ops.recovery_pairs, ops.post_recovery_pairs) == (146410, 313894)
    assert (mem.recovery_pairs, mem.post_recovery_pairs) == (327610, 838831)


def test_unknown_gate_class():
    with pytest.raises(UsageError):
        failure.pair_counts("toffoli", False, load_calibration())


def test_calibration_rejects_unknown_field():
    with pytest.raises(UsageError):
        parse_calibration({"bit_extraction": {"operational": 19, "memory": 10}, "bogus": 1})


# -- thresholds and concatenation -------------------------------------------------------------


@pytest.mark.parametrize(
    "f,rounded", [(337195, 3.0e-6), (743215, 1.3e-6), (460304, 2.2e-6), (1166441, 0.9e-6)]
)
def test_threshold_rounding(f, rounded):
    th = threshold(f)
    assert th.threshold_exact == Fraction(1, f)
    assert th.threshold_rounded == pytest.approx(rounded, abs=1e-15)


def test_threshold_two_significant_figures_of_smallest():
    # the smallest bound is 8.57e-7: quoted on the 1e-7 grid, not at 2 s.f.
    assert threshold(1166441).threshold_2sf == pytest.approx(8.6e-7)


def test_threshold_rejects_nonpositive():
    with pytest.raises(UsageError):
        threshold(0)


def test_naive_estimate():
    assert naive_estimate() == (1204, 1e-6)


@pytest.mark.parametrize("h", range(7))
@pytest.mark.parametrize("p", [1e-7, 2e-6])
def test_closed_form_equals_recursion(h, p):
    f = 337195
    assert concat_effective_error(p, f, h) == pytest.approx(concat_iterated(p, f, h), rel=1e-12)


def test_levels_needed():
    f, p = 337195, 1e-7
    h = levels_needed(1e9, 1e-3, p, f)
    assert 1e9 * (f * p) ** (2**h) < 1e-3 <= 1e9 * (f * p) ** (2 ** (h - 1))
    assert h > failure.levels_lower_bound(1e9, 1e-3, p, f)


def test_above_threshold_is_infeasible():
    with pytest.raises(InfeasibleError):
        levels_needed(1e9, 1e-3, 1e-5, 337195)
    assert not plan_concatenation(1e9, 1e-3, 1e-5, 337195).feasible


def test_plan_overhead():
    plan = plan_concatenation(1e9, 1e-3, 1e-7, 337195)
    assert plan.overhead == 1024**plan.h
    assert plan.levels[-1]["closed_form"] == pytest.approx(plan.levels[-1]["iterated"], rel=1e-12)


def test_monotone_bound():
    assert failure.monotone_bound(1, 10, 0.01, 1) == pytest.approx(1e-3)
    with pytest.raises(UsageError):
        failure.monotone_bound(0.5, 10, 0.01, 1)
