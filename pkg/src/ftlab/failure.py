"""Failure definitions, failure-pair counting, thresholds and concatenation.

Vocabulary used below:

* an *extraction unit* is one syndrome extraction of one block (six bit
  extractions and the H layer between them), keyed by
  ``(gate, block, attempt, extraction)``. A failure anywhere in it counts,
  except inside a second cat preparation attempt.
* the *region* of an encoded gate is where two failures are charged to
  the gate itself once its recoveries succeeded: the second extraction of
  each first recovery attempt, the corrections, the transversal operation,
  and the first recovery attempt of the following gate on each output
  block when that following gate did not fail. Failures up to and
  including the transversal operation reach every block; failures in a
  following gate reach only their own block.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InfeasibleError, OrderingError, UsageError
from .network import ErrorLocation, Network, exclude_second_cat_attempt

# -- definitions ------------------------------------------------------------------


@dataclass(frozen=True)
class FailurePattern:
    """Locations labeled failed. Any location holding a non-identity operator
    must be in ``failed``; the converse need not hold."""

    failed: tuple[ErrorLocation, ...] = ()

    @classmethod
    def of(cls, locations: Iterable[ErrorLocation]) -> FailurePattern:
        return cls(tuple(sorted(set(locations), key=lambda loc: loc.index)))


def extraction_unit(loc: ErrorLocation) -> tuple[int, int, int, int] | None:
    t = loc.tag
    if t.kind not in ("bit_extraction", "cat_prep", "hadamard_layer") or t.extraction is None:
        return None
    if t.kind == "cat_prep" and t.cat_attempt == 2:
        return None
    return (t.gate, t.block, t.attempt, t.extraction)


def syndrome_extraction_failed(pattern: FailurePattern) -> bool:
    """A (bit) extraction fails on any failure outside its second cat attempt."""
    return any(extraction_unit(loc) is not None for loc in pattern.failed)


def recovery_failed(pattern: FailurePattern, gate: int | None = None, block: int | None = None) -> bool:
    """Two failed extraction units in different halves of attempt 1, or in different attempts.

    ``gate``/``block`` select one recovery; by default the pattern must
    touch only one.
    """
    units = {u for u in map(extraction_unit, pattern.failed) if u is not None}
    groups: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for g, b, a, e in units:
        if (gate is None or g == gate) and (block is None or b == block):
            groups.setdefault((g, b), set()).add((a, e))
    if gate is None and block is None and len(groups) > 1:
        raise UsageError("pattern spans several recoveries; name one")
    for ae in groups.values():
        attempts = {a for a, _ in ae}
        if len(attempts) > 1:
            return True
        if {(1, 1), (1, 2)} <= ae:
            return True
    return False


def _reach(loc: ErrorLocation, blocks: Sequence[int]) -> tuple[int, frozenset[int]] | None:
    """``(gate, blocks reached)`` if ``loc`` is in the region, else ``None``."""
    t = loc.tag
    if t.gate == 0:
        if t.kind in ("correction", "encoded_op"):
            return 0, frozenset(blocks)
        u = extraction_unit(loc)
        if u is not None and u[2] == 1 and u[3] == 2:
            return 0, frozenset(blocks)
        return None
    if t.gate == 1:
        u = extraction_unit(loc)
        if u is not None and u[2] == 1:
            return 1, frozenset([t.block])
    return None


def encoded_gate_failed(
    pattern: FailurePattern,
    blocks: Sequence[int],
    following_failed: Mapping[int, bool] | None = None,
) -> bool:
    """Failure of the encoded gate acting on ``blocks``.

    ``following_failed[b]`` says whether the next gate on output block ``b``
    failed; it must be known (failure is decided backwards in time) as soon
    as the pattern touches that gate.
    """
    for b in blocks:
        if recovery_failed(pattern, 0, b):
            return True
    reach = {b: 0 for b in blocks}
    for loc in pattern.failed:
        r = _reach(loc, blocks)
        if r is None:
            continue
        gate, hit = r
        if gate == 1:
            b = loc.tag.block
            if following_failed is None or b not in following_failed:
                raise OrderingError(f"status of the gate after block {b} is not yet known")
            if following_failed[b]:
                continue
        for b in hit:
            reach[b] += 1
    return any(v >= 2 for v in reach.values())


def following_status(pattern: FailurePattern, blocks: Sequence[int]) -> dict[int, bool]:
    """Failure of the next gates, as far as the visible part (their first
    recovery attempt) decides it: a recovery failure there."""
    return {b: recovery_failed(pattern, 1, b) for b in blocks}


def gate_failed(pattern: FailurePattern, blocks: Sequence[int]) -> bool:
    """Backward evaluation: the following gates first, then this one."""
    return encoded_gate_failed(pattern, blocks, following_status(pattern, blocks))


# -- explicit pair enumeration --------------------------------------------------------


@dataclass
class _Features:
    rec: np.ndarray  # recovery id (gate, block) or -1
    gate: np.ndarray
    attempt: np.ndarray
    extraction: np.ndarray
    region: np.ndarray  # bitmask of reached blocks, 0 outside the region


def _features(locations: Sequence[ErrorLocation], blocks: Sequence[int]) -> _Features:
    n = len(locations)
    rec = np.full(n, -1, dtype=np.int64)
    gate = np.full(n, -1, dtype=np.int64)
    att = np.zeros(n, dtype=np.int64)
    ext = np.zeros(n, dtype=np.int64)
    region = np.zeros(n, dtype=np.int64)
    for i, loc in enumerate(locations):
        u = extraction_unit(loc)
        if u is not None:
            rec[i] = u[0] * 64 + u[1]
            gate[i] = u[0]
            att[i], ext[i] = u[2], u[3]
        r = _reach(loc, blocks)
        if r is not None:
            region[i] = sum(1 << b for b in r[1])
    return _Features(rec, gate, att, ext, region)


def _count_rows(args) -> int:
    f, rows = args
    total = 0
    for i in rows:
        j = slice(i + 1, None)
        same = (f.rec[j] == f.rec[i]) & (f.rec[i] >= 0)
        split = same & (
            (f.attempt[j] != f.attempt[i]) | ((f.attempt[i] == 1) & (f.extraction[j] != f.extraction[i]))
        )
        own_recovery = split & (f.gate[i] == 0)
        next_recovery = split & (f.gate[i] == 1)  # the following gate failed instead
        charged = (f.region[j] & f.region[i]) != 0
        total += int(np.count_nonzero(own_recovery | (charged & ~next_recovery)))
    return total


def enumerate_failing_pairs(
    network: Network,
    with_memory: bool = False,
    workers: int = 1,
) -> int:
    """Number of location pairs that make the encoded gate fail.

    Second cat attempts are left out (as in the printed tallies); memory
    locations are included when ``with_memory`` is set.
    """
    locs = [
        loc
        for loc in network.locations
        if exclude_second_cat_attempt(loc) and (with_memory or loc.kind == "operational")
    ]
    f = _features(locs, network.blocks)
    rows = np.arange(len(locs))
    if workers <= 1:
        return _count_rows((f, rows))
    chunks = [rows[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        return sum(pool.map(_count_rows, [(f, c) for c in chunks]))


# -- closed forms -------------------------------------------------------------------------


def count_recovery_pairs(L: int) -> int:
    """One failure in each half of attempt 1, or one in each attempt: ``L^2 + (2L)^2``."""
    return L * L + (2 * L) ** 2


def count_post_recovery_pairs(L: int, extra: int = 21) -> int:
    """Region pairs, minus those that fail a following recovery or reach different blocks."""
    return math.comb(6 * L + extra, 2) - 6 * L * L


def count_pi8_nonrecovery_pairs(L: int, extra_region: int, adjustment: int) -> int:
    """Fitted model ``C(4L + extra, 2) - L^2 - adjustment`` (see calibration)."""
    return math.comb(4 * L + extra_region, 2) - L * L - adjustment


@dataclass
class PairCountReport:
    gate_class: str
    with_memory: bool
    recovery_pairs: int
    post_recovery_pairs: int
    total_f: int


def pair_counts(gate_class: str, with_memory: bool, calibration) -> PairCountReport:
    L = calibration.extraction_size(with_memory)
    if gate_class == "two_qubit":
        rec = 2 * count_recovery_pairs(L)
        post = count_post_recovery_pairs(L, calibration.correction_and_op)
    elif gate_class == "pi8":
        rec = 2 * count_recovery_pairs(L)
        x, a = calibration.pi8_fit(with_memory)
        post = count_pi8_nonrecovery_pairs(L, x, a)
    else:
        raise UsageError(f"unknown gate class {gate_class!r}")
    return PairCountReport(gate_class, with_memory, rec, post, rec + post)


def total_f(gate_class: str, with_memory: bool, calibration) -> int:
    return pair_counts(gate_class, with_memory, calibration).total_f


# -- thresholds -----------------------------------------------------------------------------


@dataclass
class ThresholdReport:
    f: int
    threshold_exact: Fraction
    model: str = "stochastic"

    @property
    def threshold(self) -> float:
        return float(self.threshold_exact)

    @property
    def threshold_rounded(self) -> float:
        """Nearest multiple of 1e-7, the grid on which the bounds are quoted."""
        return round_to_grid(self.threshold_exact)

    @property
    def threshold_2sf(self) -> float:
        return float(f"{self.threshold:.1e}")


def round_to_grid(x: Fraction, step: Fraction = Fraction(1, 10**7)) -> float:
    q = x / step
    n = math.floor(q + Fraction(1, 2))
    return float(n * step)


def threshold(f: int, model: str = "stochastic") -> ThresholdReport:
    """Below ``1/f`` one level of coding lowers the error from ``p`` to at most ``f p^2``.

    The monotone model (any constant ``C``) has the same threshold.
    """
    if f <= 0:
        raise UsageError("threshold is undefined for f <= 0")
    return ThresholdReport(f, Fraction(1, f), model)


def naive_estimate() -> tuple[int, float]:
    """Back-of-envelope count: 14 qubits times 86 operations each, threshold 1e-6."""
    per_qubit = 7 * 6 * 2 + 2
    return 14 * per_qubit, 1e-6


def concat_effective_error(p: float, f: float, h: int) -> float:
    if p < 0 or h < 0:
        raise UsageError("need p >= 0 and h >= 0")
    # f^(2^h - 1) p^(2^h) = (f p)^(2^h) / f; avoids the huge integer power of f
    return (float(f) * p) ** (2**h) / f


def concat_iterated(p: float, f: float, h: int) -> float:
    for _ in range(h):
        p = f * p * p
    return p


def levels_needed(n: float, q: float, p: float, f: float, max_levels: int = 64) -> int:
    """Smallest ``h`` with ``n (f p)^(2^h) < q``."""
    if q <= 0:
        raise UsageError("target failure probability must be positive")
    if f * p >= 1:
        raise InfeasibleError(f"f*p = {f * p:g} >= 1: concatenation does not converge")
    for h in range(max_levels + 1):
        if n * (f * p) ** (2**h) < q:
            return h
    raise InfeasibleError("no level count below the cap")


def levels_lower_bound(n: float, q: float, p: float, f: float) -> float:
    """``log2(log_{1/(fp)}(n/q))``; the level count must exceed this."""
    return math.log2(math.log(n / q) / math.log(1 / (f * p)))


def monotone_bound(C: float, f: float, p: float, k: int) -> float:
    if C < 1:
        raise UsageError("the monotone constant is at least 1")
    return C * (f * p * p) ** k


LOG2_K = 10


@dataclass
class ConcatPlan:
    p: float
    f: int
    h: int
    n: float
    q: float
    K: int = 2**LOG2_K
    feasible: bool = True
    levels: list[dict] = field(default_factory=list)

    @property
    def overhead(self) -> int:
        return self.K**self.h

    def to_json(self) -> dict:
        return {**asdict(self), "overhead": self.overhead}


def plan_concatenation(n: float, q: float, p: float, f: int, K: int = 2**LOG2_K) -> ConcatPlan:
    try:
        h = levels_needed(n, q, p, f)
    except InfeasibleError:
        return ConcatPlan(p, f, 0, n, q, K, feasible=False)
    levels = [
        {
            "level": k,
            "closed_form": concat_effective_error(p, f, k),
            "iterated": concat_iterated(p, f, k),
        }
        for k in range(h + 1)
    ]
    return ConcatPlan(p, f, h, n, q, K, True, levels)

