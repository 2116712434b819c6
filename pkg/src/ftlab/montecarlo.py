"""Monte Carlo estimates of logical failure under independent stochastic errors.

Trials are split into fixed-size blocks; block ``k`` draws from a Philox
generator keyed by ``(seed, k)``, so the estimate does not depend on how
blocks are spread over workers.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binomtest

from .builders import build_encoded_gate, build_recovery
from .errors import UsageError
from .frame import Fault, logical_failures, run_frame
from .network import MEMORY, ErrorLocation, Network
from .pauli import GateKind

BLOCK_SIZE = 1 << 16
F_BOUND = {("two_qubit", False): 337195, ("two_qubit", True): 743215}


@dataclass(frozen=True)
class ErrorModelConfig:
    """Failure probability per location; a failed location gets a uniformly
    chosen non-identity standard error on its qubits."""

    p: float
    seed: int = 0
    with_memory: bool = False

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise UsageError("p must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Estimate:
    trials: int
    failures: int
    ci95: tuple[float, float]
    retries: int = 0

    @property
    def rate(self) -> float:
        return self.failures / self.trials


def generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, block], dtype=np.uint64)))


def sampled_locations(network: Network, with_memory: bool) -> list[ErrorLocation]:
    return [loc for loc in network.locations if with_memory or loc.kind != MEMORY]


def sample_instance(
    locations: list[ErrorLocation], p: float, batch: int, rng: np.random.Generator
) -> list[Fault]:
    """Independent failures: each location fails in each trial with probability ``p``.

    Conditional locations are drawn too and take effect only where their
    condition holds when they are reached.
    """
    faults = []
    if p == 0:
        return faults
    for loc in locations:
        k = rng.binomial(batch, p)
        if k == 0:
            continue
        trials = np.sort(rng.choice(batch, size=k, replace=False))
        codes = rng.integers(1, 4 ** len(loc.qubits), size=k)
        faults.append(Fault(loc, trials, codes))
    return faults


@lru_cache(maxsize=None)
def network_for(gate_class: str) -> Network:
    if gate_class == "two_qubit":
        return build_encoded_gate(GateKind.CNOT, following=False)
    if gate_class == "recovery":
        return build_recovery()
    raise UsageError(f"Monte Carlo is not available for gate class {gate_class!r}")


def _run_block(args) -> tuple[int, int, int]:
    gate_class, p, seed, with_memory, block, size = args
    net = network_for(gate_class)
    rng = generator(seed, block)
    faults = sample_instance(sampled_locations(net, with_memory), p, size, rng)
    run = run_frame(net, size, faults)
    retries = sum(int(np.count_nonzero(v)) for k, v in run.bits.items() if k.endswith(".v1"))
    return size, int(logical_failures(net, run).sum()), retries


def clopper_pearson(failures: int, trials: int) -> tuple[float, float]:
    ci = binomtest(failures, trials).proportion_ci(0.95, method="exact")
    return float(ci.low), float(ci.high)


def estimate_logical_error(
    gate_class: str,
    p: float,
    trials: int,
    seed: int = 0,
    with_memory: bool = False,
    workers: int = 1,
) -> Estimate:
    if trials < 1:
        raise UsageError("need at least one trial")
    ErrorModelConfig(p, seed, with_memory)
    n_blocks = math.ceil(trials / BLOCK_SIZE)
    jobs = [
        (gate_class, p, seed, with_memory, k, min(BLOCK_SIZE, trials - k * BLOCK_SIZE))
        for k in range(n_blocks)
    ]
    if workers <= 1 or n_blocks == 1:
        results = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(min(workers, n_blocks)) as pool:
            results = list(pool.map(_run_block, jobs))
    done = sum(r[0] for r in results)
    failures = sum(r[1] for r in results)
    return Estimate(done, failures, clopper_pearson(failures, done), sum(r[2] for r in results))


def analytic_bound(gate_class: str, p: float, with_memory: bool = False) -> float:
    f = F_BOUND.get(("two_qubit" if gate_class == "recovery" else gate_class, with_memory))
    if f is None:
        raise UsageError(f"no analytic bound for {gate_class!r}")
    return f * p * p


def fit_slope(ps, rates) -> float:
    """Least-squares slope of log(rate) against log(p)."""
    slope, _ = np.polyfit(np.log(ps), np.log(rates), 1)
    return float(slope)


CSV_COLUMNS = ["gate_class", "p", "trials", "failures", "rate", "ci_low", "ci_high", "analytic_bound", "seed"]


def sweep_csv(gate_class: str, p_values, trials: int, seed: int, with_memory: bool = False, workers: int = 1) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in p_values:
        est = estimate_logical_error(gate_class, p, trials, seed, with_memory, workers)
        w.writerow(
            [
                gate_class,
                repr(float(p)),
                est.trials,
                est.failures,
                repr(est.rate),
                repr(est.ci95[0]),
                repr(est.ci95[1]),
                repr(analytic_bound(gate_class, p, with_memory)),
                seed,
            ]
        )
    return out.getvalue()
