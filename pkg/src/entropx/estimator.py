"""Median-of-means entropy estimation from probability-revealing conditional samples.

The estimator first probes for a dominating outcome (mass > 1/2) with a few
unconditioned draws. If one is found, the remaining entropy is estimated on
the distribution conditioned off that outcome and recombined as
h = (1-r)*h_rem + r*log2(1/r); otherwise the entropy is at least 1 bit and is
estimated directly. Either way the core is a median of T batch means of the
self-information log2(1/p) revealed by the oracle, with the batch size t
chosen so a single batch lands within (1 +/- eps) of its target with
probability 5/6 and the median boosts that to confidence 1 - delta.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Outcome, ProcOracle, QueryLedger, Rng, log2

MODES = ("generic", "qif")


@dataclass(frozen=True)
class EstimationParams:
    """Tolerance eps, confidence delta, seed and sizing mode for one run.

    ``qif`` mode exploits the number of input bits n (every probability is
    then at least 2^-n); n comes from the oracle or from ``n_override``.
    ``generic`` mode ignores n even when the oracle exposes it, so the two
    sizings stay independently testable.
    """

    epsilon: float
    delta: float
    seed: int = 0
    mode: str = "generic"
    n_override: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_override is not None and self.n_override < 1:
            raise ValueError("n_override must be >= 1")


@dataclass(frozen=True)
class EstimationResult:
    h_hat: float
    dominator_found: bool
    r: Optional[float]
    h_rem_hat: Optional[float]
    t: int
    T: int
    ledger: QueryLedger
    wall_time: float


def trial_count(delta: float) -> int:
    """Number of batch means whose median reaches confidence 1 - delta.

    T = ceil(4.5 * ln(2/delta)); the log is natural because the failure
    probability of the median comes from a Hoeffding bound exp(-2T/9).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return math.ceil(4.5 * math.log(2.0 / delta))


def batch_size_generic(m: int, epsilon: float, dominator: bool) -> int:
    """Batch size from the universe exponent m alone.

    The dominator branch sizes for the conditioned moment bound
    m + log2(m + log2 m + 2.5), whose derivation already absorbs the "+1"
    of the relative-variance condition; the unconditioned branch sizes for
    the ratio bound m + log2(m + log2 m + 1.1) and subtracts the 1 itself.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    inner = m + math.log2(m) + (2.5 if dominator else 1.1)
    if dominator:
        raw = (6.0 / epsilon ** 2) * (m + math.log2(inner))
    else:
        raw = (6.0 / epsilon ** 2) * (m + math.log2(inner) - 1.0)
    return max(1, math.ceil(raw))


def batch_size_qif(n: Optional[int], m: int, epsilon: float,
                   r: Optional[float] = None) -> int:
    """Batch size when every probability is known to be at least 2^-n.

    With a dominator of mass r the bound n/(2*log2(1/(1-r))) competes with the
    m-based bound; without one, min(n, m-based) - 1.
    """
    if n is None or n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if r is not None:
        if not 0.5 < r < 1.0:
            raise ValueError(f"dominator mass r must be in (1/2, 1), got {r}")
        n_arm = n / (2.0 * math.log2(1.0 / (1.0 - r)))
        m_arm = m + math.log2(m + math.log2(m) + 2.5)
        raw = (6.0 / epsilon ** 2) * min(n_arm, m_arm)
    else:
        m_arm = m + math.log2(m + math.log2(m) + 1.1)
        raw = (6.0 / epsilon ** 2) * (min(float(n), m_arm) - 1.0)
    return max(1, math.ceil(raw))


def _batch_mean(oracle: ProcOracle, excluded: frozenset, t: int, rng: Rng) -> float:
    probs = oracle.query_probs(excluded, t, rng)
    return float(-np.mean(np.log2(probs)))


def sample_est(oracle: ProcOracle, excluded, t: int, delta: float, rng: Rng,
               threads: int = 1) -> float:
    """Median over T = trial_count(delta) batches of t draws each.

    Issues exactly T*t oracle queries on the complement of ``excluded``.
    Trial i draws from rng.substream(i), so the result is identical for any
    worker count. For even T the lower median (sorted index (T-1)//2) is
    returned: it stays inside the good interval whenever fewer than T/2
    trials are low and fewer than T/2 are high.
    """
    if t < 1:
        raise ValueError(f"batch size t must be >= 1, got {t}")
    excluded = frozenset(excluded)
    T = trial_count(delta)
    if threads <= 1:
        means = [_batch_mean(oracle, excluded, t, rng.substream(i)) for i in range(T)]
    else:
        clones = [oracle.clone() for _ in range(T)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            means = list(pool.map(
                lambda args: _batch_mean(args[0], excluded, t, rng.substream(args[1])),
                zip(clones, range(T)),
            ))
        for c in clones:
            oracle.absorb_counts(c)
    return sorted(means)[(T - 1) // 2]


def initial_draw_budget(delta: float) -> int:
    """Unconditioned draws allowed while probing for a dominator: ceil(log2(10/delta))."""
    return math.ceil(math.log2(10.0 / delta))


def estimate_entropy(oracle: ProcOracle, params: EstimationParams,
                     threads: int = 1) -> EstimationResult:
    """Full estimation run; the result is within (1 +/- eps)*H with probability
    at least 1 - delta."""
    start = time.perf_counter()
    m = oracle.universe_bits()
    n = None
    if params.mode == "qif":
        n = oracle.input_bits()
        if n is None:
            n = params.n_override
        if n is None:
            raise ValueError("qif mode needs the input bit count: the oracle "
                             "does not expose it and no n_override was given")

    base = (oracle.proc_queries, oracle.counter_queries, oracle.sampler_queries)
    rng = Rng(params.seed)
    init_rng = rng.substream(0)
    trial_rng = rng.substream(1)

    dominator = None
    draws = 0
    for _ in range(initial_draw_budget(params.delta)):
        res = oracle.query(frozenset(), init_rng)
        draws += 1
        if res.probability > 0.5:  # strict: mass exactly 1/2 keeps H >= 1
            dominator = res
            break

    confidence = 0.9 * params.delta
    if dominator is not None:
        r = dominator.probability
        if r >= 1.0:
            # Point mass: the conditioned support is empty and H is exactly 0.
            h_hat, h_rem, t, T = 0.0, 0.0, 0, 0
        else:
            if params.mode == "qif":
                t = batch_size_qif(n, m, params.epsilon, r=r)
            else:
                t = batch_size_generic(m, params.epsilon, dominator=True)
            T = trial_count(confidence)
            h_rem = sample_est(oracle, {dominator.outcome}, t, confidence,
                               trial_rng, threads=threads)
            h_hat = (1.0 - r) * h_rem + r * log2(1.0 / r)
        found = True
    else:
        r = None
        h_rem = None
        if params.mode == "qif":
            t = batch_size_qif(n, m, params.epsilon, r=None)
        else:
            t = batch_size_generic(m, params.epsilon, dominator=False)
        T = trial_count(confidence)
        h_hat = sample_est(oracle, frozenset(), t, confidence, trial_rng,
                           threads=threads)
        found = False

    ledger = QueryLedger(
        proc_queries=oracle.proc_queries - base[0],
        counter_queries=oracle.counter_queries - base[1],
        sampler_queries=oracle.sampler_queries - base[2],
        initial_draws=draws,
    )
    return EstimationResult(
        h_hat=h_hat, dominator_found=found, r=r, h_rem_hat=h_rem,
        t=t, T=T, ledger=ledger, wall_time=time.perf_counter() - start,
    )
