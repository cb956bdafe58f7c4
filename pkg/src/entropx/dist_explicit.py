"""Explicit probability tables with an exact conditional PROC sampler.

Conditioning builds a renormalized cumulative table over the non-excluded
outcomes and samples by inverse CDF (binary search), never by rejection:
when the excluded set carries mass r > 1/2 rejection would need an expected
1/(1-r) draws, which is unbounded as r approaches 1. The conditional table is
cached per exclusion set.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Optional

import numpy as np

from . import bounds
from .core import EmptySupportError, Outcome, ProcOracle, ProcQueryResult, Rng


class ExplicitDistribution:
    """Finite probability table over labeled outcomes.

    Zero-mass outcomes are dropped at construction; ``m`` is the declared
    universe exponent (2^m >= support size), which may exceed the support.
    """

    __slots__ = ("outcomes", "probs", "m", "_index", "_cond_cache")

    def __init__(self, items: Iterable[tuple[Outcome, float]], m: Optional[int] = None,
                 sum_tol: float = 1e-12):
        outcomes = []
        probs = []
        for outcome, p in items:
            p = float(p)
            if p < 0 or not math.isfinite(p):
                raise ValueError(f"invalid probability {p!r} for outcome {outcome!r}")
            if p == 0.0:
                continue
            outcomes.append(outcome)
            probs.append(p)
        if not outcomes:
            raise ValueError("distribution has no positive-mass outcomes")
        if len(set(outcomes)) != len(outcomes):
            raise ValueError("outcomes must be distinct")
        total = math.fsum(probs)
        if abs(total - 1.0) > sum_tol:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        self.outcomes: tuple = tuple(outcomes)
        self.probs = np.asarray(probs, dtype=float)
        min_m = math.ceil(math.log2(len(outcomes))) if len(outcomes) > 1 else 0
        self.m = min_m if m is None else int(m)
        if 2 ** self.m < len(outcomes):
            raise ValueError(f"2^{self.m} universe cannot hold {len(outcomes)} outcomes")
        self._index = {o: i for i, o in enumerate(self.outcomes)}
        self._cond_cache: dict = {}

    def __len__(self):
        return len(self.outcomes)

    def probability(self, outcome: Outcome) -> float:
        return float(self.probs[self._index[outcome]])

    def heaviest(self) -> Outcome:
        return self.outcomes[int(np.argmax(self.probs))]

    def _cond_table(self, excluded: frozenset):
        """(kept indices, renormalized cumulative) for sampling on the complement."""
        table = self._cond_cache.get(excluded)
        if table is not None:
            return table
        if excluded:
            kept = np.array([i for i, o in enumerate(self.outcomes) if o not in excluded],
                            dtype=np.intp)
            if kept.size == 0:
                raise EmptySupportError("every positive-mass outcome is excluded")
            kp = self.probs[kept]
            cum = np.cumsum(kp / kp.sum())
        else:
            kept = np.arange(len(self.outcomes), dtype=np.intp)
            cum = np.cumsum(self.probs)
        cum[-1] = 1.0  # absorb cumulative rounding so u in [0,1) always lands
        table = (kept, cum)
        self._cond_cache[excluded] = table
        return table


def proc_query_many(dist: ExplicitDistribution, excluded, k: int, rng: Rng):
    """k conditional draws; returns (table indices, unconditional probabilities)."""
    kept, cum = dist._cond_table(frozenset(excluded))
    u = rng.random_array(k)
    sel = kept[np.searchsorted(cum, u, side="right")]
    return sel, dist.probs[sel]


def proc_query(dist: ExplicitDistribution, excluded, rng: Rng) -> ProcQueryResult:
    """One PROC draw: x from D conditioned on the complement of ``excluded``,
    revealed with its unconditional D(x)."""
    sel, p = proc_query_many(dist, excluded, 1, rng)
    return ProcQueryResult(dist.outcomes[int(sel[0])], float(p[0]))


def exact_entropy(dist: ExplicitDistribution) -> float:
    """Entropy in bits, by compensated summation over the table."""
    return math.fsum(-p * math.log2(p) for p in dist.probs)


def conditioned_self_information_moments(dist: ExplicitDistribution, excluded) -> tuple[float, float]:
    """(mean, second moment) of log2(1/D(x)) under D conditioned off ``excluded``.

    The per-outcome values use the unconditional probabilities, exactly what a
    PROC draw reveals; only the weights are renormalized.
    """
    excluded = frozenset(excluded)
    kept = [i for i, o in enumerate(dist.outcomes) if o not in excluded]
    if not kept:
        raise EmptySupportError("every positive-mass outcome is excluded")
    kp = dist.probs[kept]
    total = math.fsum(kp)
    g = -np.log2(kp)
    mean = math.fsum(p * gi for p, gi in zip(kp, g)) / total
    second = math.fsum(p * gi * gi for p, gi in zip(kp, g)) / total
    return mean, second


class ExplicitOracle(ProcOracle):
    """PROC oracle backed by an explicit table; exact probabilities, O(log n) draws."""

    def __init__(self, dist: ExplicitDistribution):
        self.dist = dist
        self.proc_queries = 0
        self.counter_queries = 0
        self.sampler_queries = 0

    def query(self, excluded, rng: Rng) -> ProcQueryResult:
        result = proc_query(self.dist, excluded, rng)
        self.proc_queries += 1
        return result

    def query_probs(self, excluded, k: int, rng: Rng) -> np.ndarray:
        _, probs = proc_query_many(self.dist, excluded, k, rng)
        self.proc_queries += k
        return probs

    def universe_bits(self) -> int:
        return self.dist.m

    def clone(self) -> "ExplicitOracle":
        return ExplicitOracle(self.dist)  # table and conditional cache are shared


# ---------------------------------------------------------------------------
# Built-in families (deterministic for a given parameter set / seed).
# ---------------------------------------------------------------------------


def uniform(m: int) -> ExplicitDistribution:
    size = 2 ** m
    p = 1.0 / size
    return ExplicitDistribution(((i, p) for i in range(size)), m=m)


def point_mass(m: int = 0) -> ExplicitDistribution:
    return ExplicitDistribution([(0, 1.0)], m=m)


def dominated(r: float, m: int) -> ExplicitDistribution:
    """One outcome of mass r, the remainder spread uniformly over 2^m - 1 others."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must be in (0, 1)")
    rest = 2 ** m - 1
    q = (1.0 - r) / rest
    items = [(0, r)] + [(i, q) for i in range(1, rest + 1)]
    return ExplicitDistribution(items, m=m)


def geometric(half_life: float, support: int, m: Optional[int] = None) -> ExplicitDistribution:
    """p_i proportional to 2^(-i/half_life), renormalized over ``support`` outcomes."""
    if half_life <= 0 or support < 1:
        raise ValueError("half_life must be positive and support >= 1")
    w = 2.0 ** (-np.arange(support) / half_life)
    w /= w.sum()
    if m is None:
        m = math.ceil(math.log2(support)) if support > 1 else 0
    return ExplicitDistribution(((i, float(p)) for i, p in enumerate(w)), m=m)


def dirichlet(size: int, seed: int, m: Optional[int] = None) -> ExplicitDistribution:
    """Uniform-on-the-simplex random table (normalized unit exponentials)."""
    gen = Rng(seed).generator
    w = gen.standard_exponential(size)
    w /= w.sum()
    if m is None:
        m = math.ceil(math.log2(size)) if size > 1 else 0
    return ExplicitDistribution(((i, float(p)) for i, p in enumerate(w)), m=m)


def two_heavy(m: int, gamma: float = 0.5) -> ExplicitDistribution:
    """Materialized near-tightness construction (two heavy outcomes)."""
    c = bounds.tightness_construction(m, gamma)
    items = []
    idx = 0
    for p, count in c.weights:
        for _ in range(count):
            items.append((idx, p))
            idx += 1
    return ExplicitDistribution(items, m=m)


FAMILIES = {
    "uniform": uniform,
    "point_mass": point_mass,
    "dominated": dominated,
    "geometric": geometric,
    "dirichlet": dirichlet,
    "two_heavy": two_heavy,
}


def make_family(name: str, **params) -> ExplicitDistribution:
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {sorted(FAMILIES)}") from None
    return builder(**params)


# ---------------------------------------------------------------------------
# JSON interchange: {"m": int, "probs": [{"id": str, "p": number}, ...]}
# ---------------------------------------------------------------------------


def to_json_obj(dist: ExplicitDistribution) -> dict:
    return {
        "m": dist.m,
        "probs": [{"id": str(o), "p": float(p)} for o, p in zip(dist.outcomes, dist.probs)],
    }


def from_json_obj(obj: dict) -> ExplicitDistribution:
    """Parse and validate the JSON table format; rejects a total mass off by > 1e-9."""
    if not isinstance(obj, dict) or "probs" not in obj:
        raise ValueError("distribution JSON must be an object with a 'probs' array")
    entries = obj["probs"]
    if not isinstance(entries, list) or not entries:
        raise ValueError("'probs' must be a nonempty array")
    items = []
    for e in entries:
        if not isinstance(e, dict) or "id" not in e or "p" not in e:
            raise ValueError("each probs entry needs 'id' and 'p'")
        items.append((str(e["id"]), float(e["p"])))
    total = math.fsum(p for _, p in items)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, deviating from 1 by more than 1e-9")
    items = [(o, p / total) for o, p in items]  # renormalize residual rounding
    m = obj.get("m")
    return ExplicitDistribution(items, m=None if m is None else int(m))


def load_file(path) -> ExplicitDistribution:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json_obj(json.load(fh))


def save_file(dist: ExplicitDistribution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_obj(dist), fh, indent=2)
        fh.write("\n")
