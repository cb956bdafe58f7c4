"""Core domain types: the PROC oracle interface, deterministic RNG, query accounting.

Outcomes are opaque identifiers: an int index into an explicit table, a string
label from a JSON file, or a bit tuple (one 0/1 per output variable) for
formula-backed distributions. They only need to be hashable and totally
ordered, so they can serve as exclusion-set members and map keys.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional

import numpy as np

Outcome = Hashable


def log2(x: float) -> float:
    """Base-2 logarithm. All entropies and self-informations are in bits."""
    if x <= 0:
        raise ValueError(f"log2 requires a positive argument, got {x!r}")
    return math.log2(x)


class EmptySupportError(ValueError):
    """The conditioned support has zero mass (every outcome was excluded)."""


class ResourceCapError(RuntimeError):
    """A configured resource cap (variable count, enumeration size) was exceeded."""


@dataclass(frozen=True)
class ProcQueryResult:
    """One PROC draw: a sampled outcome together with its probability.

    ``probability`` is always the unconditional mass of the outcome under the
    original distribution, never the conditional probability given the
    non-excluded set.
    """

    outcome: Outcome
    probability: float

    def __post_init__(self):
        if not 0.0 < self.probability <= 1.0:
            raise ValueError(f"probability must be in (0, 1], got {self.probability}")


@dataclass
class QueryLedger:
    """Counts of oracle-level queries issued during a run.

    For formula-backed oracles each PROC draw costs one uniform-sampler query
    plus one numerator count; the shared denominator count is issued once, so
    counter_queries == proc_queries + 1 once any draw has been made.
    """

    proc_queries: int = 0
    counter_queries: int = 0
    sampler_queries: int = 0
    initial_draws: int = 0


class Rng:
    """Deterministic random source with derivable substreams.

    The same seed and substream path produce the same draw sequence on every
    platform (PCG64 keyed by a SeedSequence). Substreams indexed by integers
    (e.g. per trial) are statistically independent, which keeps parallel runs
    reproducible regardless of scheduling.
    """

    __slots__ = ("seed", "_path", "_gen")

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._path = _path
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=_path))
        )

    def substream(self, *path: int) -> "Rng":
        """Independent stream addressed by extending this stream's index path."""
        return Rng(self.seed, self._path + tuple(int(i) for i in path))

    def random(self) -> float:
        return float(self._gen.random())

    def random_array(self, n: int) -> np.ndarray:
        return self._gen.random(n)

    @property
    def generator(self) -> np.random.Generator:
        """Underlying numpy generator, for bulk numeric draws."""
        return self._gen

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self._path})"


class ProcOracle(ABC):
    """Probability-revealing conditional sampling oracle for a distribution D.

    ``query(excluded, rng)`` draws x from D conditioned on avoiding every
    outcome in ``excluded`` (x is returned with probability D(x)/D(S) for
    S the complement of ``excluded``) and reveals the unconditional D(x).
    Implementations count every draw in ``proc_queries``; the counter starts
    at 0 and increases monotonically.

    Oracles are not required to be thread-safe for concurrent queries; callers
    that parallelize use ``clone()`` to obtain a zero-counter handle over the
    same distribution for each worker and merge counts afterwards.
    """

    proc_queries: int = 0
    counter_queries: int = 0
    sampler_queries: int = 0

    @abstractmethod
    def query(self, excluded: Iterable[Outcome], rng: Rng) -> ProcQueryResult:
        raise NotImplementedError

    def query_probs(self, excluded: Iterable[Outcome], k: int, rng: Rng) -> np.ndarray:
        """k independent PROC draws, returning only the revealed probabilities.

        Counts as k queries. Backends may vectorize; the default loops.
        """
        excluded = frozenset(excluded)
        return np.array([self.query(excluded, rng).probability for _ in range(k)])

    @abstractmethod
    def universe_bits(self) -> int:
        """m = log2 of the universe size."""
        raise NotImplementedError

    def input_bits(self) -> Optional[int]:
        """n = number of input bits, when the backend knows it (else None)."""
        return None

    @abstractmethod
    def clone(self) -> "ProcOracle":
        """Fresh zero-counter handle over the same distribution (per-worker use)."""
        raise NotImplementedError

    def absorb_counts(self, other: "ProcOracle") -> None:
        """Merge a worker clone's query counts back into this oracle."""
        self.proc_queries += other.proc_queries
        self.counter_queries += other.counter_queries
        self.sampler_queries += other.sampler_queries
