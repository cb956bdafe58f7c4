"""Variance-ratio bounds on the self-information, and their numerical verification.

For a (sub-)distribution D with entropy H = sum p*log2(1/p) and second moment
M2 = sum p*(log2 p)^2 over a universe of size 2^m, the batch sizing of the
estimator rests on two facts:

  * high-entropy regime (H >= 1):   M2 / H^2  <=  m + log2(m + log2 m + 1.1)
  * low-entropy regime (H <= 1, m >= 2):  M2  <=  m + log2(m + log2 m + 2.5)

and, for tables whose positive entries are all >= 2^-n (formula-induced
distributions over n input bits):  M2 <= n * H.

This module evaluates the bounds, fuzzes them over random and adversarial
distribution families, checks the batch concentration condition that ties the
estimator's chosen batch size to the relative variance, and generates the
two-heavy-element construction showing the moment bound is nearly tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Multiplicative slack when comparing floating-point moments against a bound;
# the min-probability bound admits exact equality (all p = 2^-n).
FP_TOL = 1e-12


def high_entropy_ratio_bound(m: int) -> float:
    """Bound on M2/H^2 when H >= 1, universe size 2^m."""
    return m + math.log2(m + math.log2(m) + 1.1)


def low_entropy_moment_bound(m: int) -> float:
    """Bound on M2 when H <= 1 and m >= 2."""
    return m + math.log2(m + math.log2(m) + 2.5)


def _as_probs(probs, allow_sub: bool) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        p = p.reshape(-1)
    if np.any(p < 0) or np.any(~np.isfinite(p)):
        raise ValueError("probabilities must be finite and nonnegative")
    if np.any(p > 1 + FP_TOL):
        raise ValueError("probabilities must not exceed 1")
    total = float(p.sum())
    if total > 1 + 1e-12:
        raise ValueError(f"total mass {total} exceeds 1")
    if not allow_sub and abs(total - 1.0) > 1e-9:
        raise ValueError(f"total mass {total} is not 1")
    return p[p > 0]


def moments(probs) -> tuple[float, float]:
    """(H, M2): entropy and second moment of the self-information, in bits.

    Accepts sub-distributions (total mass <= 1); zero entries are ignored.
    """
    p = _as_probs(probs, allow_sub=True)
    if p.size == 0:
        return 0.0, 0.0
    lg = np.log2(p)
    h = float(-np.dot(p, lg))
    m2 = float(np.dot(p, lg * lg))
    return h, m2


@dataclass(frozen=True)
class BoundReport:
    """Numerically evaluated moments of one distribution against the bounds.

    ``satisfied`` is None when no bound applies (m < 2 with H < 1, or a
    min-probability precondition violation); ``note`` says why.
    """

    m: int
    entropy: float
    second_moment: float
    ratio: Optional[float]
    bound_high_entropy: float
    bound_low_entropy: float
    qif_bound: Optional[float] = None
    satisfied: Optional[bool] = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "entropy": self.entropy,
            "second_moment": self.second_moment,
            "ratio": self.ratio,
            "bound_high_entropy": self.bound_high_entropy,
            "bound_low_entropy": self.bound_low_entropy,
            "qif_bound": self.qif_bound,
            "satisfied": self.satisfied,
            "note": self.note,
        }


def check_moment_bound(probs, m: int) -> BoundReport:
    """Check M2/H^2 (H >= 1) and/or M2 (H <= 1, m >= 2) against the bounds.

    Both checks run when H == 1. Sub-distributions are allowed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    h, m2 = moments(probs)
    ratio = m2 / (h * h) if h > 0 else None
    bh = high_entropy_ratio_bound(m)
    bl = low_entropy_moment_bound(m)
    verdicts = []
    if h >= 1.0:
        verdicts.append(ratio <= bh * (1 + FP_TOL))
    if h <= 1.0:
        if m >= 2:
            verdicts.append(m2 <= bl * (1 + FP_TOL))
        elif h < 1.0:
            return BoundReport(m, h, m2, ratio, bh, bl, None, None,
                               "out of scope: H < 1 requires m >= 2")
    return BoundReport(m, h, m2, ratio, bh, bl, None, all(verdicts))


def check_min_probability_bound(probs, n: int, m: Optional[int] = None) -> BoundReport:
    """Check M2 <= n*H for tables whose positive entries are all >= 2^-n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = _as_probs(probs, allow_sub=True)
    if m is None:
        m = max(1, math.ceil(math.log2(max(p.size, 2))))
    floor = 2.0 ** (-n)
    bh = high_entropy_ratio_bound(m)
    bl = low_entropy_moment_bound(m)
    h, m2 = moments(p)
    ratio = m2 / (h * h) if h > 0 else None
    if p.size and float(p.min()) < floor * (1 - FP_TOL):
        return BoundReport(m, h, m2, ratio, bh, bl, None, None,
                           f"precondition violated: min probability {p.min()} < 2^-{n}")
    qb = n * h
    ok = m2 <= qb * (1 + FP_TOL) + 1e-15
    return BoundReport(m, h, m2, ratio, bh, bl, qb, ok)


# ---------------------------------------------------------------------------
# Near-tightness construction: two heavy elements at (1-eps)/2 and the rest of
# the universe sharing mass eps, with eps solved so that H = 1 + Delta where
# Delta = (log2(2^m - 2))^(-gamma). Its ratio M2/H^2 grows like m^(1-gamma).
# ---------------------------------------------------------------------------

MAX_MATERIALIZED_M = 20


@dataclass(frozen=True)
class TightnessConstruction:
    """Result of the two-heavy-element construction.

    ``weights`` lists (probability, multiplicity) pairs; tables for m <= 20
    can be materialized, larger m stay in this summary form.
    """

    m: int
    gamma: float
    epsilon: float
    delta_target: float
    weights: tuple[tuple[float, int], ...]
    entropy: float
    second_moment: float
    ratio: float

    def probabilities(self) -> np.ndarray:
        if self.m > MAX_MATERIALIZED_M:
            raise ResourceWarning(
                f"m={self.m} too large to materialize; use the weight summary"
            )
        parts = [np.full(count, p) for p, count in self.weights]
        return np.concatenate(parts)


def _binary_entropy(e: float) -> float:
    return -(e * math.log2(e) + (1.0 - e) * math.log2(1.0 - e))


def tightness_construction(m: int, gamma: float, tol: float = 1e-12,
                           max_iter: int = 1000) -> TightnessConstruction:
    """Two-heavy-element distribution whose moment ratio nearly meets the bound.

    eps is found by damped fixed-point iteration on the implicit equation
    eps*(L-1) + h2(eps) = Delta (equivalent to targeting H = 1 + Delta
    directly), where L = log2(2^m - 2) and h2 is the binary entropy.
    """
    if m < 3:
        raise ValueError("m must be >= 3")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    big_k = 2 ** m - 2
    ell = math.log2(big_k)
    delta = ell ** (-gamma)

    def gap(e: float) -> float:
        return e * (ell - 1.0) + _binary_entropy(e) - delta

    eps = delta / ell
    alpha = 0.35
    prev_step = 0.0
    for _ in range(max_iter):
        if abs(gap(eps)) <= tol:
            break
        nxt = (delta - _binary_entropy(eps)) / (ell - 1.0)
        nxt = min(max(nxt, 1e-300), 0.5 - 1e-12)
        step = nxt - eps
        if prev_step * step < 0:  # oscillation: damp harder
            alpha *= 0.5
        prev_step = step
        eps = eps + alpha * step
    else:
        raise RuntimeError(f"tightness construction did not converge for m={m}, gamma={gamma}")

    p_heavy = (1.0 - eps) / 2.0
    p_light = eps / big_k
    weights = ((p_heavy, 2), (p_light, big_k))
    g_heavy = -math.log2(p_heavy)
    g_light = -math.log2(p_light)
    h = 2 * p_heavy * g_heavy + big_k * p_light * g_light
    m2 = 2 * p_heavy * g_heavy ** 2 + big_k * p_light * g_light ** 2
    return TightnessConstruction(
        m=m, gamma=gamma, epsilon=eps, delta_target=delta,
        weights=weights, entropy=h, second_moment=m2, ratio=m2 / (h * h),
    )


# ---------------------------------------------------------------------------
# Batch concentration condition. The estimator's batch size t must satisfy
# (1/(t*eps^2)) * (ratio - 1) <= 1/6, where ratio is the second moment of the
# unconditional self-information under the conditioned law divided by the
# square of its mean. This is what makes a single batch mean land within
# (1 +/- eps) of its target with probability 5/6 (Chebyshev).
# ---------------------------------------------------------------------------


def conditioned_ratio(probs, exclude_index: Optional[int] = None) -> Optional[float]:
    """M2/mean^2 of the unconditional self-information under the conditioned law.

    ``exclude_index`` removes one outcome and renormalizes the weights; the
    per-sample values stay log2(1/p) with the original p. Returns None when
    the conditioned support is empty.
    """
    _as_probs(probs, allow_sub=False)  # conditioning is defined on a full distribution
    p = np.asarray(probs, dtype=float)
    if exclude_index is not None:
        p = np.delete(p, exclude_index)
    p = p[p > 0]
    if p.size == 0:
        return None
    w = p / p.sum()
    g = -np.log2(p)
    mean = float(np.dot(w, g))
    m2 = float(np.dot(w, g * g))
    return m2 / (mean * mean)


def concentration_margin(probs, m: int, epsilon: float,
                         n: Optional[int] = None) -> Optional[float]:
    """(ratio - 1) / (t * eps^2) for the batch size the estimator would choose.

    Follows the estimator's branch selection: the dominator branch when some
    outcome has mass > 1/2 (conditioning on avoiding it), otherwise the full
    distribution. With ``n`` given, uses the input-bits batch sizing. Returns
    None in the degenerate point-mass case (no sampling happens there).
    Values <= 1/6 mean the chosen t satisfies the concentration condition.
    """
    from .estimator import batch_size_generic, batch_size_qif

    p = np.asarray(probs, dtype=float)
    imax = int(np.argmax(p))
    r = float(p[imax])
    if r > 0.5:
        if r >= 1.0:
            return None
        ratio = conditioned_ratio(p, exclude_index=imax)
        if ratio is None:
            return None
        t = (batch_size_qif(n, m, epsilon, r=r) if n is not None
             else batch_size_generic(m, epsilon, dominator=True))
    else:
        ratio = conditioned_ratio(p)
        t = (batch_size_qif(n, m, epsilon, r=None) if n is not None
             else batch_size_generic(m, epsilon, dominator=False))
    return (ratio - 1.0) / (t * epsilon * epsilon)


# ---------------------------------------------------------------------------
# Fuzzer. Families are seeded and regenerated deterministically: to reproduce
# case i of a run, replay the same regime/seed and take the i-th case.
# ---------------------------------------------------------------------------

REGIMES = ("high_entropy", "low_entropy_sub", "min_prob")


@dataclass
class FuzzCase:
    index: int
    family: str
    report: BoundReport
    margin: Optional[float] = None
    margin_ok: bool = True


@dataclass
class FuzzSummary:
    regime: str
    seed: int
    cases: int
    violations: list = field(default_factory=list)
    reports: Optional[list] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "seed": self.seed,
            "cases": self.cases,
            "violations": [
                {"index": c.index, "family": c.family, "report": c.report.to_dict(),
                 "margin": c.margin}
                for c in self.violations
            ],
            "ok": self.ok,
        }


def _metrics(p: np.ndarray) -> tuple[float, float, float, float]:
    """One pass over a positive table: (H, M2, heaviest mass, its self-info)."""
    lg = np.log2(p)
    h = float(-np.dot(p, lg))
    m2 = float(np.dot(p, lg * lg))
    imax = int(np.argmax(p))
    return h, m2, float(p[imax]), float(-lg[imax])


def _conditioned_ratio_fast(h: float, m2: float, r: float, g_max: float) -> Optional[float]:
    """Moment ratio after conditioning off the heaviest outcome, in O(1).

    The leftover weights are p_y/(1-r) with the unconditional self-information
    values, so both conditioned moments follow from the unconditioned ones.
    """
    mean = (h - r * g_max) / (1.0 - r)
    if mean <= 0.0:
        return None  # no mass left beyond the dominator
    second = (m2 - r * g_max * g_max) / (1.0 - r)
    return second / (mean * mean)


def _gen_high_entropy(gen: np.random.Generator):
    """Random table with H >= 1; support <= 2^16, universe exponent m."""
    kind = int(gen.integers(0, 4))
    k = int(gen.integers(2, 17))
    for _ in range(16):
        if kind <= 1:
            family = "dirichlet"
            p = gen.standard_exponential(2 ** k)
            p = p[p > 0]  # exact zeros occur, rarely, in the sampler output
            p /= p.sum()
        elif kind == 2:
            family = "geometric"
            q = 0.5 + 0.45 * gen.random()
            p = q ** np.arange(2 ** min(k, 12), dtype=float)
            p = p[p > 0]  # drop ratios that underflowed at deep tails
            p /= p.sum()
        else:
            family = "two_heavy"
            mm = int(gen.integers(3, 17))
            c = tightness_construction(mm, 0.2 + 0.6 * gen.random())
            p = c.probabilities()
            return p, mm, family, _metrics(p)
        met = _metrics(p)
        if met[0] >= 1.0:
            m = int(math.ceil(math.log2(p.size))) + int(gen.integers(0, 2))
            return p, max(m, 1), family, met
        kind = 0  # retry with a flatter family
    p = np.full(2 ** k, 2.0 ** (-k))
    return p, k, "uniform-fallback", _metrics(p)


def _gen_low_entropy_sub(gen: np.random.Generator):
    """Sub-distribution (total mass <= 1) with H <= 1 and m >= 2."""
    for _ in range(32):
        kind = int(gen.integers(0, 3))
        k = int(gen.integers(2, 13))
        size = 2 ** k - 1
        if kind == 0:
            family = "dominator-leftover"
            r = 0.5 + 0.5 * gen.random()
            eta = 1e-9 + gen.random() ** 3
            q = np.full(size, eta / max(size - 1, 1))
            q[0] = 1.0 if size == 1 else 1.0 - min(eta, 0.999)
            p = (1.0 - r) * (q / q.sum())
            mass = 1.0 - r
        elif kind == 1:
            family = "dominator-leftover-exp"
            r = 0.5 + 0.5 * gen.random()
            q = gen.standard_exponential(size)
            q = q[q > 0]
            p = (1.0 - r) * (q / q.sum())
            mass = 1.0 - r
        else:
            family = "near-point-mass"
            eta = 1e-9 + 0.12 * gen.random()
            p = np.full(size + 1, eta / max(size, 1))
            p[0] = 1.0 - eta
            mass = 1.0
        met = _metrics(p)
        if met[0] <= 1.0:
            return p, max(k, 2), family, met, mass
    p = np.array([0.4999])
    return p, 2, "half-point-fallback", _metrics(p), 0.4999


def _gen_min_prob(gen: np.random.Generator):
    """Table of integer counts over denominator Q <= 2^n, so every p >= 2^-n."""
    n = int(gen.integers(1, 17))
    if gen.random() < 0.05:
        nn = min(n, 12)
        p = np.full(2 ** nn, 2.0 ** (-nn))
        return p, nn, nn, "uniform-equality", _metrics(p)
    big_q = int(gen.integers(1, 2 ** n + 1))
    size = int(gen.integers(1, min(big_q, 4096) + 1))
    if size == 1:
        counts = np.array([big_q])
    else:
        cuts = np.sort(gen.choice(big_q - 1, size=size - 1, replace=False)) + 1
        counts = np.diff(np.concatenate(([0], cuts, [big_q])))
    p = counts / float(big_q)
    m = max(1, math.ceil(math.log2(max(p.size, 2))))
    return p, n, m, "counts", _metrics(p)


def _worst_margin(cond_ratio: float, m: int, n: Optional[int], r: Optional[float],
                  epsilons) -> float:
    """Largest (ratio-1)/(t*eps^2) over the batch sizes the estimator may pick."""
    from .estimator import batch_size_generic, batch_size_qif

    worst = 0.0
    for eps in epsilons:
        sizes = [batch_size_generic(m, eps, dominator=r is not None)]
        if n is not None:
            sizes.append(batch_size_qif(n, m, eps, r=r))
        for t in sizes:
            worst = max(worst, (cond_ratio - 1.0) / (t * eps * eps))
    return worst


def fuzz_bounds(regime: str, count: int, seed: int,
                epsilons: tuple[float, ...] = (0.8, 0.3),
                collect_reports: bool = False) -> FuzzSummary:
    """Fuzz one regime ``count`` times; returns violations (empty means pass).

    For full distributions the batch concentration condition is also checked
    at each epsilon, with the input-bits sizing too in the min_prob regime.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    gen = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(seed, spawn_key=(REGIMES.index(regime),))))
    summary = FuzzSummary(regime=regime, seed=seed, cases=count)
    reports = [] if collect_reports else None
    sixth = 1.0 / 6.0 + 1e-9
    for i in range(count):
        n = None
        qif_bound = None
        if regime == "high_entropy":
            p, m, family, met = _gen_high_entropy(gen)
            full = True
        elif regime == "low_entropy_sub":
            p, m, family, met, mass = _gen_low_entropy_sub(gen)
            full = abs(mass - 1.0) <= 1e-9
        else:
            p, n, m, family, met = _gen_min_prob(gen)
            full = True
        h, m2, r, g_max = met
        ratio = m2 / (h * h) if h > 0 else None
        bh = high_entropy_ratio_bound(m)
        bl = low_entropy_moment_bound(m)
        if regime == "min_prob":
            qif_bound = n * h
            ok = m2 <= qif_bound * (1 + FP_TOL) + 1e-15
        else:
            ok = True
            if h >= 1.0:
                ok = ratio <= bh * (1 + FP_TOL)
            if h <= 1.0 and m >= 2:
                ok = ok and m2 <= bl * (1 + FP_TOL)

        margin = None
        if full and 0.0 < r:
            if r > 0.5:
                cond = None if r >= 1.0 else _conditioned_ratio_fast(h, m2, r, g_max)
                if cond is not None:
                    margin = _worst_margin(cond, m, n, r, epsilons)
            else:
                margin = _worst_margin(ratio, m, n, None, epsilons)
        margin_ok = margin is None or margin <= sixth

        if not ok or not margin_ok or reports is not None:
            report = BoundReport(m, h, m2, ratio, bh, bl, qif_bound, ok)
            case = FuzzCase(index=i, family=family, report=report,
                            margin=margin, margin_ok=margin_ok)
            if not ok or not margin_ok:
                summary.violations.append(case)
            if reports is not None:
                reports.append(case)
    summary.reports = reports
    return summary
