"""Exact baseline runner and benchmark harness.

Per instance the harness records the enumeration cost the exact baseline pays
(one probability evaluation per distinct output assignment), runs the
estimator, and reports the observed error
max(Estimated/Exact - 1, Exact/Estimated - 1) when the baseline completed.
Instances whose enumeration cost exceeds the cap (or whose enumeration runs
past the wall-clock budget) keep their estimator column and render "-" for
the baseline, so the cost gap stays visible.

The desk corpus is generated, not shipped as files: password-checker shapes,
AND/XOR gate trees with auxiliary variables, ripple-carry adders, identity
maps, seeded random circuit formulas, and a few explicit JSON tables.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import dist_explicit, formula
from .core import ResourceCapError
from .estimator import EstimationParams, EstimationResult, estimate_entropy
from .formula import CircuitFormula, DeadlineExceeded

CSV_COLUMNS = (
    "benchmark", "u_bits", "v_bits", "baseline_time_s", "baseline_eval_queries",
    "est_time_s", "est_proc_queries", "exact_entropy", "est_entropy",
    "observed_error", "error",
)


def observed_error(estimated: float, exact: float) -> float:
    """max(Estimated/Exact - 1, Exact/Estimated - 1); both inputs positive."""
    if estimated <= 0 or exact <= 0:
        raise ValueError("observed error needs positive estimate and exact value")
    return max(estimated / exact - 1.0, exact / estimated - 1.0)


@dataclass
class BenchRecord:
    name: str
    n: Optional[int] = None
    m: Optional[int] = None
    baseline_time: Optional[float] = None  # None: skipped or timed out ("-")
    baseline_eval_queries: Optional[int] = None
    est_time: Optional[float] = None
    est_proc_queries: Optional[int] = None
    exact_entropy: Optional[float] = None
    est_entropy: Optional[float] = None
    observed_error: Optional[float] = None
    error: Optional[str] = None
    result: Optional[EstimationResult] = None  # full estimator output, not serialized


def _instance_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index) & 0xFFFFFFFFFFFFFFFF


def run_bench(paths, epsilon: float = 0.8, delta: float = 0.09, seed: int = 0,
              timeout: float = 60.0, max_evals: int = 100_000,
              max_vars: int = formula.DEFAULT_MAX_VARS,
              threads: int = 1) -> list[BenchRecord]:
    """Run baseline + estimator over distribution files / CNFs.

    Deterministic for a given seed: instance i runs with a seed derived from
    (seed, i), and the skip decision for the baseline is count-based
    (enumeration cost vs max_evals) before any wall-clock budget applies.
    Per-instance failures are recorded and the run continues.
    """
    records = []
    for index, path in enumerate(paths):
        path = Path(path)
        rec = BenchRecord(name=path.name)
        records.append(rec)
        inst_seed = _instance_seed(seed, index)
        try:
            if path.suffix == ".cnf":
                _bench_formula(rec, formula.load_file(path), epsilon, delta,
                               inst_seed, timeout, max_evals, max_vars, threads)
            else:
                _bench_table(rec, dist_explicit.load_file(path), epsilon, delta,
                             inst_seed, threads)
        except Exception as exc:  # keep going; the record carries the reason
            rec.error = f"{type(exc).__name__}: {exc}"
    return records


def _bench_formula(rec: BenchRecord, f: CircuitFormula, epsilon, delta, seed,
                   timeout, max_evals, max_vars, threads) -> None:
    rec.n, rec.m = f.n, f.m
    rec.baseline_eval_queries = formula.count_projected(f, f.v_vars, max_vars=max_vars)
    if rec.baseline_eval_queries <= max_evals:
        start = time.perf_counter()
        try:
            exact = formula.exact_entropy_formula(
                f, deadline=start + timeout, max_vars=max_vars)
            rec.baseline_time = time.perf_counter() - start
            rec.exact_entropy = exact.entropy
        except DeadlineExceeded:
            pass  # rendered as "-"
    oracle = formula.FormulaOracle(f, max_vars=max_vars)
    params = EstimationParams(epsilon=epsilon, delta=delta, seed=seed, mode="qif")
    result = estimate_entropy(oracle, params, threads=threads)
    rec.result = result
    rec.est_entropy = result.h_hat
    rec.est_time = result.wall_time
    rec.est_proc_queries = result.ledger.proc_queries
    if rec.exact_entropy and rec.est_entropy and rec.exact_entropy > 0 and rec.est_entropy > 0:
        rec.observed_error = observed_error(rec.est_entropy, rec.exact_entropy)


def _bench_table(rec: BenchRecord, dist, epsilon, delta, seed, threads) -> None:
    rec.n, rec.m = None, dist.m
    start = time.perf_counter()
    rec.exact_entropy = dist_explicit.exact_entropy(dist)
    rec.baseline_time = time.perf_counter() - start
    rec.baseline_eval_queries = len(dist)
    oracle = dist_explicit.ExplicitOracle(dist)
    params = EstimationParams(epsilon=epsilon, delta=delta, seed=seed, mode="generic")
    result = estimate_entropy(oracle, params, threads=threads)
    rec.result = result
    rec.est_entropy = result.h_hat
    rec.est_time = result.wall_time
    rec.est_proc_queries = result.ledger.proc_queries
    if rec.exact_entropy > 0 and rec.est_entropy > 0:
        rec.observed_error = observed_error(rec.est_entropy, rec.exact_entropy)


@dataclass
class BenchSummary:
    instances: int
    with_exact: int
    within_tolerance: int
    max_observed_error: Optional[float]
    epsilon: float
    histogram: list = field(default_factory=list)  # (name, observed_error), ascending

    @property
    def fraction_within(self) -> Optional[float]:
        if self.with_exact == 0:
            return None
        return self.within_tolerance / self.with_exact

    def to_dict(self) -> dict:
        return {
            "instances": self.instances,
            "with_exact": self.with_exact,
            "within_tolerance": self.within_tolerance,
            "fraction_within": self.fraction_within,
            "max_observed_error": self.max_observed_error,
            "epsilon": self.epsilon,
            "histogram": [{"benchmark": n, "observed_error": e} for n, e in self.histogram],
        }


def summarize(records, epsilon: float = 0.8) -> BenchSummary:
    """Accuracy summary plus bar-chart-ready (benchmark, observed error) rows.

    Instances without an exact value (baseline timeout) are excluded from the
    histogram and the tolerance fraction.
    """
    if not records:
        raise ValueError("no records to summarize")
    scored = [(r.name, r.observed_error) for r in records if r.observed_error is not None]
    scored.sort(key=lambda pair: pair[1])
    return BenchSummary(
        instances=len(records),
        with_exact=len(scored),
        within_tolerance=sum(1 for _, e in scored if e <= epsilon),
        max_observed_error=max((e for _, e in scored), default=None),
        epsilon=epsilon,
        histogram=scored,
    )


def _fmt_float(x: Optional[float]) -> str:
    return "" if x is None else repr(float(x))


def to_csv(records, timings: bool = False) -> str:
    """Render records with the baseline/estimator cost columns.

    Wall-time cells are emitted only with ``timings=True`` so default output
    is byte-stable across repeated runs; "-" still marks an unavailable
    baseline either way.
    """
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        baseline_time = "-" if r.exact_entropy is None else (
            _fmt_float(r.baseline_time) if timings else "")
        row = (
            r.name,
            "" if r.n is None else str(r.n),
            "" if r.m is None else str(r.m),
            baseline_time,
            "" if r.baseline_eval_queries is None else str(r.baseline_eval_queries),
            _fmt_float(r.est_time) if timings else "",
            "" if r.est_proc_queries is None else str(r.est_proc_queries),
            _fmt_float(r.exact_entropy),
            _fmt_float(r.est_entropy),
            _fmt_float(r.observed_error),
            r.error or "",
        )
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def record_to_dict(r: BenchRecord, timings: bool = False) -> dict:
    return {
        "benchmark": r.name,
        "u_bits": r.n,
        "v_bits": r.m,
        "baseline_time_s": (r.baseline_time if timings else None)
                           if r.exact_entropy is not None else "-",
        "baseline_eval_queries": r.baseline_eval_queries,
        "est_time_s": r.est_time if timings else None,
        "est_proc_queries": r.est_proc_queries,
        "exact_entropy": r.exact_entropy,
        "est_entropy": r.est_entropy,
        "observed_error": r.observed_error,
        "error": r.error,
    }


# ---------------------------------------------------------------------------
# Corpus families.
# ---------------------------------------------------------------------------


def password_checker(k: int, secret: int = 0) -> CircuitFormula:
    """Single output bit that fires only on one k-bit input (mass 2^-k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    v = k + 1
    lits = [u if (secret >> (u - 1)) & 1 else -u for u in range(1, k + 1)]
    clauses = [(-v, l) for l in lits]
    clauses.append(tuple([v] + [-l for l in lits]))
    return CircuitFormula(num_vars=k + 1, clauses=tuple(clauses),
                          u_vars=tuple(range(1, k + 1)), v_vars=(v,))


def identity_map(k: int) -> CircuitFormula:
    """Outputs copy the inputs; the output distribution is uniform over 2^k."""
    clauses = []
    for i in range(1, k + 1):
        v = k + i
        clauses += [(-v, i), (v, -i)]
    return CircuitFormula(num_vars=2 * k, clauses=tuple(clauses),
                          u_vars=tuple(range(1, k + 1)),
                          v_vars=tuple(range(k + 1, 2 * k + 1)))


def gate_tree(op: str, k: int = 4) -> CircuitFormula:
    """Depth-2 tree of one gate kind over k=4 inputs, with auxiliary gates."""
    if k != 4:
        raise ValueError("gate_tree is defined for 4 inputs")
    u = (1, 2, 3, 4)
    v = 5
    g1, g2 = 6, 7
    clauses = []
    clauses += formula._gate_clauses(g1, op, 1, 2)
    clauses += formula._gate_clauses(g2, op, 3, 4)
    clauses += formula._gate_clauses(v, op, g1, g2)
    return CircuitFormula(num_vars=7, clauses=tuple(clauses), u_vars=u, v_vars=(v,))


def _xor3_clauses(s: int, a: int, b: int, c: int) -> list[tuple[int, ...]]:
    return [
        (-s, a, b, c), (-s, -a, -b, c), (-s, -a, b, -c), (-s, a, -b, -c),
        (s, -a, b, c), (s, a, -b, c), (s, a, b, -c), (s, -a, -b, -c),
    ]


def _majority_clauses(c: int, a: int, b: int, cin: int) -> list[tuple[int, ...]]:
    return [(-c, a, b), (-c, a, cin), (-c, b, cin),
            (c, -a, -b), (c, -a, -cin), (c, -b, -cin)]


def ripple_adder(k: int) -> CircuitFormula:
    """Sum of two uniform k-bit integers; outputs are the k+1 sum bits.

    Variables: a_1..a_k, b_1..b_k (inputs), s_1..s_{k+1} (outputs), and k-1
    auxiliary carries. 4k variables total.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    a = list(range(1, k + 1))
    b = list(range(k + 1, 2 * k + 1))
    s = list(range(2 * k + 1, 3 * k + 2))  # k+1 outputs; s[k] is the carry out
    carries = list(range(3 * k + 2, 4 * k + 1))  # c_1..c_{k-1}
    clauses: list[tuple[int, ...]] = []
    clauses += formula._gate_clauses(s[0], "xor", a[0], b[0])
    chain = carries + [s[k]]  # carry out of stage i lands in chain[i-1]
    clauses += formula._gate_clauses(chain[0], "and", a[0], b[0])
    for i in range(1, k):
        clauses += _xor3_clauses(s[i], a[i], b[i], chain[i - 1])
        clauses += _majority_clauses(chain[i], a[i], b[i], chain[i - 1])
    return CircuitFormula(num_vars=4 * k, clauses=tuple(clauses),
                          u_vars=tuple(a + b), v_vars=tuple(s))


def generate_corpus(directory, seed: int = 0) -> list[Path]:
    """Write the seeded desk corpus into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    paths = []

    def put_cnf(name: str, f: CircuitFormula):
        p = directory / f"{name}.cnf"
        p.write_text(formula.to_dimacs(f, comment=name))
        paths.append(p)

    def put_json(name: str, dist):
        p = directory / f"{name}.json"
        dist_explicit.save_file(dist, p)
        paths.append(p)

    put_cnf("pwd_checker_8", password_checker(8, secret=int(gen.integers(0, 2 ** 8))))
    put_cnf("pwd_checker_10", password_checker(10, secret=int(gen.integers(0, 2 ** 10))))
    put_cnf("and_tree", gate_tree("and"))
    put_cnf("xor_tree", gate_tree("xor"))
    put_cnf("adder_3", ripple_adder(3))
    put_cnf("adder_4", ripple_adder(4))
    put_cnf("identity_8", identity_map(8))
    for i in range(4):
        put_cnf(f"rand_circuit_{i}",
                formula.random_circuit_formula(gen, max_inputs=6, max_outputs=4,
                                               allow_aux=True))
    put_json("dominated_075", dist_explicit.dominated(0.75, 8))
    put_json("geometric_256", dist_explicit.geometric(2.0, 256))
    put_json("dirichlet_64", dist_explicit.dirichlet(64, seed=seed + 17))
    return paths
