"""Circuit-formula distributions: CNF parsing, exact projected counting,
counting-guided uniform sampling, and the PROC oracle assembled from them.

A circuit formula is a CNF over an input block U and an output block V where
every satisfying assignment is determined by its U-part. It induces a
distribution over V-assignments sigma:

    p_sigma = |sol(phi with V := sigma)| / |sol(phi) projected to U|

with every positive p_sigma at least 2^-|U|. One PROC draw costs one uniform
sample of a full solution (projected to V) plus one numerator count; the
denominator is counted once and reused.

Variables outside U and V are auxiliary and are projected away in every
count. Counts are exact integers; probabilities are a single float division
(counts beyond 2^53 would lose exactness, which is far past desk scale).
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Optional

from .core import EmptySupportError, ProcOracle, ProcQueryResult, ResourceCapError, Rng

DEFAULT_MAX_VARS = 64
BRUTE_FORCE_MAX_VARS = 20

Sigma = tuple  # one 0/1 entry per output variable, in declaration order


class DimacsError(ValueError):
    """Malformed extended-DIMACS input."""


class DeadlineExceeded(RuntimeError):
    """A wall-clock budget ran out during exact enumeration."""


def _normalize_clause(lits) -> Optional[tuple[int, ...]]:
    """Sorted, deduplicated clause; None for tautologies."""
    seen = set(lits)
    if any(-l in seen for l in seen):
        return None
    return tuple(sorted(seen, key=lambda l: (abs(l), l < 0)))


@dataclass(frozen=True)
class CircuitFormula:
    """CNF over inputs U and outputs V, plus the conditioning state.

    ``blocking`` lists forbidden V-assignments; counting and sampling respect
    it, while reported probabilities always refer to the unblocked formula.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    u_vars: tuple[int, ...]
    v_vars: tuple[int, ...]
    blocking: tuple[Sigma, ...] = ()

    @property
    def n(self) -> int:
        return len(self.u_vars)

    @property
    def m(self) -> int:
        return len(self.v_vars)

    @property
    def aux_vars(self) -> tuple[int, ...]:
        declared = set(self.u_vars) | set(self.v_vars)
        return tuple(v for v in range(1, self.num_vars + 1) if v not in declared)

    def blocking_clauses(self, extra: Iterable[Sigma] = ()) -> list[tuple[int, ...]]:
        out = []
        for sigma in tuple(self.blocking) + tuple(extra):
            sigma = normalize_sigma(sigma, self.m)
            out.append(tuple(-v if bit else v for v, bit in zip(self.v_vars, sigma)))
        return out

    def with_blocking(self, sigmas: Iterable[Sigma]) -> "CircuitFormula":
        extra = tuple(normalize_sigma(s, self.m) for s in sigmas)
        return replace(self, blocking=self.blocking + extra)


def normalize_sigma(sigma, m: int) -> Sigma:
    s = tuple(int(b) for b in sigma)
    if len(s) != m or any(b not in (0, 1) for b in s):
        raise ValueError(f"sigma must be {m} bits of 0/1, got {sigma!r}")
    return s


def sigma_to_str(sigma: Sigma) -> str:
    return "".join(str(b) for b in sigma)


# ---------------------------------------------------------------------------
# Extended DIMACS. Variable blocks are declared in comment lines terminated
# by 0: "c u <vars> 0" for inputs and "c v <vars> 0" for outputs, repeatable
# and cumulative. "c ind <vars> 0" (the common single-block projection
# convention) is accepted as an alias for the U block.
# ---------------------------------------------------------------------------


def parse_dimacs(text: str) -> CircuitFormula:
    num_vars = None
    u_vars: list[int] = []
    v_vars: list[int] = []
    u_declared = False
    v_declared = False
    clause_tokens: list[int] = []

    def read_block(tokens, into, line_no):
        for tok in tokens:
            try:
                v = int(tok)
            except ValueError:
                raise DimacsError(f"line {line_no}: bad variable {tok!r}") from None
            if v == 0:
                return
            if v < 0:
                raise DimacsError(f"line {line_no}: negative variable {v} in block declaration")
            if v not in into:
                into.append(v)

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            if len(parts) >= 2 and parts[1] in ("u", "ind"):
                u_declared = True
                read_block(parts[2:], u_vars, line_no)
            elif len(parts) >= 2 and parts[1] == "v":
                v_declared = True
                read_block(parts[2:], v_vars, line_no)
            continue
        if parts[0] == "p":
            if num_vars is not None:
                raise DimacsError(f"line {line_no}: duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {line_no}: malformed header {line!r}")
            try:
                num_vars = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsError(f"line {line_no}: malformed header {line!r}") from None
            if num_vars < 0:
                raise DimacsError(f"line {line_no}: negative variable count")
            continue
        for tok in parts:
            try:
                clause_tokens.append(int(tok))
            except ValueError:
                raise DimacsError(f"line {line_no}: bad literal {tok!r}") from None

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if not u_declared:
        raise DimacsError("missing U declaration ('c u ... 0' or 'c ind ... 0')")
    if not v_declared:
        raise DimacsError("missing V declaration ('c v ... 0')")
    if not v_vars:
        raise DimacsError("V must be nonempty")
    if not u_vars:
        raise DimacsError("U must be nonempty")
    overlap = set(u_vars) & set(v_vars)
    if overlap:
        raise DimacsError(f"variables in both U and V: {sorted(overlap)}")
    for v in u_vars + v_vars:
        if v > num_vars:
            raise DimacsError(f"declared variable {v} out of range (num_vars={num_vars})")

    clauses = []
    current: list[int] = []
    for lit in clause_tokens:
        if lit == 0:
            clauses.append(tuple(current))
            current = []
            continue
        if abs(lit) > num_vars:
            raise DimacsError(f"literal out of range: {lit} (num_vars={num_vars})")
        current.append(lit)
    if current:
        raise DimacsError("last clause is not terminated by 0")

    normalized = []
    for c in clauses:
        nc = _normalize_clause(c)
        if nc is not None:  # drop tautologies
            normalized.append(nc)
    return CircuitFormula(
        num_vars=num_vars,
        clauses=tuple(normalized),
        u_vars=tuple(u_vars),
        v_vars=tuple(v_vars),
    )


def to_dimacs(formula: CircuitFormula, comment: str = "") -> str:
    lines = []
    if comment:
        for part in comment.splitlines():
            lines.append(f"c {part}")
    lines.append(f"p cnf {formula.num_vars} {len(formula.clauses)}")
    lines.append("c u " + " ".join(map(str, formula.u_vars)) + " 0")
    lines.append("c v " + " ".join(map(str, formula.v_vars)) + " 0")
    for c in formula.clauses:
        lines.append(" ".join(map(str, c)) + " 0")
    return "\n".join(lines) + "\n"


def load_file(path) -> CircuitFormula:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dimacs(fh.read())


# ---------------------------------------------------------------------------
# Exact counting: DPLL search with unit propagation. Residual formulas (the
# simplified clause set after an assignment) fully determine their count, so
# they are memoized; repeated counts under related assumption sets (sampler
# prefixes, per-sigma numerators) then cost a simplification pass plus cache
# hits. No component decomposition is performed.
# ---------------------------------------------------------------------------


def _simplify(clauses, assign):
    """One pass: drop satisfied clauses, strip falsified literals.

    Returns (residual list, unit literals) or None on an empty clause.
    """
    residual = []
    units = []
    for c in clauses:
        sat = False
        rem = []
        for lit in c:
            val = assign.get(abs(lit))
            if val is None:
                rem.append(lit)
            elif val == (lit > 0):
                sat = True
                break
        if sat:
            continue
        if not rem:
            return None
        if len(rem) == 1:
            units.append(rem[0])
        residual.append(tuple(rem))
    return residual, units


def _propagate(clauses, assign):
    """Unit propagation to a fixed point; extends ``assign`` in place.

    Returns (residual frozenset, assign) or None on conflict.
    """
    current = clauses
    while True:
        simp = _simplify(current, assign)
        if simp is None:
            return None
        residual, units = simp
        if not units:
            return frozenset(residual), assign
        for lit in units:
            var, val = abs(lit), lit > 0
            prev = assign.get(var)
            if prev is not None and prev != val:
                return None
            assign[var] = val
        current = residual


class CountEngine:
    """Exact model counts of one clause set, projected onto a variable subset."""

    def __init__(self, num_vars: int, clauses, projection):
        self.num_vars = num_vars
        self.projection = frozenset(projection)
        norm = []
        self._unsat = False
        for c in clauses:
            nc = _normalize_clause(c)
            if nc is None:
                continue
            if not nc:
                self._unsat = True
            norm.append(nc)
        self.clauses = tuple(norm)
        self._count_memo: dict = {}
        self._sat_memo: dict = {}

    def count(self, assumptions: Optional[dict] = None) -> int:
        """|{tau restricted to projection : tau satisfies clauses + assumptions}|."""
        if self._unsat:
            return 0
        assign = dict(assumptions) if assumptions else {}
        for var in assign:
            if not 1 <= var <= self.num_vars:
                raise ValueError(f"assumption variable {var} out of range")
        prop = _propagate(self.clauses, assign)
        if prop is None:
            return 0
        residual, assign = prop
        in_residual = {abs(l) for c in residual for l in c}
        free = sum(1 for v in self.projection
                   if v not in assign and v not in in_residual)
        return (1 << free) * self._count_residual(residual)

    def _count_residual(self, residual: frozenset) -> int:
        if not residual:
            return 1
        cached = self._count_memo.get(residual)
        if cached is not None:
            return cached
        vars_here = {abs(l) for c in residual for l in c}
        proj_here = vars_here & self.projection
        if not proj_here:
            result = 1 if self._satisfiable(residual) else 0
        else:
            branch = min(proj_here)
            result = 0
            for val in (False, True):
                prop = _propagate(residual, {branch: val})
                if prop is None:
                    continue
                sub, assigned = prop
                sub_vars = {abs(l) for c in sub for l in c}
                # projection vars that vanished without being pinned are free
                gone_free = sum(1 for w in proj_here
                                if w not in assigned and w not in sub_vars)
                result += (1 << gone_free) * self._count_residual(sub)
        self._count_memo[residual] = result
        return result

    def _satisfiable(self, residual: frozenset) -> bool:
        if not residual:
            return True
        cached = self._sat_memo.get(residual)
        if cached is not None:
            return cached
        branch = min(abs(l) for c in residual for l in c)
        result = False
        for val in (False, True):
            prop = _propagate(residual, {branch: val})
            if prop is not None and self._satisfiable(prop[0]):
                result = True
                break
        self._sat_memo[residual] = result
        return result


def _engine_for(formula: CircuitFormula, projection, extra_blocking=(),
                include_blocking: bool = True) -> CountEngine:
    clauses = list(formula.clauses)
    if include_blocking:
        clauses += formula.blocking_clauses(extra_blocking)
    return CountEngine(formula.num_vars, clauses, projection)


def count_projected(formula: CircuitFormula, projection,
                    assumptions: Optional[dict] = None,
                    max_vars: int = DEFAULT_MAX_VARS) -> int:
    """Exact |sol(phi ^ assumptions ^ blocking) projected to ``projection``|."""
    projection = frozenset(projection)
    if not projection <= set(range(1, formula.num_vars + 1)):
        raise ValueError("projection must be a subset of the declared variables")
    if formula.num_vars > max_vars:
        raise ResourceCapError(
            f"formula has {formula.num_vars} variables, cap is {max_vars}")
    return _engine_for(formula, projection).count(assumptions)


def brute_force_count(formula: CircuitFormula, projection,
                      assumptions: Optional[dict] = None) -> int:
    """Reference counter: enumerate all assignments as one big bitmask.

    Bit a of the solutions mask corresponds to the assignment whose variable v
    takes bit (v-1) of a. Independent of the search engine; capped at
    20 variables.
    """
    n = formula.num_vars
    if n > BRUTE_FORCE_MAX_VARS:
        raise ResourceCapError(f"brute force capped at {BRUTE_FORCE_MAX_VARS} variables")
    projection = frozenset(projection)
    total_bits = 1 << n
    full = (1 << total_bits) - 1
    masks = _bit_columns(n)
    sols = full
    clauses = list(formula.clauses) + formula.blocking_clauses()
    for c in clauses:
        cm = 0
        for lit in c:
            cm |= masks[abs(lit)] if lit > 0 else (full ^ masks[abs(lit)])
        sols &= cm
        if not sols:
            return 0
    for var, val in (assumptions or {}).items():
        sols &= masks[var] if val else (full ^ masks[var])
        if not sols:
            return 0
    for v in range(1, n + 1):
        if v not in projection:
            half = 1 << (v - 1)
            sols = (sols & ~masks[v]) | ((sols & masks[v]) >> half)
    return sols.bit_count()


@lru_cache(maxsize=32)
def _bit_columns(num_vars: int) -> dict:
    total_bits = 1 << num_vars
    masks = {}
    for v in range(1, num_vars + 1):
        half = 1 << (v - 1)
        period = half << 1
        block = ((1 << half) - 1) << half
        reps = total_bits // period
        mult = ((1 << (reps * period)) - 1) // ((1 << period) - 1)
        masks[v] = block * mult
    return masks


def iter_solutions(formula: CircuitFormula, assumptions: Optional[dict] = None,
                   limit: Optional[int] = None) -> Iterator[dict]:
    """Full satisfying assignments of phi ^ blocking, in a fixed order."""
    clauses = tuple(nc for nc in (
        _normalize_clause(c)
        for c in list(formula.clauses) + formula.blocking_clauses()
    ) if nc is not None)
    n = formula.num_vars
    emitted = 0

    def rec(residual, assign):
        nonlocal emitted
        if limit is not None and emitted >= limit:
            return
        prop = _propagate(residual, dict(assign))
        if prop is None:
            return
        residual, assign = prop
        if not residual:
            free = [v for v in range(1, n + 1) if v not in assign]
            for bits in product((False, True), repeat=len(free)):
                if limit is not None and emitted >= limit:
                    return
                full = dict(assign)
                full.update(zip(free, bits))
                emitted += 1
                yield full
            return
        branch = min(abs(l) for c in residual for l in c)
        for val in (False, True):
            yield from rec(residual, {**assign, branch: val})

    yield from rec(clauses, dict(assumptions or {}))


def sample_uniform_solution(formula: CircuitFormula, rng: Rng,
                            max_vars: int = DEFAULT_MAX_VARS) -> dict:
    """Exactly uniform draw from sol(phi ^ blocking), by self-reduction:
    variables are fixed in ascending index order, branching to value 1 with
    probability count(x=1)/count(x=0 or 1) using exact counts."""
    if formula.num_vars > max_vars:
        raise ResourceCapError(
            f"formula has {formula.num_vars} variables, cap is {max_vars}")
    ctx = _SamplerContext(formula, ())
    if ctx.total == 0:
        raise EmptySupportError("formula has no solutions under the current blocking")
    return ctx.sample(rng)


class _SamplerContext:
    """Counting state for uniform sampling under one exclusion set."""

    __slots__ = ("engine", "total", "order", "prefix_counts")

    def __init__(self, formula: CircuitFormula, excluded: tuple):
        all_vars = range(1, formula.num_vars + 1)
        self.engine = _engine_for(formula, all_vars, extra_blocking=excluded)
        self.total = self.engine.count()
        self.order = tuple(all_vars)
        self.prefix_counts: dict = {}

    def sample(self, rng: Rng) -> dict:
        us = rng.random_array(len(self.order))
        assign: dict = {}
        bits = 0
        cur = self.total
        for depth, var in enumerate(self.order):
            key = (depth + 1, bits | (1 << depth))
            c1 = self.prefix_counts.get(key)
            if c1 is None:
                assign[var] = True
                c1 = self.engine.count(assign)
                self.prefix_counts[key] = c1
            if us[depth] * cur < c1:
                assign[var] = True
                bits |= 1 << depth
                cur = c1
            else:
                assign[var] = False
                cur -= c1
        return assign


# ---------------------------------------------------------------------------
# Circuit-property validation, the sigma distribution, and the exact baseline.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the circuit-property check.

    ``verdict`` is "valid", "invalid" (with a witness pair of full solutions
    sharing a U-projection) or "unvalidated" (resource cap; estimation may
    proceed with a warning, the guarantees then assume the property).
    """

    verdict: str
    witness: Optional[tuple[dict, dict]] = None
    solutions: Optional[int] = None
    input_projections: Optional[int] = None

    @property
    def valid(self) -> bool:
        return self.verdict == "valid"


def validate_circuit_property(formula: CircuitFormula,
                              max_vars: int = DEFAULT_MAX_VARS) -> ValidationReport:
    """Check that solutions are determined by their U-part.

    Injectivity of the U-projection on sol(phi) is equivalent to the full
    solution count equalling the U-projected count; a witness pair is
    extracted by descending into a U-prefix where the two counts differ.
    Ignores any blocking (the property concerns the raw formula).
    """
    if formula.num_vars > max_vars:
        return ValidationReport(verdict="unvalidated")
    base = replace(formula, blocking=())
    eng_full = _engine_for(base, range(1, base.num_vars + 1))
    eng_u = _engine_for(base, base.u_vars)
    total = eng_full.count()
    projected = eng_u.count()
    if total == projected:
        return ValidationReport(verdict="valid", solutions=total,
                                input_projections=projected)

    assumptions: dict = {}
    for u in base.u_vars:
        for val in (False, True):
            trial = {**assumptions, u: val}
            if eng_full.count(trial) > eng_u.count(trial):
                assumptions = trial
                break
        else:  # pragma: no cover - counts guarantee a branch exists
            break
    pair = []
    for sol in iter_solutions(base, assumptions=assumptions, limit=None):
        if not pair:
            pair.append(sol)
            continue
        if any(sol[u] != pair[0][u] for u in base.u_vars):
            continue
        if sol != pair[0]:
            pair.append(sol)
            break
    witness = tuple(pair) if len(pair) == 2 else None
    return ValidationReport(verdict="invalid", witness=witness,
                            solutions=total, input_projections=projected)


def sigma_distribution(formula: CircuitFormula, deadline: Optional[float] = None,
                       max_sigmas: Optional[int] = None,
                       max_vars: int = DEFAULT_MAX_VARS):
    """All output assignments with positive mass, as (sigma, numerator) pairs,
    plus the shared denominator |sol(phi) projected to U|.

    Probabilities are exact rationals numerator/denominator; for a valid
    circuit formula the numerators sum to the denominator exactly.
    """
    if formula.num_vars > max_vars:
        raise ResourceCapError(
            f"formula has {formula.num_vars} variables, cap is {max_vars}")
    base = replace(formula, blocking=())
    engine = _engine_for(base, base.u_vars)
    denominator = engine.count()
    out: list[tuple[Sigma, int]] = []
    if denominator == 0:
        return out, 0
    v_vars = base.v_vars

    def rec(idx: int, assumptions: dict):
        if deadline is not None and time.perf_counter() > deadline:
            raise DeadlineExceeded("sigma enumeration ran past its deadline")
        cnt = engine.count(assumptions)
        if cnt == 0:
            return
        if idx == len(v_vars):
            if max_sigmas is not None and len(out) >= max_sigmas:
                raise ResourceCapError(f"more than {max_sigmas} output assignments")
            sigma = tuple(int(assumptions[v]) for v in v_vars)
            out.append((sigma, cnt))
            return
        for val in (False, True):
            rec(idx + 1, {**assumptions, v_vars[idx]: val})

    rec(0, {})
    return out, denominator


@dataclass(frozen=True)
class ExactEntropyResult:
    entropy: float
    eval_queries: int  # |sol(phi) projected to V|: the evaluation-oracle cost


def exact_entropy_formula(formula: CircuitFormula, deadline: Optional[float] = None,
                          max_sigmas: Optional[int] = None,
                          max_vars: int = DEFAULT_MAX_VARS) -> ExactEntropyResult:
    """Exact entropy of the induced output distribution, in bits.

    Enumerates every sigma with positive mass and computes p_sigma from exact
    counts; the enumeration size is the query cost an evaluation-oracle
    baseline would pay.
    """
    sigmas, den = sigma_distribution(formula, deadline=deadline,
                                     max_sigmas=max_sigmas, max_vars=max_vars)
    if not sigmas:
        raise EmptySupportError("formula is unsatisfiable; no output distribution")
    h = math.fsum((num / den) * math.log2(den / num) for _, num in sigmas)
    return ExactEntropyResult(entropy=h, eval_queries=len(sigmas))


# ---------------------------------------------------------------------------
# PROC oracle over the induced sigma-distribution.
# ---------------------------------------------------------------------------


class FormulaOracle(ProcOracle):
    """PROC for a circuit formula via exact counting and uniform sampling.

    Each draw makes one uniform-sampler query on the conditioned formula and
    one numerator count on the unblocked formula; the shared denominator is
    counted once and cached, so counter_queries == proc_queries + 1 after the
    first draw. Clones share the formula, engines and caches but keep their
    own query counters.
    """

    def __init__(self, formula: CircuitFormula, max_vars: int = DEFAULT_MAX_VARS):
        if formula.num_vars > max_vars:
            raise ResourceCapError(
                f"formula has {formula.num_vars} variables, cap is {max_vars}")
        self.formula = formula
        self._numerator_engine = _engine_for(formula, formula.u_vars,
                                             include_blocking=False)
        self._sampler_contexts: dict = {}
        self._den_state = {"lock": threading.Lock(), "value": None}
        self.proc_queries = 0
        self.counter_queries = 0
        self.sampler_queries = 0

    def universe_bits(self) -> int:
        return self.formula.m

    def input_bits(self) -> int:
        return self.formula.n

    def clone(self) -> "FormulaOracle":
        other = object.__new__(FormulaOracle)
        other.formula = self.formula
        other._numerator_engine = self._numerator_engine
        other._sampler_contexts = self._sampler_contexts
        other._den_state = self._den_state
        other.proc_queries = 0
        other.counter_queries = 0
        other.sampler_queries = 0
        return other

    def _denominator(self) -> int:
        state = self._den_state
        if state["value"] is None:
            with state["lock"]:
                if state["value"] is None:
                    state["value"] = self._numerator_engine.count()
                    self.counter_queries += 1
        return state["value"]

    def _context(self, excluded: tuple) -> "_SamplerContext":
        ctx = self._sampler_contexts.get(excluded)
        if ctx is None:
            ctx = self._sampler_contexts.setdefault(
                excluded, _SamplerContext(self.formula, excluded))
        return ctx

    def query(self, excluded, rng: Rng) -> ProcQueryResult:
        key = tuple(sorted(normalize_sigma(s, self.formula.m) for s in excluded))
        ctx = self._context(key)
        if ctx.total == 0:
            raise EmptySupportError("every output assignment is excluded")
        self.sampler_queries += 1
        assignment = ctx.sample(rng)
        sigma = tuple(int(assignment[v]) for v in self.formula.v_vars)
        den = self._denominator()
        num = self._numerator_engine.count(
            {v: bool(b) for v, b in zip(self.formula.v_vars, sigma)})
        self.counter_queries += 1
        self.proc_queries += 1
        return ProcQueryResult(sigma, num / den)


# ---------------------------------------------------------------------------
# Random circuit formulas (each output is a small gate over input literals;
# the property holds by construction). Used for fuzzing and the bench corpus.
# ---------------------------------------------------------------------------

_GATES = ("and", "or", "xor", "lit")


def _gate_clauses(v: int, gate: str, a: int, b: int) -> list[tuple[int, ...]]:
    if gate == "and":
        return [(-v, a), (-v, b), (v, -a, -b)]
    if gate == "or":
        return [(v, -a), (v, -b), (-v, a, b)]
    if gate == "xor":
        return [(-v, a, b), (-v, -a, -b), (v, a, -b), (v, -a, b)]
    if gate == "lit":
        return [(-v, a), (v, -a)]
    raise ValueError(f"unknown gate {gate!r}")


def random_circuit_formula(gen, max_inputs: int = 6, max_outputs: int = 4,
                           allow_aux: bool = False,
                           allow_input_clauses: bool = True) -> CircuitFormula:
    """Seeded random circuit formula with a nonempty solution set.

    Outputs (and optional auxiliary gates) are defined from input literals, so
    every solution is determined by its U-part by construction.
    """
    for _ in range(64):
        n = int(gen.integers(2, max_inputs + 1))
        m = int(gen.integers(1, max_outputs + 1))
        u = list(range(1, n + 1))
        v = list(range(n + 1, n + m + 1))
        next_var = n + m + 1
        clauses: list[tuple[int, ...]] = []

        def input_literal():
            var = int(gen.integers(1, n + 1))
            return var if gen.random() < 0.5 else -var

        sources = []
        if allow_aux and gen.random() < 0.5:
            for _ in range(int(gen.integers(1, 3))):
                g = next_var
                next_var += 1
                gate = _GATES[int(gen.integers(0, 3))]
                clauses += _gate_clauses(g, gate, input_literal(), input_literal())
                sources.append(g)

        for out in v:
            gate = _GATES[int(gen.integers(0, len(_GATES)))]
            def pick():
                if sources and gen.random() < 0.4:
                    s = sources[int(gen.integers(0, len(sources)))]
                    return s if gen.random() < 0.5 else -s
                return input_literal()
            a = pick()
            b = pick() if gate != "lit" else a
            clauses += _gate_clauses(out, gate, a, b)

        if allow_input_clauses and gen.random() < 0.5:
            for _ in range(int(gen.integers(1, 3))):
                width = int(gen.integers(1, 4))
                clause = tuple({input_literal() for _ in range(width)})
                clauses.append(clause)

        candidate = CircuitFormula(
            num_vars=next_var - 1,
            clauses=tuple(c for c in (_normalize_clause(c) for c in clauses)
                          if c is not None),
            u_vars=tuple(u),
            v_vars=tuple(v),
        )
        if count_projected(candidate, candidate.u_vars) > 0:
            return candidate
    raise RuntimeError("failed to generate a satisfiable circuit formula")
