"""Command-line surface: estimate, exact, verify-bounds, bench, validate.

Output on stdout is machine-readable (JSON or CSV) and byte-identical across
repeated runs with the same inputs, flags and seed, including with
--threads > 1. Wall-clock fields are therefore null/empty unless --timings is
given. Exit codes: 0 success, 1 parse error, 2 validation failure, 3 resource
cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, bench, bounds, dist_explicit, formula
from .core import EmptySupportError, ResourceCapError
from .estimator import EstimationParams, estimate_entropy
from .formula import DeadlineExceeded, DimacsError

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_RESOURCE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _seed_default() -> int:
    env = os.environ.get("ENTROPX_SEED")
    return int(env) if env else 0


def _add_common(p, with_estimation: bool = True):
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed (default: $ENTROPX_SEED or 0)")
    p.add_argument("--format", choices=("json", "human", "csv"), default=None,
                   help="output format (default json; bench defaults to csv)")
    if with_estimation:
        p.add_argument("--epsilon", type=float, default=0.8,
                       help="multiplicative tolerance (default 0.8)")
        p.add_argument("--delta", type=float, default=0.09,
                       help="failure probability (default 0.09)")
    p.add_argument("--max-vars", type=int, default=formula.DEFAULT_MAX_VARS,
                   help="variable-count cap for formula engines")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock fields (breaks byte-identical reruns)")


def _resolve_seed(args) -> int:
    return _seed_default() if args.seed is None else args.seed


def _detect_kind(path: Path, override) -> str:
    if override:
        return override
    return "cnf" if path.suffix == ".cnf" else "table"


def _load_input(path: Path, kind: str):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE) from exc
    if kind == "cnf":
        try:
            return formula.parse_dimacs(text)
        except DimacsError as exc:
            raise CliError(f"DIMACS parse error: {exc}", EXIT_PARSE) from exc
    try:
        return dist_explicit.from_json_obj(json.loads(text))
    except (json.JSONDecodeError, ValueError) as exc:
        raise CliError(f"distribution parse error: {exc}", EXIT_PARSE) from exc


def _witness_strings(witness) -> list[str]:
    out = []
    for assignment in witness:
        lits = [v if val else -v for v, val in sorted(assignment.items())]
        out.append(" ".join(str(l) for l in lits))
    return out


def cmd_estimate(args) -> int:
    path = Path(args.input)
    kind = _detect_kind(path, args.kind)
    loaded = _load_input(path, kind)
    seed = _resolve_seed(args)

    if kind == "cnf":
        mode = args.mode if args.mode != "auto" else "qif"
        report = formula.validate_circuit_property(loaded, max_vars=args.max_vars)
        if report.verdict == "invalid":
            _emit({
                "error": "not a circuit formula: some input assignment admits "
                         "two distinct solutions",
                "witness": _witness_strings(report.witness) if report.witness else None,
            })
            return EXIT_VALIDATION
        if report.verdict == "unvalidated":
            print("warning: circuit property not validated (over the variable cap); "
                  "the estimation guarantee assumes it", file=sys.stderr)
        oracle = formula.FormulaOracle(loaded, max_vars=args.max_vars)
    else:
        mode = args.mode if args.mode != "auto" else "generic"
        oracle = dist_explicit.ExplicitOracle(loaded)

    try:
        params = EstimationParams(epsilon=args.epsilon, delta=args.delta, seed=seed,
                                  mode=mode, n_override=args.n_override)
        result = estimate_entropy(oracle, params, threads=args.threads)
    except (ValueError, EmptySupportError) as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc

    payload = {
        "entropy_estimate": result.h_hat,
        "dominator_found": result.dominator_found,
        "r": result.r,
        "t": result.t,
        "T": result.T,
        "proc_queries": result.ledger.proc_queries,
        "counter_queries": result.ledger.counter_queries,
        "sampler_queries": result.ledger.sampler_queries,
        "initial_draws": result.ledger.initial_draws,
        "seed": seed,
        "mode": mode,
        "wall_ms": round(result.wall_time * 1000.0, 3) if args.timings else None,
    }
    if (args.format or "json") == "human":
        lo, hi = 1.0 - args.epsilon, 1.0 + args.epsilon
        print(f"entropy estimate: {result.h_hat:.6f} bits")
        print(f"contract: within [{lo:.2f}*H, {hi:.2f}*H] with probability >= "
              f"{1.0 - args.delta:.2f} (not an exact value)")
        if result.dominator_found:
            print(f"dominating outcome found with mass r = {result.r}")
        print(f"batch size t = {result.t}, trials T = {result.T}, "
              f"PROC queries = {result.ledger.proc_queries}")
    else:
        _emit(payload)
    return EXIT_OK


def cmd_exact(args) -> int:
    path = Path(args.input)
    kind = _detect_kind(path, args.kind)
    loaded = _load_input(path, kind)
    if kind == "cnf":
        deadline = (time.perf_counter() + args.timeout) if args.timeout else None
        try:
            res = formula.exact_entropy_formula(loaded, deadline=deadline,
                                                max_vars=args.max_vars)
        except DeadlineExceeded as exc:
            raise CliError(f"exact enumeration timed out: {exc}", EXIT_RESOURCE) from exc
        except EmptySupportError as exc:
            raise CliError(str(exc), EXIT_VALIDATION) from exc
        payload = {"entropy": res.entropy, "eval_queries": res.eval_queries}
        if args.rationals:
            sigmas, den = formula.sigma_distribution(loaded, max_vars=args.max_vars)
            payload["denominator"] = den
            payload["sigma_probs"] = [
                {"sigma": formula.sigma_to_str(s), "p_rational": f"{num}/{den}",
                 "p": num / den}
                for s, num in sigmas
            ]
    else:
        payload = {"entropy": dist_explicit.exact_entropy(loaded),
                   "eval_queries": len(loaded)}
    if (args.format or "json") == "human":
        print(f"exact entropy: {payload['entropy']:.12f} bits "
              f"({payload['eval_queries']} evaluation queries)")
    else:
        _emit(payload)
    return EXIT_OK


def cmd_verify_bounds(args) -> int:
    seed = _resolve_seed(args)
    fmt = args.format or "json"
    if args.input:
        path = Path(args.input)
        kind = _detect_kind(path, None)
        loaded = _load_input(path, kind)
        if kind == "cnf":
            sigmas, den = formula.sigma_distribution(loaded, max_vars=args.max_vars)
            probs = [num / den for _, num in sigmas]
            report = bounds.check_min_probability_bound(probs, loaded.n, m=loaded.m)
        else:
            report = bounds.check_moment_bound(loaded.probs, loaded.m)
        if fmt == "human":
            print(f"H={report.entropy:.6f} M2={report.second_moment:.6f} "
                  f"satisfied={report.satisfied}")
        else:
            _emit(report.to_dict())
        return EXIT_OK if report.satisfied is not False else EXIT_VALIDATION

    ok = True
    totals = []
    for regime in bounds.REGIMES:
        summary = bounds.fuzz_bounds(regime, args.fuzz, seed,
                                     collect_reports=args.per_case)
        totals.append(summary)
        if args.per_case and fmt == "json":
            for case in summary.reports:
                line = {"regime": regime, "index": case.index, "family": case.family,
                        "margin": case.margin}
                line.update(case.report.to_dict())
                sys.stdout.write(json.dumps(line) + "\n")
        ok = ok and summary.ok
    result = {"fuzz_per_regime": args.fuzz, "seed": seed,
              "regimes": [s.to_dict() for s in totals], "ok": ok}
    if fmt == "human":
        for s in totals:
            print(f"{s.regime}: {s.cases} cases, {len(s.violations)} violations")
        print("OK" if ok else "VIOLATIONS FOUND")
    else:
        _emit(result)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    if args.generate:
        bench.generate_corpus(corpus, seed=_resolve_seed(args))
    if not corpus.is_dir():
        raise CliError(f"{corpus} is not a directory (use --generate to create "
                       "the desk corpus)", EXIT_PARSE)
    paths = sorted(p for p in corpus.iterdir() if p.suffix in (".cnf", ".json"))
    if not paths:
        raise CliError(f"no .cnf or .json instances in {corpus}", EXIT_PARSE)
    records = bench.run_bench(
        paths, epsilon=args.epsilon, delta=args.delta, seed=_resolve_seed(args),
        timeout=args.timeout, max_evals=args.max_evals, max_vars=args.max_vars,
        threads=args.threads)
    summary = bench.summarize(records, epsilon=args.epsilon)
    fmt = args.format or "csv"
    if fmt == "json":
        _emit({"records": [bench.record_to_dict(r, timings=args.timings)
                           for r in records],
               "summary": summary.to_dict()})
    else:
        sys.stdout.write(bench.to_csv(records, timings=args.timings))
        print(f"summary: {summary.with_exact}/{summary.instances} instances with "
              f"exact baseline, max observed error "
              f"{summary.max_observed_error}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    path = Path(args.input)
    loaded = _load_input(path, "cnf")
    report = formula.validate_circuit_property(loaded, max_vars=args.max_vars)
    payload = {
        "verdict": report.verdict,
        "solutions": report.solutions,
        "input_projections": report.input_projections,
        "witness": _witness_strings(report.witness) if report.witness else None,
    }
    if (args.format or "json") == "human":
        print(f"verdict: {report.verdict}")
        if report.witness:
            for w in _witness_strings(report.witness):
                print(f"  witness: {w}")
    else:
        _emit(payload)
    if report.verdict == "invalid":
        return EXIT_VALIDATION
    if report.verdict == "unvalidated":
        return EXIT_RESOURCE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropx",
        description="Multiplicative Shannon entropy estimation through a "
                    "probability-revealing conditional sampling oracle.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the entropy of a distribution")
    p.add_argument("input", help="JSON probability table or extended-DIMACS CNF")
    p.add_argument("--mode", choices=("auto", "generic", "qif"), default="auto",
                   help="batch sizing mode (auto: qif for CNF, generic for tables)")
    p.add_argument("--n-override", type=int, default=None,
                   help="input bit count for qif mode on tables")
    p.add_argument("--kind", choices=("cnf", "table"), default=None,
                   help="input kind (default: by file extension)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for the estimation trials")
    _add_common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="compute the entropy exactly (baseline)")
    p.add_argument("input")
    p.add_argument("--kind", choices=("cnf", "table"), default=None)
    p.add_argument("--timeout", type=float, default=60.0,
                   help="wall-clock budget for the enumeration (seconds)")
    p.add_argument("--rationals", action="store_true",
                   help="include exact per-output probabilities as num/den strings")
    _add_common(p, with_estimation=False)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("verify-bounds",
                       help="fuzz the variance-ratio bounds, or check one input")
    p.add_argument("input", nargs="?", default=None,
                   help="optional table/CNF to check instead of fuzzing")
    p.add_argument("--fuzz", type=int, default=1000,
                   help="fuzz cases per regime (default 1000)")
    p.add_argument("--per-case", action="store_true",
                   help="emit one JSON report line per fuzz case")
    _add_common(p, with_estimation=False)
    p.set_defaults(func=cmd_verify_bounds)

    p = sub.add_parser("bench", help="run the baseline-vs-estimator harness")
    p.add_argument("corpus", help="directory of .cnf / .json instances")
    p.add_argument("--generate", action="store_true",
                   help="write the seeded desk corpus into the directory first")
    p.add_argument("--timeout", type=float, default=60.0,
                   help="baseline wall-clock budget per instance (seconds)")
    p.add_argument("--max-evals", type=int, default=100_000,
                   help="skip the baseline when it would need more evaluations")
    p.add_argument("--threads", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check the circuit-formula property")
    p.add_argument("input")
    _add_common(p, with_estimation=False)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimacsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
