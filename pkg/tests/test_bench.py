import math

import numpy as np
import pytest

from entropx.bench import (
    CSV_COLUMNS,
    BenchRecord,
    gate_tree,
    generate_corpus,
    identity_map,
    observed_error,
    password_checker,
    record_to_dict,
    ripple_adder,
    run_bench,
    summarize,
    to_csv,
)
from entropx.dist_explicit import exact_entropy, load_file
from entropx.formula import (
    count_projected,
    exact_entropy_formula,
    sigma_distribution,
    validate_circuit_property,
)


class TestObservedError:
    def test_symmetric_ratio_metric(self):
        assert observed_error(1.2, 1.0) == pytest.approx(0.2)
        assert observed_error(1.0, 1.2) == pytest.approx(0.2)
        assert observed_error(2.0, 2.0) == 0.0

    def test_requires_positive(self):
        with pytest.raises(ValueError):
            observed_error(0.0, 1.0)
        with pytest.raises(ValueError):
            observed_error(1.0, -2.0)


class TestCorpusFamilies:
    def test_password_checker_masses(self):
        f = password_checker(6, secret=0b101010)
        sigmas, den = sigma_distribution(f)
        assert den == 2 ** 6
        assert dict(sigmas) == {(0,): 2 ** 6 - 1, (1,): 1}
        assert validate_circuit_property(f).verdict == "valid"

    def test_identity_map_uniform(self):
        f = identity_map(5)
        assert count_projected(f, f.v_vars) == 2 ** 5
        assert exact_entropy_formula(f).entropy == 5.0
        assert validate_circuit_property(f).verdict == "valid"

    def test_adder_sum_distribution(self):
        f = ripple_adder(3)
        assert (f.n, f.m) == (6, 4)
        sigmas, den = sigma_distribution(f)
        assert den == 2 ** 6
        # p(sum = s) is the triangular convolution of two uniform 3-bit values
        law = {}
        for a in range(8):
            for b in range(8):
                law[a + b] = law.get(a + b, 0) + 1
        got = {sum(bit << i for i, bit in enumerate(s)): num for s, num in sigmas}
        assert got == law
        assert validate_circuit_property(f).verdict == "valid"

    def test_gate_trees(self):
        and_tree = gate_tree("and")
        sigmas, den = sigma_distribution(and_tree)
        assert dict(sigmas)[(1,)] == 1  # only all-ones input fires the AND tree
        xor_tree = gate_tree("xor")
        sigmas, _ = sigma_distribution(xor_tree)
        assert dict(sigmas) == {(0,): 8, (1,): 8}

    def test_generate_corpus_is_seeded(self, tmp_path):
        a = generate_corpus(tmp_path / "a", seed=5)
        b = generate_corpus(tmp_path / "b", seed=5)
        assert [p.name for p in a] == [p.name for p in b]
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    directory = tmp_path_factory.mktemp("corpus")
    return generate_corpus(directory, seed=2)


class TestRunBench:
    def test_records_complete(self, corpus):
        records = run_bench(corpus, seed=1)
        assert len(records) == len(corpus)
        for r in records:
            assert r.error is None, (r.name, r.error)
            assert r.est_entropy is not None
            assert r.exact_entropy is not None  # desk corpus baselines all finish
            assert r.observed_error is not None
            assert r.est_proc_queries > 0

    def test_query_accounting_cross_check(self, corpus):
        records = run_bench(corpus, seed=1)
        for r in records:
            ledger = r.result.ledger
            assert r.est_proc_queries == ledger.initial_draws + r.result.T * r.result.t

    def test_deterministic_given_seed(self, corpus):
        a = run_bench(corpus, seed=3)
        b = run_bench(corpus, seed=3)
        assert [r.est_entropy for r in a] == [r.est_entropy for r in b]
        c = run_bench(corpus, seed=4)
        assert [r.est_entropy for r in a] != [r.est_entropy for r in c]

    def test_eval_cap_skips_baseline(self, tmp_path):
        from entropx.formula import to_dimacs
        path = tmp_path / "identity_12.cnf"
        path.write_text(to_dimacs(identity_map(12)))
        (rec,) = run_bench([path], max_evals=1000, seed=0)
        assert rec.baseline_eval_queries == 2 ** 12
        assert rec.exact_entropy is None  # skipped: enumeration cost over the cap
        assert rec.est_entropy is not None
        row = to_csv([rec]).splitlines()[1]
        assert row.split(",")[3] == "-"

    def test_errors_recorded_and_run_continues(self, tmp_path):
        bad = tmp_path / "bad.cnf"
        bad.write_text("p cnf broken\n")
        good = tmp_path / "ok.cnf"
        from entropx.formula import to_dimacs
        good.write_text(to_dimacs(password_checker(4)))
        records = run_bench(sorted([bad, good]), seed=0)
        assert records[0].error is not None
        assert records[1].error is None


class TestSummarizeAndCsv:
    def test_summary_counts(self):
        records = [
            BenchRecord(name="a", observed_error=0.1, exact_entropy=1.0, est_entropy=1.1),
            BenchRecord(name="b", observed_error=0.9, exact_entropy=1.0, est_entropy=1.9),
            BenchRecord(name="c"),  # baseline unavailable
        ]
        s = summarize(records, epsilon=0.8)
        assert s.instances == 3
        assert s.with_exact == 2
        assert s.within_tolerance == 1
        assert s.max_observed_error == 0.9
        assert s.fraction_within == 0.5
        assert [name for name, _ in s.histogram] == ["a", "b"]  # ascending error

    def test_all_within(self):
        records = [BenchRecord(name="x", observed_error=0.01)]
        assert summarize(records, epsilon=0.8).fraction_within == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_csv_header_and_determinism(self):
        rec = BenchRecord(name="a", n=2, m=1, baseline_time=0.5,
                          baseline_eval_queries=4, est_time=0.1, est_proc_queries=77,
                          exact_entropy=0.8, est_entropy=0.82, observed_error=0.025)
        out = to_csv([rec])
        header, row = out.splitlines()
        assert header == ",".join(CSV_COLUMNS)
        cells = row.split(",")
        assert cells[0] == "a"
        assert cells[3] == ""  # timings suppressed by default
        assert cells[5] == ""
        out_timed = to_csv([rec], timings=True)
        assert "0.5" in out_timed.splitlines()[1]

    def test_record_dict_marks_missing_baseline(self):
        rec = BenchRecord(name="a", baseline_eval_queries=10)
        assert record_to_dict(rec)["baseline_time_s"] == "-"
