import numpy as np
import pytest

from entropx.core import ProcQueryResult, QueryLedger, Rng, log2
from entropx.dist_explicit import ExplicitDistribution, ExplicitOracle


class TestLog2:
    def test_identity(self):
        assert log2(1.0) == 0.0

    def test_half_is_one_bit(self):
        assert log2(0.5) == -1.0
        assert log2(1 / 0.5) == 1.0  # self-information of p=0.5

    def test_quarter(self):
        assert log2(0.25) == -2.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, -1e-300])
    def test_domain_error(self, bad):
        with pytest.raises(ValueError):
            log2(bad)


class TestProcQueryResult:
    def test_holds_unconditional_probability(self):
        r = ProcQueryResult("x", 0.25)
        assert r.outcome == "x"
        assert r.probability == 0.25

    @pytest.mark.parametrize("bad", [0.0, -0.5, 1.5])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            ProcQueryResult("x", bad)


class TestRng:
    def test_same_seed_same_stream(self):
        a = [Rng(123).random() for _ in range(5)]
        b = [Rng(123).random() for _ in range(5)]
        assert a == b

    def test_different_seeds_differ(self):
        assert Rng(1).random() != Rng(2).random()

    def test_array_matches_scalar_stream(self):
        # bulk draws consume the same underlying stream as repeated singles
        arr = Rng(7).random_array(8)
        g = Rng(7)
        assert list(arr) == [g.random() for _ in range(8)]

    def test_substream_paths_compose(self):
        direct = Rng(9).substream(1, 2).random_array(4)
        nested = Rng(9).substream(1).substream(2).random_array(4)
        assert np.array_equal(direct, nested)

    def test_substreams_are_distinct(self):
        root = Rng(9)
        assert root.substream(0).random() != root.substream(1).random()

    def test_substream_does_not_disturb_parent(self):
        a = Rng(5)
        a.substream(3).random_array(10)
        b = Rng(5)
        assert a.random() == b.random()

    def test_known_value_is_stable(self):
        # pins the generator algorithm: a change here breaks reproducibility
        assert Rng(0).random() == pytest.approx(0.6369616873214543, abs=0)


class TestQueryAccounting:
    def test_counter_equals_query_calls(self):
        dist = ExplicitDistribution([("a", 0.5), ("b", 0.5)])
        oracle = ExplicitOracle(dist)
        rng = Rng(0)
        assert oracle.proc_queries == 0
        for i in range(1, 6):
            oracle.query(frozenset(), rng)
            assert oracle.proc_queries == i
        oracle.query_probs(frozenset(), 7, rng)
        assert oracle.proc_queries == 12

    def test_clone_starts_at_zero_and_absorbs(self):
        dist = ExplicitDistribution([("a", 0.5), ("b", 0.5)])
        oracle = ExplicitOracle(dist)
        rng = Rng(1)
        oracle.query(frozenset(), rng)
        clone = oracle.clone()
        assert clone.proc_queries == 0
        clone.query_probs(frozenset(), 4, rng)
        oracle.absorb_counts(clone)
        assert oracle.proc_queries == 5

    def test_ledger_defaults(self):
        ledger = QueryLedger()
        assert (ledger.proc_queries, ledger.counter_queries,
                ledger.sampler_queries, ledger.initial_draws) == (0, 0, 0, 0)
