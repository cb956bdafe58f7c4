import json
import math
from collections import Counter

import numpy as np
import pytest

from entropx.core import EmptySupportError, Rng
from entropx.dist_explicit import (
    ExplicitDistribution,
    ExplicitOracle,
    dirichlet,
    dominated,
    exact_entropy,
    from_json_obj,
    geometric,
    load_file,
    make_family,
    point_mass,
    proc_query,
    proc_query_many,
    save_file,
    to_json_obj,
    two_heavy,
    uniform,
)

ABC = [("a", 0.5), ("b", 0.3), ("c", 0.2)]


def empirical_tv(counts: Counter, law: dict, n: int) -> float:
    support = set(counts) | set(law)
    return 0.5 * sum(abs(counts.get(o, 0) / n - law.get(o, 0.0)) for o in support)


class TestConstruction:
    def test_drops_zero_mass(self):
        d = ExplicitDistribution([("a", 0.5), ("z", 0.0), ("b", 0.5)])
        assert d.outcomes == ("a", "b")

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            ExplicitDistribution([("a", 0.5), ("b", 0.4)])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="distinct"):
            ExplicitDistribution([("a", 0.5), ("a", 0.5)])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            ExplicitDistribution([("a", 1.5), ("b", -0.5)])

    def test_rejects_small_universe(self):
        with pytest.raises(ValueError, match="universe"):
            ExplicitDistribution([(i, 0.25) for i in range(4)], m=1)

    def test_default_universe_is_minimal(self):
        assert ExplicitDistribution([(i, 0.125) for i in range(8)]).m == 3
        assert ExplicitDistribution(ABC).m == 2


class TestProcQuery:
    def test_reports_unconditional_probability(self):
        d = ExplicitDistribution(ABC)
        rng = Rng(0)
        seen = set()
        for _ in range(50):
            r = proc_query(d, {"a"}, rng)
            assert r.outcome in ("b", "c")
            assert r.probability == d.probability(r.outcome)  # 0.3 / 0.2, not 0.6 / 0.4
            seen.add(r.outcome)
        assert seen == {"b", "c"}

    def test_full_exclusion_leaves_singleton(self):
        d = ExplicitDistribution(ABC)
        rng = Rng(1)
        for _ in range(10):
            r = proc_query(d, {"a", "b"}, rng)
            assert r.outcome == "c" and r.probability == 0.2

    def test_empty_support_error(self):
        d = ExplicitDistribution(ABC)
        with pytest.raises(EmptySupportError):
            proc_query(d, {"a", "b", "c"}, Rng(0))

    def test_never_returns_excluded_fuzz(self):
        gen = np.random.Generator(np.random.PCG64(4))
        rng = Rng(5)
        for _ in range(30):
            size = int(gen.integers(2, 40))
            w = gen.standard_exponential(size)
            d = ExplicitDistribution(list(enumerate(map(float, w / w.sum()))))
            k = int(gen.integers(1, size))
            excluded = set(int(x) for x in gen.choice(size, size=k, replace=False))
            if len(excluded) == size:
                continue
            sel, _ = proc_query_many(d, excluded, 200, rng)
            assert not (set(sel.tolist()) & excluded)

    def test_conditional_frequencies_match(self):
        # DKW-style bound at one million draws, unconditioned and conditioned
        d = dominated(0.75, 10)
        n = 1_000_000
        bound = 4 * math.sqrt(len(d) / n)
        rng = Rng(11)

        sel, _ = proc_query_many(d, frozenset(), n, rng)
        counts = Counter(d.outcomes[i] for i in sel.tolist())
        law = {o: float(p) for o, p in zip(d.outcomes, d.probs)}
        assert empirical_tv(counts, law, n) < bound

        heaviest = d.heaviest()
        sel, _ = proc_query_many(d, {heaviest}, n, rng)
        counts = Counter(d.outcomes[i] for i in sel.tolist())
        rest = 1.0 - law[heaviest]
        cond_law = {o: p / rest for o, p in law.items() if o != heaviest}
        assert heaviest not in counts
        assert empirical_tv(counts, cond_law, n) < bound

    def test_conditional_table_is_cached(self):
        d = ExplicitDistribution(ABC)
        rng = Rng(0)
        proc_query(d, {"a"}, rng)
        proc_query(d, {"a"}, rng)
        assert len(d._cond_cache) == 1


class TestExactEntropy:
    @pytest.mark.parametrize("k", [1, 4, 10, 16, 20])
    def test_uniform_is_exact(self, k):
        assert exact_entropy(uniform(k)) == float(k)

    def test_point_mass(self):
        assert exact_entropy(point_mass()) == 0.0

    def test_dominated_frozen(self):
        # 0.75*log2(4/3) + 0.25*log2(4092), 50-digit value 3.31092573189546...
        assert exact_entropy(dominated(0.75, 10)) == pytest.approx(
            3.310925731895465, abs=1e-12)

    def test_geometric_two_bits(self):
        h = exact_entropy(geometric(1.0, 1024))
        assert h == pytest.approx(2.0, abs=1e-9)


class TestFamilies:
    def test_uniform_entries(self):
        d = uniform(4)
        assert len(d) == 16
        assert all(p == 1 / 16 for p in d.probs)

    def test_dominated_matches_spec_shape(self):
        d = dominated(0.75, 10)
        assert len(d) == 1024
        assert d.probability(d.heaviest()) == 0.75

    def test_dirichlet_deterministic(self):
        a, b = dirichlet(64, seed=5), dirichlet(64, seed=5)
        assert np.array_equal(a.probs, b.probs)
        c = dirichlet(64, seed=6)
        assert not np.array_equal(a.probs, c.probs)

    def test_two_heavy_entropy_target(self):
        d = two_heavy(12, 0.5)
        h = exact_entropy(d)
        assert abs(h - (1.0 + math.log2(2 ** 12 - 2) ** -0.5)) < 1e-9

    def test_registry_dispatch(self):
        d = make_family("uniform", m=3)
        assert len(d) == 8
        with pytest.raises(ValueError, match="unknown family"):
            make_family("zipf")

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            dominated(1.5, 4)
        with pytest.raises(ValueError):
            geometric(0.0, 16)


class TestJson:
    def test_round_trip(self, tmp_path):
        d = ExplicitDistribution(ABC)
        path = tmp_path / "d.json"
        save_file(d, path)
        loaded = load_file(path)
        assert loaded.outcomes == ("a", "b", "c")
        assert np.allclose(loaded.probs, d.probs)
        assert loaded.m == d.m

    def test_rejects_bad_sum(self):
        obj = {"m": 2, "probs": [{"id": "a", "p": 0.5}, {"id": "b", "p": 0.4}]}
        with pytest.raises(ValueError, match="1e-9"):
            from_json_obj(obj)

    def test_accepts_tiny_deviation(self):
        obj = {"m": 1, "probs": [{"id": "a", "p": 0.5}, {"id": "b", "p": 0.5 + 4e-10}]}
        d = from_json_obj(obj)
        assert math.fsum(d.probs) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_missing_fields(self):
        with pytest.raises(ValueError):
            from_json_obj({"m": 2})
        with pytest.raises(ValueError):
            from_json_obj({"probs": [{"id": "a"}]})

    def test_schema_shape(self):
        obj = to_json_obj(uniform(2))
        assert set(obj) == {"m", "probs"}
        assert all(set(e) == {"id", "p"} for e in obj["probs"])
        json.dumps(obj)  # serializable


class TestOracle:
    def test_universe_bits(self):
        assert ExplicitOracle(uniform(6)).universe_bits() == 6

    def test_no_input_bits(self):
        assert ExplicitOracle(uniform(6)).input_bits() is None

    def test_clone_shares_table(self):
        o = ExplicitOracle(uniform(4))
        assert o.clone().dist is o.dist
