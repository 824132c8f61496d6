import math

import numpy as np
import pytest

from plantedclique import (
    DECLARED_FAILURE,
    RECOVERED,
    FilterParams,
    InstanceSpec,
    KhdacParams,
    ParameterError,
    QueryLedger,
    VertexSet,
    build_oracle,
    clique_completion,
    completion_seed_size,
    khdac,
    subsample_filter,
    subsample_khdac,
    verify_clique,
)
from plantedclique.harness import scaling_k


def planted(n, k, seed):
    return build_oracle(InstanceSpec("planted", n=n, k=k, seed=seed))


def in_regime(n, seed):
    """An instance at the degree-counting threshold k = ceil(8 sqrt(n log n))."""
    k = scaling_k(n)
    return planted(n, k, seed), k


class TestCompletionSeedSize:
    def test_matches_two_log_n(self):
        assert completion_seed_size(4096) == 24
        assert completion_seed_size(24) == 10
        assert completion_seed_size(65536) == 32

    def test_c_knob(self):
        assert completion_seed_size(4096, c=0.5) == math.ceil(1.5 * 12)


class TestCliqueCompletion:
    def test_complete_graph_recovers_everything(self):
        o = planted(256, 256, seed=0)
        h = o.handle()
        led = QueryLedger()
        seed = VertexSet(range(completion_seed_size(256)))
        out = clique_completion(h, led, seed, rng=np.random.default_rng(0))
        assert out.status == RECOVERED
        assert out.clique == VertexSet(range(256))

    def test_seed_too_small_rejected(self):
        h = planted(256, 100, seed=0).handle()
        with pytest.raises(ParameterError):
            clique_completion(h, QueryLedger(), VertexSet([1, 2, 3]), rng=np.random.default_rng(0))

    def test_seed_out_of_range_rejected(self):
        h = planted(64, 30, seed=0).handle()
        bad = VertexSet(list(range(11)) + [64])
        with pytest.raises(ParameterError):
            clique_completion(h, QueryLedger(), bad, rng=np.random.default_rng(0))

    def test_genie_seeded_recovery_n24_k12(self):
        wins = 0
        for seed in range(100):
            o = planted(24, 12, seed=seed)
            h = o.handle()
            rng = np.random.default_rng([seed, 3])
            sub = np.sort(rng.choice(o.hidden_clique, size=10, replace=False))
            out = clique_completion(h, QueryLedger(), VertexSet(sub.tolist()), rng=rng)
            wins += out.recovered and out.clique == o.hidden_clique_set()
        assert wins >= 95

    def test_genie_seeded_recovery_at_scale(self):
        n = 4096
        k = scaling_k(n)
        size = completion_seed_size(n)
        wins = 0
        for seed in range(100):
            o = planted(n, k, seed=seed)
            rng = np.random.default_rng([seed, 5])
            sub = np.sort(rng.choice(o.hidden_clique, size=size, replace=False))
            out = clique_completion(o.handle(), QueryLedger(), VertexSet(sub.tolist()), rng=rng)
            wins += out.recovered and out.clique == o.hidden_clique_set()
        assert wins >= 90

    def test_query_budget(self):
        n = 1024
        o, k = in_regime(n, seed=5)
        h = o.handle()
        led = QueryLedger()
        size = completion_seed_size(n)
        rng = np.random.default_rng(2)
        sub = np.sort(rng.choice(o.hidden_clique, size=size, replace=False))
        out = clique_completion(h, led, VertexSet(sub.tolist()), rng=rng)
        assert out.recovered
        assert out.queries == led.raw_count
        assert out.queries <= size * n + size * (k + 50)

    def test_junk_seed_on_null_graph_never_claims_recovery(self):
        # degenerate input: the seed is not a clique, so verification demotes
        o = build_oracle(InstanceSpec("er", n=128, seed=3))
        h = o.handle()
        for seed in range(5):
            rng = np.random.default_rng(seed)
            junk = VertexSet(rng.choice(128, size=completion_seed_size(128), replace=False).tolist())
            out = clique_completion(h, QueryLedger(), junk, rng=rng)
            assert out.status == DECLARED_FAILURE
            assert out.details.get("verification_failed")


class TestKhdacParams:
    def test_defaults_from_formulas(self):
        p = KhdacParams.for_graph(4096, k=1774)
        assert p.l_in == 1330
        assert p.completion_size == 24
        assert p.degree_threshold == pytest.approx(2048 + 2 * math.sqrt(4096 * 12))

    def test_l_in_requires_k(self):
        with pytest.raises(ParameterError):
            KhdacParams.for_graph(1024)

    def test_invalid_values(self):
        with pytest.raises(ParameterError):
            KhdacParams(l_in=0, degree_threshold=1.0, completion_size=4)


class TestKhdac:
    def test_complete_graph(self):
        o = planted(256, 256, seed=1)
        led = QueryLedger()
        out = khdac(o.handle(), led, KhdacParams.for_graph(256, k=256), rng=np.random.default_rng(1))
        assert out.recovered
        assert out.clique == VertexSet(range(256))

    def test_in_regime_recovery_and_budget(self):
        n = 1024
        wins = 0
        for seed in range(10):
            o, k = in_regime(n, seed)
            led = QueryLedger()
            params = KhdacParams.for_graph(n, k=k)
            out = khdac(o.handle(), led, params, rng=np.random.default_rng([seed, 1]))
            wins += out.recovered and out.clique == o.hidden_clique_set()
            assert led.raw_count <= 2 * (params.l_in * n + 2 * n * math.log2(n))
        assert wins >= 9

    def test_er_declares_failure(self):
        n = 1024
        k = scaling_k(n)
        params = KhdacParams.for_graph(n, k=k)
        for seed in range(10):
            o = build_oracle(InstanceSpec("er", n=n, seed=seed))
            out = khdac(o.handle(), QueryLedger(), params, rng=np.random.default_rng(seed))
            assert out.status == DECLARED_FAILURE
            assert len(out.clique) == 0
            assert out.details["reason"] == "high_degree_shortfall"

    def test_monotone_in_l_in(self):
        # same instance, same sample stream prefix: more samples never break
        # a run that recovered
        n = 1024
        o, k = in_regime(n, seed=3)
        h = o.handle()
        base = KhdacParams.for_graph(n, k=k)
        out = khdac(h, QueryLedger(), base, rng=np.random.default_rng(42))
        assert out.recovered and out.clique == o.hidden_clique_set()
        for extra in (base.l_in + 37, 2 * base.l_in):
            bigger = KhdacParams.for_graph(n, k=k, l_in=extra)
            out2 = khdac(h, QueryLedger(), bigger, rng=np.random.default_rng(42))
            assert out2.recovered and out2.clique == o.hidden_clique_set()

    def test_recovered_output_verifies(self):
        n = 1024
        o, k = in_regime(n, seed=8)
        h = o.handle()
        out = khdac(h, QueryLedger(), KhdacParams.for_graph(n, k=k), rng=np.random.default_rng(0))
        assert out.recovered
        assert verify_clique(h, QueryLedger(), out.clique)


class TestSubsampleKhdac:
    def test_p_one_matches_khdac_status(self):
        n = 1024
        k = scaling_k(n)
        for seed in range(5):
            o = planted(n, k, seed=seed)
            a = khdac(
                o.handle(),
                QueryLedger(),
                KhdacParams.for_graph(n, k=k),
                rng=np.random.default_rng(seed),
            )
            b = subsample_khdac(o.handle(), QueryLedger(), k, 1.0, rng=np.random.default_rng(seed))
            assert a.status == b.status == RECOVERED
            assert a.clique == b.clique == o.hidden_clique_set()
        for seed in range(5):
            o = build_oracle(InstanceSpec("er", n=n, seed=seed))
            a = khdac(
                o.handle(),
                QueryLedger(),
                KhdacParams.for_graph(n, k=k),
                rng=np.random.default_rng(seed),
            )
            b = subsample_khdac(o.handle(), QueryLedger(), k, 1.0, rng=np.random.default_rng(seed))
            assert a.status == b.status == DECLARED_FAILURE

    def test_half_subsample_recovers(self):
        n, k = 4096, 2048
        wins = 0
        for seed in range(5):
            o = planted(n, k, seed=seed)
            led = QueryLedger()
            out = subsample_khdac(o.handle(), led, k, 0.5, rng=np.random.default_rng(seed))
            wins += out.recovered and out.clique == o.hidden_clique_set()
            assert led.raw_count <= 2 * ((0.5 * n) ** 2 + 4 * n * math.log2(n))
        assert wins == 5

    def test_er_falls_back_with_random_k(self):
        n, k = 1024, scaling_k(1024)
        o = build_oracle(InstanceSpec("er", n=n, seed=4))
        out = subsample_khdac(o.handle(), QueryLedger(), k, 0.5, rng=np.random.default_rng(4))
        assert out.status == DECLARED_FAILURE
        assert out.details.get("fallback") == "random_k"
        assert len(out.clique) == k  # the paper's fallback set, attached

    def test_p_clamped_and_noted(self):
        n, k = 1024, scaling_k(1024)
        o = planted(n, k, seed=0)
        out = subsample_khdac(o.handle(), QueryLedger(), k, 8.0, rng=np.random.default_rng(0))
        assert out.details["p_used"] == 1.0
        assert out.details["outside_guarantee"] == "p > 1/2"

    def test_parameter_errors(self):
        o = planted(64, 10, seed=0)
        rng = np.random.default_rng(0)
        with pytest.raises(ParameterError):
            subsample_khdac(o.handle(), QueryLedger(), 0, 0.5, rng=rng)
        with pytest.raises(ParameterError):
            subsample_khdac(o.handle(), QueryLedger(), 10, 0.0, rng=rng)
        with pytest.raises(ParameterError):
            subsample_khdac(o.handle(), QueryLedger(), 10, 0.01, rng=rng)  # k' < 1


class TestSubsampleFilter:
    def test_filter_params(self):
        fp = FilterParams.for_graph(16384, 300, 2.5)
        assert fp.p_sub == 1.0
        assert fp.t_lower == pytest.approx((16384 + 300) / 4 - 2 * 128)
        assert fp.t_upper == pytest.approx((16384 + 300) / 4 + 2 * 128)

    def test_band_keeps_clique_vertices_at_k_equals_n(self):
        # degenerate algebraic check: at k = n the clique half-degree n/2
        # sits inside [T_l, T_u]
        n = 4096
        fp = FilterParams.for_graph(n, n, 1.0)
        assert fp.t_lower <= n / 2 <= fp.t_upper

    def test_enriching_regime_recovers(self):
        # at n=16384 the band starts rejecting nulls once k >> 8 sqrt(n)
        n, k = 16384, 2048
        wins = 0
        for seed in range(5):
            o = planted(n, k, seed=seed)
            out = subsample_filter(o.handle(), QueryLedger(), k, 1.0, rng=np.random.default_rng(seed))
            wins += out.recovered and out.clique == o.hidden_clique_set()
        assert wins == 5

    def test_survivors_all_inside_band(self):
        from plantedclique.oracle import degree

        n, k = 4096, 512
        o = planted(n, k, seed=9)
        h = o.handle()
        out = subsample_filter(h, QueryLedger(), k, 0.5, rng=np.random.default_rng(9))
        d = out.details
        v2 = np.arange(n // 2, n, dtype=np.int64)
        for v in d["survivors"]:
            dv = degree(h, QueryLedger(), int(v), v2)
            assert d["t_lower"] <= dv <= d["t_upper"]

    def test_er_never_recovers(self):
        n, k = 4096, 512
        for seed in range(5):
            o = build_oracle(InstanceSpec("er", n=n, seed=seed))
            out = subsample_filter(o.handle(), QueryLedger(), k, 0.25, rng=np.random.default_rng(seed))
            assert out.status == DECLARED_FAILURE

    def test_query_budget_order_pn2(self):
        n, k, p = 4096, 512, 0.25
        o = planted(n, k, seed=2)
        led = QueryLedger()
        subsample_filter(o.handle(), led, k, p, rng=np.random.default_rng(2))
        assert led.raw_count <= 2 * p * n * n
