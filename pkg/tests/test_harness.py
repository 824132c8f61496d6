import math

import numpy as np
import pytest

from plantedclique import (
    ExperimentConfig,
    ParameterError,
    csv_equivalent,
    run_detection,
    run_experiment,
)
from plantedclique.harness import (
    CSV_HEADER,
    bench_khdac_sweep,
    default_filter_p,
    default_subsample_p,
    scaling_k,
    strip_timing,
)


class TestConfig:
    def test_unknown_algorithm(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(algorithm="quantum", n=16, k=4)

    def test_override_validation(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(algorithm="khdac", n=1024, k=100, p=0.5)
        with pytest.raises(ParameterError):
            ExperimentConfig(algorithm="subsample_khdac", n=1024, k=100, l_in=5)
        with pytest.raises(ParameterError):
            ExperimentConfig(algorithm="completion", n=64, k=20, degree_threshold=3.0)

    def test_instance_validated_at_config_time(self):
        with pytest.raises(ParameterError):
            ExperimentConfig(algorithm="khdac", kind="planted", n=10, k=11)

    def test_file_round_trip_json(self, tmp_path):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=256, trials=3, seed_base=9)
        path = tmp_path / "cfg.json"
        import json

        path.write_text(json.dumps(cfg.to_dict()))
        assert ExperimentConfig.from_file(str(path)) == cfg

    def test_file_round_trip_key_value(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text(
            "algorithm=khdac\nkind=planted\nn=256\nk=256\ntrials=2\nseed_base=4\n"
            "# comment line\nrecord_queries=false\n"
        )
        cfg = ExperimentConfig.from_file(str(path))
        assert cfg.algorithm == "khdac"
        assert cfg.n == 256 and cfg.k == 256 and cfg.trials == 2 and cfg.seed_base == 4

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("algorithm=khdac\nn=64\nk=64\nwarp=9\n")
        with pytest.raises(ParameterError):
            ExperimentConfig.from_file(str(path))

    def test_default_parameter_rates(self):
        assert default_subsample_p(65536, 32768) == pytest.approx(0.5)
        assert default_filter_p(16384, 300) == 1.0
        assert scaling_k(4096) == 1774


class TestRunExperiment:
    def test_complete_graph_success_rate_one(self):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=256, trials=1, seed_base=0)
        report = run_experiment(cfg)
        assert report.aggregate["success_rate"] == 1.0
        assert report.rows[0].status == "recovered"
        assert report.rows[0].exact_match

    def test_ledger_conservation(self):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=256, trials=4, seed_base=0)
        report = run_experiment(cfg)
        assert report.total_queries() == sum(r.raw_queries for r in report.rows)
        assert all(r.raw_queries > 0 for r in report.rows)

    def test_fallback_never_counts_as_success(self):
        # null instances: the random-k fallback can only be a declared failure
        cfg = ExperimentConfig(
            algorithm="subsample_khdac", kind="er", n=1024, k=scaling_k(1024),
            trials=3, seed_base=0, p=0.5,
        )
        report = run_experiment(cfg)
        assert report.aggregate["successes"] == 0
        for row in report.rows:
            assert row.status == "declared_failure"
            assert not row.exact_match

    def test_error_rows_are_recorded(self):
        # completion on a null instance cannot build a genie seed: k=0 < need
        cfg = ExperimentConfig(algorithm="completion", kind="er", n=64, trials=2, seed_base=0)
        report = run_experiment(cfg)
        assert all(r.status == "error" for r in report.rows)
        assert report.aggregate["successes"] == 0

    def test_detector_rejected(self):
        cfg = ExperimentConfig(algorithm="detect_subsampled", n=256, k=64, trials=1)
        with pytest.raises(ParameterError):
            run_experiment(cfg)

    def test_parallel_rows_match_serial(self):
        base = dict(algorithm="khdac", n=1024, k=scaling_k(1024), trials=4, seed_base=3)
        serial = run_experiment(ExperimentConfig(**base, jobs=1))
        parallel = run_experiment(ExperimentConfig(**base, jobs=2))
        assert strip_timing(serial.csv_text()) == strip_timing(parallel.csv_text())

    def test_iid_instances_run(self):
        cfg = ExperimentConfig(
            algorithm="khdac", kind="iid", n=1024, p_clique=0.79, trials=2, seed_base=1
        )
        report = run_experiment(cfg)
        assert report.aggregate["successes"] == 2  # ~809 of 1024 in the clique


class TestCsv:
    def test_header_schema(self):
        assert CSV_HEADER == "trial,seed,algorithm,n,k,p,status,exact_match,raw_queries,elapsed_ms"

    def test_repeat_runs_identical_modulo_timing(self, tmp_path):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=256, trials=3, seed_base=5)
        a = run_experiment(cfg).csv_text()
        b = run_experiment(cfg).csv_text()
        assert csv_equivalent(a, b)

    def test_written_file_has_rows_and_aggregate(self, tmp_path):
        out = tmp_path / "r.csv"
        cfg = ExperimentConfig(
            algorithm="khdac", n=256, k=256, trials=2, seed_base=0, out=str(out)
        )
        run_experiment(cfg)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2 + 1
        assert lines[-1].startswith("# aggregate ")
        assert "success_rate=1.000000" in lines[-1]

    def test_strip_timing_removes_elapsed(self):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=256, trials=1, seed_base=0)
        text = run_experiment(cfg).csv_text()
        stripped = strip_timing(text)
        assert "elapsed_ms" not in stripped.splitlines()[0]
        assert "mean_elapsed_ms" not in stripped


class TestRunDetection:
    def test_paired_rows_and_accuracy(self):
        n = 1024
        k = scaling_k(n)
        cfg = ExperimentConfig(
            algorithm="detect_subsampled", n=n, k=k, trials=5, seed_base=0, audit=True
        )
        report = run_detection(cfg)
        agg = report.aggregate
        assert len(report.rows) == 10
        assert agg["acc_h0"] == 1.0 and agg["acc_h1"] == 1.0
        assert agg["sum_statistic"] == 2.0
        assert agg["audit_passes"] == 10
        # paired rows share seeds; H0 rows carry k=0
        for i in range(5):
            h0_row, h1_row = report.rows[2 * i], report.rows[2 * i + 1]
            assert h0_row.seed == h1_row.seed
            assert h0_row.k == 0 and h1_row.k == k

    def test_recovery_algorithm_rejected(self):
        cfg = ExperimentConfig(algorithm="khdac", n=256, k=64, trials=1)
        with pytest.raises(ParameterError):
            run_detection(cfg)

    def test_reproducible(self):
        cfg = ExperimentConfig(
            algorithm="detect_subsampled", n=512, k=256, trials=3, seed_base=7
        )
        a = run_detection(cfg).csv_text()
        b = run_detection(cfg).csv_text()
        assert csv_equivalent(a, b)


class TestSubsampledScaling:
    def test_queries_decrease_in_k_at_fixed_n(self):
        # larger cliques shrink the subsample, so mean queries fall
        n = 16384
        means = []
        for k in (12288, 14336, 16384):
            cfg = ExperimentConfig(
                algorithm="subsample_khdac", n=n, k=k, trials=2, seed_base=0, jobs=2
            )
            report = run_experiment(cfg)
            assert report.aggregate["success_rate"] == 1.0
            means.append(report.aggregate["mean_queries"])
        assert means[0] > means[1] > means[2]


class TestBench:
    def test_two_point_sweep(self):
        report = bench_khdac_sweep([1024, 2048], trials=2, seed_base=0, jobs=2)
        assert len(report.points) == 2
        assert all(p.success_rate == 1.0 for p in report.points)
        # mean queries grow superlinearly in n
        ratio = report.points[1].mean_queries / report.points[0].mean_queries
        assert ratio > 2.5
        assert 1.0 < report.slope < 2.0
        assert report.csv_text().splitlines()[-1].startswith("# sweep slope=")
