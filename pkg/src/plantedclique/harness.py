"""Experiment runner: seed sweeps, CSV reports, and scaling fits.

Each trial owns a fresh oracle, ledger, and RNG derived from
(seed_base + trial), so trials parallelize with no shared state and a rerun
of the same config reproduces every column except wall-clock timings.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .detection import rectangular_audit
from .errors import ParameterError
from .oracle import (
    ER,
    IID,
    PLANTED,
    InstanceSpec,
    QueryLedger,
    VertexSet,
    build_oracle,
)
from .recovery import (
    RECOVERED,
    KhdacParams,
    clique_completion,
    completion_seed_size,
    khdac,
    subsample_filter,
    subsample_khdac,
)
from . import detection

CSV_HEADER = "trial,seed,algorithm,n,k,p,status,exact_match,raw_queries,elapsed_ms"

_MASK64 = (1 << 64) - 1
_ALGO_RNG_LANE = 7
_PLAN_RNG_LANE = 11

RECOVERY_ALGORITHMS = ("khdac", "subsample_khdac", "subsample_filter", "completion")
DETECTORS = ("detect_khd", "detect_subsampled")

# which overrides each algorithm's parameter record accepts
_ALLOWED_OVERRIDES = {
    "khdac": {"l_in", "degree_threshold", "c"},
    "subsample_khdac": {"p", "c"},
    "subsample_filter": {"p", "c"},
    "completion": {"c"},
    "detect_khd": {"p", "threshold"},
    "detect_subsampled": {"p", "threshold"},
}


def default_subsample_p(n: int, k: int) -> float:
    """Theorem-rate subsample fraction 512 n log2(n) / k^2, clamped to 1."""
    return min(1.0, 512.0 * n * math.log2(n) / (k * k))


def default_filter_p(n: int, k: int) -> float:
    """(n log2 n / k^2) exp(-k^2 / 24n), clamped to 1."""
    return min(1.0, n * math.log2(n) / (k * k) * math.exp(-k * k / (24.0 * n)))


def scaling_k(n: int) -> int:
    """Clique size ceil(8 sqrt(n log2 n)) used by the scaling sweeps."""
    return math.ceil(8.0 * math.sqrt(n * math.log2(n)))


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    kind: str = PLANTED
    n: int = 0
    k: Optional[int] = None
    p_clique: Optional[float] = None
    trials: int = 1
    seed_base: int = 0
    p: Optional[float] = None
    l_in: Optional[int] = None
    c: float = 1.0
    degree_threshold: Optional[float] = None
    threshold: Optional[float] = None
    jobs: Optional[int] = None
    out: Optional[str] = None
    record_queries: bool = False
    audit: bool = False

    def __post_init__(self):
        if self.algorithm not in RECOVERY_ALGORITHMS + DETECTORS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        allowed = _ALLOWED_OVERRIDES[self.algorithm]
        given = {
            name
            for name, value in (
                ("p", self.p),
                ("l_in", self.l_in),
                ("degree_threshold", self.degree_threshold),
                ("threshold", self.threshold),
            )
            if value is not None
        }
        stray = given - allowed
        if stray:
            raise ParameterError(
                f"overrides {sorted(stray)} not accepted by {self.algorithm}"
            )
        # construct once to surface spec errors at config time
        self.instance_spec(self.seed_base)

    def instance_spec(self, seed: int) -> InstanceSpec:
        return InstanceSpec(
            kind=self.kind, n=self.n, k=self.k, p_clique=self.p_clique, seed=seed
        )

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "p_clique": self.p_clique,
            "trials": self.trials,
            "seed_base": self.seed_base,
            "p": self.p,
            "l_in": self.l_in,
            "c": self.c,
            "degree_threshold": self.degree_threshold,
            "threshold": self.threshold,
            "jobs": self.jobs,
            "out": self.out,
            "record_queries": self.record_queries,
            "audit": self.audit,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        stray = set(d) - known
        if stray:
            raise ParameterError(f"unknown config keys: {sorted(stray)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        text = open(path).read().strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        d: dict = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            d[key.strip()] = _coerce(value.strip())
        return cls.from_dict(d)


def _coerce(value: str):
    if value in ("", "none", "null"):
        return None
    if value in ("true", "false"):
        return value == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


@dataclass
class TrialRow:
    trial: int
    seed: int
    algorithm: str
    n: int
    k: int
    p: str
    status: str
    exact_match: bool
    raw_queries: int
    elapsed_ms: float

    def to_csv(self) -> str:
        return (
            f"{self.trial},{self.seed},{self.algorithm},{self.n},{self.k},{self.p},"
            f"{self.status},{'true' if self.exact_match else 'false'},"
            f"{self.raw_queries},{self.elapsed_ms:.3f}"
        )


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[TrialRow]
    aggregate: dict = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        return self.aggregate.get("success_rate", 0.0)

    def total_queries(self) -> int:
        return sum(r.raw_queries for r in self.rows)

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(r.to_csv() for r in self.rows)
        lines.append(_aggregate_comment(self.aggregate))
        return "\n".join(lines) + "\n"

    def write_csv(self, path: str) -> None:
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(self.csv_text())
        os.replace(tmp, path)


def _aggregate_comment(agg: dict) -> str:
    # timing goes last so reproducibility checks can strip it by name
    parts = []
    for key, value in agg.items():
        if key.startswith("mean_elapsed"):
            continue
        if isinstance(value, float):
            parts.append(f"{key}={value:.6f}")
        else:
            parts.append(f"{key}={value}")
    if "mean_elapsed_ms" in agg:
        parts.append(f"mean_elapsed_ms={agg['mean_elapsed_ms']:.3f}")
    return "# aggregate " + " ".join(parts)


def _trial_rng(seed: int, lane: int) -> np.random.Generator:
    return np.random.default_rng([seed & _MASK64, lane])


def _recovery_trial(config: ExperimentConfig, trial: int) -> TrialRow:
    seed = config.seed_base + trial
    spec = config.instance_spec(seed)
    oracle = build_oracle(spec)
    handle = oracle.handle()
    ledger = QueryLedger(recording=config.record_queries)
    rng = _trial_rng(seed, _ALGO_RNG_LANE)

    k_col = {PLANTED: spec.k or 0, ER: 0, IID: int(oracle.hidden_clique.size)}[spec.kind]
    p_col = ""
    status = "error"
    exact = False
    elapsed_ms = 0.0
    try:
        if config.algorithm == "khdac":
            params = KhdacParams.for_graph(
                spec.n,
                k=_algorithm_k(config, oracle) if config.l_in is None else None,
                l_in=config.l_in,
                c=config.c,
                degree_threshold=config.degree_threshold,
            )
            outcome = khdac(handle, ledger, params, rng=rng)
        elif config.algorithm == "subsample_khdac":
            k_alg = _algorithm_k(config, oracle)
            p_alg = config.p if config.p is not None else default_subsample_p(spec.n, k_alg)
            p_col = f"{min(p_alg, 1.0):.6g}"
            outcome = subsample_khdac(handle, ledger, k_alg, p_alg, rng=rng, c=config.c)
        elif config.algorithm == "subsample_filter":
            k_alg = _algorithm_k(config, oracle)
            p_alg = config.p if config.p is not None else default_filter_p(spec.n, k_alg)
            p_col = f"{min(p_alg, 1.0):.6g}"
            outcome = subsample_filter(handle, ledger, k_alg, p_alg, rng=rng, c=config.c)
        elif config.algorithm == "completion":
            outcome = _genie_completion(oracle, handle, ledger, rng, config.c)
        else:  # pragma: no cover - guarded by config validation
            raise ParameterError(config.algorithm)
        status = outcome.status
        exact = outcome.recovered and outcome.clique == oracle.hidden_clique_set()
        elapsed_ms = outcome.elapsed * 1000.0
    except ParameterError:
        status = "error"
        exact = False
    return TrialRow(
        trial=trial,
        seed=seed,
        algorithm=config.algorithm,
        n=spec.n,
        k=k_col,
        p=p_col,
        status=status,
        exact_match=exact,
        raw_queries=ledger.raw_count,
        elapsed_ms=elapsed_ms,
    )


def _algorithm_k(config: ExperimentConfig, oracle) -> int:
    """The clique-size estimate handed to an algorithm.

    For planted instances this is the configured k; for iid instances the
    rate-implied expectation, which is within the tolerance the algorithms
    need.
    """
    if config.kind == PLANTED:
        return int(config.k or 0)
    if config.kind == IID:
        return max(1, round((config.p_clique or 0.0) * config.n))
    if config.k:
        return int(config.k)
    raise ParameterError("null instances need an explicit k for the algorithm")


def _genie_completion(oracle, handle, ledger, rng, c: float):
    """Completion seeded with a true clique subset, per its intended
    contract; the seed comes from the harness side, never the handle."""
    hidden = oracle.hidden_clique
    need = completion_seed_size(oracle.n, c)
    if hidden.size < need:
        raise ParameterError(
            f"hidden clique has {hidden.size} vertices; completion needs {need}"
        )
    seed_ids = np.sort(rng.choice(hidden, size=need, replace=False))
    return clique_completion(handle, ledger, VertexSet(seed_ids.tolist()), rng=rng, c=c)


def default_jobs() -> int:
    env = os.environ.get("PLANTEDCLIQUE_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _run_rows(worker, config: ExperimentConfig, count: int) -> list:
    jobs = config.jobs if config.jobs is not None else default_jobs()
    if jobs <= 1 or count <= 1:
        return [worker(config, i) for i in range(count)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, [config] * count, range(count), chunksize=1))


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run recovery trials and aggregate success/query statistics."""
    if config.algorithm not in RECOVERY_ALGORITHMS:
        raise ParameterError(f"{config.algorithm} is a detector; use run_detection")
    rows = _run_rows(_recovery_trial, config, config.trials)
    successes = sum(1 for r in rows if r.status == RECOVERED and r.exact_match)
    queries = [r.raw_queries for r in rows]
    agg = {
        "trials": config.trials,
        "successes": successes,
        "success_rate": successes / config.trials,
        "mean_queries": float(np.mean(queries)),
        "max_queries": int(max(queries)),
        "mean_elapsed_ms": float(np.mean([r.elapsed_ms for r in rows])),
    }
    report = ExperimentReport(config, rows, agg)
    if config.out:
        report.write_csv(config.out)
    return report


def _detection_trial(config: ExperimentConfig, pair: int) -> tuple[TrialRow, TrialRow, int]:
    seed = config.seed_base + pair
    if not config.k or config.k < 1:
        raise ParameterError("detection needs k >= 1")
    p_alg = config.p if config.p is not None else default_subsample_p(config.n, config.k)
    if config.algorithm == "detect_khd":
        p_alg = 1.0
    rows = []
    audits = 0
    for truth, spec in (
        (detection.H0, InstanceSpec(ER, config.n, seed=seed)),
        (detection.H1, InstanceSpec(PLANTED, config.n, k=config.k, seed=seed)),
    ):
        oracle = build_oracle(spec)
        handle = oracle.handle()
        recording = config.record_queries or config.audit
        ledger = QueryLedger(recording=recording)
        rng = _trial_rng(seed, _PLAN_RNG_LANE)
        plan = detection.build_subsampled_plan(config.n, config.k, p_alg, rng)
        thr = config.threshold
        if thr is None:
            thr = detection.default_detection_threshold(len(plan.i_set) + len(plan.j_set))
        outcome = detection.detect_khd(handle, ledger, plan, threshold=thr)
        if config.audit:
            audits += int(rectangular_audit(ledger, plan).passed)
        rows.append(
            TrialRow(
                trial=2 * pair + (0 if truth == detection.H0 else 1),
                seed=seed,
                algorithm=config.algorithm,
                n=config.n,
                k=0 if truth == detection.H0 else int(config.k),
                p=f"{min(p_alg, 1.0):.6g}",
                status=outcome.decision,
                exact_match=outcome.decision == truth,
                raw_queries=ledger.raw_count,
                elapsed_ms=outcome.elapsed * 1000.0,
            )
        )
    return rows[0], rows[1], audits


def run_detection(config: ExperimentConfig) -> ExperimentReport:
    """Run paired null/planted trials with matched seeds and plans."""
    if config.algorithm not in DETECTORS:
        raise ParameterError(f"{config.algorithm} is not a detector")
    results = _run_rows(_detection_trial, config, config.trials)
    rows: list[TrialRow] = []
    audits = 0
    for h0_row, h1_row, audit_passes in results:
        rows.extend((h0_row, h1_row))
        audits += audit_passes
    pairs = config.trials
    acc_h0 = sum(1 for r in rows if r.k == 0 and r.exact_match) / pairs
    acc_h1 = sum(1 for r in rows if r.k > 0 and r.exact_match) / pairs
    agg = {
        "pairs": pairs,
        "acc_h0": acc_h0,
        "acc_h1": acc_h1,
        "sum_statistic": acc_h0 + acc_h1,
        "mean_queries": float(np.mean([r.raw_queries for r in rows])),
        "max_queries": int(max(r.raw_queries for r in rows)),
        "mean_elapsed_ms": float(np.mean([r.elapsed_ms for r in rows])),
    }
    if config.audit:
        agg["audit_passes"] = audits
    report = ExperimentReport(config, rows, agg)
    if config.out:
        report.write_csv(config.out)
    return report


@dataclass
class SweepPoint:
    n: int
    k: int
    l_in: int
    mean_queries: float
    max_queries: int
    success_rate: float


@dataclass
class SweepReport:
    points: list[SweepPoint]
    slope: float
    rows: list[TrialRow]

    def csv_text(self) -> str:
        lines = [CSV_HEADER]
        lines.extend(r.to_csv() for r in self.rows)
        lines.append(f"# sweep slope={self.slope:.6f}")
        return "\n".join(lines) + "\n"


def bench_khdac_sweep(
    n_values,
    trials: int = 10,
    seed_base: int = 0,
    jobs: Optional[int] = None,
) -> SweepReport:
    """Mean-query scaling sweep at k = ceil(8 sqrt(n log2 n)).

    Fits the log-log slope of mean raw queries against n.
    """
    points = []
    rows: list[TrialRow] = []
    for n in n_values:
        k = scaling_k(n)
        l_in = math.ceil(4.0 * n * math.log2(n) ** 2 / k)
        cfg = ExperimentConfig(
            algorithm="khdac",
            kind=PLANTED,
            n=n,
            k=k,
            trials=trials,
            seed_base=seed_base,
            l_in=l_in,
            jobs=jobs,
        )
        report = run_experiment(cfg)
        rows.extend(report.rows)
        points.append(
            SweepPoint(
                n=n,
                k=k,
                l_in=l_in,
                mean_queries=report.aggregate["mean_queries"],
                max_queries=report.aggregate["max_queries"],
                success_rate=report.aggregate["success_rate"],
            )
        )
    xs = np.log2([p.n for p in points])
    ys = np.log2([p.mean_queries for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return SweepReport(points, slope, rows)


def strip_timing(csv_text: str) -> str:
    """Drop wall-clock columns/fields so reproducible parts can be compared."""
    width = len(CSV_HEADER.split(","))
    out = []
    for line in csv_text.splitlines():
        if line.startswith("#"):
            parts = [p for p in line.split(" ") if not p.startswith("mean_elapsed")]
            out.append(" ".join(parts))
        else:
            cells = line.split(",")
            if len(cells) == width:
                cells = cells[:-1]
            out.append(",".join(cells))
    return "\n".join(out)


def csv_equivalent(a: str, b: str) -> bool:
    """Byte equality modulo the timing columns."""
    return strip_timing(a) == strip_timing(b)
