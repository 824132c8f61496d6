"""Command-line experiment runner.

Subcommands: ``gen`` writes a reproducible instance config, ``run`` sweeps a
recovery algorithm over seeds, ``detect`` runs paired null/planted trials,
``bench`` fits the query-scaling slope across instance sizes, and ``audit``
replays a recorded ledger dump against a declared rectangle.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .detection import RectanglePlan, rectangular_audit
from .errors import AuditUnavailableError, ParameterError
from .harness import (
    DETECTORS,
    RECOVERY_ALGORITHMS,
    ExperimentConfig,
    bench_khdac_sweep,
    run_detection,
    run_experiment,
)
from .oracle import InstanceSpec, QueryLedger


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="base seed")
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--out", type=str, default=None, help="CSV output path")
    parser.add_argument("--record-queries", action="store_true")


def _add_instance(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=("er", "planted", "iid"), default="planted")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--p-clique", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="plantedclique")
    sub = top.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write an instance spec config")
    _add_instance(gen)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=str, default=None)

    run = sub.add_parser("run", help="run a recovery algorithm over seeds")
    run.add_argument("--config", type=str, default=None, help="config file (JSON or key=value)")
    run.add_argument("--algorithm", choices=RECOVERY_ALGORITHMS, default=None)
    run.add_argument("--kind", choices=("er", "planted", "iid"), default=None)
    run.add_argument("--n", type=int, default=None)
    run.add_argument("--k", type=int, default=None)
    run.add_argument("--p-clique", type=float, default=None)
    run.add_argument("--p", type=float, default=None, help="subsample fraction override")
    run.add_argument("--l-in", type=int, default=None)
    run.add_argument("--c", type=float, default=None)
    run.add_argument("--degree-threshold", type=float, default=None)
    run.add_argument("--jobs", type=int, default=None)
    _add_shared(run)

    det = sub.add_parser("detect", help="paired null/planted detection trials")
    det.add_argument("--detector", choices=DETECTORS, default="detect_subsampled")
    det.add_argument("--n", type=int, required=True)
    det.add_argument("--k", type=int, required=True)
    det.add_argument("--p", type=float, default=None)
    det.add_argument("--threshold", type=float, default=None)
    det.add_argument("--pairs", type=int, default=None, help="alias for --trials")
    det.add_argument("--jobs", type=int, default=None)
    det.add_argument("--audit", action="store_true", help="audit every run's rectangle")
    det.add_argument("--dump-ledger", type=str, default=None,
                     help="write the first planted run's recorded ledger+plan as JSON")
    _add_shared(det)

    bench = sub.add_parser("bench", help="query-scaling sweep")
    bench.add_argument("--n-list", type=str, default="1024,2048,4096,8192")
    bench.add_argument("--jobs", type=int, default=None)
    _add_shared(bench)

    audit = sub.add_parser("audit", help="audit a recorded ledger dump against a plan")
    audit.add_argument("--ledger", type=str, required=True, help="JSON ledger dump")
    audit.add_argument("--plan", type=str, required=True, help="JSON plan file {I: [...], J: [...]}")

    return top


def _cmd_gen(args) -> int:
    spec = InstanceSpec(
        kind=args.kind, n=args.n, k=args.k, p_clique=args.p_clique, seed=args.seed
    )
    text = spec.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def _cmd_run(args) -> int:
    if args.config:
        config = ExperimentConfig.from_file(args.config)
        cli_overrides = {
            "algorithm": args.algorithm,
            "kind": args.kind,
            "n": args.n,
            "k": args.k,
            "p_clique": args.p_clique,
            "p": args.p,
            "l_in": args.l_in,
            "c": args.c,
            "degree_threshold": args.degree_threshold,
            "jobs": args.jobs,
            "out": args.out,
        }
        d = config.to_dict()
        d.update({key: value for key, value in cli_overrides.items() if value is not None})
        if args.trials != 1:
            d["trials"] = args.trials
        if args.seed != 0:
            d["seed_base"] = args.seed
        config = ExperimentConfig.from_dict(d)
    else:
        if not args.algorithm or args.n is None:
            print("run: need --config or at least --algorithm and --n", file=sys.stderr)
            return 2
        config = ExperimentConfig(
            algorithm=args.algorithm,
            kind=args.kind or "planted",
            n=args.n,
            k=args.k,
            p_clique=args.p_clique,
            trials=args.trials,
            seed_base=args.seed,
            p=args.p,
            l_in=args.l_in,
            c=args.c if args.c is not None else 1.0,
            degree_threshold=args.degree_threshold,
            jobs=args.jobs,
            out=args.out,
            record_queries=args.record_queries,
        )
    report = run_experiment(config)
    agg = report.aggregate
    print(
        f"{config.algorithm}: {agg['successes']}/{agg['trials']} exact recoveries, "
        f"mean queries {agg['mean_queries']:.0f}, mean elapsed {agg['mean_elapsed_ms']:.1f} ms"
    )
    if config.out:
        print(f"wrote {config.out}")
    return 0


def _cmd_detect(args) -> int:
    trials = args.pairs if args.pairs is not None else args.trials
    config = ExperimentConfig(
        algorithm=args.detector,
        kind="planted",
        n=args.n,
        k=args.k,
        trials=trials,
        seed_base=args.seed,
        p=args.p,
        threshold=args.threshold,
        jobs=args.jobs,
        out=args.out,
        record_queries=args.record_queries or args.audit or bool(args.dump_ledger),
        audit=args.audit,
    )
    report = run_detection(config)
    agg = report.aggregate
    line = (
        f"{config.algorithm}: acc_h0={agg['acc_h0']:.3f} acc_h1={agg['acc_h1']:.3f} "
        f"sum={agg['sum_statistic']:.3f}"
    )
    if "audit_passes" in agg:
        line += f" audit_passes={agg['audit_passes']}/{2 * agg['pairs']}"
    print(line)
    if args.dump_ledger:
        _dump_first_planted_run(config, args.dump_ledger)
        print(f"wrote {args.dump_ledger}")
    if config.out:
        print(f"wrote {config.out}")
    return 0


def _dump_first_planted_run(config: ExperimentConfig, path: str) -> None:
    """Re-run the first planted trial with recording and dump ledger+plan."""
    from . import detection, harness
    from .oracle import PLANTED, build_oracle

    seed = config.seed_base
    spec = InstanceSpec(PLANTED, config.n, k=config.k, seed=seed)
    oracle = build_oracle(spec)
    ledger = QueryLedger(recording=True)
    rng = np.random.default_rng([seed & ((1 << 64) - 1), harness._PLAN_RNG_LANE])
    p_alg = config.p
    if p_alg is None:
        p_alg = harness.default_subsample_p(config.n, config.k or 1)
    if config.algorithm == "detect_khd":
        p_alg = 1.0
    plan = detection.build_subsampled_plan(config.n, config.k or 1, p_alg, rng)
    detection.detect_khd(oracle.handle(), ledger, plan)
    dump = {
        "plan": plan.to_dict(),
        "commits": [
            {
                "fingerprint": c.fingerprint,
                "raw_count_at_commit": c.raw_count_at_commit,
                "pairs_recorded_before": c.pairs_recorded_before,
            }
            for c in ledger.commits
        ],
        "pairs": ledger.distinct_pairs().tolist(),
    }
    with open(path, "w") as fh:
        json.dump(dump, fh)


def _cmd_bench(args) -> int:
    ns = [int(x) for x in args.n_list.split(",") if x.strip()]
    report = bench_khdac_sweep(ns, trials=args.trials, seed_base=args.seed, jobs=args.jobs)
    for point in report.points:
        print(
            f"n={point.n} k={point.k} l_in={point.l_in} "
            f"mean_queries={point.mean_queries:.0f} success={point.success_rate:.2f}"
        )
    print(f"log-log slope: {report.slope:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.csv_text())
        print(f"wrote {args.out}")
    return 0


def _cmd_audit(args) -> int:
    with open(args.plan) as fh:
        plan = RectanglePlan.from_dict(json.load(fh))
    with open(args.ledger) as fh:
        dump = json.load(fh)
    ledger = QueryLedger(recording=True)
    pairs = np.asarray(dump.get("pairs", []), dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        keys = (pairs[:, 0].astype(np.uint64) << np.uint64(32)) | pairs[:, 1].astype(np.uint64)
        ledger.record(keys)
        ledger.raw_count = int(pairs.shape[0])
    for commit in dump.get("commits", []):
        ledger.commits.append(_commit_from(commit))
    report = rectangular_audit(ledger, plan)
    if report.passed:
        print(f"PASS: {report.reason} ({report.checked_pairs} pairs checked)")
        return 0
    print(f"FAIL: {report.reason}")
    for u, v in report.offending_list():
        print(f"  offending pair ({u}, {v})")
    return 1


def _commit_from(d: dict):
    from .oracle import PlanCommit

    return PlanCommit(
        fingerprint=d["fingerprint"],
        raw_count_at_commit=int(d.get("raw_count_at_commit", 0)),
        pairs_recorded_before=int(d.get("pairs_recorded_before", 0)),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "detect":
            return _cmd_detect(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "audit":
            return _cmd_audit(args)
    except (ParameterError, AuditUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
