"""Planted-clique recovery and detection over a query-counted lazy oracle."""

from .detection import (
    H0,
    H1,
    AuditReport,
    DetectionOutcome,
    RectanglePlan,
    build_subsampled_plan,
    detect_khd,
    detect_subsampled,
    rectangular_audit,
)
from .errors import AuditUnavailableError, CapabilityError, ParameterError
from .exact import DenseGraph, materialize, max_clique_exact, maximum_cliques, verify_clique
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    bench_khdac_sweep,
    csv_equivalent,
    run_detection,
    run_experiment,
)
from .oracle import (
    ER,
    IID,
    PLANTED,
    AdjacencyOracle,
    InducedOracle,
    InstanceSpec,
    OracleHandle,
    QueryLedger,
    VertexSet,
    build_oracle,
    degree,
    query,
    query_row,
    sample_vertices,
)
from .recovery import (
    DECLARED_FAILURE,
    RECOVERED,
    FilterParams,
    KhdacParams,
    RecoveryOutcome,
    clique_completion,
    completion_seed_size,
    default_degree_threshold,
    khdac,
    subsample_filter,
    subsample_khdac,
)
from .reductions import query_budget_check, realized_clique_size, restrict_prefix

__all__ = [
    "H0",
    "H1",
    "AuditReport",
    "AuditUnavailableError",
    "AdjacencyOracle",
    "CapabilityError",
    "DECLARED_FAILURE",
    "DenseGraph",
    "DetectionOutcome",
    "ER",
    "ExperimentConfig",
    "ExperimentReport",
    "FilterParams",
    "IID",
    "InducedOracle",
    "InstanceSpec",
    "KhdacParams",
    "OracleHandle",
    "PLANTED",
    "ParameterError",
    "QueryLedger",
    "RECOVERED",
    "RecoveryOutcome",
    "RectanglePlan",
    "VertexSet",
    "bench_khdac_sweep",
    "build_oracle",
    "build_subsampled_plan",
    "clique_completion",
    "completion_seed_size",
    "csv_equivalent",
    "default_degree_threshold",
    "degree",
    "detect_khd",
    "detect_subsampled",
    "khdac",
    "materialize",
    "max_clique_exact",
    "maximum_cliques",
    "query",
    "query_budget_check",
    "query_row",
    "rectangular_audit",
    "realized_clique_size",
    "restrict_prefix",
    "run_detection",
    "run_experiment",
    "sample_vertices",
    "subsample_filter",
    "subsample_khdac",
    "verify_clique",
]
