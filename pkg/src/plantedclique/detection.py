"""Non-adaptive rectangular detection.

The query plan is a rectangle over two disjoint vertex sets I and J: all
pairs inside J plus all I-J pairs. Plans are committed to the ledger before
the first probe, and a recording-mode ledger can be audited afterwards to
prove no query strayed outside the declared rectangle.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._bits import pairs_outside_rectangle
from .errors import AuditUnavailableError, ParameterError
from .oracle import (
    GraphLike,
    QueryLedger,
    VertexSet,
    as_rng,
    degree,
    sample_vertices,
)

H0 = "H0"
H1 = "H1"


@dataclass(frozen=True)
class RectanglePlan:
    """A declared query rectangle: disjoint vertex sets I and J."""

    i_set: VertexSet
    j_set: VertexSet

    def __post_init__(self):
        overlap = set(self.i_set.ids) & set(self.j_set.ids)
        if overlap:
            raise ParameterError(f"I and J overlap on {sorted(overlap)[:5]}")

    def universe(self) -> np.ndarray:
        return np.union1d(self.i_set.to_array(), self.j_set.to_array())

    def fingerprint(self) -> str:
        text = "I=" + ",".join(map(str, self.i_set.ids)) + ";J=" + ",".join(
            map(str, self.j_set.ids)
        )
        return hashlib.sha256(text.encode()).hexdigest()

    def pair_count(self) -> int:
        i, j = len(self.i_set), len(self.j_set)
        return j * (j - 1) // 2 + i * j

    def to_dict(self) -> dict:
        return {"I": list(self.i_set.ids), "J": list(self.j_set.ids)}

    @classmethod
    def from_dict(cls, d: dict) -> "RectanglePlan":
        return cls(VertexSet(d["I"]), VertexSet(d["J"]))


@dataclass
class DetectionOutcome:
    decision: str
    max_degree_seen: int
    queries: int
    plan: RectanglePlan
    threshold: float
    elapsed: float
    details: dict = field(default_factory=dict)


def default_detection_threshold(universe_size: int) -> float:
    m = universe_size
    if m < 2:
        return 0.5
    return m / 2.0 + 2.0 * math.sqrt(m * math.log2(m))


def detect_khd(
    graph: GraphLike,
    ledger: QueryLedger,
    plan: RectanglePlan,
    threshold: Optional[float] = None,
) -> DetectionOutcome:
    """Decide null vs planted from the largest degree inside the rectangle.

    The plan is committed to the ledger first, then every planned pair is
    probed (no early exit: stopping early would make the query set depend
    on the answers). Returns H1 iff some J-vertex has degree at least the
    threshold within I union J.
    """
    universe = plan.universe()
    if universe.size and (universe[0] < 0 or universe[-1] >= graph.n):
        raise ParameterError("plan vertex ids out of range for this graph")
    if threshold is None:
        threshold = default_detection_threshold(int(universe.size))
    t0 = time.perf_counter()
    start = ledger.raw_count
    ledger.commit_plan(plan.fingerprint())

    max_degree = 0
    for v in plan.j_set.ids:
        d = degree(graph, ledger, v, universe)
        if d > max_degree:
            max_degree = d
    decision = H1 if plan.j_set.ids and max_degree >= threshold else H0
    return DetectionOutcome(
        decision=decision,
        max_degree_seen=max_degree,
        queries=ledger.raw_count - start,
        plan=plan,
        threshold=threshold,
        elapsed=time.perf_counter() - t0,
    )


def build_subsampled_plan(
    n: int,
    k: int,
    p: float,
    rng,
) -> RectanglePlan:
    """Declare the rectangle a p-subsampled degree test would probe.

    Built from (n, k, p) and randomness only, never from the graph, so the
    resulting query set is non-adaptive by construction. J holds the
    degree-probed candidates, I the rest of the subsample.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in [1, n], got {k}")
    if p <= 0:
        raise ParameterError(f"subsample fraction must be positive, got {p}")
    rng = as_rng(rng)
    p_used = min(p, 1.0)
    n_sub = math.ceil(p_used * n)
    k_sub = p_used * k / 2.0
    if n_sub < 2 or k_sub < 1.0:
        raise ParameterError(f"subsample too small: n'={n_sub}, k'={k_sub:.2f}")
    subsample = sample_vertices(n, n_sub, replace=False, rng=rng)
    l_sub = math.ceil(4.0 * n_sub * math.log2(n_sub) ** 2 / k_sub)
    draws = subsample[sample_vertices(n_sub, l_sub, replace=True, rng=rng)]
    j_ids = np.unique(draws)
    i_ids = np.setdiff1d(subsample, j_ids)
    return RectanglePlan(VertexSet(i_ids.tolist()), VertexSet(j_ids.tolist()))


def detect_subsampled(
    graph: GraphLike,
    ledger: QueryLedger,
    k: int,
    p: float,
    rng,
) -> DetectionOutcome:
    """Non-adaptive rectangular detection at the subsampled-recovery rates.

    Runs in O((pn)^2) probes with no completion term; the threshold is
    recomputed over the restricted universe of the subsample.
    """
    plan = build_subsampled_plan(graph.n, k, p, rng)
    m = len(plan.i_set) + len(plan.j_set)
    return detect_khd(graph, ledger, plan, threshold=default_detection_threshold(m))


@dataclass
class AuditReport:
    passed: bool
    reason: str
    checked_pairs: int
    offending: np.ndarray  # (m, 2) int64 array of out-of-rectangle pairs

    def offending_list(self, cap: int = 20) -> list[tuple[int, int]]:
        return [tuple(map(int, row)) for row in self.offending[:cap]]


def rectangular_audit(ledger: QueryLedger, plan: RectanglePlan) -> AuditReport:
    """Check a recorded ledger against a declared rectangle.

    Passes iff every recorded pair lies inside the plan's rectangle and the
    plan was committed before the first query. An empty ledger passes
    vacuously. Requires recording mode.
    """
    if not ledger.recording:
        raise AuditUnavailableError("ledger was not recording; re-run in audit mode")
    keys = ledger.recorded_keys()
    if keys.size == 0:
        return AuditReport(True, "no queries recorded", 0, np.empty((0, 2), np.int64))

    fingerprint = plan.fingerprint()
    committed = any(
        c.fingerprint == fingerprint and c.pairs_recorded_before == 0
        for c in ledger.commits
    )

    ids = plan.universe()
    size = int(ids[-1]) + 1 if ids.size else 1
    in_i = np.zeros(size, dtype=np.bool_)
    in_j = np.zeros(size, dtype=np.bool_)
    in_i[plan.i_set.to_array()] = True
    in_j[plan.j_set.to_array()] = True
    bad_idx = pairs_outside_rectangle(keys, in_i, in_j)

    offending_keys = np.unique(keys[bad_idx])
    offending = np.empty((offending_keys.size, 2), dtype=np.int64)
    offending[:, 0] = (offending_keys >> np.uint64(32)).astype(np.int64)
    offending[:, 1] = (offending_keys & np.uint64(0xFFFFFFFF)).astype(np.int64)

    if not committed:
        return AuditReport(
            False,
            "plan was not committed before the first query",
            int(keys.size),
            offending,
        )
    if offending.size:
        return AuditReport(
            False,
            f"{offending.shape[0]} distinct pairs outside the rectangle",
            int(keys.size),
            offending,
        )
    return AuditReport(True, "all recorded pairs inside the rectangle", int(keys.size), offending)
