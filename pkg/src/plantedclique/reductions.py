"""Executable instance transformations and query-budget bookkeeping.

A prefix restriction of an iid-planted instance is itself an iid-planted
instance on fewer vertices; the view shares the parent's randomness and
ledger, which is what makes the reduction executable rather than merely
stated. Hidden-clique accessors only work through harness handles.
"""

from __future__ import annotations

import numpy as np

from .errors import CapabilityError, ParameterError
from .oracle import AdjacencyOracle, InducedOracle, QueryLedger


def restrict_prefix(graph, m: int) -> InducedOracle:
    """View of the first ``m`` vertices; ids keep their meaning.

    Queries through the view hit the parent's mixer and charge whatever
    ledger the caller passes, so the view adds no randomness of its own.
    """
    if not 1 <= m <= graph.n:
        raise ParameterError(f"prefix size {m} out of range [1, {graph.n}]")
    return InducedOracle(graph, np.arange(m, dtype=np.int64))


def realized_clique_size(graph) -> int:
    """Size of the hidden clique; harness/test use only.

    Views keep the capability of whatever they were built on, so a prefix
    view of a full oracle still answers, while anything rooted in an
    algorithm-facing handle raises.
    """
    if isinstance(graph, AdjacencyOracle):
        return int(graph.hidden_clique.size)
    if isinstance(graph, InducedOracle):
        root = graph
        while isinstance(root, InducedOracle):
            root = root.parent
        if isinstance(root, AdjacencyOracle):
            clique = root.hidden_clique
            return int(np.isin(graph._root_ids, clique).sum())
    raise CapabilityError(
        "hidden clique is not visible through an algorithm-facing handle"
    )


def query_budget_check(ledger: QueryLedger, time_budget_ops: int) -> bool:
    """True iff the measured queries fit the claimed runtime budget."""
    return ledger.raw_count <= time_budget_ops
