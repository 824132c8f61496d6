"""Brute-force ground truth for small instances (n <= 32).

Used to validate the recovery algorithms: materialize the full matrix,
solve maximum clique exactly, and verify candidate cliques pair by pair.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .oracle import GraphLike, QueryLedger, VertexSet, query_row

MAX_DENSE_N = 32


class DenseGraph:
    """Adjacency as one bitmask per row; symmetric with a zero diagonal."""

    __slots__ = ("n", "rows")

    def __init__(self, n: int, rows: list[int]):
        self.n = n
        self.rows = rows

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()


def materialize(graph: GraphLike, ledger: QueryLedger) -> DenseGraph:
    """Copy an oracle's matrix by querying each unordered pair once.

    Refused for n > 32 to guard against accidental quadratic blowups.
    """
    n = graph.n
    if n > MAX_DENSE_N:
        raise ParameterError(f"materialize refused for n={n} > {MAX_DENSE_N}")
    rows = [0] * n
    for u in range(n - 1):
        others = np.arange(u + 1, n, dtype=np.int64)
        bits = query_row(graph, ledger, u, others)
        for j, bit in zip(others, bits):
            if bit:
                rows[u] |= 1 << int(j)
                rows[int(j)] |= 1 << u
    return DenseGraph(n, rows)


def _maximal_cliques(g: DenseGraph):
    """Bron-Kerbosch with pivoting over row bitmasks."""
    out = []
    rows = g.rows

    def expand(r: int, p: int, x: int):
        if p == 0 and x == 0:
            out.append(r)
            return
        pivot_pool = p | x
        pivot = (pivot_pool & -pivot_pool).bit_length() - 1
        best = -1
        pool = pivot_pool
        while pool:
            u = (pool & -pool).bit_length() - 1
            pool &= pool - 1
            cnt = (p & rows[u]).bit_count()
            if cnt > best:
                best = cnt
                pivot = u
        cand = p & ~rows[pivot]
        while cand:
            v = (cand & -cand).bit_length() - 1
            bit = 1 << v
            cand &= cand - 1
            expand(r | bit, p & rows[v], x & rows[v])
            p &= ~bit
            x |= bit

    expand(0, (1 << g.n) - 1, 0)
    return out


def _mask_to_ids(mask: int) -> tuple[int, ...]:
    ids = []
    while mask:
        v = (mask & -mask).bit_length() - 1
        ids.append(v)
        mask &= mask - 1
    return tuple(ids)


def maximum_cliques(g: DenseGraph) -> list[VertexSet]:
    """All maximum cliques, sorted by id list (used for uniqueness checks)."""
    best = 0
    winners: list[int] = []
    for mask in _maximal_cliques(g):
        size = mask.bit_count()
        if size > best:
            best = size
            winners = [mask]
        elif size == best:
            winners.append(mask)
    sets = sorted(_mask_to_ids(m) for m in winners)
    return [VertexSet(ids) for ids in sets]


def max_clique_exact(g: DenseGraph) -> VertexSet:
    """A maximum clique; ties broken by lexicographically smallest id list."""
    return maximum_cliques(g)[0]


def verify_clique(graph: GraphLike, ledger: QueryLedger, s: VertexSet) -> bool:
    """True iff every pair of ``s`` is adjacent.

    Always issues exactly |s|(|s|-1)/2 queries (no early exit), so the
    verification cost is the same whether the check passes or fails.
    """
    ids = s.to_array()
    ok = True
    for i in range(ids.size - 1):
        bits = query_row(graph, ledger, int(ids[i]), ids[i + 1 :])
        if not bits.all():
            ok = False
    return ok
