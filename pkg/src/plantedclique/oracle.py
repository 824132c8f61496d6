"""Seeded lazy graph distributions behind a query-counted adjacency oracle.

Three distributions are supported: the null model (every edge an independent
fair coin), a planted clique on a uniformly random k-subset, and the iid
variant where each vertex joins the clique independently with probability
``p_clique``. Edge bits are derived lazily from a keyed mixer, so an oracle
stores O(k) state and answers any pair in O(1) without materializing the
n x n matrix.

All logarithms in parameter formulas are base 2, and fractional sizes are
rounded up.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from ._bits import (
    derive_clique_seed,
    derive_edge_seed,
    edge_bit_scalar,
    edge_bits,
    pack_membership,
    pack_pairs,
)
from .errors import ParameterError

ER = "er"
PLANTED = "planted"
IID = "iid"
KINDS = (ER, PLANTED, IID)

_EMPTY_CLIQUE = np.empty(0, dtype=np.int64)


def log2ceil(x: float) -> int:
    return math.ceil(math.log2(x))


@dataclass(frozen=True)
class InstanceSpec:
    """Which graph distribution to sample, and the seed that pins it down."""

    kind: str
    n: int
    k: Optional[int] = None
    p_clique: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown kind {self.kind!r}, expected one of {KINDS}")
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if self.n >= 1 << 32:
            raise ParameterError("vertex ids must fit in 32 bits")
        if self.kind == PLANTED:
            if self.k is None:
                raise ParameterError("planted instances require k")
            if not 0 <= self.k <= self.n:
                raise ParameterError(f"k must satisfy 0 <= k <= n, got k={self.k}, n={self.n}")
        if self.kind == IID:
            if self.p_clique is None:
                raise ParameterError("iid instances require p_clique")
            if not 0.0 <= self.p_clique <= 1.0:
                raise ParameterError(f"p_clique must lie in [0, 1], got {self.p_clique}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n, "seed": self.seed}
        if self.k is not None:
            d["k"] = self.k
        if self.p_clique is not None:
            d["p_clique"] = self.p_clique
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceSpec":
        return cls(
            kind=d["kind"],
            n=int(d["n"]),
            k=int(d["k"]) if d.get("k") is not None else None,
            p_clique=float(d["p_clique"]) if d.get("p_clique") is not None else None,
            seed=int(d.get("seed", 0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "InstanceSpec":
        return cls.from_dict(json.loads(text))


class VertexSet:
    """Sorted, duplicate-free vertex ids with O(1) membership tests."""

    __slots__ = ("ids", "_members")

    def __init__(self, ids: Iterable[int] = ()):
        self.ids = tuple(sorted({int(i) for i in ids}))
        if self.ids and self.ids[0] < 0:
            raise ParameterError("vertex ids must be non-negative")
        self._members = frozenset(self.ids)

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, v):
        return v in self._members

    def __eq__(self, other):
        if isinstance(other, VertexSet):
            return self.ids == other.ids
        return NotImplemented

    def __hash__(self):
        return hash(self.ids)

    def __repr__(self):
        if len(self.ids) > 12:
            head = ", ".join(map(str, self.ids[:10]))
            return f"VertexSet([{head}, ... {len(self.ids)} ids])"
        return f"VertexSet({list(self.ids)})"

    def to_array(self) -> np.ndarray:
        return np.asarray(self.ids, dtype=np.int64)


@dataclass
class PlanCommit:
    """A rectangle plan registered against a ledger before querying begins."""

    fingerprint: str
    raw_count_at_commit: int
    pairs_recorded_before: int


class QueryLedger:
    """Counts adjacency queries; optionally records the queried pairs.

    ``raw_count`` counts every call, duplicates included. With
    ``symmetric=True`` each probe is charged twice, matching the convention
    that querying (i, j) also queries (j, i). Recording keeps the packed
    unordered pair keys and is opt-in: at scale the recorded set, not the
    graph, is the memory bottleneck.
    """

    __slots__ = ("raw_count", "symmetric", "recording", "_batches", "commits")

    def __init__(self, *, recording: bool = False, symmetric: bool = False):
        self.raw_count = 0
        self.symmetric = symmetric
        self.recording = recording
        self._batches: list[np.ndarray] = []
        self.commits: list[PlanCommit] = []

    def charge(self, pairs: int) -> None:
        if pairs < 0:
            raise ParameterError("cannot charge a negative query count")
        self.raw_count += 2 * pairs if self.symmetric else pairs

    def record(self, keys: np.ndarray) -> None:
        if self.recording and keys.size:
            self._batches.append(keys)

    def pairs_recorded(self) -> int:
        return sum(b.size for b in self._batches)

    def recorded_keys(self) -> np.ndarray:
        if not self._batches:
            return np.empty(0, dtype=np.uint64)
        return np.concatenate(self._batches)

    def distinct_pairs(self) -> np.ndarray:
        """Unique recorded pairs as an (m, 2) array of (min, max) ids."""
        keys = np.unique(self.recorded_keys())
        out = np.empty((keys.size, 2), dtype=np.int64)
        out[:, 0] = (keys >> np.uint64(32)).astype(np.int64)
        out[:, 1] = (keys & np.uint64(0xFFFFFFFF)).astype(np.int64)
        return out

    def commit_plan(self, fingerprint: str) -> None:
        self.commits.append(
            PlanCommit(fingerprint, self.raw_count, self.pairs_recorded())
        )


class AdjacencyOracle:
    """Full handle on one sampled instance; knows the hidden clique.

    Harness and tests hold this object. Algorithms must only ever receive
    the view returned by :meth:`handle`, which answers the same queries but
    carries no clique accessor.
    """

    def __init__(self, spec: InstanceSpec, clique: np.ndarray):
        self.spec = spec
        self.n = spec.n
        self._edge_seed = np.uint64(derive_edge_seed(spec.seed))
        self._clique = clique
        self._kbits = pack_membership(spec.n, clique)

    @property
    def hidden_clique(self) -> np.ndarray:
        return self._clique.copy()

    def hidden_clique_set(self) -> VertexSet:
        return VertexSet(self._clique.tolist())

    def handle(self) -> "OracleHandle":
        return OracleHandle(self.n, self._edge_seed, self._kbits)

    # internal query surface shared with handles/views
    def _bits(self, v: int, among: np.ndarray) -> np.ndarray:
        return edge_bits(self._edge_seed, v, among, self._kbits)

    def _map(self, ids: np.ndarray) -> np.ndarray:
        return ids

    def _map_one(self, v: int) -> int:
        return v


class OracleHandle:
    """Algorithm-facing view of an oracle: queries only, no hidden state."""

    __slots__ = ("n", "_edge_seed", "_kbits")

    def __init__(self, n: int, edge_seed: np.uint64, kbits: np.ndarray):
        self.n = n
        self._edge_seed = edge_seed
        self._kbits = kbits

    def _bits(self, v: int, among: np.ndarray) -> np.ndarray:
        return edge_bits(self._edge_seed, v, among, self._kbits)

    def _map(self, ids: np.ndarray) -> np.ndarray:
        return ids

    def _map_one(self, v: int) -> int:
        return v


class InducedOracle:
    """Induced-subgraph view: dense ids [0, n) remapped onto a parent.

    The view adds no randomness of its own; every query is translated to
    root ids and answered (and charged) exactly as the parent would.
    """

    __slots__ = ("n", "parent", "_root_ids")

    def __init__(self, parent, root_ids: np.ndarray):
        root_ids = np.asarray(root_ids, dtype=np.int64)
        if root_ids.size != np.unique(root_ids).size:
            raise ParameterError("induced vertex list contains duplicates")
        if root_ids.size and (root_ids.min() < 0 or root_ids.max() >= parent.n):
            raise ParameterError("induced vertex ids out of range")
        self.parent = parent
        self.n = int(root_ids.size)
        # compose maps eagerly so stacked views stay O(1) deep
        self._root_ids = parent._map(root_ids)

    def _bits(self, v: int, among: np.ndarray) -> np.ndarray:
        root = _root_of(self)
        return root._bits(int(self._root_ids[v]), self._root_ids[among])

    def _map(self, ids: np.ndarray) -> np.ndarray:
        return self._root_ids[ids]

    def _map_one(self, v: int) -> int:
        return int(self._root_ids[v])

    def to_root_ids(self, ids) -> np.ndarray:
        """Translate dense view ids back to the underlying vertex ids."""
        return self._root_ids[np.asarray(ids, dtype=np.int64)]


def _root_of(graph):
    while isinstance(graph, InducedOracle):
        graph = graph.parent
    return graph


GraphLike = Union[AdjacencyOracle, OracleHandle, InducedOracle]


def build_oracle(spec: InstanceSpec) -> AdjacencyOracle:
    """Sample an instance of the requested distribution.

    Only the clique membership is drawn here (O(n) once for the iid kind);
    edge bits stay implicit in the mixer.
    """
    if spec.kind == ER:
        clique = _EMPTY_CLIQUE
    elif spec.kind == PLANTED:
        rng = np.random.default_rng(derive_clique_seed(spec.seed))
        clique = np.sort(rng.permutation(spec.n)[: spec.k]).astype(np.int64)
    else:  # IID
        rng = np.random.default_rng(derive_clique_seed(spec.seed))
        mask = rng.random(spec.n) < spec.p_clique
        clique = np.flatnonzero(mask).astype(np.int64)
    return AdjacencyOracle(spec, clique)


def _check_vertex(graph, v: int) -> None:
    if not 0 <= v < graph.n:
        raise ParameterError(f"vertex id {v} out of range [0, {graph.n})")


def query(graph: GraphLike, ledger: QueryLedger, u: int, v: int) -> int:
    """One adjacency probe; charges the ledger for exactly one query."""
    _check_vertex(graph, u)
    _check_vertex(graph, v)
    ledger.charge(1)
    if u == v:
        if ledger.recording:
            ledger.record(pack_pairs(graph._map_one(v), np.asarray([graph._map_one(u)], dtype=np.int64)))
        return 0
    arr = np.asarray([u], dtype=np.int64)
    if ledger.recording:
        ledger.record(pack_pairs(graph._map_one(v), graph._map(arr)))
    return int(graph._bits(v, arr)[0])


def query_row(graph: GraphLike, ledger: QueryLedger, v: int, among) -> np.ndarray:
    """Adjacency bits between ``v`` and every vertex of ``among``.

    Charges one query per element of ``among`` (a position equal to ``v``
    reads the zero diagonal and is still charged).
    """
    _check_vertex(graph, v)
    among = _as_id_array(among)
    if among.size == 0:
        return np.empty(0, dtype=np.uint8)
    if among.min() < 0 or among.max() >= graph.n:
        raise ParameterError("vertex id in `among` out of range")
    ledger.charge(int(among.size))
    if ledger.recording:
        ledger.record(pack_pairs(graph._map_one(v), graph._map(among)))
    return graph._bits(v, among)


def degree(graph: GraphLike, ledger: QueryLedger, v: int, among) -> int:
    """Number of neighbors of ``v`` inside ``among``.

    Issues exactly ``|among \\ {v}|`` queries.
    """
    among = _as_id_array(among)
    among = among[among != v]
    if among.size == 0:
        _check_vertex(graph, v)
        return 0
    return int(np.count_nonzero(query_row(graph, ledger, v, among)))


def _as_id_array(among) -> np.ndarray:
    if isinstance(among, VertexSet):
        return among.to_array()
    return np.asarray(among, dtype=np.int64)


def sample_vertices(
    n: int,
    count: int,
    *,
    replace: bool,
    rng: Union[int, np.random.Generator],
) -> np.ndarray:
    """Uniform vertex sample; deterministic for a fixed seed or generator."""
    if count < 0:
        raise ParameterError("count must be non-negative")
    rng = as_rng(rng)
    if replace:
        return rng.integers(0, n, size=count, dtype=np.int64)
    if count > n:
        raise ParameterError(f"cannot draw {count} of {n} vertices without replacement")
    return rng.permutation(n)[:count].astype(np.int64)


def as_rng(rng: Union[int, Sequence[int], np.random.Generator]) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def edge_bit_reference(spec_seed: int, u: int, v: int) -> int:
    """Pure-python null-model bit, for cross-checking the jitted kernel."""
    if u == v:
        return 0
    return edge_bit_scalar(derive_edge_seed(spec_seed), u, v)
