"""Keyed pseudorandom edge bits.

Every adjacency answer is a pure function of (edge seed, unordered pair),
so graphs are never materialized: a re-query recomputes the same bit.
The mixer is two rounds of the splitmix64 finalizer over the packed pair
key ``(min << 32) | max``, which keeps vertex ids below 2**32.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# Independent derivation lanes for the streams an instance needs.
_EDGE_LANE = 0xA5B35705C2339D01
_CLIQUE_LANE = 0x6A09E667F3BCC909


def mix64(z: int) -> int:
    """Two splitmix64 finalizer rounds; reference for the jitted kernels."""
    z &= _MASK64
    for _ in range(2):
        z ^= z >> 30
        z = (z * _M1) & _MASK64
        z ^= z >> 27
        z = (z * _M2) & _MASK64
        z ^= z >> 31
    return z


def derive_edge_seed(seed: int) -> int:
    return mix64((seed & _MASK64) ^ _EDGE_LANE)


def derive_clique_seed(seed: int) -> int:
    return mix64((seed & _MASK64) ^ _CLIQUE_LANE)


def edge_bit_scalar(edge_seed: int, u: int, v: int) -> int:
    """Null-model bit for one unordered pair (no clique forcing, no diagonal)."""
    lo, hi = (u, v) if u < v else (v, u)
    return mix64(((lo << 32) | hi) ^ edge_seed) >> 63


def pack_membership(n: int, ids: np.ndarray) -> np.ndarray:
    """Bit-packed membership table: bit v of the table is 1 iff v in ids."""
    table = np.zeros((n + 7) // 8, dtype=np.uint8)
    if ids.size:
        np.bitwise_or.at(table, ids >> 3, np.uint8(1) << (ids & 7).astype(np.uint8))
    return table


@njit(cache=True)
def edge_bits(edge_seed, v, among, kbits):
    """Adjacency bits between ``v`` and each vertex of ``among`` (root ids).

    ``kbits`` is the packed hidden-clique membership table; pairs inside the
    clique are forced to 1. Positions where ``among[i] == v`` yield 0 (zero
    diagonal).
    """
    out = np.empty(among.shape[0], np.uint8)
    v_in_k = (kbits[v >> 3] >> np.uint8(v & 7)) & np.uint8(1)
    for i in range(among.shape[0]):
        u = among[i]
        lo = min(u, v)
        hi = max(u, v)
        key = (np.uint64(lo) << np.uint64(32)) | np.uint64(hi)
        z = key ^ edge_seed
        z ^= z >> np.uint64(30)
        z *= np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z *= np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
        z ^= z >> np.uint64(30)
        z *= np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z *= np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
        u_in_k = (kbits[u >> 3] >> np.uint8(u & 7)) & np.uint8(1)
        bit = np.uint8(z >> np.uint64(63)) | (v_in_k & u_in_k)
        # zero diagonal, branch-free
        bit &= np.uint8(u != v)
        out[i] = bit
    return out


@njit(cache=True)
def pack_pairs(v, among):
    """Unordered pair keys ``(min << 32) | max`` for recording-mode ledgers."""
    out = np.empty(among.shape[0], np.uint64)
    for i in range(among.shape[0]):
        u = among[i]
        if u < v:
            out[i] = (np.uint64(u) << np.uint64(32)) | np.uint64(v)
        else:
            out[i] = (np.uint64(v) << np.uint64(32)) | np.uint64(u)
    return out


@njit(cache=True)
def pairs_outside_rectangle(keys, in_i, in_j):
    """Indices of recorded pair keys not covered by the I/J rectangle.

    ``in_i``/``in_j`` are boolean membership tables indexed by vertex id.
    A pair is inside the rectangle iff both endpoints are in J, or one is
    in I and the other in J.
    """
    bad = np.empty(keys.shape[0], np.int64)
    m = 0
    size = np.int64(in_i.shape[0])
    for idx in range(keys.shape[0]):
        key = keys[idx]
        u = np.int64(key >> np.uint64(32))
        w = np.int64(key & np.uint64(0xFFFFFFFF))
        if u >= size or w >= size:
            bad[m] = idx
            m += 1
            continue
        ok = (in_j[u] and in_j[w]) or (in_i[u] and in_j[w]) or (in_j[u] and in_i[w])
        if not ok:
            bad[m] = idx
            m += 1
    return bad[:m]
