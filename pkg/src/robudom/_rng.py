"""Seed handling.

Edges are drawn from a counter-based stream: the state of edge (u, v), u < v,
is ``mix64(key + pair(u, v) * GOLDEN)`` where ``key = mix64(seed)`` and
``pair(u, v) = (u << 32) | v``.  This is the splitmix64 output function
evaluated at an edge-dependent counter, so any edge can be drawn on its own
and the graph does not depend on iteration order or on n.
"""
from __future__ import annotations

import hashlib
import struct

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int) -> int:
    return mix64((seed & MASK64) ^ 0x5851F42D4C957F2D)


def threshold(p: float) -> int:
    """Integer cut so that P(uniform 64-bit word < cut) = p (up to 2^-64)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return min(int(p * 2.0**64), MASK64)


def derive_seed(*parts: int | str) -> int:
    """Keyed 64-bit hash of a tuple of ints/strings.

    Used for per-trial seeds, so the value depends only on the inputs and not
    on scheduling.
    """
    h = hashlib.blake2b(digest_size=8, person=b"robudom-seed")
    for part in parts:
        if isinstance(part, str):
            raw = part.encode()
            h.update(b"s" + struct.pack("<I", len(raw)) + raw)
        else:
            h.update(b"i" + (int(part) & MASK64).to_bytes(8, "little"))
    return int.from_bytes(h.digest(), "little")


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def _edge_word(key, u, v):
    pair = (np.uint64(u) << np.uint64(32)) | np.uint64(v)
    return _mix(key + pair * np.uint64(GOLDEN))


@numba.njit(cache=True)
def edge_uniform_words(key, us, vs):
    """Raw 64-bit edge words for explicit pairs (u < v required)."""
    out = np.empty(us.shape[0], dtype=np.uint64)
    for i in range(us.shape[0]):
        out[i] = _edge_word(key, us[i], vs[i])
    return out
