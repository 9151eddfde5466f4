"""Undirected simple graphs, G(n, p) generation and conflict graphs.

A :class:`Graph` stores its adjacency either as bit-packed ``uint64`` rows
(dense storage, bit ``v`` of row ``u`` set iff ``uv`` is an edge) or as CSR
neighbor lists.  Both are immutable once built.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

from ._rng import GOLDEN, _edge_word, _mix, derive_seed, stream_key, threshold

DENSE_MAX_N = 4096


def _words(n: int) -> int:
    return (n + 63) // 64


def _use_dense(n: int, expected_edges: float) -> bool:
    # CSR costs 16 bytes per edge (two int64 entries); bit rows cost n^2/8.
    return n <= DENSE_MAX_N or 16.0 * expected_edges >= n * n / 8.0


@numba.njit(cache=True)
def _bernoulli_bits(key, n, thr, always):
    w = (n + 63) // 64
    bits = np.zeros((n, w), dtype=np.uint64)
    one = np.uint64(1)
    for u in range(n):
        for v in range(u + 1, n):
            if always or _edge_word(key, u, v) < thr:
                bits[u, v >> 6] |= one << np.uint64(v & 63)
                bits[v, u >> 6] |= one << np.uint64(u & 63)
    return bits


@numba.njit(cache=True)
def _bernoulli_pairs(key, n, thr, capacity):
    us = np.empty(capacity, dtype=np.int64)
    vs = np.empty(capacity, dtype=np.int64)
    k = 0
    for u in range(n):
        for v in range(u + 1, n):
            if _edge_word(key, u, v) < thr:
                if k == capacity:
                    return us, vs, -1
                us[k] = u
                vs[k] = v
                k += 1
    return us[:k], vs[:k], k


@numba.njit(cache=True)
def _resample_row(key, j, n, thr, always):
    row = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        if v == j:
            continue
        a = min(j, v)
        b = max(j, v)
        row[v] = always or _edge_word(key, a, b) < thr
    return row


def _pack_rows(mask: np.ndarray) -> np.ndarray:
    """Pack a boolean (k, n) matrix into (k, words) uint64 rows."""
    k, n = mask.shape
    w = _words(n)
    padded = np.zeros((k, w * 64), dtype=bool)
    padded[:, :n] = mask
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).reshape(k, w)


def _unpack_row(row: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(row.view(np.uint8), bitorder="little", count=n).astype(bool)


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    ``p`` is the edge probability the graph was generated with, when known;
    constructors use it to evaluate ``u_n``.
    """

    __slots__ = ("n", "p", "_bits", "_indptr", "_indices", "_degrees", "_edge_count", "_edges", "_adj")

    def __init__(self, n: int, *, bits=None, indptr=None, indices=None, p: float | None = None):
        if n < 1:
            raise ValueError("a graph needs at least one vertex")
        if (bits is None) == (indptr is None):
            raise ValueError("give exactly one of bits or (indptr, indices)")
        self.n = int(n)
        self.p = p
        self._bits = bits
        self._indptr = indptr
        self._indices = indices
        self._degrees = None
        self._edge_count = None
        self._adj = None
        self._edges = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges, *, p: float | None = None, dense: bool | None = None) -> "Graph":
        """Build from an iterable or (m, 2) array of pairs.

        Duplicate pairs are merged; self-loops and out-of-range ids raise.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        codes = np.unique(lo * n + hi)
        lo, hi = codes // n, codes % n
        if dense is None:
            dense = _use_dense(n, len(codes))
        if dense:
            bits = np.zeros((n, _words(n)), dtype=np.uint64)
            _set_bits(bits, lo, hi)
            _set_bits(bits, hi, lo)
            return cls(n, bits=bits, p=p)
        return cls._from_sorted_pairs(n, lo, hi, p=p)

    @classmethod
    def _from_sorted_pairs(cls, n: int, lo: np.ndarray, hi: np.ndarray, *, p=None) -> "Graph":
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr=indptr, indices=dst.astype(np.int64), p=p)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls.from_edges(n, np.zeros((0, 2), dtype=np.int64))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        iu = np.triu_indices(n, 1)
        return cls.from_edges(n, np.column_stack(iu), p=1.0)

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    # -- queries ------------------------------------------------------------

    @property
    def is_dense(self) -> bool:
        return self._bits is not None

    @property
    def bits(self) -> np.ndarray:
        """Bit-packed rows; converts CSR storage on demand."""
        if self._bits is None:
            bits = np.zeros((self.n, _words(self.n)), dtype=np.uint64)
            e = self.edges()
            _set_bits(bits, e[:, 0], e[:, 1])
            _set_bits(bits, e[:, 1], e[:, 0])
            return bits
        return self._bits

    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            if self._bits is not None:
                self._degrees = np.bitwise_count(self._bits).sum(axis=1).astype(np.int64)
            else:
                self._degrees = np.diff(self._indptr)
        return self._degrees

    @property
    def edge_count(self) -> int:
        if self._edge_count is None:
            self._edge_count = int(self.degrees().sum()) // 2
        return self._edge_count

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v``."""
        if self._bits is not None:
            return np.flatnonzero(_unpack_row(self._bits[v], self.n))
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric CSR ``(indptr, indices)`` with sorted rows, for either storage."""
        if self._bits is None:
            return self._indptr, self._indices
        if self._adj is not None:
            return self._adj
        n = self.n
        parts = []
        block = max(1, (1 << 24) // max(n, 1))
        for start in range(0, n, block):
            rows = self._bits[start:start + block]
            mask = np.unpackbits(rows.view(np.uint8), axis=1, bitorder="little", count=n)
            parts.append(np.nonzero(mask)[1].astype(np.int64))
        indices = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.degrees(), out=indptr[1:])
        if len(indices) <= (1 << 24):
            self._adj = (indptr, indices)
        return indptr, indices

    def has_edge(self, u: int, v: int) -> bool:
        if self._bits is not None:
            return bool((int(self._bits[u, v >> 6]) >> (v & 63)) & 1)
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> np.ndarray:
        """All edges as an (m, 2) int64 array, rows ``(u, v)`` with u < v, sorted."""
        if self._edges is None:
            if self._bits is not None:
                out = []
                for u in range(self.n):
                    nb = self.neighbors(u)
                    nb = nb[nb > u]
                    if len(nb):
                        out.append(np.column_stack([np.full(len(nb), u, dtype=np.int64), nb]))
                e = np.concatenate(out) if out else np.zeros((0, 2), dtype=np.int64)
            else:
                src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self._indptr))
                keep = src < self._indices
                e = np.column_stack([src[keep], self._indices[keep]])
            self._edges = e.astype(np.int64)
        return self._edges

    def closed_cover(self, vertices) -> np.ndarray:
        """Boolean mask of vertices in the union of closed neighborhoods."""
        vs = np.asarray(sorted(vertices) if not isinstance(vertices, np.ndarray) else vertices, dtype=np.int64)
        mask = np.zeros(self.n, dtype=bool)
        if vs.size == 0:
            return mask
        if self._bits is not None:
            mask = _unpack_row(np.bitwise_or.reduce(self._bits[vs], axis=0), self.n)
        else:
            starts, stops = self._indptr[vs], self._indptr[vs + 1]
            lens = stops - starts
            if lens.sum():
                idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
                mask[self._indices[idx]] = True
        mask[vs] = True
        return mask

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Subgraph induced on ``vertices``, relabelled ``0..k-1`` in the given order."""
        vs = np.asarray(vertices, dtype=np.int64)
        pos = {int(v): i for i, v in enumerate(vs)}
        pairs = []
        for v in vs:
            for w in self.neighbors(int(v)):
                j = pos.get(int(w))
                if j is not None and pos[int(v)] < j:
                    pairs.append((pos[int(v)], j))
        return Graph.from_edges(len(vs), pairs, dense=True)

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        """Edge-list text: ``"n m"`` header, then one sorted ``"u v"`` pair per line."""
        e = self.edges()
        lines = [f"{self.n} {len(e)}"]
        lines.extend(f"{u} {v}" for u, v in e.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise ValueError("edge list must start with an 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
        if len(pairs) != m:
            raise ValueError(f"header announces {m} edges, found {len(pairs)}")
        g = cls.from_edges(n, pairs)
        if g.edge_count != m:
            raise ValueError("edge list contains duplicate pairs")
        return g

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges(), other.edges())

    def __hash__(self):
        return hash(self.digest())

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "csr"
        return f"Graph(n={self.n}, m={self.edge_count}, {kind})"


def _set_bits(bits: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> None:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    np.bitwise_or.at(bits, (rows, cols >> 6), np.left_shift(np.uint64(1), (cols & 63).astype(np.uint64)))


@dataclass(frozen=True)
class GraphSpec:
    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class VertexSet:
    """A set of vertex ids of an ``n``-vertex graph."""

    members: frozenset
    n: int

    def __post_init__(self):
        bad = [v for v in self.members if not 0 <= v < self.n]
        if bad:
            raise ValueError(f"vertex ids out of range [0, {self.n}): {sorted(bad)[:5]}")

    @classmethod
    def of(cls, vertices: Iterable[int], n: int) -> "VertexSet":
        return cls(frozenset(int(v) for v in vertices), n)

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))

    def __contains__(self, v) -> bool:
        return v in self.members

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[list(self.members)] = True
        return m


@dataclass(frozen=True)
class ConflictGraph:
    """The deterministic graph H removed from G, with its edge count and max degree."""

    graph: Graph
    kind: str = "edge_list"
    m: int = field(init=False)
    delta: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "m", self.graph.edge_count)
        deg = self.graph.degrees()
        object.__setattr__(self, "delta", int(deg.max()) if len(deg) else 0)

    @property
    def n(self) -> int:
        return self.graph.n

    def degrees(self) -> np.ndarray:
        return self.graph.degrees()


def gen_bernoulli(spec: GraphSpec, *, dense: bool | None = None) -> Graph:
    """Sample G(n, p): every pair is an edge independently with probability p.

    The edge state of ``(u, v)`` depends only on ``(seed, u, v)``.
    """
    n, p = spec.n, spec.p
    key = np.uint64(stream_key(spec.seed))
    thr = np.uint64(threshold(p))
    expected = p * n * (n - 1) / 2
    if dense is None:
        dense = _use_dense(n, expected)
    if p == 0.0:
        return Graph.from_edges(n, np.zeros((0, 2), dtype=np.int64), p=p, dense=dense)
    if dense:
        return Graph(n, bits=_bernoulli_bits(key, n, thr, p == 1.0), p=p)
    capacity = int(expected + 10 * np.sqrt(expected) + 64)
    while True:
        us, vs, k = _bernoulli_pairs(key, n, thr, capacity)
        if k >= 0:
            break
        capacity *= 2
    return Graph._from_sorted_pairs(n, us, vs, p=p)


def graph_minus(g: Graph, h: ConflictGraph | Graph) -> Graph:
    """G \\ H: the edges of ``g`` that are not edges of ``h``."""
    hg = h.graph if isinstance(h, ConflictGraph) else h
    if hg.n != g.n:
        raise ValueError(f"vertex counts differ: {g.n} vs {hg.n}")
    if hg.edge_count == 0:
        return g
    if g.is_dense:
        return Graph(g.n, bits=g.bits & ~hg.bits, p=g.p)
    n = g.n
    ge, he = g.edges(), hg.edges()
    keep = ~np.isin(ge[:, 0] * n + ge[:, 1], he[:, 0] * n + he[:, 1])
    return Graph._from_sorted_pairs(n, ge[keep, 0], ge[keep, 1], p=g.p)


def is_dominating(g_eff: Graph, s, *, ignore_isolated: bool = False) -> bool:
    """True iff every vertex outside ``s`` has a neighbor in ``s``.

    Isolated vertices must belong to ``s`` unless ``ignore_isolated`` is set,
    in which case domination is checked on the non-isolated vertices only.
    """
    members = s.sorted() if isinstance(s, VertexSet) else sorted(int(v) for v in s)
    if members and (members[0] < 0 or members[-1] >= g_eff.n):
        raise ValueError(f"vertex id out of range [0, {g_eff.n})")
    covered = g_eff.closed_cover(np.asarray(members, dtype=np.int64))
    if ignore_isolated:
        covered |= g_eff.degrees() == 0
    return bool(covered.all())


@dataclass(frozen=True)
class GraphStats:
    max_degree: int
    edge_count: int
    isolated_edge_count: int
    isolated_vertex_count: int


def stats(g: Graph) -> GraphStats:
    deg = g.degrees()
    leaves = np.flatnonzero(deg == 1)
    iso_edges = 0
    for v in leaves:
        w = g.neighbors(int(v))[0]
        if deg[w] == 1 and v < w:
            iso_edges += 1
    return GraphStats(
        max_degree=int(deg.max()) if len(deg) else 0,
        edge_count=g.edge_count,
        isolated_edge_count=iso_edges,
        isolated_vertex_count=int(np.count_nonzero(deg == 0)),
    )


def resample_vertex_edges(g: Graph, j: int, p: float, seed: int) -> Graph:
    """G^(j): redraw every pair ``(j, v)`` independently, keep all other edges.

    The redraw uses a stream keyed by ``seed`` and is independent of the one
    that produced ``g`` as long as the seeds differ.
    """
    n = g.n
    if not 0 <= j < n:
        raise ValueError(f"vertex {j} out of range [0, {n})")
    key = np.uint64(stream_key(derive_seed(seed, "resample")))
    row = _resample_row(key, j, n, np.uint64(threshold(p)), p == 1.0)
    if g.is_dense:
        bits = g.bits.copy()
        word, bit = j >> 6, np.uint64(1) << np.uint64(j & 63)
        bits[:, word] &= ~bit
        bits[:, word] |= np.where(row, bit, np.uint64(0))
        bits[j] = _pack_rows(row[None, :])[0]
        return Graph(n, bits=bits, p=g.p)
    e = g.edges()
    e = e[(e[:, 0] != j) & (e[:, 1] != j)]
    nb = np.flatnonzero(row)
    new = np.column_stack([np.minimum(nb, j), np.maximum(nb, j)])
    return Graph.from_edges(n, np.concatenate([e, new]), p=g.p, dense=False)


# -- conflict graphs -----------------------------------------------------------

CONFLICT_KINDS = ("empty", "star", "matching", "random_regular", "edge_list")


def build_conflict(kind: str, n: int, *, delta: int | None = None, m: int | None = None,
                   d: int | None = None, seed: int = 0, pairs=None) -> ConflictGraph:
    """Deterministic conflict graph H on ``n`` vertices.

    kinds: ``empty``; ``star`` (center 0, leaves ``1..delta``); ``matching``
    (pairs ``(2i, 2i+1)``, ``i < m``); ``random_regular`` (exactly ``d``-regular,
    a circulant relabelled by a seeded permutation); ``edge_list``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind == "empty":
        edges = np.zeros((0, 2), dtype=np.int64)
    elif kind == "star":
        if delta is None or not 0 <= delta <= n - 1:
            raise ValueError(f"star needs 0 <= delta <= n-1 = {n - 1}, got {delta}")
        edges = np.column_stack([np.zeros(delta, dtype=np.int64), np.arange(1, delta + 1)])
    elif kind == "matching":
        if m is None or not 0 <= m <= n // 2:
            raise ValueError(f"matching needs 0 <= m <= n//2 = {n // 2}, got {m}")
        edges = np.column_stack([np.arange(0, 2 * m, 2), np.arange(1, 2 * m, 2)])
    elif kind == "random_regular":
        edges = _relabelled_circulant(n, d, seed)
    elif kind == "edge_list":
        edges = np.asarray(pairs if pairs is not None else [], dtype=np.int64).reshape(-1, 2)
    else:
        raise ValueError(f"unknown conflict kind {kind!r}; expected one of {CONFLICT_KINDS}")
    return ConflictGraph(Graph.from_edges(n, edges), kind=kind)


def _relabelled_circulant(n: int, d: int | None, seed: int) -> np.ndarray:
    if d is None or not 0 <= d <= n - 1:
        raise ValueError(f"random_regular needs 0 <= d <= n-1 = {n - 1}, got {d}")
    if (n * d) % 2:
        raise ValueError(f"no {d}-regular graph on {n} vertices (n*d must be even)")
    offsets = list(range(1, d // 2 + 1))
    i = np.arange(n, dtype=np.int64)
    pairs = [np.column_stack([i, (i + k) % n]) for k in offsets]
    if d % 2:
        half = np.arange(n // 2, dtype=np.int64)
        pairs.append(np.column_stack([half, half + n // 2]))
    e = np.concatenate(pairs) if pairs else np.zeros((0, 2), dtype=np.int64)
    perm = np.random.default_rng(seed).permutation(n)
    return perm[e]


def parse_conflict(text: str, n: int) -> ConflictGraph:
    """Parse a CLI conflict spec.

    ``empty`` | ``star:D`` | ``matching:M`` | ``regular:D[:SEED]`` |
    ``edges:PATH`` (edge-list file).
    """
    kind, _, rest = text.partition(":")
    args = rest.split(":") if rest else []
    if kind == "empty":
        return build_conflict("empty", n)
    if kind == "star":
        return build_conflict("star", n, delta=int(args[0]))
    if kind == "matching":
        return build_conflict("matching", n, m=int(args[0]))
    if kind in ("regular", "random_regular"):
        return build_conflict("random_regular", n, d=int(args[0]), seed=int(args[1]) if len(args) > 1 else 0)
    if kind in ("edges", "edge_list"):
        with open(rest) as fh:
            hg = Graph.from_text(fh.read())
        if hg.n != n:
            raise ValueError(f"conflict graph has {hg.n} vertices, expected {n}")
        return build_conflict("edge_list", n, pairs=hg.edges())
    raise ValueError(f"cannot parse conflict spec {text!r}")
