"""Randomized constructions of dominating sets of G \\ H.

Every constructor returns a set that dominates G \\ H: whatever the random
core leaves undominated is added back as a repair step.  Sizes derived from
real-valued formulas are rounded up.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import regime
from .exact import exact_domination
from .graph import ConflictGraph, Graph, VertexSet, graph_minus

DEFAULT_EPSILON = 0.1
DEFAULT_R0 = 0.1
EXACT_COMPONENT_MAX = 20

METHODS = ("alteration", "sampling", "iterative", "distinct", "sparse", "greedy", "auto")


class PreconditionError(ValueError):
    """A constructor's hypothesis does not hold for the given instance."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis violated: {hypothesis}" + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class ConstructorParams:
    epsilon: float = DEFAULT_EPSILON
    r0: float | None = None
    zeta: float | None = None
    q1: float | None = None
    theta1: float | None = None
    theta2: float | None = None
    t: int | None = None
    seed: int = 0


@dataclass(frozen=True)
class ConstructionResult:
    dominating_set: VertexSet
    core_size: int
    repair_size: int
    preprocessed_size: int
    method: str
    u_n: float = math.nan
    params: ConstructorParams | None = None
    # #B_j after each sample (iterative constructor only)
    coverage: tuple = field(default=(), repr=False)
    ignore_isolated: bool = False

    @property
    def size(self) -> int:
        return self.dominating_set.size


def _edge_probability(g: Graph, p: float | None, h: ConflictGraph | None = None) -> float:
    if h is not None and h.n != g.n:
        raise ValueError(f"conflict graph has {h.n} vertices, graph has {g.n}")
    if p is None:
        p = g.p
    if p is None:
        raise PreconditionError("edge probability p known", "graph carries no p; pass p explicitly")
    return float(p)


def _dense_regime_un(n: int, p: float) -> float:
    if not 0.0 < p < 1.0 or n * p <= 1.0:
        raise PreconditionError("np > 1 and 0 < p < 1", f"n = {n}, p = {p:.6g}")
    return regime.u_n(n, p)


def preprocess_high_degree(h: ConflictGraph, epsilon: float) -> tuple[VertexSet, VertexSet]:
    """Split V by H-degree: ``q`` has degree <= epsilon n, ``q_c`` is the rest.

    ``q_c`` is forced into the dominating set and sampling is restricted to ``q``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    deg = h.degrees()
    low = deg <= epsilon * h.n
    return VertexSet.of(np.flatnonzero(low), h.n), VertexSet.of(np.flatnonzero(~low), h.n)


def _pool(h: ConflictGraph, epsilon: float, preprocess: bool):
    """Sampling pool, forced vertices and the max H-degree inside the pool."""
    if not preprocess:
        return np.arange(h.n), np.zeros(0, dtype=np.int64), h.delta
    q, q_c = preprocess_high_degree(h, epsilon)
    pool = np.asarray(q.sorted(), dtype=np.int64)
    if len(pool) == 0:
        raise PreconditionError("nonempty low-degree set Q")
    delta_q = int(h.degrees()[pool].max())
    return pool, np.asarray(q_c.sorted(), dtype=np.int64), delta_q


def _complete(g_eff: Graph, core: np.ndarray, forced: np.ndarray, method: str, **kw) -> ConstructionResult:
    """Add every vertex left undominated by ``core`` and ``forced``."""
    base = np.union1d(core, forced)
    leftover = np.flatnonzero(~g_eff.closed_cover(base))
    members = np.union1d(base, leftover)
    return ConstructionResult(
        dominating_set=VertexSet.of(members.tolist(), g_eff.n),
        core_size=len(np.setdiff1d(core, forced)),
        repair_size=len(leftover),
        preprocessed_size=len(forced),
        method=method,
        **kw,
    )


def construct_alteration(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
                         *, p: float | None = None) -> ConstructionResult:
    """Fixed set D of floor((1+eps) u_n) + Delta vertices plus the vertices it misses.

    Rounding down keeps |D| within the real-valued bound (1+eps) u_n + Delta.

    D takes the vertices of largest H-degree first (ties by index), so the
    construction does not depend on ``seed``.
    """
    n = g.n
    p = _edge_probability(g, p, h)
    un = _dense_regime_un(n, p)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    size = math.floor((1 + epsilon) * un) + h.delta
    if size > n:
        raise PreconditionError("floor((1+eps) u_n) + Delta <= n",
                                f"needs {size} > n = {n}; try the sparse or greedy constructor")
    order = np.lexsort((np.arange(n), -h.degrees()))
    core = np.sort(order[:size])
    return _complete(graph_minus(g, h), core, np.zeros(0, dtype=np.int64), "alteration", u_n=un,
                     params=ConstructorParams(epsilon=epsilon, t=size, seed=seed))


def sampling_params(un: float, epsilon: float, r0: float) -> tuple[float, int]:
    """(zeta, t) with 1 - zeta = (1 - 2 eps)(1 - r0)/(1 + eps) and t = ceil(u_n / (1 - zeta))."""
    one_minus_zeta = (1 - 2 * epsilon) * (1 - r0) / (1 + epsilon)
    if one_minus_zeta <= 0:
        raise PreconditionError("eps < 1/2 and r0 < 1", f"1 - zeta = {one_minus_zeta:.6g}")
    return 1 - one_minus_zeta, math.ceil(un / one_minus_zeta)


def construct_sampling(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, r0: float = DEFAULT_R0,
                       seed: int = 0, *, p: float | None = None, preprocess: bool = False) -> ConstructionResult:
    """t iid uniform vertices (repeats dropped), then repair."""
    n = g.n
    p = _edge_probability(g, p, h)
    un = _dense_regime_un(n, p)
    if not 0.0 < r0 < 1.0:
        raise ValueError(f"r0 must lie in (0, 1), got {r0}")
    pool, forced, delta = _pool(h, epsilon, preprocess)
    if delta + 1 > r0 * n:
        raise PreconditionError("Delta <= r0 n - 1", f"Delta = {delta}, r0 n = {r0 * n:.6g}")
    zeta, t = sampling_params(un, epsilon, r0)
    if t >= n:
        raise PreconditionError("t < n", f"t = {t}, n = {n}")
    rng = np.random.default_rng(seed)
    core = np.unique(pool[rng.integers(0, len(pool), size=t)])
    return _complete(graph_minus(g, h), core, forced, "sampling", u_n=un,
                     params=ConstructorParams(epsilon=epsilon, r0=r0, zeta=zeta, t=t, seed=seed))


def iterative_params(n: int, p: float, delta: int, epsilon: float) -> tuple[float, int]:
    """(theta1, t) with theta1 = p(1-eps) - (Delta-1)/n and t = ceil((1+eps) log(np)/|log(1-theta1)|) + 1."""
    theta1 = p * (1 - epsilon) - (delta - 1) / n
    if theta1 <= 0:
        raise PreconditionError("theta1 = p(1-eps) - (Delta-1)/n > 0", f"theta1 = {theta1:.6g}")
    if theta1 >= 1 or n * p <= 1:
        return theta1, 1
    return theta1, math.ceil((1 + epsilon) * math.log(n * p) / regime.abs_log1m(theta1)) + 1


def construct_iterative(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
                        *, p: float | None = None, preprocess: bool = False,
                        stop_when_covered: bool = False) -> ConstructionResult:
    """Sample t vertices, growing the union B_j of their closed neighborhoods
    in G \\ H; add whatever B_t misses.

    With ``stop_when_covered`` sampling ends as soon as B_j = V.
    """
    n = g.n
    p = _edge_probability(g, p, h)
    pool, forced, delta = _pool(h, epsilon, preprocess)
    theta1, t = iterative_params(n, p, delta, epsilon)
    g_eff = graph_minus(g, h)
    rng = np.random.default_rng(seed)
    draws = pool[rng.integers(0, len(pool), size=t)]
    covered = g_eff.closed_cover(forced)
    trace = []
    used = []
    for x in draws.tolist():
        used.append(x)
        covered |= g_eff.closed_cover(np.array([x]))
        trace.append(int(covered.sum()))
        if stop_when_covered and trace[-1] == n:
            break
    un = regime.u_n(n, p) if 0 < p < 1 and n * p > 0 else math.nan
    return _complete(g_eff, np.unique(np.asarray(used, dtype=np.int64)), forced, "iterative", u_n=un,
                     params=ConstructorParams(epsilon=epsilon, theta1=theta1, theta2=1 - theta1, t=t, seed=seed),
                     coverage=tuple(trace))


def distinct_params(n: int, p: float, delta: int, epsilon: float) -> tuple[float, int]:
    """(q1, t) with q1 = max(1-p, Delta/n) and t = ceil((1+eps/2) log(np)/|log(2 q1)|)."""
    q1 = max(1 - p, delta / n)
    cap = 2.0 ** (-2.0 / epsilon - 2.0)
    if q1 > cap:
        raise PreconditionError("q1 = max(1-p, Delta/n) <= 2^(-2/eps-2)", f"q1 = {q1:.6g} > {cap:.6g}")
    if q1 == 0 or n * p <= 1:
        return q1, 1
    t = max(1, math.ceil((1 + epsilon / 2) * math.log(n * p) / abs(math.log(2 * q1))))
    if t > 2 * math.log(n):
        raise PreconditionError("t <= 2 log n", f"t = {t}, 2 log n = {2 * math.log(n):.6g}")
    return q1, t


def distinct_min_epsilon(q1: float) -> float:
    """Smallest eps with q1 <= 2^(-2/eps-2); inf when q1 >= 1/4."""
    if q1 <= 0:
        return 0.0
    room = -math.log2(q1) - 2.0
    return 2.0 / room if room > 0 else math.inf


def construct_distinct_tuple(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
                             *, p: float | None = None, preprocess: bool = False) -> ConstructionResult:
    """t distinct uniform vertices; undominated leftovers are added as repair."""
    n = g.n
    p = _edge_probability(g, p, h)
    pool, forced, delta = _pool(h, epsilon, preprocess)
    q1, t = distinct_params(n, p, delta, epsilon)
    if t > len(pool):
        raise PreconditionError("t <= |V|", f"t = {t}, pool = {len(pool)}")
    rng = np.random.default_rng(seed)
    core = np.sort(rng.choice(pool, size=t, replace=False))
    un = regime.u_n(n, p) if 0 < p < 1 and n * p > 0 else math.nan
    return _complete(graph_minus(g, h), core, forced, "distinct", u_n=un,
                     params=ConstructorParams(epsilon=epsilon, q1=q1, t=t, seed=seed))


@njit(cache=True)
def _greedy_csr(n, indptr, indices):
    covered = np.zeros(n, dtype=np.bool_)
    heap = [(-(indptr[v + 1] - indptr[v] + 1), v) for v in range(n)]
    heapq.heapify(heap)
    chosen = np.empty(n, dtype=np.int64)
    k = 0
    remaining = n
    while remaining > 0:
        neg, v = heapq.heappop(heap)
        gain = 0 if covered[v] else 1
        for i in range(indptr[v], indptr[v + 1]):
            if not covered[indices[i]]:
                gain += 1
        if gain == 0:
            continue
        if len(heap) > 0 and (-gain, v) > heap[0]:
            heapq.heappush(heap, (-gain, v))
            continue
        chosen[k] = v
        k += 1
        remaining -= gain
        covered[v] = True
        for i in range(indptr[v], indptr[v + 1]):
            covered[indices[i]] = True
    return chosen[:k]


def greedy_baseline(g_eff: Graph) -> VertexSet:
    """Repeatedly take the vertex whose closed neighborhood covers the most
    undominated vertices (smallest index on ties).  Lazy max-heap of gains."""
    indptr, indices = g_eff.adjacency()
    return VertexSet.of(_greedy_csr(g_eff.n, indptr, indices).tolist(), g_eff.n)


def construct_greedy(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
                     **_) -> ConstructionResult:
    s = greedy_baseline(graph_minus(g, h))
    p = g.p
    un = regime.u_n(g.n, p) if p is not None and 0 < p < 1 and g.n * p > 0 else math.nan
    return ConstructionResult(s, core_size=s.size, repair_size=0, preprocessed_size=0, method="greedy", u_n=un,
                              params=ConstructorParams(epsilon=epsilon, seed=seed))


def _components(g_eff: Graph) -> tuple[int, np.ndarray]:
    indptr, indices = g_eff.adjacency()
    adj = csr_matrix((np.ones(len(indices), dtype=np.int8), indices, indptr), shape=(g_eff.n, g_eff.n))
    return connected_components(adj, directed=False)


def construct_sparse(g: Graph, h: ConflictGraph, ignore_isolated: bool = False, **_) -> ConstructionResult:
    """Optimal per component up to 20 vertices, greedy beyond.

    Isolated vertices are included under the literal definition and left out
    when ``ignore_isolated`` is set.
    """
    g_eff = graph_minus(g, h)
    n = g_eff.n
    _, labels = _components(g_eff)
    sizes = np.bincount(labels)
    comp_size = sizes[labels]
    chosen = []
    isolated = np.flatnonzero(comp_size == 1)
    pairs = np.flatnonzero(comp_size == 2)
    # lower endpoint of each two-vertex component
    if len(pairs):
        lab = labels[pairs]
        first = np.ones(len(pairs), dtype=bool)
        order = np.lexsort((pairs, lab))
        first[1:] = lab[order][1:] != lab[order][:-1]
        chosen.extend(pairs[order][first].tolist())
    big = np.flatnonzero(sizes >= 3)
    if len(big):
        members = np.flatnonzero(np.isin(labels, big))
        members = members[np.lexsort((members, labels[members]))]
        splits = np.flatnonzero(np.diff(labels[members])) + 1
        for comp in np.split(members, splits):
            sub = g_eff if len(comp) == n else g_eff.induced(comp)
            local = exact_domination(sub).witness if len(comp) <= EXACT_COMPONENT_MAX else greedy_baseline(sub)
            chosen.extend(comp[local.sorted()].tolist())
    core_size = len(chosen)
    repair = 0
    if not ignore_isolated:
        chosen.extend(isolated.tolist())
        repair = len(isolated)
    p = g.p
    un = regime.u_n(n, p) if p is not None and 0 < p < 1 and n * p > 0 else math.nan
    return ConstructionResult(VertexSet.of(chosen, n), core_size=core_size, repair_size=repair,
                              preprocessed_size=0, method="sparse", u_n=un, ignore_isolated=ignore_isolated)


def _operative_preprocessing(n: int, p: float, h: ConflictGraph, epsilon: float, un: float) -> bool:
    """True when the max-degree condition fails but the edge-count one holds.

    Finite-n reading: Delta <= eps n (1-p) and m <= eps n u_n (1-p).
    """
    slack = epsilon * n * (1 - p)
    if h.delta <= slack:
        return False
    return math.isfinite(un) and h.m <= slack * un


def construct_auto(g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
                   *, p: float | None = None, ignore_isolated: bool = False) -> ConstructionResult:
    """Pick a constructor from the regime of (n, p); fall back to greedy on
    any violated hypothesis.  ``method`` records the route taken.

    On the p -> 1 route epsilon is raised to the smallest value for which
    q1 <= 2^(-2/eps-2) holds.
    """
    n = g.n
    p = _edge_probability(g, p, h)
    rp = regime.classify_regime(n, p)
    preprocess = _operative_preprocessing(n, p, h, epsilon, rp.u_n)
    try:
        if rp.regime == "sparse_zero" or (rp.regime == "sparse_lambda" and rp.lambda_a <= 1.0):
            res = construct_sparse(g, h, ignore_isolated=ignore_isolated)
        elif rp.regime == "sparse_lambda":
            res = construct_alteration(g, h, epsilon, seed, p=p)
        elif rp.regime == "dense_p0_zero":
            res = construct_sampling(g, h, epsilon, DEFAULT_R0, seed, p=p, preprocess=preprocess)
        elif rp.regime == "dense_p0_mid":
            res = construct_iterative(g, h, epsilon, seed, p=p, preprocess=preprocess)
        else:
            delta = _pool(h, epsilon, preprocess)[2]
            eps_route = max(epsilon, distinct_min_epsilon(max(1 - p, delta / n)))
            if not math.isfinite(eps_route):
                raise PreconditionError("q1 = max(1-p, Delta/n) < 1/4")
            res = construct_distinct_tuple(g, h, eps_route, seed, p=p, preprocess=preprocess)
    except PreconditionError as exc:
        res = construct_greedy(g, h, epsilon, seed)
        return _retag(res, f"auto/greedy[{exc.hypothesis}]", rp.u_n)
    return _retag(res, f"auto/{res.method}", rp.u_n)


def _retag(res: ConstructionResult, method: str, un: float) -> ConstructionResult:
    return replace(res, method=method, u_n=res.u_n if math.isfinite(res.u_n) else un)


CONSTRUCTORS = {
    "alteration": construct_alteration,
    "sampling": construct_sampling,
    "iterative": construct_iterative,
    "distinct": construct_distinct_tuple,
    "greedy": construct_greedy,
}


def construct(method: str, g: Graph, h: ConflictGraph, epsilon: float = DEFAULT_EPSILON, seed: int = 0,
              *, p: float | None = None, ignore_isolated: bool = False) -> ConstructionResult:
    """Dispatch by method name (see ``METHODS``)."""
    if method == "auto":
        return construct_auto(g, h, epsilon, seed, p=p, ignore_isolated=ignore_isolated)
    if method == "sparse":
        return construct_sparse(g, h, ignore_isolated=ignore_isolated)
    if method == "sampling":
        return construct_sampling(g, h, epsilon, DEFAULT_R0, seed, p=p)
    if method not in CONSTRUCTORS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return CONSTRUCTORS[method](g, h, epsilon, seed, p=p)
