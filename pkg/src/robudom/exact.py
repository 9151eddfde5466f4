"""Exact domination number for small graphs (n <= 32).

Branch and bound over closed neighborhoods held as Python int bitmasks.
At each node we pick the undominated vertex with the fewest admissible
dominators and branch on each of them (largest fresh coverage first, ties by
index); a dominator that has been tried is excluded from the later sibling
branches, so every dominating set is explored at most once.  A node is cut
when ``chosen + ceil(undominated / best_gain) >= incumbent``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .graph import ConflictGraph, Graph, VertexSet, graph_minus

MAX_EXACT_N = 32


@dataclass(frozen=True)
class ExactResult:
    gamma: int
    witness: VertexSet
    nodes_explored: int


def closed_masks(g: Graph) -> list[int]:
    masks = []
    for v in range(g.n):
        m = 1 << v
        for w in g.neighbors(v).tolist():
            m |= 1 << w
        masks.append(m)
    return masks


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _greedy(masks: list[int], full: int) -> list[int]:
    covered, chosen = 0, []
    while covered != full:
        best_v, best_gain = -1, 0
        for v, m in enumerate(masks):
            gain = (m & ~covered).bit_count()
            if gain > best_gain:
                best_v, best_gain = v, gain
        chosen.append(best_v)
        covered |= masks[best_v]
    return chosen


def exact_domination(g_eff: Graph) -> ExactResult:
    """Minimum dominating set of ``g_eff`` (literal definition, n <= 32).

    The witness is the first minimum set reached in the documented search
    order, starting from the greedy set as incumbent, so it is deterministic.
    """
    n = g_eff.n
    if n > MAX_EXACT_N:
        raise ValueError(f"exact domination is limited to n <= {MAX_EXACT_N}, got n = {n}")
    masks = closed_masks(g_eff)
    full = (1 << n) - 1
    best = _greedy(masks, full)
    nodes = 0

    def search(covered: int, chosen: list[int], allowed: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if covered == full:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        k = len(chosen)
        if k + 1 >= len(best):
            return
        unc = full & ~covered
        max_gain = 0
        for v in _bits(allowed):
            gain = (masks[v] & unc).bit_count()
            if gain > max_gain:
                max_gain = gain
        if max_gain == 0:
            return
        remaining = unc.bit_count()
        if k + -(-remaining // max_gain) >= len(best):
            return
        pivot_opts, pivot_count = 0, n + 1
        for u in _bits(unc):
            opts = masks[u] & allowed
            c = opts.bit_count()
            if c == 0:
                return
            if c < pivot_count:
                pivot_opts, pivot_count = opts, c
                if c == 1:
                    break
        order = sorted(_bits(pivot_opts), key=lambda w: (-(masks[w] & unc).bit_count(), w))
        for w in order:
            chosen.append(w)
            search(covered | masks[w], chosen, allowed)
            chosen.pop()
            allowed &= ~(1 << w)

    search(0, [], full)
    return ExactResult(gamma=len(best), witness=VertexSet.of(best, n), nodes_explored=nodes)


def exact_gamma_pair(g: Graph, h: ConflictGraph) -> tuple[int, int]:
    """(gamma(G), gamma(G \\ H)); the second is never smaller."""
    return exact_domination(g).gamma, exact_domination(graph_minus(g, h)).gamma
