"""Independent oracles used by the tests.

These deliberately do not share code with the package: the recursive
edge builder follows the two-copies-plus-matchings definition literally,
and the minimum-cut search enumerates deletion sets by brute force over
bitmask adjacency.  Anything the package computes cleverly is checked
against these slow-but-obvious versions.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


@lru_cache(maxsize=None)
def recursive_edges(n: int) -> frozenset[frozenset[int]]:
    """Edge set of the n-dimensional augmented cube built literally from
    the recursive definition: two copies one dimension down, joined by
    the bit-keeping matching and the all-bits matching."""
    if n == 1:
        return frozenset({frozenset({0, 1})})
    prev = recursive_edges(n - 1)
    half = 1 << (n - 1)
    mask = half - 1
    edges = set()
    for e in prev:
        a, b = tuple(e)
        edges.add(frozenset({a, b}))
        edges.add(frozenset({a | half, b | half}))
    for x in range(half):
        edges.add(frozenset({x, x | half}))
        edges.add(frozenset({x, (x ^ mask) | half}))
    return frozenset(edges)


def recursive_adjacency_masks(n: int) -> list[int]:
    masks = [0] * (1 << n)
    for e in recursive_edges(n):
        a, b = tuple(e)
        masks[a] |= 1 << b
        masks[b] |= 1 << a
    return masks


def reachable_mask(masks: list[int], allowed: int, start: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        grow = 0
        f = frontier
        while f:
            b = f & -f
            f ^= b
            grow |= masks[b.bit_length() - 1]
        frontier = grow & allowed & ~seen
        seen |= frontier
    return seen


def brute_min_vertex_cut(masks: list[int], n: int, u: int, v: int) -> int | None:
    """Smallest vertex set separating u from v, or None when u ~ v
    (no vertex deletion can separate an adjacent pair)."""
    if masks[u] >> v & 1:
        return None
    total = 1 << n
    others = [w for w in range(total) if w not in (u, v)]
    full = (1 << total) - 1
    for size in range(len(others) + 1):
        for cut in itertools.combinations(others, size):
            allowed = full
            for w in cut:
                allowed &= ~(1 << w)
            if not reachable_mask(masks, allowed, u) >> v & 1:
                return size
    return None


def max_disjoint_paths_brute(masks: list[int], n: int, u: int, v: int) -> int:
    """Maximum internally disjoint u-v paths, via the cut side of the
    duality: direct edge contributes one, the rest equals the minimum
    cut once the direct edge is removed."""
    direct = bool(masks[u] >> v & 1)
    if direct:
        m2 = list(masks)
        m2[u] &= ~(1 << v)
        m2[v] &= ~(1 << u)
        inner = brute_min_vertex_cut(m2, n, u, v)
        return 1 + (inner if inner is not None else 0)
    cut = brute_min_vertex_cut(masks, n, u, v)
    assert cut is not None
    return cut


def triangles(masks: list[int], n: int) -> list[tuple[int, int, int]]:
    out = []
    for a, b, c in itertools.combinations(range(1 << n), 3):
        if masks[a] >> b & 1 and masks[a] >> c & 1 and masks[b] >> c & 1:
            out.append((a, b, c))
    return out
