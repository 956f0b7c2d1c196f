"""Core and rooted-core tests for oriented trees, plus a core extractor.

A tree is a core iff arc consistency of the tree against itself leaves every
list as the singleton of its own vertex; pinning the root gives the rooted
variant.  ``endomorphisms_bruteforce`` is an independent oracle for tests.
"""

from __future__ import annotations

from collections import deque
from typing import Iterator

from .consistency import arc_consistency, find_homomorphism, tree_kernel
from .digraph import (
    Digraph,
    RootedTree,
    TreeDigraph,
    as_tree,
    canonical_encoding,
    parse_canonical,
)


class BoundExceeded(ValueError):
    pass


def parent_arrays(t: Digraph, root: int = 0) -> tuple[list[int], list[bool], list[int]]:
    """BFS relabelling of a tree so that parents precede children.

    Returns ``(parent, out, order)`` where ``order[i]`` is the original id of
    new vertex ``i`` and ``out[i]`` means the edge is ``parent -> i``.
    """
    order = [root]
    newid = {root: 0}
    parent = [-1]
    out = [False]
    q = deque([root])
    while q:
        u = q.popleft()
        for w in t.neighbors[u]:
            if w not in newid:
                newid[w] = len(order)
                order.append(w)
                parent.append(newid[u])
                out.append(t.has_edge(u, w))
                q.append(w)
    return parent, out, order


def _self_ac_singletons(t: Digraph, fixed: int | None) -> bool:
    if t.n <= 64:
        root = 0 if fixed is None else fixed
        parent, out, _ = parent_arrays(t, root)
        return tree_kernel().tree_self_ac(parent, out, -1 if fixed is None else 0)
    lists = None
    if fixed is not None:
        lists = [[fixed] if v == fixed else range(t.n) for v in range(t.n)]
    res = arc_consistency(t, t, lists)
    return res is not None and all(res[v] == {v} for v in range(t.n))


def is_core_tree(t: Digraph) -> bool:
    return _self_ac_singletons(as_tree(t), None)


def is_rooted_core(rt: RootedTree) -> bool:
    return _self_ac_singletons(rt.tree, rt.root)


def iter_endomorphisms(t: Digraph, bound: int = 9) -> Iterator[tuple[int, ...]]:
    """Edge-preserving self-maps, lazily, by backtracking over a BFS order."""
    if t.n > bound:
        raise BoundExceeded(f"{t.n} vertices exceeds the brute-force bound {bound}")
    # BFS order over the underlying graph keeps partial maps connected
    order = []
    seen = set()
    for s in range(t.n):
        if s in seen:
            continue
        seen.add(s)
        q = deque([s])
        while q:
            u = q.popleft()
            order.append(u)
            for w in t.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    q.append(w)
    pos = {v: i for i, v in enumerate(order)}
    checks = []  # edges to verify when order[i] is assigned
    for i, v in enumerate(order):
        checks.append([(a, b) for a, b in t.edges
                       if max(pos[a], pos[b]) == i])
    f = [0] * t.n

    def extend(i):
        if i == len(order):
            yield tuple(f)
            return
        v = order[i]
        for img in range(t.n):
            f[v] = img
            if all(t.has_edge(f[a], f[b]) for a, b in checks[i]):
                yield from extend(i + 1)

    return extend(0)


def endomorphisms_bruteforce(t: Digraph, bound: int = 9) -> list[tuple[int, ...]]:
    """All edge-preserving self-maps, sorted."""
    return sorted(iter_endomorphisms(t, bound))


def _induced_image(t: TreeDigraph, f: list[int]) -> TreeDigraph:
    image = sorted(set(f))
    idx = {v: i for i, v in enumerate(image)}
    edges = {(idx[f[u]], idx[f[v]]) for u, v in t.edges}
    return TreeDigraph(len(image), tuple(edges))


def _fold_automorphism(t: TreeDigraph, h: list[int]) -> list[int]:
    """Turn a non-identity automorphism into a non-injective endomorphism.

    ``h`` fixes some vertex ``r``.  If ``h`` moves a branch at ``r`` onto
    another branch, apply ``h`` on that branch only; otherwise descend into a
    branch where ``h`` is not the identity.
    """
    r = next(v for v in range(t.n) if h[v] == v)
    members = set(range(t.n))
    while True:
        branches = []
        for w in t.neighbors[r]:
            if w not in members:
                continue
            comp = {w}
            stack = [w]
            while stack:
                u = stack.pop()
                for x in t.neighbors[u]:
                    if x != r and x in members and x not in comp:
                        comp.add(x)
                        stack.append(x)
            branches.append((w, comp))
        for w, comp in branches:
            if not all(h[x] in comp for x in comp):
                g = list(range(t.n))
                for x in comp:
                    g[x] = h[x]
                return g
        r, members = next((w, comp) for w, comp in branches
                          if any(h[x] != x for x in comp))


def core_of(t: Digraph) -> TreeDigraph:
    """The core of an oriented tree, relabelled to follow its canonical string."""
    t = as_tree(t)
    while not is_core_tree(t):
        f = None
        for v in range(t.n):
            lists = [[u for u in range(t.n) if u != v] if x == v else range(t.n)
                     for x in range(t.n)]
            f = find_homomorphism(t, t, lists)
            if f is not None:
                break
        if f is None:  # pragma: no cover - excluded by the core characterisation of trees
            raise AssertionError("non-core tree without a non-identity endomorphism")
        if len(set(f)) == t.n:
            f = _fold_automorphism(t, f)
        t = _induced_image(t, f)
    return parse_canonical(canonical_encoding(t))


def is_core(h: Digraph) -> bool:
    """Core test for any digraph: no endomorphism misses a vertex.

    Trees use the arc-consistency characterisation; other digraphs run one
    homomorphism search per vertex, so this is exponential in the worst case.
    """
    if h.is_tree():
        return is_core_tree(h)
    for v in range(h.n):
        lists = [[u for u in range(h.n) if u != v]] * h.n
        if find_homomorphism(h, h, lists) is not None:
            return False
    return True
