"""Enumeration of unlabeled core trees, rooted cores and core triads.

Rooted cores are built bottom-up by size: a rooted core is a fresh root with
a set of oriented children, each child a smaller rooted core.  Children are
taken as a *set* of distinct (child, orientation) pairs because two equal
oriented children can be swapped by a root-fixing endomorphism, so such a
tree is never a rooted core.  Unrooted trees are assembled around their
center (at least two children of maximal depth) or bicenter (two halves of
equal depth joined by an edge from the first root to the second).  Every
candidate still goes through the arc-consistency core test.
"""

from __future__ import annotations

import bisect
import os
import pickle
import tempfile
from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator, Sequence

from .consistency import tree_kernel
from .digraph import (
    RootedTree,
    TreeDigraph,
    canonical_encoding,
    is_triad,
    parse_canonical,
    parse_rooted,
)
from .cores import is_core_tree


@dataclass(frozen=True, slots=True)
class Entry:
    """A rooted core in compact form: preorder parent/orientation arrays."""

    canon: str
    size: int
    depth: int
    parent: tuple[int, ...]
    out: tuple[bool, ...]

    def rooted(self) -> RootedTree:
        return parse_rooted(self.canon)


_SINGLE = Entry("[]", 1, 0, (-1,), (False,))


class RootedCatalog:
    """Rooted cores grouped by (size, depth), each group sorted by canonical string.

    With ``spill_bytes`` set, groups are pickled to ``spill_dir`` in
    least-recently-used order once the in-memory estimate exceeds the budget.
    """

    def __init__(self, spill_bytes: int | None = None, spill_dir: str | None = None):
        self._mem: OrderedDict[tuple[int, int], list[Entry]] = OrderedDict()
        self._disk: dict[tuple[int, int], str] = {}
        self._cost: dict[tuple[int, int], int] = {}
        self._sizes_done: set[int] = set()
        self.spill_bytes = spill_bytes
        self._spill_dir = spill_dir
        self._tmp: tempfile.TemporaryDirectory | None = None

    # storage ------------------------------------------------------------
    def _dir(self) -> str:
        if self._spill_dir is None:
            self._tmp = tempfile.TemporaryDirectory(prefix="treecsp-catalog-")
            self._spill_dir = self._tmp.name
        os.makedirs(self._spill_dir, exist_ok=True)
        return self._spill_dir

    def _put(self, key: tuple[int, int], entries: list[Entry]) -> None:
        self._mem[key] = entries
        self._mem.move_to_end(key)
        self._cost[key] = sum(80 + 2 * len(e.canon) + 16 * e.size for e in entries)
        self._maybe_spill(keep=key)

    def _maybe_spill(self, keep) -> None:
        if self.spill_bytes is None:
            return
        while sum(self._cost[k] for k in self._mem) > self.spill_bytes and len(self._mem) > 1:
            key = next(iter(self._mem))
            if key == keep:
                self._mem.move_to_end(key)
                key = next(iter(self._mem))
            path = os.path.join(self._dir(), f"rooted-{key[0]}-{key[1]}.pkl")
            with open(path, "wb") as fh:
                pickle.dump(self._mem.pop(key), fh, protocol=pickle.HIGHEST_PROTOCOL)
            self._disk[key] = path

    def get(self, n: int, d: int) -> list[Entry]:
        self.ensure(n)
        key = (n, d)
        if key in self._mem:
            self._mem.move_to_end(key)
            return self._mem[key]
        if key in self._disk:
            with open(self._disk.pop(key), "rb") as fh:
                entries = pickle.load(fh)
            self._put(key, entries)
            return entries
        return []

    def depths(self, n: int) -> list[int]:
        self.ensure(n)
        return sorted({d for (m, d) in list(self._mem) + list(self._disk) if m == n})

    def count(self, n: int) -> int:
        return sum(len(self.get(n, d)) for d in self.depths(n))

    def spilled(self) -> int:
        return len(self._disk)

    # construction --------------------------------------------------------
    def ensure(self, n: int) -> None:
        for m in range(1, n + 1):
            if m not in self._sizes_done:
                self._build(m)

    def _build(self, n: int) -> None:
        self._sizes_done.add(n)
        if n == 1:
            self._put((1, 0), [_SINGLE])
            return
        items = ChildItems(self, n - 1)
        kernel = tree_kernel()
        by_depth: dict[int, list[Entry]] = {}
        for chosen in items.sets(n - 1):
            parent, out, canon = items.assemble(chosen)
            if kernel.tree_self_ac(parent, out, 0):
                d = 1 + items.depth[chosen[0]]
                by_depth.setdefault(d, []).append(
                    Entry(canon, n, d, tuple(parent), tuple(out)))
        for d, entries in sorted(by_depth.items()):
            entries.sort(key=lambda e: e.canon)
            self._put((n, d), entries)

    def close(self) -> None:
        if self._tmp is not None:
            self._tmp.cleanup()
            self._tmp = None


class ChildItems:
    """All oriented rooted cores of size at most ``max_size``.

    Items are ordered by (depth, size, canon, orientation); a child set is a
    strictly decreasing index sequence, so its first item has maximal depth.
    """

    def __init__(self, catalog: RootedCatalog, max_size: int):
        self.entry: list[Entry] = []
        self.sign: list[bool] = []
        self.depth: list[int] = []
        self.size: list[int] = []
        # (depth, start, end, sizes) blocks for fast size filtering
        self.blocks: list[tuple[int, int, int, list[int]]] = []
        depths = sorted({d for m in range(1, max_size + 1) for d in catalog.depths(m)})
        for d in depths:
            start = len(self.entry)
            for m in range(1, max_size + 1):
                for e in catalog.get(m, d):
                    for s in (True, False):
                        self.entry.append(e)
                        self.sign.append(s)
                        self.depth.append(d)
                        self.size.append(m)
            self.blocks.append((d, start, len(self.entry), self.size[start:]))
        self._block_of = []
        for b, (_, start, end, _) in enumerate(self.blocks):
            self._block_of.extend([b] * (end - start))

    def _below(self, hi: int, remaining: int, min_depth: int = 0) -> Iterator[int]:
        """Indices < hi with size <= remaining and depth >= min_depth, descending."""
        if hi <= 0:
            return
        b = self._block_of[hi - 1]
        while b >= 0:
            d, start, end, sizes = self.blocks[b]
            if d < min_depth:
                return
            top = min(end, hi) - start
            lim = bisect.bisect_right(sizes, remaining, 0, top)
            for j in range(start + lim - 1, start - 1, -1):
                yield j
            b -= 1

    def _rest(self, hi: int, remaining: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield prefix
            return
        for i in self._below(hi, remaining):
            yield from self._rest(i, remaining - self.size[i], prefix + (i,))

    def sets(self, total: int) -> Iterator[tuple[int, ...]]:
        """Child sets with sizes summing to ``total``."""
        yield from self._rest(len(self.entry), total, ())

    def center_sets(self, total: int) -> Iterator[tuple[int, ...]]:
        """Child sets summing to ``total`` whose maximal depth occurs at least twice."""
        for i in self._below(len(self.entry), total):
            d = self.depth[i]
            for j in self._below(i, total - self.size[i], d):
                if self.depth[j] != d:
                    break
                yield from self._rest(j, total - self.size[i] - self.size[j], (i, j))

    def assemble(self, chosen: Sequence[int]) -> tuple[list[int], list[bool], str]:
        parent = [-1]
        out = [False]
        tokens = []
        for i in chosen:
            e = self.entry[i]
            s = self.sign[i]
            off = len(parent)
            parent.append(0)
            out.append(s)
            for p, o in zip(e.parent[1:], e.out[1:]):
                parent.append(p + off)
                out.append(o)
            tokens.append(("+" if s else "-") + e.canon)
        tokens.sort()
        return parent, out, "[" + "".join(tokens) + "]"


_default_catalog: RootedCatalog | None = None


def default_catalog() -> RootedCatalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = RootedCatalog()
    return _default_catalog


def generate_rooted_cores(n: int, d: int, catalog: RootedCatalog | None = None) -> list[RootedTree]:
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    cat = catalog or default_catalog()
    return [e.rooted() for e in cat.get(n, d)]


def count_rooted_cores(n: int, catalog: RootedCatalog | None = None) -> int:
    return (catalog or default_catalog()).count(n)


def assemble_center(children: Sequence[RootedTree], s: Sequence[int]) -> TreeDigraph:
    """Fresh root 0 joined to each child root; ``s[i] = 1`` means child root -> root."""
    if len(children) != len(s):
        raise ValueError("children and orientation vector differ in length")
    edges = []
    n = 1
    for child, si in zip(children, s):
        perm = {child.root: n}
        for v in range(child.tree.n):
            if v != child.root:
                perm[v] = n + len(perm) - 1
        edges.append((perm[child.root], 0) if si else (0, perm[child.root]))
        edges.extend((perm[a], perm[b]) for a, b in child.tree.edges)
        n += child.tree.n
    return TreeDigraph(n, tuple(edges))


def assemble_bicenter(t1: RootedTree, t2: RootedTree) -> TreeDigraph:
    """Disjoint union of the two halves plus the edge root1 -> root2."""
    if t1.depth != t2.depth:
        raise ValueError(f"depths differ: {t1.depth} != {t2.depth}")
    off = t1.tree.n
    edges = list(t1.tree.edges)
    edges.extend((a + off, b + off) for a, b in t2.tree.edges)
    edges.append((t1.root, t2.root + off))
    return TreeDigraph(off + t2.tree.n, tuple(edges))


def core_tree_canons(n: int, catalog: RootedCatalog | None = None) -> list[str]:
    """Canonical strings of all core trees with ``n`` vertices, sorted."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return ["C[]"]
    cat = catalog or default_catalog()
    kernel = tree_kernel()
    found = []
    if n >= 3:
        items = ChildItems(cat, n - 2)
        for chosen in items.center_sets(n - 1):
            parent, out, canon = items.assemble(chosen)
            if kernel.tree_self_ac(parent, out, -1):
                found.append("C" + canon)
    for m in range(1, n):
        for d in cat.depths(m):
            right = cat.get(n - m, d)
            if not right:
                continue
            for a in cat.get(m, d):
                for b in right:
                    parent = list(a.parent) + [0] + [p + m for p in b.parent[1:]]
                    out = list(a.out) + [True] + list(b.out[1:])
                    if kernel.tree_self_ac(parent, out, -1):
                        found.append("B" + a.canon + "|" + b.canon)
    found.sort()
    return found


def generate_core_trees(n: int, catalog: RootedCatalog | None = None) -> Iterator[TreeDigraph]:
    for c in core_tree_canons(n, catalog):
        yield parse_canonical(c)


# triads ------------------------------------------------------------------

def _path_arrays(word: str) -> tuple[list[int], list[bool]]:
    return [-1] + list(range(len(word))), [False] + [c == "+" for c in word]


def _core_legs(max_len: int) -> list[str]:
    """Orientation words of legs whose part beyond the first edge is a rooted core path.

    Rooted core paths are closed under dropping the first edge (the subtree
    below the root's child is again a rooted core), so words grow at the front.
    """
    kernel = tree_kernel()
    ok_tail = {""}
    frontier = [""]
    for _ in range(max_len - 1):
        nxt = []
        for w in frontier:
            for c in "+-":
                v = c + w
                parent, out = _path_arrays(v)
                if kernel.tree_self_ac(parent, out, 0):
                    nxt.append(v)
        ok_tail.update(nxt)
        frontier = nxt
    legs = [c + t for t in sorted(ok_tail, key=lambda w: (len(w), w)) for c in "+-"
            if 1 + len(t) <= max_len]
    return sorted(legs, key=lambda w: (len(w), w))


def _leg_canon(word: str) -> str:
    s = "[]"
    for c in reversed(word[1:]):
        s = "[" + c + s + "]"
    return word[0] + s


def triad_canons(n: int) -> list[str]:
    """Canonical strings of all core triads with ``n`` vertices, sorted."""
    if n < 4:
        raise ValueError("a triad has at least 4 vertices")
    legs = _core_legs(n - 3)
    found = set()
    for i, a in enumerate(legs):
        for j in range(i + 1, len(legs)):
            b = legs[j]
            rest = n - 1 - len(a) - len(b)
            if rest < len(b):
                if len(a) + 2 * len(b) > n - 1:
                    break
                continue
            for k in range(j + 1, len(legs)):
                c = legs[k]
                if len(c) > rest:
                    break
                if len(c) < rest:
                    continue
                edges = []
                nv = 1
                for w in (a, b, c):
                    prev = 0
                    for ch in w:
                        edges.append((prev, nv) if ch == "+" else (nv, prev))
                        prev = nv
                        nv += 1
                t = TreeDigraph(nv, tuple(edges))
                if is_core_tree(t):
                    found.add(canonical_encoding(t))
    return sorted(found)


def generate_core_triads(n: int) -> Iterator[TreeDigraph]:
    for c in triad_canons(n):
        t = parse_canonical(c)
        assert is_triad(t)
        yield t
