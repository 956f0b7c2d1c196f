"""Finite digraphs, orientations of trees, and their canonical encodings.

Vertices are always the contiguous ids ``0..n-1``.  Values are immutable;
derived data (adjacency, levels) is cached on first use.
"""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple


class UnbalancedError(ValueError):
    """Raised when a digraph admits no level function."""


class NotATreeError(ValueError):
    pass


class EdgeListError(ValueError):
    pass


@dataclass(frozen=True)
class Digraph:
    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("vertex count must be non-negative")
        es = tuple(sorted(set((int(u), int(v)) for u, v in self.edges)))
        for u, v in es:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
        object.__setattr__(self, "edges", es)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: int | None = None):
        edges = list(edges)
        if n is None:
            n = 1 + max((max(e) for e in edges), default=0)
        return cls(n, tuple(edges))

    def __len__(self):
        return self.n

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            inn[v].append(u)
        return tuple(tuple(x) for x in inn)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Undirected neighbourhoods (loops omitted, 2-cycles collapsed)."""
        nb: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.edges:
            if u != v:
                nb[u].add(v)
                nb[v].add(u)
        return tuple(tuple(sorted(s)) for s in nb)

    @cached_property
    def succ_masks(self) -> tuple[int, ...]:
        """Bitmask of out-neighbours for every vertex."""
        m = [0] * self.n
        for u, v in self.edges:
            m[u] |= 1 << v
        return tuple(m)

    @cached_property
    def pred_masks(self) -> tuple[int, ...]:
        m = [0] * self.n
        for u, v in self.edges:
            m[v] |= 1 << u
        return tuple(m)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edge_set

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def relabel(self, perm) -> "Digraph":
        """Image under the vertex bijection ``v -> perm[v]``."""
        return Digraph(self.n, tuple((perm[u], perm[v]) for u, v in self.edges))

    def is_connected(self) -> bool:
        return self.n > 0 and len(components(self)) == 1

    def is_tree(self) -> bool:
        return (
            self.n > 0
            and len(self.edges) == self.n - 1
            and all(u != v for u, v in self.edges)
            and self.is_connected()
        )

    def to_edge_list(self) -> str:
        lines = []
        if self.n == 0 or any(not self.neighbors[v] for v in range(self.n)) or \
                1 + max((max(e) for e in self.edges), default=0) != self.n:
            lines.append(f"# n={self.n}")
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"


class TreeDigraph(Digraph):
    """An orientation of a finite tree."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_tree():
            raise NotATreeError(f"not an oriented tree: n={self.n}, edges={self.edges}")

    @classmethod
    def of(cls, g: Digraph) -> "TreeDigraph":
        return g if isinstance(g, TreeDigraph) else cls(g.n, g.edges)


def as_tree(g: Digraph) -> TreeDigraph:
    return TreeDigraph.of(g)


@dataclass(frozen=True)
class RootedTree:
    tree: TreeDigraph
    root: int
    canon: str = field(default="", compare=False)

    def __post_init__(self):
        if not 0 <= self.root < self.tree.n:
            raise ValueError("root out of range")
        if not self.canon:
            object.__setattr__(self, "canon", rooted_encoding(self.tree, self.root))

    @property
    def size(self) -> int:
        return self.tree.n

    @cached_property
    def depth(self) -> int:
        return max(bfs_distances(self.tree, self.root))

    def sort_key(self) -> tuple[int, str]:
        """Total order on rooted trees extending the order by depth."""
        return (self.depth, self.canon)

    def __lt__(self, other: "RootedTree") -> bool:
        return self.sort_key() < other.sort_key()


def components(g: Digraph) -> list[list[int]]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for w in itertools.chain(g.out_neighbors[u], g.in_neighbors[u]):
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def bfs_distances(g: Digraph, source: int) -> list[int]:
    """Undirected distances from ``source`` (-1 for unreachable vertices)."""
    dist = [-1] * g.n
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        for w in g.neighbors[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def categorical_power(h: Digraph, k: int, max_vertices: int = 10**7) -> Digraph:
    """k-th categorical power; tuple ``(t1..tk)`` gets row-major id ``sum t_i n^(k-i)``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = h.n
    if n**k > max_vertices:
        raise MemoryError(f"{n}^{k} vertices exceeds the budget of {max_vertices}")
    edges = []
    for combo in itertools.product(h.edges, repeat=k):
        a = b = 0
        for u, v in combo:
            a = a * n + u
            b = b * n + v
        edges.append((a, b))
    return Digraph(n**k, tuple(edges))


def power_tuple(index: int, n: int, k: int) -> tuple[int, ...]:
    """Inverse of the row-major tuple numbering used by categorical_power."""
    out = []
    for _ in range(k):
        index, r = divmod(index, n)
        out.append(r)
    return tuple(reversed(out))


def reverse(h: Digraph) -> Digraph:
    cls = TreeDigraph if isinstance(h, TreeDigraph) else Digraph
    return cls(h.n, tuple((v, u) for u, v in h.edges))


def levels(h: Digraph) -> list[int]:
    """The level function of a balanced digraph, normalised to 0 per component."""
    lvl: list[int | None] = [None] * h.n
    for comp in components(h):
        s = comp[0]
        lvl[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in h.out_neighbors[u]:
                if lvl[w] is None:
                    lvl[w] = lvl[u] + 1
                    stack.append(w)
                elif lvl[w] != lvl[u] + 1:
                    raise UnbalancedError(f"edge ({u},{w}) breaks the level function")
            for w in h.in_neighbors[u]:
                if lvl[w] is None:
                    lvl[w] = lvl[u] - 1
                    stack.append(w)
                elif lvl[w] != lvl[u] - 1:
                    raise UnbalancedError(f"edge ({w},{u}) breaks the level function")
        low = min(lvl[v] for v in comp)
        for v in comp:
            lvl[v] -= low
    return lvl  # type: ignore[return-value]


def is_balanced(h: Digraph) -> bool:
    try:
        levels(h)
    except UnbalancedError:
        return False
    return True


def height(h: Digraph) -> int:
    return max(levels(h), default=0)


class Center(NamedTuple):
    vertex: int


class Bicenter(NamedTuple):
    edge: tuple[int, int]


def _longest_path(t: Digraph) -> list[int]:
    d0 = bfs_distances(t, 0)
    a = max(range(t.n), key=lambda v: (d0[v], -v))
    da = bfs_distances(t, a)
    b = max(range(t.n), key=lambda v: (da[v], -v))
    # walk back from b to a
    path = [b]
    while path[-1] != a:
        u = path[-1]
        path.append(next(w for w in t.neighbors[u] if da[w] == da[u] - 1))
    return path


def center_or_bicenter(t: Digraph) -> Center | Bicenter:
    t = as_tree(t)
    path = _longest_path(t)
    length = len(path) - 1
    if length % 2 == 0:
        return Center(path[length // 2])
    u, v = path[length // 2], path[length // 2 + 1]
    return Bicenter((u, v) if t.has_edge(u, v) else (v, u))


def rooted_encoding(t: Digraph, root: int, avoid: int | None = None) -> str:
    """Canonical string of ``t`` rooted at ``root``; ``avoid`` cuts off one neighbour."""
    # iterative post-order so deep paths do not hit the recursion limit
    parent = {root: avoid}
    order = [root]
    i = 0
    while i < len(order):
        u = order[i]
        i += 1
        for w in t.neighbors[u]:
            if w != parent[u]:
                parent[w] = u
                order.append(w)
    enc: dict[int, str] = {}
    for u in reversed(order):
        tokens = []
        for w in t.neighbors[u]:
            if w == parent[u]:
                continue
            sign = "+" if t.has_edge(u, w) else "-"
            tokens.append(sign + enc.pop(w))
        tokens.sort()
        enc[u] = "[" + "".join(tokens) + "]"
    return enc[root]


def canonical_encoding(t: Digraph, root: int | None = None) -> str:
    t = as_tree(t)
    if root is not None:
        return rooted_encoding(t, root)
    c = center_or_bicenter(t)
    if isinstance(c, Center):
        return "C" + rooted_encoding(t, c.vertex)
    u, v = c.edge
    return "B" + rooted_encoding(t, u, avoid=v) + "|" + rooted_encoding(t, v, avoid=u)


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges: list[tuple[int, int]] = []

    def parse(self, s: str, pos: int) -> tuple[int, int]:
        if pos >= len(s) or s[pos] != "[":
            raise ValueError(f"expected '[' at position {pos} in {s!r}")
        me = self.n
        self.n += 1
        pos += 1
        while pos < len(s) and s[pos] in "+-":
            sign = s[pos]
            child, pos = self.parse(s, pos + 1)
            self.edges.append((me, child) if sign == "+" else (child, me))
        if pos >= len(s) or s[pos] != "]":
            raise ValueError(f"expected ']' at position {pos} in {s!r}")
        return me, pos + 1


def parse_rooted(s: str) -> RootedTree:
    b = _Builder()
    root, end = b.parse(s, 0)
    if end != len(s):
        raise ValueError(f"trailing characters in {s!r}")
    t = TreeDigraph(b.n, tuple(b.edges))
    return RootedTree(t, root)


def parse_canonical(s: str) -> TreeDigraph:
    """Inverse of canonical_encoding (also accepts a bare rooted string)."""
    s = s.strip()
    if s.startswith("C"):
        return parse_rooted(s[1:]).tree
    if s.startswith("B"):
        left, sep, right = s[1:].partition("|")
        if not sep:
            raise ValueError(f"bicentred encoding without '|': {s!r}")
        b = _Builder()
        r1, end1 = b.parse(left, 0)
        r2, end2 = b.parse(right, 0)
        if end1 != len(left) or end2 != len(right):
            raise ValueError(f"malformed encoding {s!r}")
        b.edges.append((r1, r2))
        return TreeDigraph(b.n, tuple(b.edges))
    if s.startswith("["):
        return parse_rooted(s).tree
    raise ValueError(f"not a canonical tree string: {s!r}")


def is_triad(t: Digraph) -> bool:
    t = as_tree(t)
    degs = [t.degree(v) for v in range(t.n)]
    return degs.count(3) == 1 and max(degs) <= 3


def parse_edge_list(text: str) -> Digraph:
    n_decl = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("n="):
                n_decl = int(body[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer vertex in {raw!r}") from None
    n = 1 + max((max(e) for e in edges), default=-1)
    if n_decl is not None:
        if n_decl < n:
            raise EdgeListError(f"declared n={n_decl} but edges mention vertex {n - 1}")
        n = n_decl
    return Digraph(max(n, 1) if n_decl is None else n, tuple(edges))


def load_digraph(source: str) -> Digraph:
    """Read an edge-list file, or parse ``source`` itself as a canonical tree string."""
    s = source.strip()
    if not os.path.exists(source) and s[:1] in ("C", "B", "["):
        return parse_canonical(s)
    with open(source, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped[:1] in ("C", "B", "[") and "\n" not in stripped:
        return parse_canonical(stripped)
    return parse_edge_list(text)
