"""Arc consistency and homomorphism search with maintained arc consistency.

The hot loops live in a compiled kernel (``treecsp._kernel``) when it is
available and the template has at most 64 vertices; otherwise the pure-Python
kernel with identical semantics is used.  ``use_backend`` forces one of them.
"""

from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import _kernel_py
from .digraph import Digraph

try:
    from . import _kernel as _ckernel
except ImportError:  # pragma: no cover - depends on the build
    _ckernel = None

log = logging.getLogger(__name__)

SAT, UNSAT, TIMEOUT = _kernel_py.SAT, _kernel_py.UNSAT, _kernel_py.TIMEOUT

_backend = "compiled" if _ckernel is not None else "python"


class SearchTimeout(Exception):
    """The step budget (counted in list removals) ran out before a verdict."""

    def __init__(self, steps: int):
        super().__init__(f"step budget exhausted after {steps} removals")
        self.steps = steps


def compiled_available() -> bool:
    return _ckernel is not None


def backend() -> str:
    return _backend


def use_backend(name: str) -> None:
    """Select ``"compiled"`` or ``"python"`` for subsequent calls."""
    global _backend
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _ckernel is None:
        raise RuntimeError("the compiled kernel is not built")
    _backend = name


def tree_kernel():
    """Module providing ``tree_self_ac`` for the active backend."""
    return _ckernel if _backend == "compiled" else _kernel_py


def components(n: int, a: np.ndarray, b: np.ndarray) -> tuple[int, np.ndarray]:
    """Connected components of the undirected graph with edges ``a[i] -- b[i]``.

    Components are numbered in the order of their smallest vertex.
    """
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if _backend == "compiled":
        labels = np.empty(n, dtype=np.int64)
        return int(_ckernel.components(n, a, b, labels)), labels
    graph = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n)).tocsr()
    ncomp, comp = connected_components(graph, directed=False)
    first = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(first, comp, np.arange(n, dtype=np.int64))
    rank = np.empty(ncomp, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(ncomp)
    return int(ncomp), rank[comp]


class Instance:
    """A binary CSP instance: homomorphisms from a graph on ``n`` vertices to ``h``.

    ``src``/``dst`` are the instance edges.  Built once, solved many times
    with different initial domains.
    """

    def __init__(self, n: int, src, dst, h: Digraph):
        self.n = int(n)
        self.h = h
        src = np.asarray(src, dtype=np.int64).ravel()
        dst = np.asarray(dst, dtype=np.int64).ravel()
        if src.size:
            key = np.unique(src * max(self.n, 1) + dst)
            src, dst = key // max(self.n, 1), key % max(self.n, 1)
        self.src, self.dst = src, dst
        # each edge contributes (src -> dst, out) at src and (dst <- src, in) at dst
        owner = np.concatenate([src, dst])
        other = np.concatenate([dst, src])
        isout = np.concatenate([np.ones(src.size, np.uint8), np.zeros(src.size, np.uint8)])
        order = np.argsort(owner, kind="stable")
        counts = np.bincount(owner, minlength=self.n) if owner.size else np.zeros(self.n, np.int64)
        self.indptr = np.zeros(self.n + 1, dtype=np.int32)
        np.cumsum(counts, out=self.indptr[1:])
        self.nbr = np.ascontiguousarray(other[order], dtype=np.int32)
        self.isout = np.ascontiguousarray(isout[order], dtype=np.uint8)
        if self.nbr.size == 0:
            self.nbr = np.zeros(1, np.int32)
            self.isout = np.zeros(1, np.uint8)
        self.full = (1 << h.n) - 1

    @classmethod
    def from_digraph(cls, g: Digraph, h: Digraph) -> "Instance":
        if g.edges:
            e = np.asarray(g.edges, dtype=np.int64)
            return cls(g.n, e[:, 0], e[:, 1], h)
        return cls(g.n, [], [], h)

    def _use_compiled(self) -> bool:
        return _backend == "compiled" and self.h.n <= 64

    def solve(self, domains: Sequence[int], budget: int | None = None, search: bool = True,
              raw: bool = False):
        """Run the kernel.  Returns ``(status, domains, steps)``.

        With ``raw`` the compiled backend hands back its uint64 array as is.
        """
        b = -1 if budget is None else int(budget)
        if self._use_compiled():
            dom = np.array([int(d) for d in domains], dtype=np.uint64) if not isinstance(
                domains, np.ndarray) else domains.astype(np.uint64, copy=True)
            status, steps = _ckernel.solve(
                self.n, self.indptr, self.nbr, self.isout,
                np.array(self.h.succ_masks or (0,), dtype=np.uint64),
                np.array(self.h.pred_masks or (0,), dtype=np.uint64),
                dom, b, search)
            return status, (dom if raw else [int(x) for x in dom]), steps
        dom = [int(d) for d in domains]
        status, steps = _kernel_py.solve(
            self.n, self.indptr.tolist(), self.nbr.tolist(), self.isout.tolist(),
            self.h.succ_masks, self.h.pred_masks, dom, b, search)
        return status, dom, steps


def lists_to_masks(lists: Iterable[Iterable[int]] | None, n: int, h: Digraph) -> list[int]:
    full = (1 << h.n) - 1
    if lists is None:
        return [full] * n
    masks = []
    for x, lst in enumerate(lists):
        m = 0
        for u in lst:
            if not 0 <= u < h.n:
                raise ValueError(f"list of vertex {x} mentions {u}, not a vertex of the template")
            m |= 1 << u
        masks.append(m)
    if len(masks) != n:
        raise ValueError(f"expected {n} lists, got {len(masks)}")
    return masks


def masks_to_lists(masks: Sequence[int]) -> list[frozenset[int]]:
    out = []
    for m in masks:
        s = []
        while m:
            low = m & -m
            s.append(low.bit_length() - 1)
            m ^= low
        out.append(frozenset(s))
    return out


def arc_consistency(g: Digraph, h: Digraph, lists=None) -> list[frozenset[int]] | None:
    """Maximal arc-consistent sublists of ``lists`` (default: all of ``h``), or None on reject."""
    inst = Instance.from_digraph(g, h)
    status, dom, _ = inst.solve(lists_to_masks(lists, g.n, h), search=False)
    return masks_to_lists(dom) if status == SAT else None


def is_homomorphism(g: Digraph, h: Digraph, f: Sequence[int]) -> bool:
    return len(f) == g.n and all(h.has_edge(f[u], f[v]) for u, v in g.edges)


def find_homomorphism(g: Digraph, h: Digraph, lists=None, budget: int | None = None) -> list[int] | None:
    """A homomorphism ``g -> h`` inside ``lists``, or None if none exists.

    Raises SearchTimeout when ``budget`` list removals are exceeded.
    """
    inst = Instance.from_digraph(g, h)
    status, dom, steps = inst.solve(lists_to_masks(lists, g.n, h), budget=budget)
    if status == TIMEOUT:
        raise SearchTimeout(steps)
    if status == UNSAT:
        return None
    f = [m.bit_length() - 1 for m in dom]
    if not is_homomorphism(g, h, f):
        raise AssertionError("kernel returned a map that is not a homomorphism")
    return f
