"""Polymorphism tests through indicator digraphs.

For a condition with symbols ``f_1 .. f_m`` the indicator is the disjoint
union of the powers ``H^{arity(f_i)}`` (one block per symbol; in level-wise
mode one block per symbol and level, holding only same-level tuples) with
tuples merged as forced by the height-one identities.  Identities of the form
``f(...) = x`` and, optionally, idempotence become singleton lists.  A
homomorphism from the quotient to ``H`` respecting the lists is exactly a
family of polymorphisms satisfying the condition.

Total symmetry uses the subset digraph instead: nonempty subsets of vertices
(of one level, in level-wise mode) with ``A -> B`` when some tuples of edges
realise the pair of sets.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .conditions import App, LinearCondition, LinearIdentity, Var, _var_name, builtin
from .consistency import SAT, TIMEOUT, UNSAT, Instance, components
from .cores import is_core
from .digraph import Digraph, UnbalancedError, is_balanced, levels

log = logging.getLogger(__name__)

FULL, LEVELWISE, AUTO = "full", "levelwise", "auto"
EXTENDED = "extended"  # level-wise subset witness read through its lowest-level part


class ImmediateUnsat(Exception):
    """Two precolouring demands clash on one indicator class."""


class ResourceLimit(Exception):
    """The construction would exceed the configured size budget."""


# results ----------------------------------------------------------------------

@dataclass
class Witness:
    """Operation tables for the symbols of a condition.

    ``tables[name]`` lists the value at every tuple of ``H^k`` in row-major
    order, with -1 where the operation is undefined (off-level tuples of a
    level-wise witness).  Total symmetry witnesses instead map vertex-set
    bitmasks to values in ``subset_map``.
    """

    condition: LinearCondition
    mode: str
    n: int
    tables: dict[str, np.ndarray] = field(default_factory=dict)
    subset_map: dict[int, int] | None = None
    levels: list[int] | None = None

    def value(self, symbol: str, args) -> int:
        if self.subset_map is not None:
            m = _mask(args)
            if self.mode == EXTENDED:
                m = _lowest_part(m, self.levels)
            return self.subset_map[m]
        idx = 0
        for a in args:
            idx = idx * self.n + a
        return int(self.tables[symbol][idx])


@dataclass
class Decision:
    verdict: str  # sat, unsat, lw-sat, lw-unsat, timeout
    witness: Witness | None = None
    mode: str = FULL
    steps: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.verdict == "sat"

    @property
    def unsat(self) -> bool:
        return self.verdict == "unsat"

    def __str__(self):
        return self.verdict


def _mask(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


def _bits(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


# tuple scopes -----------------------------------------------------------------

@dataclass
class _Scope:
    """The tuples of ``H^k`` an indicator uses (all, or same-level only).

    ``glob`` holds their row-major ids in increasing order, ``index`` maps a
    row-major id to its position in ``glob`` (-1 when out of scope), and
    ``src``/``dst`` are the power's edges between in-scope tuples.
    """

    k: int
    glob: np.ndarray
    index: np.ndarray
    tuples: np.ndarray
    src: np.ndarray
    dst: np.ndarray


@lru_cache(maxsize=64)
def _scope(h: Digraph, mode: str, k: int, max_tuples: int) -> _Scope:
    n = h.n
    if n ** k > max_tuples:
        raise ResourceLimit(f"H^{k} has {n ** k} tuples (budget {max_tuples})")
    ids = np.arange(n ** k, dtype=np.int64)
    tuples = _decode(ids, n, k)
    lvl = None
    if mode == LEVELWISE:
        lvl = np.asarray(levels(h), dtype=np.int64)
        lv = lvl[tuples]
        keep = (lv == lv[:, :1]).all(axis=1)
        glob, tuples = ids[keep], tuples[keep]
    else:
        glob = ids
    index = np.full(n ** k, -1, dtype=np.int64)
    index[glob] = np.arange(len(glob))
    srcs, dsts = [], []
    for s, d in _edge_tuples(h, k, lvl):
        srcs.append(index[s])
        dsts.append(index[d])
    src = np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64)
    return _Scope(k, glob, index, tuples, src, dst)


class IndicatorInstance:
    """The quotient of the symbol powers together with its precolouring."""

    def __init__(self, h: Digraph, c: LinearCondition, mode: str = FULL,
                 idempotent: bool = True, max_tuples: int = 50_000_000):
        if c.total_symmetry is not None:
            raise ValueError("total symmetry uses SubsetInstance")
        if mode not in (FULL, LEVELWISE):
            raise ValueError(f"unknown mode {mode!r}")
        self.h, self.condition, self.mode, self.idempotent = h, c, mode, idempotent
        self.sym_index = c.symbol_index
        self.scopes = {k: _scope(h, mode, k, max_tuples) for k in {s.arity for s in c.symbols}}
        self.offset = []
        total = 0
        for s in c.symbols:
            self.offset.append(total)
            total += len(self.scopes[s.arity].glob)
            if total > max_tuples:
                raise ResourceLimit(f"indicator needs more than {max_tuples} tuples")
        self.n_tuples = total
        self._build(max_tuples)

    def _side_ids(self, app: App, cols: dict[int, int], assign: np.ndarray) -> np.ndarray:
        si = self.sym_index[app.symbol]
        scope = self.scopes[len(app.args)]
        n = self.h.n
        g = np.zeros(len(assign), dtype=np.int64)
        for a in app.args:
            g = g * n + assign[:, cols[a]]
        return self.offset[si] + scope.index[g]

    def _build(self, max_tuples: int) -> None:
        c, h = self.condition, self.h
        src_m, dst_m = [], []
        pin_ids, pin_vals = [], []
        for e in c.identities:
            vs = sorted(e.variables())
            cols = {v: i for i, v in enumerate(vs)}
            assign = _scope(h, self.mode, len(vs), max_tuples).tuples
            if e.height_one:
                src_m.append(self._side_ids(e.lhs, cols, assign))
                dst_m.append(self._side_ids(e.rhs, cols, assign))
            else:
                app, var = e.oriented()
                pin_ids.append(self._side_ids(app, cols, assign))
                pin_vals.append(assign[:, cols[var.index]])
        if self.idempotent:
            verts = np.arange(h.n, dtype=np.int64)
            for si, s in enumerate(c.symbols):
                diag = np.zeros(h.n, dtype=np.int64)
                for _ in range(s.arity):
                    diag = diag * h.n + verts
                pin_ids.append(self.offset[si] + self.scopes[s.arity].index[diag])
                pin_vals.append(verts)
        N = self.n_tuples
        if src_m:
            self.n_classes, self.labels = components(N, np.concatenate(src_m), np.concatenate(dst_m))
        else:
            self.labels = np.arange(N, dtype=np.int64)
            self.n_classes = N
        self.class_size = np.bincount(self.labels, minlength=self.n_classes)

        # precolouring
        self.pins = np.full(self.n_classes, -1, dtype=np.int64)
        if pin_ids:
            cls = self.labels[np.concatenate(pin_ids)]
            vals = np.concatenate(pin_vals)
            order = np.lexsort((vals, cls))
            cls, vals = cls[order], vals[order]
            same = cls[1:] == cls[:-1]
            clash = same & (vals[1:] != vals[:-1])
            if clash.any():
                i = int(np.flatnonzero(clash)[0])
                raise ImmediateUnsat(
                    f"class {int(cls[i])} pinned to both {int(vals[i])} and {int(vals[i + 1])}")
            self.pins[cls] = vals

        # edges of the powers, projected to classes
        qs, qd = [], []
        for si, s in enumerate(c.symbols):
            scope = self.scopes[s.arity]
            qs.append(self.labels[self.offset[si] + scope.src])
            qd.append(self.labels[self.offset[si] + scope.dst])
        key = np.unique(np.concatenate(qs) * self.n_classes + np.concatenate(qd)) if qs else np.zeros(0, np.int64)
        self.qsrc = key // max(self.n_classes, 1)
        self.qdst = key % max(self.n_classes, 1)

    # inspection -----------------------------------------------------------
    @property
    def quotient(self) -> Digraph:
        return Digraph(self.n_classes, tuple(zip(self.qsrc.tolist(), self.qdst.tolist())))

    def class_of(self, symbol: str, tup) -> int:
        si = self.sym_index[symbol]
        g = 0
        for v in tup:
            g = g * self.h.n + v
        local = int(self.scopes[len(tup)].index[g])
        if local < 0:
            raise KeyError(f"{tuple(tup)} is outside the {self.mode} scope")
        return int(self.labels[self.offset[si] + local])

    def lists(self) -> list[frozenset[int]]:
        full = frozenset(range(self.h.n))
        return [frozenset((int(p),)) if p >= 0 else full for p in self.pins]

    # search -----------------------------------------------------------------
    def _search_part(self) -> np.ndarray:
        """Classes that need search: components with a pin or a merged class."""
        Q = self.n_classes
        ncomp, comp = components(Q, self.qsrc, self.qdst)
        interesting = (self.pins >= 0) | (self.class_size > 1)
        need = np.zeros(ncomp, dtype=bool)
        need[comp[interesting]] = True
        return need[comp]

    def solve(self, budget: int | None = None) -> tuple[int, np.ndarray | None, int]:
        """Search for a homomorphism to ``H``; returns (status, class values, steps)."""
        keep = self._search_part()
        kept = np.flatnonzero(keep)
        new_id = np.full(self.n_classes, -1, dtype=np.int64)
        new_id[kept] = np.arange(len(kept))
        sel = keep[self.qsrc] & keep[self.qdst] if len(self.qsrc) else np.zeros(0, dtype=bool)
        inst = Instance(len(kept), new_id[self.qsrc[sel]], new_id[self.qdst[sel]], self.h)
        full = (1 << self.h.n) - 1
        pins = self.pins[kept]
        if self.h.n <= 63:
            doms = np.where(pins < 0, full, np.left_shift(1, np.maximum(pins, 0))).astype(np.uint64)
        else:
            doms = [full if p < 0 else 1 << int(p) for p in pins.tolist()]
        status, dom, steps = inst.solve(doms, budget=budget, raw=True)
        self.stats = {"tuples": self.n_tuples, "classes": self.n_classes,
                      "searched": int(len(kept)), "edges": int(len(self.qsrc))}
        if status != SAT:
            return status, None, steps
        values = np.empty(self.n_classes, dtype=np.int64)
        if isinstance(dom, np.ndarray):
            # singleton masks are exact powers of two
            values[kept] = np.log2(dom.astype(np.float64)).astype(np.int64)
        else:
            values[kept] = [d.bit_length() - 1 for d in dom]
        # untouched components are plain copies of a power: use the first projection
        rest = np.flatnonzero(~keep)
        if len(rest):
            first_member = np.full(self.n_classes, -1, dtype=np.int64)
            ids = np.arange(self.n_tuples - 1, -1, -1, dtype=np.int64)
            first_member[self.labels[ids]] = ids
            values[rest] = self._first_coordinate(first_member[rest])
        return SAT, values, steps

    def _first_coordinate(self, tuple_ids: np.ndarray) -> np.ndarray:
        out = np.empty(len(tuple_ids), dtype=np.int64)
        offsets = np.asarray(self.offset)
        which = np.searchsorted(offsets, tuple_ids, side="right") - 1
        for si in np.unique(which):
            sel = which == si
            scope = self.scopes[self.condition.symbols[si].arity]
            out[sel] = scope.tuples[tuple_ids[sel] - self.offset[si], 0]
        return out

    def witness(self, values: np.ndarray) -> Witness:
        n = self.h.n
        tables = {}
        for si, s in enumerate(self.condition.symbols):
            scope = self.scopes[s.arity]
            table = np.full(n ** s.arity, -1, dtype=np.int64)
            table[scope.glob] = values[self.labels[self.offset[si]:self.offset[si] + len(scope.glob)]]
            tables[s.name] = table
        return Witness(self.condition, self.mode, n, tables)


def build_indicator(h: Digraph, c: LinearCondition, mode: str = FULL,
                    idempotent: bool = True) -> IndicatorInstance:
    """Raises ImmediateUnsat on clashing pins and UnbalancedError in level-wise mode."""
    if c.total_symmetry is not None:
        raise ValueError("use build_subset_instance for total symmetry")
    return IndicatorInstance(h, c, mode, idempotent)


# total symmetry -----------------------------------------------------------------

def _matching(a_bits: list[int], b_mask: int, succ: tuple[int, ...]) -> int:
    """Maximum matching between the vertices of A and B along edges A -> B."""
    match: dict[int, int] = {}

    def augment(a: int, seen: set) -> bool:
        for b in _bits(succ[a] & b_mask):
            if b in seen:
                continue
            seen.add(b)
            if b not in match or augment(match[b], seen):
                match[b] = a
                return True
        return False

    return sum(1 for a in a_bits if augment(a, set()))


class SubsetInstance:
    """Subset digraph for total symmetry of a given arity (None: every arity)."""

    def __init__(self, h: Digraph, arity: int | None, mode: str = LEVELWISE,
                 idempotent: bool = True, max_subsets: int = 1 << 20):
        self.h, self.arity, self.mode, self.idempotent = h, arity, mode, idempotent
        limit = h.n if arity is None else min(arity, h.n)
        if mode == LEVELWISE:
            lvl = levels(h)
            groups: dict[int, list[int]] = {}
            for v, lv in enumerate(lvl):
                groups.setdefault(lv, []).append(v)
            self.level = lvl
        elif mode == FULL:
            groups = {0: list(range(h.n))}
            self.level = None
        else:
            raise ValueError(f"unknown mode {mode!r}")
        total = sum((1 << len(vs)) - 1 for vs in groups.values())
        if total > max_subsets:
            raise ResourceLimit(f"subset digraph needs {total} vertices (budget {max_subsets})")
        self.subsets: list[int] = []
        for lv in sorted(groups):
            for m in self._submasks(_mask(groups[lv]), limit):
                self.subsets.append(m)
        self.index = {m: i for i, m in enumerate(self.subsets)}
        succ = h.succ_masks
        src, dst = [], []
        for i, a in enumerate(self.subsets):
            a_bits = _bits(a)
            reach = 0
            for u in a_bits:
                reach |= succ[u]
            if not reach:
                continue
            for b in self._submasks(reach, limit):
                if not all(succ[u] & b for u in a_bits):
                    continue
                if arity is not None:
                    nb = bin(b).count("1")
                    if len(a_bits) + nb - _matching(a_bits, b, succ) > arity:
                        continue
                j = self.index.get(b)
                if j is not None:
                    src.append(i)
                    dst.append(j)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.pins = np.full(len(self.subsets), -1, dtype=np.int64)
        if idempotent:
            for v in range(h.n):
                self.pins[self.index[1 << v]] = v

    @staticmethod
    def _submasks(mask: int, limit: int) -> Iterator[int]:
        sub = mask
        out = []
        while sub:
            if bin(sub).count("1") <= limit:
                out.append(sub)
            sub = (sub - 1) & mask
        out.sort()
        return iter(out)

    @property
    def quotient(self) -> Digraph:
        return Digraph(len(self.subsets), tuple(zip(self.src.tolist(), self.dst.tolist())))

    def solve(self, budget: int | None = None):
        inst = Instance(len(self.subsets), self.src, self.dst, self.h)
        full = (1 << self.h.n) - 1
        doms = [full if p < 0 else 1 << int(p) for p in self.pins.tolist()]
        status, dom, steps = inst.solve(doms, budget=budget)
        self.stats = {"classes": len(self.subsets), "edges": int(len(self.src))}
        if status != SAT:
            return status, None, steps
        return SAT, [d.bit_length() - 1 for d in dom], steps

    def witness(self, values, condition: LinearCondition) -> Witness:
        return Witness(condition, self.mode, self.h.n,
                       subset_map={m: int(v) for m, v in zip(self.subsets, values)})


def build_subset_instance(h: Digraph, arity: int | None, mode: str = LEVELWISE,
                          idempotent: bool = True) -> SubsetInstance:
    return SubsetInstance(h, arity, mode, idempotent)


# witness extension off the levels -------------------------------------------------

def extend_levelwise(w: Witness, h: Digraph) -> Witness:
    """Total operations from a level-wise witness.

    Off-level tuples take the coordinate with the smallest index among those
    on the lowest level; for total symmetry a set is sent to the value of its
    lowest-level part.
    """
    lvl = np.asarray(levels(h), dtype=np.int64)
    if w.subset_map is not None:
        return Witness(w.condition, EXTENDED, w.n, subset_map=dict(w.subset_map),
                       levels=lvl.tolist())
    tables = {}
    for s in w.condition.symbols:
        table = w.tables[s.name].copy()
        undefined = np.flatnonzero(table < 0)
        if len(undefined):
            coords = _decode(undefined, w.n, s.arity)
            lv = lvl[coords]
            j = np.argmax(lv == lv.min(axis=1, keepdims=True), axis=1)
            table[undefined] = coords[np.arange(len(undefined)), j]
        tables[s.name] = table
    return Witness(w.condition, FULL, w.n, tables)


def _decode(ids: np.ndarray, n: int, k: int) -> np.ndarray:
    out = np.empty((len(ids), k), dtype=np.int64)
    rem = ids.copy()
    for i in range(k - 1, -1, -1):
        out[:, i] = rem % n
        rem //= n
    return out


def _lowest_part(mask: int, lvl) -> int:
    bits = _bits(mask)
    low = min(lvl[b] for b in bits)
    return _mask(b for b in bits if lvl[b] == low)


# verification ---------------------------------------------------------------------

@dataclass
class Verification:
    ok: bool
    counterexample: str = ""

    def __bool__(self):
        return self.ok


def _edge_tuples(h: Digraph, k: int, lvl=None):
    """(source ids, target ids) of all edges of H^k, optionally same-level only."""
    n = h.n
    es = np.asarray([u for u, _ in h.edges], dtype=np.int64)
    ed = np.asarray([v for _, v in h.edges], dtype=np.int64)
    if lvl is None:
        groups = [(es, ed)]
    else:
        groups = [(es[lvl[es] == L], ed[lvl[es] == L]) for L in np.unique(lvl[es])] if len(es) else []
    for gs, gd in groups:
        s, d = gs.copy(), gd.copy()
        for _ in range(k - 1):
            s = (s[:, None] * n + gs[None, :]).ravel()
            d = (d[:, None] * n + gd[None, :]).ravel()
        yield s, d


def verify_witness(h: Digraph, c: LinearCondition, w: Witness,
                   sample_edges: int = 300) -> Verification:
    """Check edges, identities and (level-wise) the projection extension.

    For level-wise total symmetry the extension is checked on the whole
    subset digraph when ``H`` has at most 10 vertices and on ``sample_edges``
    random edge tuples otherwise.
    """
    if w.subset_map is not None:
        return _verify_subsets(h, c, w, sample_edges)
    n = h.n
    edge_set = np.zeros((n, n), dtype=bool)
    for u, v in h.edges:
        edge_set[u, v] = True
    lvl = np.asarray(levels(h), dtype=np.int64) if w.mode == LEVELWISE else None
    for s in c.symbols:
        table = w.tables.get(s.name)
        if table is None or len(table) != n ** s.arity:
            return Verification(False, f"missing or malformed table for {s.name}")
        for src, dst in _edge_tuples(h, s.arity, lvl):
            a, b = table[src], table[dst]
            bad = (a < 0) | (b < 0)
            bad |= ~edge_set[np.maximum(a, 0), np.maximum(b, 0)]
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                return Verification(False, f"{s.name} maps edge {tuple(_decode(src[i:i+1], n, s.arity)[0])}"
                                           f" -> {tuple(_decode(dst[i:i+1], n, s.arity)[0])} to a non-edge")
    groups = [np.arange(n)] if lvl is None else [np.flatnonzero(lvl == L) for L in np.unique(lvl)]
    for e in c.identities:
        vs = sorted(e.variables())
        cols = {v: i for i, v in enumerate(vs)}
        for verts in groups:
            grids = np.meshgrid(*([verts] * len(vs)), indexing="ij")
            assign = np.stack([g.ravel() for g in grids], axis=1)
            lhs = _evaluate(e.lhs, cols, assign, w, n)
            rhs = _evaluate(e.rhs, cols, assign, w, n)
            bad = lhs != rhs
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                env = ", ".join(f"{_var_name(v)}={int(assign[i, cols[v]])}" for v in vs)
                return Verification(False, f"identity {e} fails at {env}: {lhs[i]} != {rhs[i]}")
    if w.mode == LEVELWISE:
        ext = extend_levelwise(w, h)
        for s in c.symbols:
            table = ext.tables[s.name]
            for src, dst in _edge_tuples(h, s.arity):
                if not edge_set[table[src], table[dst]].all():
                    return Verification(False, f"projection extension of {s.name} is not a polymorphism")
    return Verification(True)


def _evaluate(t, cols, assign, w: Witness, n: int) -> np.ndarray:
    if isinstance(t, Var):
        return assign[:, cols[t.index]]
    idx = np.zeros(len(assign), dtype=np.int64)
    for a in t.args:
        idx = idx * n + assign[:, cols[a]]
    return w.tables[t.symbol][idx]


def _verify_subsets(h: Digraph, c: LinearCondition, w: Witness, sample_edges: int,
                    exhaustive_below: int = 11) -> Verification:
    arity = c.total_symmetry.arity if c.total_symmetry else None
    m = w.subset_map
    # in-scope edges: rebuild the subset digraph without pins
    inst = SubsetInstance(h, arity, FULL if w.mode == FULL else LEVELWISE, idempotent=False)
    for a, b in zip(inst.src.tolist(), inst.dst.tolist()):
        sa, sb = inst.subsets[a], inst.subsets[b]
        if sa not in m or sb not in m:
            return Verification(False, f"subset {_bits(sa if sa not in m else sb)} has no value")
        if not h.has_edge(m[sa], m[sb]):
            return Verification(False, f"sets {_bits(sa)} -> {_bits(sb)} map to a non-edge")
    if inst.mode == LEVELWISE and is_balanced(h):
        lvl = levels(h)

        def ext(mask: int) -> int | None:
            return m.get(_lowest_part(mask, lvl))

        if h.n <= exhaustive_below:
            # every edge of the full subset digraph
            whole = SubsetInstance(h, arity, FULL, idempotent=False)
            pairs = zip(whole.src.tolist(), whole.dst.tolist())
            for a, b in pairs:
                fa, fb = ext(whole.subsets[a]), ext(whole.subsets[b])
                if fa is None or fb is None or not h.has_edge(fa, fb):
                    return Verification(False, f"lowest-level extension fails on sets "
                                               f"{_bits(whole.subsets[a])} -> {_bits(whole.subsets[b])}")
        else:
            rng = random.Random(0)
            edges = list(h.edges)
            k = min(arity or 6, 6)
            for _ in range(sample_edges if edges else 0):
                picks = [edges[rng.randrange(len(edges))] for _ in range(rng.randint(1, k))]
                fa = ext(_mask(u for u, _ in picks))
                fb = ext(_mask(v for _, v in picks))
                if fa is None or fb is None or not h.has_edge(fa, fb):
                    return Verification(False, f"lowest-level extension fails on edges {picks}")
    return Verification(True)


# decision procedure -----------------------------------------------------------------

def _default_idempotent(h: Digraph) -> bool:
    if is_core(h):
        return True
    log.warning("template is not a core; idempotence precolouring is switched off")
    return False


def _run(h: Digraph, c: LinearCondition, mode: str, idempotent: bool,
         budget: int | None) -> Decision:
    lw = mode == LEVELWISE
    try:
        if c.total_symmetry is not None:
            inst = SubsetInstance(h, c.total_symmetry.arity, mode, idempotent)
        else:
            inst = IndicatorInstance(h, c, mode, idempotent)
    except ImmediateUnsat:
        return Decision("lw-unsat" if lw else "unsat", mode=mode, stats={"pin-clash": True})
    status, values, steps = inst.solve(budget)
    stats = dict(inst.stats)
    if status == TIMEOUT:
        return Decision("timeout", mode=mode, steps=steps, stats=stats)
    if status == UNSAT:
        return Decision("lw-unsat" if lw else "unsat", mode=mode, steps=steps, stats=stats)
    if isinstance(inst, SubsetInstance):
        w = inst.witness(values, c)
    else:
        w = inst.witness(values)
    return Decision("lw-sat" if lw else "sat", witness=w, mode=mode, steps=steps, stats=stats)


def decide(h: Digraph, c: LinearCondition, mode: str = AUTO, idempotent: bool | None = None,
           budget: int | None = None) -> Decision:
    """Whether ``h`` has polymorphisms satisfying ``c``.

    ``mode=levelwise`` returns lw-sat / lw-unsat as computed.  ``auto`` tries
    the level-wise test first on balanced templates: lw-unsat is final, and
    lw-sat is final for conditions flagged level-wise safe (the witness is
    extended to all tuples); otherwise the full test decides.  A timeout is
    never turned into unsat.
    """
    if mode not in (FULL, LEVELWISE, AUTO):
        raise ValueError(f"unknown mode {mode!r}")
    if idempotent is None:
        idempotent = _default_idempotent(h)
    if mode == LEVELWISE:
        if not is_balanced(h):
            raise UnbalancedError("level-wise mode needs a balanced digraph")
        d = _run(h, c, LEVELWISE, idempotent, budget)
        if d.witness is not None:
            _check(h, c, d.witness)
        return d
    if mode == AUTO and is_balanced(h):
        d = _run(h, c, LEVELWISE, idempotent, budget)
        if d.verdict == "lw-unsat":
            d.verdict = "unsat"
            return d
        if d.verdict == "timeout":
            return d
        if c.levelwise_safe:
            w = extend_levelwise(d.witness, h)
            _check(h, c, w)
            return Decision("sat", w, LEVELWISE, d.steps, d.stats)
    d = _run(h, c, FULL, idempotent, budget)
    if d.witness is not None:
        _check(h, c, d.witness)
    return d


def _check(h: Digraph, c: LinearCondition, w: Witness) -> None:
    res = verify_witness(h, c, w)
    if not res:
        raise AssertionError(f"witness for {c.name} failed verification: {res.counterexample}")


def check_total_symmetry_all(h: Digraph, idempotent: bool | None = None,
                             budget: int | None = None) -> Decision:
    """Totally symmetric polymorphisms of every arity, i.e. solvability by arc consistency."""
    return decide(h, builtin("ts-all"), AUTO, idempotent, budget)


# witness files -----------------------------------------------------------------------

def witness_lines(w: Witness) -> Iterator[str]:
    """``f(a1,...,ak) = b`` per defined tuple, symbols in declaration order."""
    if w.subset_map is not None:
        name = w.condition.symbols[0].name if w.condition.symbols else "s"
        for m in sorted(w.subset_map, key=lambda m: (bin(m).count("1"), _bits(m))):
            yield f"{name}{{{','.join(map(str, _bits(m)))}}} = {w.subset_map[m]}"
        return
    for s in w.condition.symbols:
        table = w.tables[s.name]
        coords = _decode(np.arange(len(table), dtype=np.int64), w.n, s.arity)
        for row, val in zip(coords.tolist(), table.tolist()):
            if val >= 0:
                yield f"{s.name}({','.join(map(str, row))}) = {val}"


def write_witness(w: Witness, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in witness_lines(w):
            fh.write(line + "\n")
