import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from treecsp import consistency
from treecsp.consistency import (
    SAT,
    TIMEOUT,
    UNSAT,
    Instance,
    SearchTimeout,
    arc_consistency,
    components,
    find_homomorphism,
    is_homomorphism,
)
from treecsp.digraph import Digraph

from oracles import all_maps, random_order_ac, supported_values

K3 = Digraph(3, tuple((a, b) for a in range(3) for b in range(3) if a != b))
K2 = Digraph(2, ((0, 1), (1, 0)))

BACKENDS = ["python"] + (["compiled"] if consistency.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = consistency.backend()
    consistency.use_backend(request.param)
    yield request.param
    consistency.use_backend(before)


def random_digraph(rnd, n, p):
    return Digraph(n, tuple((u, v) for u in range(n) for v in range(n) if rnd.random() < p))


def random_tree(rnd, n):
    edges = []
    for v in range(1, n):
        u = rnd.randrange(v)
        edges.append((u, v) if rnd.random() < 0.5 else (v, u))
    return Digraph(n, tuple(edges))


def random_lists(rnd, g, h):
    return [set(x for x in range(h.n) if rnd.random() < 0.8) or {0} for _ in range(g.n)]


class TestExamples:
    def test_k3_to_k2_no_removals(self, backend):
        assert arc_consistency(K3, K2) == [frozenset({0, 1})] * 3

    def test_edge_to_edge(self, backend, edge):
        assert arc_consistency(edge, edge) == [frozenset({0}), frozenset({1})]

    def test_path_rejected_by_edge(self, backend, path3, edge):
        assert arc_consistency(path3, edge) is None

    def test_k3_to_k2_no_homomorphism(self, backend):
        assert find_homomorphism(K3, K2) is None

    def test_tree_to_itself(self, backend, tree_c):
        f = find_homomorphism(tree_c, tree_c)
        assert f is not None and is_homomorphism(tree_c, tree_c, f)

    def test_pinned_path(self, backend, path3):
        assert find_homomorphism(path3, path3, [{0}, range(3), range(3)]) == [0, 1, 2]

    def test_bad_list(self, edge):
        with pytest.raises(ValueError):
            arc_consistency(edge, edge, [{0}, {5}])

    def test_timeout_is_distinct(self, backend):
        # odd cycles into K2 need no search to refute, so use a satisfiable instance
        big = Digraph(12, tuple((i, i + 1) for i in range(11)))
        with pytest.raises(SearchTimeout):
            find_homomorphism(big, K3, budget=1)
        inst = Instance.from_digraph(big, K3)
        status, _, steps = inst.solve([7] * 12, budget=1)
        assert status == TIMEOUT and steps >= 1


class TestConfluence:
    def test_random_orders(self, backend):
        rnd = random.Random(1)
        for trial in range(120):
            g = random_digraph(rnd, rnd.randint(1, 6), 0.3)
            h = random_digraph(rnd, rnd.randint(1, 4), 0.4)
            lists = random_lists(rnd, g, h)
            got = arc_consistency(g, h, lists)
            for k in range(5):
                assert random_order_ac(g, h, lists, random.Random(trial * 10 + k)) == got


class TestSoundness:
    def test_removed_values_unsupported(self, backend):
        rnd = random.Random(2)
        for _ in range(250):
            g = random_digraph(rnd, rnd.randint(1, 5), 0.3)
            h = random_digraph(rnd, rnd.randint(1, 4), 0.4)
            lists = random_lists(rnd, g, h)
            sup = supported_values(g, h, lists)
            got = arc_consistency(g, h, lists)
            if got is None:
                assert all(not s for s in sup)
                continue
            for x in range(g.n):
                assert sup[x] <= got[x] <= set(lists[x])

    def test_search_matches_brute_force(self, backend):
        rnd = random.Random(3)
        for _ in range(250):
            g = random_digraph(rnd, rnd.randint(1, 5), 0.3)
            h = random_digraph(rnd, rnd.randint(1, 4), 0.4)
            lists = random_lists(rnd, g, h)
            exists = next(all_maps(g, h, lists), None) is not None
            f = find_homomorphism(g, h, lists)
            assert (f is not None) == exists
            if f is not None:
                assert is_homomorphism(g, h, f) and all(f[x] in lists[x] for x in range(g.n))


class TestTreeCompleteness:
    def test_every_surviving_value_extends(self, backend):
        rnd = random.Random(4)
        for _ in range(150):
            t = random_tree(rnd, rnd.randint(1, 8))
            h = random_digraph(rnd, rnd.randint(1, 4), 0.45)
            got = arc_consistency(t, h)
            if got is None:
                continue
            sup = supported_values(t, h) if t.n <= 6 else None
            for x in range(t.n):
                for a in got[x]:
                    lists = [{a} if y == x else range(h.n) for y in range(t.n)]
                    assert find_homomorphism(t, h, lists) is not None
                if sup is not None:
                    assert got[x] == sup[x]


class TestBackends:
    @pytest.mark.skipif(not consistency.compiled_available(), reason="compiled kernel not built")
    def test_same_results(self):
        rnd = random.Random(5)
        for _ in range(200):
            g = random_digraph(rnd, rnd.randint(1, 9), 0.25)
            h = random_digraph(rnd, rnd.randint(1, 5), 0.4)
            lists = random_lists(rnd, g, h)
            out = {}
            for b in ("python", "compiled"):
                consistency.use_backend(b)
                inst = Instance.from_digraph(g, h)
                masks = consistency.lists_to_masks(lists, g.n, h)
                out[b] = (inst.solve(masks, search=False), inst.solve(masks))
            consistency.use_backend("compiled")
            assert out["python"] == out["compiled"]

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            consistency.use_backend("gpu")


class TestComponents:
    @given(st.integers(1, 30), st.lists(st.tuples(st.integers(0, 29), st.integers(0, 29)), max_size=40))
    @settings(max_examples=60)
    def test_backends_agree_and_order_by_min(self, n, pairs):
        pairs = [(a % n, b % n) for a, b in pairs]
        a = np.array([p[0] for p in pairs], dtype=np.int64)
        b = np.array([p[1] for p in pairs], dtype=np.int64)
        results = []
        for name in BACKENDS:
            consistency.use_backend(name)
            results.append(components(n, a, b))
        consistency.use_backend(BACKENDS[-1])
        k, lab = results[0]
        for k2, lab2 in results[1:]:
            assert k == k2 and lab.tolist() == lab2.tolist()
        firsts = [lab.tolist().index(c) for c in range(k)]
        assert firsts == sorted(firsts)
        for x, y in pairs:
            assert lab[x] == lab[y]
