import pytest

from treecsp.consistency import find_homomorphism
from treecsp.cores import (
    BoundExceeded,
    core_of,
    endomorphisms_bruteforce,
    iter_endomorphisms,
    is_core,
    is_core_tree,
    is_rooted_core,
)
from treecsp.digraph import Bicenter, Digraph, RootedTree, as_tree, canonical_encoding, center_or_bicenter, reverse
from treecsp.generation import generate_core_trees

from oracles import brute_is_core, tree_orientations


def rooted(edges, n, root):
    return RootedTree(as_tree(Digraph(n, tuple(edges))), root)


class TestIsCoreTree:
    def test_small(self, edge, path3):
        assert is_core_tree(Digraph(1, ()))
        assert is_core_tree(edge)
        assert is_core_tree(path3)
        assert not is_core_tree(Digraph(3, ((1, 0), (1, 2))))
        assert not is_core_tree(Digraph(3, ((0, 1), (2, 1))))

    def test_fixtures(self, tree_b1, tree_c, tree_d):
        assert is_core_tree(tree_b1)
        assert is_core_tree(tree_c)
        assert is_core_tree(tree_d)

    @pytest.mark.parametrize("n", range(1, 10))
    def test_matches_endomorphism_oracle(self, n):
        # core iff the identity is the only endomorphism iff all endomorphisms are injective
        ident = tuple(range(n))
        for t in tree_orientations(n):
            only_identity = all_injective = True
            for f in iter_endomorphisms(t):
                if f != ident:
                    only_identity = False
                if len(set(f)) < n:
                    all_injective = False
                    break
            assert is_core_tree(t) == only_identity == all_injective

    @pytest.mark.parametrize("n", range(1, 9))
    def test_matches_search_oracle_and_reverse(self, n):
        for t in tree_orientations(n):
            got = is_core_tree(t)
            assert got == brute_is_core(t)
            assert got == is_core_tree(reverse(t))

    def test_large_tree_uses_python_route(self):
        path = Digraph(70, tuple((i, i + 1) for i in range(69)))
        assert is_core_tree(path)
        bent = Digraph(70, tuple((i, i + 1) for i in range(68)) + ((69, 68),))
        assert not is_core_tree(bent)


class TestRooted:
    def test_examples(self):
        assert is_rooted_core(rooted([], 1, 0))
        assert is_rooted_core(rooted([(0, 1), (1, 2)], 3, 1))
        assert not is_rooted_core(rooted([(1, 0), (1, 2)], 3, 1))

    def test_endomorphism_witness(self):
        # 0<-1->2 rooted at 1: collapsing 0 onto 2 fixes the root
        t = Digraph(3, ((1, 0), (1, 2)))
        assert (2, 1, 2) in endomorphisms_bruteforce(t)

    def test_cores_are_rooted_cores_at_their_middle(self):
        for n in range(1, 13):
            for t in generate_core_trees(n):
                mid = center_or_bicenter(t)
                roots = mid.edge if isinstance(mid, Bicenter) else (mid.vertex,)
                for r in roots:
                    assert is_rooted_core(RootedTree(as_tree(t), r))


class TestEndomorphisms:
    def test_examples(self, edge):
        assert endomorphisms_bruteforce(Digraph(1, ())) == [(0,)]
        assert endomorphisms_bruteforce(edge) == [(0, 1)]
        endos = endomorphisms_bruteforce(Digraph(3, ((1, 0), (1, 2))))
        # root stays put; leaves go anywhere among the leaves
        assert endos == [(0, 1, 0), (0, 1, 2), (2, 1, 0), (2, 1, 2)]

    def test_bound(self, tree_c):
        with pytest.raises(BoundExceeded):
            endomorphisms_bruteforce(tree_c)


class TestCoreOf:
    def test_fixpoint_on_cores(self, tree_c, path3):
        assert canonical_encoding(core_of(tree_c)) == canonical_encoding(tree_c)
        assert canonical_encoding(core_of(path3)) == canonical_encoding(path3)

    def test_collapses(self):
        assert canonical_encoding(core_of(Digraph(3, ((1, 0), (1, 2))))) == "B[]|[]"
        # the zigzag 0->1<-2->3 maps onto a single edge
        zig = Digraph(4, ((0, 1), (2, 1), (2, 3)))
        edge = Digraph(2, ((0, 1),))
        assert find_homomorphism(zig, edge) is not None
        assert canonical_encoding(core_of(zig)) == "B[]|[]"

    @pytest.mark.parametrize("n", range(2, 9))
    def test_properties(self, n):
        for t in list(tree_orientations(n))[::3]:
            c = core_of(t)
            assert is_core_tree(c)
            assert canonical_encoding(core_of(c)) == canonical_encoding(c)
            assert find_homomorphism(t, c) is not None
            assert find_homomorphism(c, t) is not None


class TestGeneralCore:
    def test_non_trees(self):
        k3 = Digraph(3, tuple((a, b) for a in range(3) for b in range(3) if a != b))
        assert is_core(k3)
        loop_plus = Digraph(2, ((0, 0), (0, 1)))
        assert not is_core(loop_plus)
        c6 = Digraph(6, tuple((i, (i + 1) % 6) for i in range(6)) + tuple(((i + 1) % 6, i) for i in range(6)))
        assert not is_core(c6)
