import itertools
import random

import numpy as np
import pytest

from treecsp.conditions import builtin, parse_condition, wnu
from treecsp.digraph import Digraph, UnbalancedError, reverse
from treecsp.generation import generate_core_trees
from treecsp.indicator import (
    FULL,
    LEVELWISE,
    ImmediateUnsat,
    Witness,
    build_indicator,
    build_subset_instance,
    check_total_symmetry_all,
    decide,
    verify_witness,
    witness_lines,
    write_witness,
)

from oracles import brute_satisfies, brute_total_symmetry

K3 = Digraph(3, tuple((a, b) for a in range(3) for b in range(3) if a != b))


def projection_witness(h, c, j=0):
    n = h.n
    tables = {}
    for s in c.symbols:
        coords = np.array(list(itertools.product(range(n), repeat=s.arity)), dtype=np.int64)
        tables[s.name] = coords[:, j].copy()
    return Witness(c, FULL, n, tables)


def all_digraphs(n):
    pairs = [(u, v) for u in range(n) for v in range(n)]
    for mask in range(1 << len(pairs)):
        yield Digraph(n, tuple(p for i, p in enumerate(pairs) if mask >> i & 1))


def iso_classes(n):
    seen = set()
    for g in all_digraphs(n):
        key = min(tuple(sorted((p[u], p[v]) for u, v in g.edges))
                  for p in itertools.permutations(range(n)))
        if key not in seen:
            seen.add(key)
            yield g


def table_space(h, c):
    return h.n ** sum(h.n ** s.arity for s in c.symbols)


class TestBuild:
    def test_edge_wnu2(self, edge):
        inst = build_indicator(edge, wnu(2))
        assert inst.n_classes == 3
        assert inst.class_of("f", (0, 1)) == inst.class_of("f", (1, 0))
        assert inst.quotient.edges == ((inst.class_of("f", (0, 0)), inst.class_of("f", (1, 1))),)
        assert inst.pins[inst.class_of("f", (0, 0))] == 0
        assert inst.pins[inst.class_of("f", (1, 1))] == 1
        assert inst.pins[inst.class_of("f", (0, 1))] == -1

    def test_path_levelwise(self, path3):
        inst = build_indicator(path3, wnu(2), LEVELWISE)
        assert inst.n_classes == 3
        diag = [inst.class_of("f", (v, v)) for v in range(3)]
        assert set(inst.quotient.edges) == {(diag[0], diag[1]), (diag[1], diag[2])}
        assert [int(inst.pins[d]) for d in diag] == [0, 1, 2]
        with pytest.raises(KeyError):
            inst.class_of("f", (0, 1))

    def test_single_vertex_kmm(self):
        inst = build_indicator(Digraph(1, ()), builtin("kmm"))
        assert inst.n_classes == 1 and inst.pins.tolist() == [0]
        assert decide(Digraph(1, ()), builtin("kmm"), FULL).verdict == "sat"

    def test_classes_numbered_by_first_tuple(self, path3):
        inst = build_indicator(path3, builtin("kmm"))
        firsts = [int(np.flatnonzero(inst.labels == q)[0]) for q in range(inst.n_classes)]
        assert firsts == sorted(firsts)

    def test_pin_clash(self, edge):
        c = parse_condition("f(x,y) = x\nf(x,y) = y")
        with pytest.raises(ImmediateUnsat):
            build_indicator(edge, c)
        assert decide(edge, c, FULL).verdict == "unsat"

    def test_pin_clash_through_merge(self, edge):
        c = parse_condition("f(x,y) = g(x,y)\nf(x,y) = x\ng(x,y) = y")
        with pytest.raises(ImmediateUnsat):
            build_indicator(edge, c)

    def test_unbalanced_levelwise(self):
        cyc = Digraph(3, ((0, 1), (1, 2), (2, 0)))
        with pytest.raises(UnbalancedError):
            build_indicator(cyc, wnu(2), LEVELWISE)
        with pytest.raises(UnbalancedError):
            decide(cyc, wnu(2), LEVELWISE)

    def test_subset_instance_path(self, path3):
        inst = build_subset_instance(path3, None, LEVELWISE)
        assert len(inst.subsets) == 3


class TestDecide:
    def test_examples(self, edge, tree_c, tree_d):
        assert decide(edge, wnu(2), FULL).verdict == "sat"
        assert decide(tree_c, wnu(2)).verdict == "unsat"
        assert decide(K3, builtin("kmm"), FULL).verdict == "unsat"
        d = decide(tree_d, builtin("kk-5"))
        assert d.verdict == "sat" and verify_witness(tree_d, builtin("kk-5"), d.witness)

    def test_total_symmetry(self, path3, edge, tree_c):
        assert check_total_symmetry_all(path3).verdict == "sat"
        assert check_total_symmetry_all(edge).verdict == "sat"
        assert check_total_symmetry_all(tree_c).verdict == "unsat"

    def test_levelwise_verdict_names(self, tree_d):
        assert decide(tree_d, builtin("majority"), LEVELWISE).verdict in ("lw-sat", "lw-unsat")
        assert decide(tree_d, builtin("jonsson-2"), LEVELWISE).verdict == "lw-unsat"

    def test_timeout_not_unsat(self, tree_d):
        d = decide(tree_d, builtin("kk-5"), FULL, budget=5)
        assert d.verdict == "timeout" and d.witness is None

    def test_non_core_switches_idempotence_off(self, caplog):
        star = Digraph(3, ((1, 0), (1, 2)))
        d = decide(star, wnu(2), FULL)
        assert d.verdict == "sat"
        assert "not a core" in caplog.text

    def test_bad_mode(self, edge):
        with pytest.raises(ValueError):
            decide(edge, wnu(2), "sideways")


class TestVerify:
    def test_projection_hmck_end(self, path3):
        c = parse_condition("d0(x,y,z) = x")
        assert verify_witness(path3, c, projection_witness(path3, c))

    def test_projection_not_symmetric(self, edge):
        res = verify_witness(edge, wnu(2), projection_witness(edge, wnu(2)))
        assert not res and "x=0, y=1" in res.counterexample

    def test_catches_broken_edge(self, path3):
        c = wnu(2)
        w = projection_witness(path3, c)
        w.tables["f"][0] = 2  # f(0,0) = 2 breaks (0,0)->(1,1)
        assert not verify_witness(path3, c, w)


# oracle equivalence over the table-space <= 2^20 grid ----------------------------------

# every builtin whose tables on two vertices fit in 2^20 choices
TWO_VERTEX = ["wnu-2", "wnu-3", "wnu-4", "majority", "nu-4", "kmm", "hm-1", "hm-2", "jonsson-0",
              "nn-0"]
PAIR_BINARY = "f(x,y) = g(y,x)\nf(x,x) = g(x,y)"


class TestOracle:
    @pytest.mark.parametrize("name", TWO_VERTEX)
    def test_two_vertex_digraphs(self, name):
        c = builtin(name)
        for h in all_digraphs(2):
            assert table_space(h, c) <= 2 ** 20
            for idem in (False, True):
                want = brute_satisfies(h, c, idem)
                got = decide(h, c, FULL, idempotent=idem)
                assert got.verdict == ("sat" if want else "unsat"), (h, idem)
                auto = decide(h, c, "auto", idempotent=idem)
                assert auto.verdict == got.verdict

    def test_pair_of_binary_symbols(self):
        c = parse_condition(PAIR_BINARY)
        for h in all_digraphs(2):
            for idem in (False, True):
                want = brute_satisfies(h, c, idem)
                assert decide(h, c, FULL, idempotent=idem).sat == want

    def test_binary_on_three_vertices(self):
        c = wnu(2)
        for h in iso_classes(3):
            for idem in (False, True):
                want = brute_satisfies(h, c, idem)
                assert decide(h, c, FULL, idempotent=idem).sat == want, (h, idem)

    @pytest.mark.parametrize("arity", [1, 2, 3, None])
    def test_total_symmetry_two_vertices(self, arity):
        c = builtin("ts-all") if arity is None else builtin("ts", arity)
        for h in all_digraphs(2):
            for idem in (False, True):
                want = brute_total_symmetry(h, arity, idem)
                assert decide(h, c, FULL, idempotent=idem).sat == want, (h, arity, idem)

    @pytest.mark.parametrize("arity", [2, 3, None])
    def test_total_symmetry_three_vertices(self, arity):
        c = builtin("ts-all") if arity is None else builtin("ts", arity)
        rnd = random.Random(arity or 0)
        graphs = list(iso_classes(3))
        for h in rnd.sample(graphs, 40):
            idem = rnd.random() < 0.5
            want = brute_total_symmetry(h, arity, idem)
            assert decide(h, c, FULL, idempotent=idem).sat == want, (h, arity, idem)


# properties over small core trees ----------------------------------------------------------

SMALL = ["kmm", "wnu-2", "wnu-3", "wnu34", "majority", "jonsson-1", "hm-1", "hm-2", "kk-2",
         "kk-3", "hmck-1", "nn-1", "ts-2", "ts-all"]
SAFE = ["kmm", "wnu-2", "wnu-3", "wnu-4", "wnu34", "ts-2", "ts-3", "ts-all"]


def cores_up_to(n):
    return [t for m in range(1, n + 1) for t in generate_core_trees(m)]


class TestTreeProperties:
    @pytest.mark.parametrize("name", SMALL)
    def test_reverse_invariance(self, name):
        c = builtin(name)
        for t in cores_up_to(10):
            for mode in (FULL, "auto"):
                assert decide(t, c, mode).verdict == decide(reverse(t), c, mode).verdict

    @pytest.mark.parametrize("name", SMALL)
    def test_levelwise_unsat_means_unsat(self, name):
        c = builtin(name)
        for t in cores_up_to(10):
            if decide(t, c, LEVELWISE).verdict == "lw-unsat":
                assert decide(t, c, FULL).verdict == "unsat"

    @pytest.mark.parametrize("name", SAFE)
    def test_levelwise_complete_for_safe(self, name):
        c = builtin(name)
        for t in cores_up_to(10):
            lw = decide(t, c, LEVELWISE).verdict
            full = decide(t, c, FULL).verdict
            assert lw == "lw-" + full

    def test_chain_monotone_and_implications(self):
        rnd = random.Random(12)
        trees = cores_up_to(9) + rnd.sample(list(generate_core_trees(11)), 25) \
            + rnd.sample(list(generate_core_trees(12)), 25)

        def sat(t, name):
            return decide(t, builtin(name)).sat

        for t in trees:
            for fam, lo, hi in (("hm", 1, 4), ("jonsson", 0, 2), ("kk", 2, 5), ("nn", 0, 3)):
                verdicts = [sat(t, f"{fam}-{k}") for k in range(lo, hi + 1)]
                assert verdicts == sorted(verdicts), (fam, verdicts)
            if sat(t, "majority"):
                assert sat(t, "jonsson-1")
            if sat(t, "ts-4"):
                assert sat(t, "wnu34")
            for n in (0, 1):
                if sat(t, f"jonsson-{n}"):
                    assert sat(t, f"kk-{2 * n + 4}")


class TestWitnessFiles:
    def test_round_trip(self, tmp_path, tree_c):
        c = builtin("majority")
        d = decide(tree_c, c)
        p = tmp_path / "w.txt"
        write_witness(d.witness, str(p))
        lines = p.read_text().splitlines()
        assert lines == list(witness_lines(d.witness))
        assert len(lines) == tree_c.n ** 3
        table = {}
        for line in lines:
            lhs, rhs = line.split(" = ")
            args = tuple(int(a) for a in lhs[2:-1].split(","))
            table[args] = int(rhs)
        for a in range(tree_c.n):
            for b in range(tree_c.n):
                assert table[(a, a, b)] == table[(a, b, a)] == table[(b, a, a)] == a

    def test_subset_witness_lines(self, path3):
        d = check_total_symmetry_all(path3)
        lines = list(witness_lines(d.witness))
        assert "s{0} = 0" in lines and "s{2} = 2" in lines

    def test_levelwise_witness_undefined_off_level(self, path3):
        d = decide(path3, builtin("majority"), LEVELWISE)
        assert d.verdict == "lw-sat"
        assert all(line.count("(") == 1 for line in witness_lines(d.witness))
        assert len(list(witness_lines(d.witness))) == 3
