import pytest
from hypothesis import given, strategies as st

from treecsp.conditions import (
    App,
    ConditionError,
    FunctionSymbol,
    LinearCondition,
    LinearIdentity,
    Var,
    builtin,
    entails,
    hm,
    is_valid,
    jonsson,
    kk,
    load_condition_file,
    nn,
    parse_condition,
    substitute,
    two_variable_criterion,
    validate,
    wnu,
)

SAFE = {"kmm", "wnu-2", "wnu-3", "wnu-5", "wnu34", "ts-2", "ts-all"}
UNSAFE = {"majority", "nu-4", "jonsson-1", "hm-1", "hm-3", "kk-2", "kk-5", "hmck-0", "hmck-2",
          "nn-0", "nn-3"}


def ceil_half(n):
    return (n + 1) // 2


class TestBuiltins:
    def test_wnu2(self):
        c = wnu(2)
        assert [(s.name, s.arity) for s in c.symbols] == [("f", 2)]
        assert [str(e) for e in c.identities] == ["f(y,x) = f(x,y)"]

    def test_maltsev(self):
        c = hm(1)
        assert [s.arity for s in c.symbols] == [3]
        assert [str(e) for e in c.identities] == ["x = p1(x,y,y)", "p1(x,x,y) = y"]

    def test_kmm(self):
        c = builtin("kmm")
        assert [s.arity for s in c.symbols] == [3, 3]
        assert len(c.identities) == 3
        assert all(e.height_one for e in c.identities)

    @pytest.mark.parametrize("name", sorted(SAFE | UNSAFE))
    def test_safe_flag(self, name):
        c = builtin(name)
        assert c.levelwise_safe == (name in SAFE)
        assert is_valid(c)

    # identity counts, hand-counted from the chain definitions
    @pytest.mark.parametrize("n", range(0, 6))
    def test_jonsson_count(self, n):
        # x=j1(x,x,y); n links on (x,y,y); 2n+1 absorptions j_i(x,y,x)=x; n links on (x,x,y); last = y
        c = jonsson(n)
        assert len(c.symbols) == 2 * n + 1
        assert len(c.identities) == 4 * n + 3

    @pytest.mark.parametrize("n", range(1, 7))
    def test_hm_count(self, n):
        assert len(hm(n).identities) == n + 1

    @pytest.mark.parametrize("n", range(2, 9))
    def test_kk_count(self, n):
        # two projection ends, two links at each even i < n, one link at each odd i < n
        c = kk(n)
        assert len(c.symbols) == n + 1
        assert len(c.identities) == 2 + 2 * ceil_half(n) + n // 2

    @pytest.mark.parametrize("n", range(0, 6))
    def test_nn_count(self, n):
        assert len(nn(n).identities) == 2 * n + 2

    @pytest.mark.parametrize("n", range(0, 5))
    def test_hmck_count(self, n):
        c = builtin("hmck", n)
        assert len(c.identities) == 4 + 3 * n
        assert len(c.symbols) == 2 * n + 3

    def test_other_counts(self):
        assert len(builtin("kmm").identities) == 3
        assert len(builtin("wnu34").identities) == 6
        assert len(builtin("nu-5").identities) == 5
        assert len(builtin("wnu-5").identities) == 4
        assert builtin("majority").identities == builtin("nu-3").identities

    def test_names(self):
        assert builtin("hm-3").name == "hm-3"
        assert builtin("hm", 3).name == "hm-3"
        assert builtin("ts-all").total_symmetry.arity is None
        assert builtin("ts-4").total_symmetry.arity == 4

    @pytest.mark.parametrize("bad", ["foo", "hm-0", "kk-1", "wnu-1", "ts-0", "jonsson--1", "nu-2"])
    def test_bad_names(self, bad):
        with pytest.raises(ConditionError):
            builtin(bad)


class TestSafeCriterion:
    @pytest.mark.parametrize("name", sorted(SAFE - {"ts-2", "ts-all"}))
    def test_safe_are_two_variable(self, name):
        c = builtin(name)
        for e in c.identities:
            assert e.height_one
            assert len(e.variables()) == 2
            assert e.lhs.variables() == e.rhs.variables() == e.variables()

    def test_ts_carries_marker(self):
        assert builtin("ts-all").total_symmetry is not None
        assert not two_variable_criterion(builtin("ts-all"))


class TestValidate:
    def test_kmm_ok(self):
        assert validate(builtin("kmm")) == []

    def test_variable_only(self):
        c = LinearCondition("bad", (FunctionSymbol("f", 2),),
                            (LinearIdentity(Var(0), Var(1)),
                             LinearIdentity(App("f", (0, 1)), App("f", (1, 0)))))
        assert any("one-element" in i.message and i.level == "error" for i in validate(c))

    def test_cleared_flag_warns(self):
        c = wnu(2)
        cleared = LinearCondition(c.name, c.symbols, c.identities, False)
        issues = validate(cleared)
        assert is_valid(cleared)
        assert any(i.level == "warning" for i in issues)

    def test_false_safe_flag(self):
        c = builtin("majority")
        forged = LinearCondition(c.name, c.symbols, c.identities, True)
        assert not is_valid(forged)

    def test_arity_and_undeclared(self):
        c = LinearCondition("bad", (FunctionSymbol("f", 2),),
                            (LinearIdentity(App("f", (0, 1, 1)), App("g", (1, 0))),))
        msgs = [i.message for i in validate(c)]
        assert any("arity" in m for m in msgs) and any("undeclared" in m for m in msgs)


class TestGrammar:
    def test_chain_split(self):
        c = parse_condition("p(x,y,y) = q(y,x,x) = q(x,x,y)\np(x,y,x) = q(x,y,x)  # kmm")
        assert [str(e) for e in c.identities] == [str(e) for e in builtin("kmm").identities]
        assert c.levelwise_safe

    def test_arity_inferred_and_pins(self):
        c = parse_condition("f(x,y,y) = x\nf(y,x,x) = x\n")
        assert [(s.name, s.arity) for s in c.symbols] == [("f", 3)]
        assert not c.levelwise_safe

    @pytest.mark.parametrize("bad", ["", "f(x,y)", "x = y", "f(x,y) = f(x)", "f(x,y = y"])
    def test_errors(self, bad):
        with pytest.raises(ConditionError):
            parse_condition(bad)

    def test_file(self, tmp_path):
        p = tmp_path / "sym.txt"
        p.write_text("# binary symmetric\nf(x,y) = f(y,x)\n")
        c = load_condition_file(str(p))
        assert c.name == "sym" and c.levelwise_safe

    @given(st.sampled_from(sorted(SAFE - {"ts-2", "ts-all"}) + sorted(UNSAFE)))
    def test_print_parse_round_trip(self, name):
        c = builtin(name)
        back = parse_condition(str(c))
        assert [str(e) for e in back.identities] == [str(e) for e in c.identities]
        assert back.levelwise_safe == two_variable_criterion(c)


class TestMonotone:
    """The longer chain is the shorter one padded with projections."""

    def _implied(self, short, long, pad):
        return all(entails(short.identities, e) for e in substitute(long, pad))

    @pytest.mark.parametrize("n", range(0, 5))
    def test_jonsson(self, n):
        pad = {f"j{2 * n + 2}": 2, f"j{2 * n + 3}": 2}
        assert self._implied(jonsson(n), jonsson(n + 1), pad)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_hm(self, n):
        assert self._implied(hm(n), hm(n + 1), {f"p{n + 1}": 2})

    @pytest.mark.parametrize("n", range(2, 7))
    def test_kk(self, n):
        assert self._implied(kk(n), kk(n + 1), {f"d{n + 1}": 2})

    @pytest.mark.parametrize("n", range(0, 5))
    def test_nn(self, n):
        assert self._implied(nn(n), nn(n + 1), {f"f{n + 1}": 3})

    def test_not_the_other_way(self):
        # padding the short chain does not yield the long one for free
        assert not all(entails(hm(2).identities, e) for e in hm(1).identities)

    def test_majority_gives_jonsson(self):
        # NU(3) = J(0) and J(0) implies J(1)
        maj = builtin("majority")
        j0 = substitute(jonsson(0), {"j1": "f"})
        assert all(entails(maj.identities, e) for e in j0)
