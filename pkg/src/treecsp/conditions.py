"""Linear conditions: data model, the builtin families, a text grammar.

Terms are either a variable (an index) or a single function application whose
arguments are variable indices.  Chained equalities are stored as adjacent
pairs.  Total symmetry is kept as a marker rather than as its (huge) list of
identities; the indicator module handles it through the subset construction.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

VAR_NAMES = "xyzwuvst"


class ConditionError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arity: int


@dataclass(frozen=True)
class Var:
    index: int

    def variables(self) -> frozenset[int]:
        return frozenset((self.index,))

    def __str__(self):
        return _var_name(self.index)


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple[int, ...]

    def variables(self) -> frozenset[int]:
        return frozenset(self.args)

    def __str__(self):
        return f"{self.symbol}({','.join(_var_name(a) for a in self.args)})"


Term = Union[Var, App]


def _var_name(i: int) -> str:
    return VAR_NAMES[i] if i < len(VAR_NAMES) else f"x{i}"


@dataclass(frozen=True)
class LinearIdentity:
    lhs: Term
    rhs: Term

    @property
    def height_one(self) -> bool:
        return isinstance(self.lhs, App) and isinstance(self.rhs, App)

    def variables(self) -> frozenset[int]:
        return self.lhs.variables() | self.rhs.variables()

    def oriented(self) -> tuple[App, Term]:
        """(application, other side), putting an application on the left."""
        if isinstance(self.lhs, App):
            return self.lhs, self.rhs
        return self.rhs, self.lhs  # type: ignore[return-value]

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class TotalSymmetry:
    """Marker for TS(arity); ``arity=None`` means every arity at once."""

    arity: int | None


@dataclass(frozen=True)
class LinearCondition:
    name: str
    symbols: tuple[FunctionSymbol, ...]
    identities: tuple[LinearIdentity, ...]
    levelwise_safe: bool = False
    total_symmetry: TotalSymmetry | None = None

    def symbol(self, name: str) -> FunctionSymbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def symbol_index(self) -> dict[str, int]:
        return {s.name: i for i, s in enumerate(self.symbols)}

    def height_one_identities(self) -> list[LinearIdentity]:
        return [e for e in self.identities if e.height_one]

    def pin_identities(self) -> list[LinearIdentity]:
        return [e for e in self.identities if not e.height_one]

    def __str__(self):
        if self.total_symmetry is not None:
            a = self.total_symmetry.arity
            return f"{self.name}: totally symmetric of arity {'all' if a is None else a}"
        return "\n".join([f"# {self.name}"] + [str(e) for e in self.identities])


# construction helpers -------------------------------------------------------

def _t(spec: str) -> Term:
    """Parse one term written with single-letter variables, e.g. ``p(x,y,y)``."""
    spec = spec.strip()
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)", spec)
    if m is None:
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", spec):
            return Var(_var_index(spec))
        raise ConditionError(f"cannot parse term {spec!r}")
    args = [a.strip() for a in m.group(2).split(",")]
    if not all(args):
        raise ConditionError(f"empty argument in {spec!r}")
    return App(m.group(1), tuple(_var_index(a) for a in args))


_var_table: dict[str, int] = {c: i for i, c in enumerate(VAR_NAMES)}


def _var_index(name: str) -> int:
    if name in _var_table:
        return _var_table[name]
    m = re.fullmatch(r"x(\d+)", name)
    if m:
        return int(m.group(1))
    raise ConditionError(f"unknown variable name {name!r}")


def _chain(*terms: str) -> list[LinearIdentity]:
    ts = [_t(s) for s in terms]
    return [LinearIdentity(a, b) for a, b in zip(ts, ts[1:])]


def _app(sym: str, args: Sequence[int]) -> App:
    return App(sym, tuple(args))


def _make(name: str, identities: list[LinearIdentity], safe: bool = False,
          symbols: Sequence[FunctionSymbol] | None = None) -> LinearCondition:
    if symbols is None:
        symbols = _infer_symbols(identities)
    return LinearCondition(name, tuple(symbols), tuple(identities), safe)


def _infer_symbols(identities: Iterable[LinearIdentity]) -> list[FunctionSymbol]:
    seen: dict[str, int] = {}
    for e in identities:
        for side in (e.lhs, e.rhs):
            if isinstance(side, App):
                if side.symbol in seen and seen[side.symbol] != len(side.args):
                    raise ConditionError(
                        f"symbol {side.symbol} used with arities {seen[side.symbol]} and {len(side.args)}")
                seen.setdefault(side.symbol, len(side.args))
    return [FunctionSymbol(n, a) for n, a in seen.items()]


# builtin families ------------------------------------------------------------

def kmm() -> LinearCondition:
    ids = _chain("p(x,y,y)", "q(y,x,x)", "q(x,x,y)") + _chain("p(x,y,x)", "q(x,y,x)")
    return _make("kmm", ids, safe=True)


def _wnu_ids(sym: str, k: int) -> list[LinearIdentity]:
    terms = []
    for pos in range(k):
        args = [0] * k
        args[pos] = 1
        terms.append(_app(sym, args))
    return [LinearIdentity(a, b) for a, b in zip(terms, terms[1:])]


def wnu(k: int) -> LinearCondition:
    if k < 2:
        raise ConditionError("wnu needs arity k >= 2")
    return _make(f"wnu-{k}", _wnu_ids("f", k), safe=True)


def wnu34() -> LinearCondition:
    ids = _wnu_ids("f", 3) + _wnu_ids("g", 4) + _chain("f(x,x,y)", "g(x,x,x,y)")
    return _make("wnu34", ids, safe=True)


def nu(k: int) -> LinearCondition:
    if k < 3:
        raise ConditionError("near-unanimity needs arity k >= 3")
    terms = [Var(0)]
    for pos in range(k):
        args = [0] * k
        args[pos] = 1
        terms.append(_app("f", args))
    ids = [LinearIdentity(a, b) for a, b in zip(terms, terms[1:])]
    return _make("majority" if k == 3 else f"nu-{k}", ids)


def majority() -> LinearCondition:
    return nu(3)


def jonsson(n: int) -> LinearCondition:
    if n < 0:
        raise ConditionError("jonsson needs n >= 0")
    j = lambda i: f"j{i}"
    ids = _chain("x", f"{j(1)}(x,x,y)")
    for i in range(1, n + 1):
        ids += _chain(f"{j(2 * i - 1)}(x,y,y)", f"{j(2 * i)}(x,y,y)")
    for i in range(1, 2 * n + 2):
        ids += _chain(f"{j(i)}(x,y,x)", "x")
    for i in range(1, n + 1):
        ids += _chain(f"{j(2 * i)}(x,x,y)", f"{j(2 * i + 1)}(x,x,y)")
    ids += _chain(f"{j(2 * n + 1)}(x,y,y)", "y")
    syms = [FunctionSymbol(j(i), 3) for i in range(1, 2 * n + 2)]
    return _make(f"jonsson-{n}", ids, symbols=syms)


def hm(n: int) -> LinearCondition:
    if n < 1:
        raise ConditionError("hm needs n >= 1")
    ids = _chain("x", "p1(x,y,y)")
    for i in range(1, n):
        ids += _chain(f"p{i}(x,x,y)", f"p{i + 1}(x,y,y)")
    ids += _chain(f"p{n}(x,x,y)", "y")
    return _make(f"hm-{n}", ids, symbols=[FunctionSymbol(f"p{i}", 3) for i in range(1, n + 1)])


def hmck(n: int) -> LinearCondition:
    if n < 0:
        raise ConditionError("hmck needs n >= 0")
    ids = _chain("d0(x,y,z)", "x")
    for i in range(n):
        if i % 2 == 0:
            ids += _chain(f"d{i}(x,y,y)", f"d{i + 1}(x,y,y)")
        else:
            ids += _chain(f"d{i}(x,x,y)", f"d{i + 1}(x,x,y)")
            ids += _chain(f"d{i}(x,y,x)", f"d{i + 1}(x,y,x)")
    ids += _chain(f"d{n}(x,y,y)", "p(x,y,y)")
    ids += _chain("p(x,x,y)", "e0(x,x,y)")
    for i in range(n):
        if i % 2 == 0:
            ids += _chain(f"e{i}(x,y,y)", f"e{i + 1}(x,y,y)")
            ids += _chain(f"e{i}(x,y,x)", f"e{i + 1}(x,y,x)")
        else:
            ids += _chain(f"e{i}(x,x,y)", f"e{i + 1}(x,x,y)")
    ids += _chain(f"e{n}(x,y,z)", "z")
    syms = ([FunctionSymbol(f"d{i}", 3) for i in range(n + 1)] + [FunctionSymbol("p", 3)]
            + [FunctionSymbol(f"e{i}", 3) for i in range(n + 1)])
    return _make(f"hmck-{n}", ids, symbols=syms)


def kk(n: int) -> LinearCondition:
    if n < 2:
        raise ConditionError("kk needs n >= 2")
    ids = _chain("d0(x,y,z)", "x")
    for i in range(n):
        if i % 2 == 0:
            ids += _chain(f"d{i}(x,y,y)", f"d{i + 1}(x,y,y)")
            ids += _chain(f"d{i}(x,y,x)", f"d{i + 1}(x,y,x)")
        else:
            ids += _chain(f"d{i}(x,x,y)", f"d{i + 1}(x,x,y)")
    ids += _chain(f"d{n}(x,y,z)", "z")
    return _make(f"kk-{n}", ids, symbols=[FunctionSymbol(f"d{i}", 3) for i in range(n + 1)])


def nn(n: int) -> LinearCondition:
    if n < 0:
        raise ConditionError("nn needs n >= 0")
    ids = _chain("f0(x,y,y,z)", "x")
    for i in range(n):
        ids += _chain(f"f{i}(x,x,y,x)", f"f{i + 1}(x,y,y,x)")
        ids += _chain(f"f{i}(x,x,y,y)", f"f{i + 1}(x,y,y,y)")
    ids += _chain(f"f{n}(x,x,y,z)", "z")
    return _make(f"nn-{n}", ids, symbols=[FunctionSymbol(f"f{i}", 4) for i in range(n + 1)])


def ts(n: int | None) -> LinearCondition:
    """Total symmetry of arity ``n``, or of every arity when ``n`` is None."""
    if n is not None and n < 1:
        raise ConditionError("ts needs n >= 1")
    name = "ts-all" if n is None else f"ts-{n}"
    syms = () if n is None else (FunctionSymbol("s", n),)
    return LinearCondition(name, syms, (), True, TotalSymmetry(n))


_FAMILIES = {
    "kmm": (kmm, None),
    "wnu34": (wnu34, None),
    "majority": (majority, None),
    "ts-all": (lambda: ts(None), None),
    "wnu": (wnu, 2),
    "nu": (nu, 3),
    "ts": (ts, 1),
    "jonsson": (jonsson, 0),
    "hm": (hm, 1),
    "kk": (kk, 2),
    "hmck": (hmck, 0),
    "nn": (nn, 0),
}


def builtin(name: str, k: int | None = None) -> LinearCondition:
    """A builtin condition by family name, e.g. ``builtin("hm", 3)`` or ``builtin("hm-3")``."""
    if k is None and name in _FAMILIES and _FAMILIES[name][1] is None:
        return _FAMILIES[name][0]()
    if k is None:
        m = re.fullmatch(r"([a-z]+)-(\d+)", name)
        if m is None:
            raise ConditionError(f"unknown condition {name!r}")
        name, k = m.group(1), int(m.group(2))
    if name not in _FAMILIES or _FAMILIES[name][1] is None:
        raise ConditionError(f"unknown parametrised condition {name!r}")
    return _FAMILIES[name][0](k)


def from_cli_name(name: str) -> LinearCondition:
    return builtin(name)


# validation ------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    level: str  # "error" or "warning"
    message: str

    def __str__(self):
        return f"{self.level}: {self.message}"


def two_variable_criterion(c: LinearCondition) -> bool:
    """Every identity is height-one, uses two variables, each appearing on both sides."""
    if c.total_symmetry is not None:
        return False
    for e in c.identities:
        if not e.height_one:
            return False
        vs = e.variables()
        if len(vs) != 2 or e.lhs.variables() != vs or e.rhs.variables() != vs:
            return False
    return True


def validate(c: LinearCondition) -> list[Issue]:
    """Problems with ``c``; an empty list or warnings only means it is usable."""
    issues: list[Issue] = []
    declared: dict[str, int] = {}
    for s in c.symbols:
        if s.name in declared:
            issues.append(Issue("error", f"symbol {s.name} declared twice"))
        if s.arity < 1:
            issues.append(Issue("error", f"symbol {s.name} has arity {s.arity}"))
        declared[s.name] = s.arity
    used = set()
    for e in c.identities:
        if isinstance(e.lhs, Var) and isinstance(e.rhs, Var):
            issues.append(Issue("error", f"{e}: variable-only identity, one-element only"))
            continue
        for side in (e.lhs, e.rhs):
            if isinstance(side, App):
                used.add(side.symbol)
                if side.symbol not in declared:
                    issues.append(Issue("error", f"{e}: undeclared symbol {side.symbol}"))
                elif declared[side.symbol] != len(side.args):
                    issues.append(Issue(
                        "error", f"{e}: {side.symbol} has arity {declared[side.symbol]}, "
                                 f"used with {len(side.args)} arguments"))
        if isinstance(e.lhs, Var) or isinstance(e.rhs, Var):
            app, var = e.oriented()
            if var.index not in app.variables():  # type: ignore[union-attr]
                issues.append(Issue("error", f"{e}: the variable does not occur in the application"))
    if c.total_symmetry is not None:
        a = c.total_symmetry.arity
        if c.identities:
            issues.append(Issue("error", "total symmetry marker together with explicit identities"))
        if a is not None and a < 1:
            issues.append(Issue("error", "total symmetry arity must be positive"))
        if not c.levelwise_safe:
            issues.append(Issue("warning", "level-wise flag cleared; it is conservative"))
        return issues
    for s in declared:
        if s not in used:
            issues.append(Issue("warning", f"symbol {s} does not occur in any identity"))
    criterion = two_variable_criterion(c)
    if c.levelwise_safe and not criterion:
        issues.append(Issue("error", "marked level-wise safe but not every identity is "
                                     "height-one in two variables occurring on both sides"))
    if criterion and not c.levelwise_safe:
        issues.append(Issue("warning", "level-wise flag cleared; it is conservative"))
    return issues


def is_valid(c: LinearCondition) -> bool:
    return not any(i.level == "error" for i in validate(c))


# text grammar ----------------------------------------------------------------

def parse_condition(text: str, name: str = "custom") -> LinearCondition:
    """Parse lines like ``p(x,y,y) = q(y,x,x)``; ``a = b = c`` is split pairwise.

    ``#`` starts a comment.  The level-wise flag is set exactly when the
    two-variable criterion holds.
    """
    ids: list[LinearIdentity] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in (s.strip() for s in line.split("=")) if p != ""]
        if len(parts) < 2 or line.count("=") != len(parts) - 1:
            raise ConditionError(f"line {lineno}: expected 'term = term', got {raw!r}")
        try:
            ids += _chain(*parts)
        except ConditionError as exc:
            raise ConditionError(f"line {lineno}: {exc}") from None
    if not ids:
        raise ConditionError("no identities found")
    c = LinearCondition(name, tuple(_infer_symbols(ids)), tuple(ids))
    if two_variable_criterion(c):
        c = LinearCondition(c.name, c.symbols, c.identities, True)
    errors = [i for i in validate(c) if i.level == "error"]
    if errors:
        raise ConditionError("; ".join(str(e) for e in errors))
    return c


def load_condition_file(path: str) -> LinearCondition:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stem = re.sub(r"\.[^.]*$", "", path.replace("\\", "/").rsplit("/", 1)[-1])
    return parse_condition(text, name=stem or "custom")


# syntactic reasoning used by tests and the record validator ------------------

Projection = int  # substitution target: index of the projected argument


def substitute(c: LinearCondition, mapping: Mapping[str, Union[str, Projection]]) -> list[LinearIdentity]:
    """Rewrite the identities of ``c`` replacing symbols by other symbols or projections.

    A string target renames the symbol (same arguments); an int ``j`` turns
    ``f(a_0,...,a_k-1)`` into the variable ``a_j``.  Symbols not in ``mapping``
    are kept.
    """

    def term(t: Term) -> Term:
        if isinstance(t, Var) or t.symbol not in mapping:
            return t
        target = mapping[t.symbol]
        if isinstance(target, int):
            return Var(t.args[target])
        return App(target, t.args)

    return [LinearIdentity(term(e.lhs), term(e.rhs)) for e in c.identities]


def entails(premises: Iterable[LinearIdentity], goal: LinearIdentity, constants: int | None = None) -> bool:
    """Whether ``goal`` follows from ``premises`` by instantiation and transitivity.

    The goal's variables become distinct constants; every premise is
    instantiated over all assignments into those constants (plus spares up to
    ``constants``), and equal ground terms are merged with a union-find.
    Sound for any premises; complete for the linear chains used here.
    """
    premises = list(premises)
    goal_vars = sorted(goal.variables())
    k = max(len(goal_vars), constants or 0, 1)
    rename = {v: i for i, v in enumerate(goal_vars)}
    parent: dict = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def ground(t: Term, env) -> tuple:
        if isinstance(t, Var):
            return ("c", env[t.index])
        return (t.symbol,) + tuple(env[a] for a in t.args)

    for e in premises:
        vs = sorted(e.variables())
        for values in itertools.product(range(k), repeat=len(vs)):
            env = dict(zip(vs, values))
            a, b = find(ground(e.lhs, env)), find(ground(e.rhs, env))
            if a != b:
                parent[a] = b
    # constants are pairwise distinct: a chain merging two of them is inconsistent
    consts = [find(("c", i)) for i in range(k)]
    if len(set(consts)) < k:
        return True
    return find(ground(goal.lhs, rename)) == find(ground(goal.rhs, rename))
