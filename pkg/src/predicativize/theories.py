"""Object theories encoded in the framework.

:func:`build_pts_theory` encodes a functional Pure Type System with one
``U_s``/``El_s`` pair per sort, a ``u_s1 : U_s2`` per axiom and a
``pi_s1_s2`` per product rule.  :func:`predicative_theory` is the schematic
version over the naturals, and :func:`upp_theory` the universe-polymorphic
target whose constants take levels as arguments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from predicativize.errors import IllFormedSpec
from predicativize.terms import (
    LEVEL,
    LUB,
    SUCC,
    TYPE,
    ZERO,
    App,
    Const,
    Decl,
    Pi,
    SignatureEntry,
    Term,
    Var,
    app,
    arrow,
    free_vars,
    lub,
    succ,
)


@dataclass(frozen=True, slots=True)
class RewriteRule:
    """``head lhs_args... ↪ rhs``; every variable of the left side is a pattern variable."""

    head: str
    lhs_args: tuple[Term, ...]
    rhs: Term

    def __post_init__(self):
        pattern_vars = set().union(*(free_vars(p) for p in self.lhs_args)) if self.lhs_args else set()
        missing = free_vars(self.rhs) - pattern_vars
        if missing:
            raise IllFormedSpec(f"rule for {self.head}: rhs variables {sorted(missing)} not bound by lhs")

    @property
    def arity(self) -> int:
        return len(self.lhs_args)


class Theory:
    """A global signature with rewrite rules and, optionally, the level equations."""

    def __init__(
        self,
        name: str,
        entries: Iterable[SignatureEntry],
        rules: Iterable[RewriteRule] = (),
        *,
        level_equations: bool = False,
    ):
        self.name = name
        self._entries: dict[str, SignatureEntry] = {}
        for e in entries:
            if e.name in self._entries:
                raise IllFormedSpec(f"duplicate constant {e.name}")
            self._entries[e.name] = e
        self._rules: dict[str, list[RewriteRule]] = {}
        for r in rules:
            self._add_rule(r)
        self.level_equations = level_equations

    def _add_rule(self, r: RewriteRule) -> None:
        if self.lookup(r.head) is None:
            raise IllFormedSpec(f"rule head {r.head} is not declared")
        for p in r.lhs_args:
            for c in _constants(p):
                if self.lookup(c) is None:
                    raise IllFormedSpec(f"rule for {r.head} mentions undeclared {c}")
        self._rules.setdefault(r.head, []).append(r)

    @property
    def global_signature(self) -> list[SignatureEntry]:
        return list(self._entries.values())

    @property
    def rewrite_rules(self) -> list[RewriteRule]:
        return [r for rs in self._rules.values() for r in rs]

    def lookup(self, name: str) -> SignatureEntry | None:
        return self._entries.get(name)

    def rules_for(self, head: str) -> list[RewriteRule]:
        return self._rules.get(head, [])

    def __repr__(self) -> str:
        return f"<Theory {self.name}: {len(self._entries)} constants, {len(self.rewrite_rules)} rules>"


def _constants(t: Term) -> set[str]:
    match t:
        case Const(name):
            return {name}
        case App(f, a):
            return _constants(f) | _constants(a)
    return set()


# -- PTS encodings -----------------------------------------------------------------

_SORT_ALIASES = {"*": "star", "□": "box", "☐": "box"}
_SORT_NAME_RE = re.compile(r"[A-Za-z0-9]+")


def mangle_sort(sort: str) -> str:
    name = _SORT_ALIASES.get(sort, sort)
    if not _SORT_NAME_RE.fullmatch(name):
        raise IllFormedSpec(f"sort name {sort!r} must be alphanumeric (no underscores)")
    return name


def U_name(s: str) -> str:
    return f"U_{mangle_sort(s)}"


def El_name(s: str) -> str:
    return f"El_{mangle_sort(s)}"


def u_name(s: str) -> str:
    return f"u_{mangle_sort(s)}"


def pi_name(s1: str, s2: str) -> str:
    return f"pi_{mangle_sort(s1)}_{mangle_sort(s2)}"


_SORTED_CONST_RE = re.compile(r"(U|El|u)_([A-Za-z0-9]+)|pi_([A-Za-z0-9]+)_([A-Za-z0-9]+)")


def parse_sorted_constant(name: str) -> tuple[str, tuple[str, ...]] | None:
    """Split a mangled PTS constant: ``pi_box_star`` -> ``("pi", ("box", "star"))``."""
    m = _SORTED_CONST_RE.fullmatch(name)
    if m is None:
        return None
    if m.group(1):
        return m.group(1), (m.group(2),)
    return "pi", (m.group(3), m.group(4))


@dataclass(frozen=True)
class PtsSpec:
    """Sorts, axioms and product rules of a functional PTS.

    ``schematic=True`` denotes the predicative hierarchy over the naturals:
    axioms ``(n, n+1)`` and rules ``(n, m, max(n, m))``; the finite fields
    are then ignored.
    """

    sorts: frozenset[str] = frozenset()
    axioms: frozenset[tuple[str, str]] = frozenset()
    rules: frozenset[tuple[str, str, str]] = frozenset()
    schematic: bool = False

    @classmethod
    def of(cls, sorts, axioms=(), rules=()) -> "PtsSpec":
        return cls(frozenset(sorts), frozenset(map(tuple, axioms)), frozenset(map(tuple, rules)))

    @classmethod
    def naturals(cls) -> "PtsSpec":
        return cls(schematic=True)

    def validate(self) -> None:
        if self.schematic:
            return
        for s in self.sorts:
            mangle_sort(s)
        for pair in self.axioms:
            if not set(pair) <= self.sorts:
                raise IllFormedSpec(f"axiom {pair} mentions an unknown sort")
        for triple in self.rules:
            if not set(triple) <= self.sorts:
                raise IllFormedSpec(f"rule {triple} mentions an unknown sort")
        if len({a for a, _ in self.axioms}) != len(self.axioms):
            raise IllFormedSpec("axioms are not a functional relation")
        if len({(a, b) for a, b, _ in self.rules}) != len(self.rules):
            raise IllFormedSpec("rules are not a functional relation")
        mangled = [mangle_sort(s) for s in self.sorts]
        if len(set(mangled)) != len(mangled):
            raise IllFormedSpec("two sorts mangle to the same name")


SPEC_I = PtsSpec.of(
    sorts={"*", "□"},
    axioms={("*", "□")},
    rules={("*", "*", "*"), ("□", "*", "*"), ("□", "□", "□")},
)


def _pts_constants(s: str) -> list[Decl]:
    return [Decl(U_name(s), TYPE), Decl(El_name(s), arrow(Const(U_name(s)), TYPE))]


def _axiom_parts(s1: str, s2: str) -> tuple[Decl, RewriteRule]:
    decl = Decl(u_name(s1), Const(U_name(s2)))
    rule = RewriteRule(El_name(s2), (Const(u_name(s1)),), Const(U_name(s1)))
    return decl, rule


def _rule_parts(s1: str, s2: str, s3: str) -> tuple[Decl, RewriteRule]:
    A, B, x = Var("A"), Var("B"), Var("x")
    ty = Pi(
        "A",
        Const(U_name(s1)),
        arrow(arrow(App(Const(El_name(s1)), A), Const(U_name(s2))), Const(U_name(s3))),
    )
    rhs = Pi("x", App(Const(El_name(s1)), A), App(Const(El_name(s2)), App(B, x)))
    rule = RewriteRule(El_name(s3), (app(Const(pi_name(s1, s2)), A, B),), rhs)
    return Decl(pi_name(s1, s2), ty), rule


def build_pts_theory(spec: PtsSpec, name: str = "pts") -> Theory:
    spec.validate()
    if spec.schematic:
        return predicative_theory()
    entries: list[Decl] = []
    rules: list[RewriteRule] = []
    for s in sorted(spec.sorts, key=mangle_sort):
        entries += _pts_constants(s)
    for s1, s2 in sorted(spec.axioms):
        d, r = _axiom_parts(s1, s2)
        entries.append(d)
        rules.append(r)
    for s1, s2, s3 in sorted(spec.rules):
        d, r = _rule_parts(s1, s2, s3)
        entries.append(d)
        rules.append(r)
    return Theory(name, entries, rules)


def impredicative_theory() -> Theory:
    return build_pts_theory(SPEC_I, name="I")


class PredicativeTheory(Theory):
    """The predicative PTS over the naturals, generated on demand."""

    def __init__(self):
        super().__init__("P", [])

    def lookup(self, name: str) -> SignatureEntry | None:
        found = super().lookup(name)
        if found is not None:
            return found
        parts = parse_sorted_constant(name)
        if parts is None or not all(s.isdigit() for s in parts[1]):
            return None
        self._generate(parts[0], tuple(int(s) for s in parts[1]))
        return super().lookup(name)

    def rules_for(self, head: str) -> list[RewriteRule]:
        parts = parse_sorted_constant(head)
        if parts is None or parts[0] != "El" or not parts[1][0].isdigit():
            return []
        n = int(parts[1][0])
        if n > 0:
            self.lookup(u_name(str(n - 1)))
        for a in range(n + 1):
            for b in range(n + 1):
                if max(a, b) == n:
                    self.lookup(pi_name(str(a), str(b)))
        return super().rules_for(head)

    def _generate(self, kind: str, sorts: tuple[int, ...]) -> None:
        if kind in ("U", "El"):
            for d in _pts_constants(str(sorts[0])):
                self._entries.setdefault(d.name, d)
            return
        if kind == "u":
            n = sorts[0]
            self._generate("U", (n,))
            self._generate("U", (n + 1,))
            d, r = _axiom_parts(str(n), str(n + 1))
        else:
            a, b = sorts
            for s in {a, b, max(a, b)}:
                self._generate("U", (s,))
            d, r = _rule_parts(str(a), str(b), str(max(a, b)))
        if d.name not in self._entries:
            self._entries[d.name] = d
            self._rules.setdefault(r.head, []).append(r)


@lru_cache(maxsize=1)
def predicative_theory() -> PredicativeTheory:
    return PredicativeTheory()


# -- universe-polymorphic target ------------------------------------------------------

UPP_U, UPP_EL, UPP_u, UPP_PI = "U", "El", "u", "pi"


@lru_cache(maxsize=1)
def upp_theory() -> Theory:
    level = Const(LEVEL)
    i, iA, iB, i2 = Var("i"), Var("iA"), Var("iB"), Var("i'")
    A, B = Var("A"), Var("B")
    U, El, u, pi = Const(UPP_U), Const(UPP_EL), Const(UPP_u), Const(UPP_PI)
    entries = [
        Decl(LEVEL, TYPE),
        Decl(ZERO, level),
        Decl(SUCC, arrow(level, level)),
        Decl(LUB, arrow(level, arrow(level, level))),
        Decl(UPP_U, arrow(level, TYPE)),
        Decl(UPP_EL, Pi("i", level, arrow(App(U, i), TYPE))),
        Decl(UPP_u, Pi("i", level, App(U, succ(i)))),
        Decl(
            UPP_PI,
            Pi("iA", level, Pi("iB", level, Pi(
                "A", App(U, iA),
                arrow(arrow(app(El, iA, A), App(U, iB)), App(U, lub(iA, iB))),
            ))),
        ),
    ]
    rules = [
        RewriteRule(UPP_EL, (i2, App(u, i)), App(U, i)),
        RewriteRule(
            UPP_EL,
            (i2, app(pi, iA, iB, A, B)),
            Pi("x", app(El, iA, A), app(El, iB, App(B, Var("x")))),
        ),
    ]
    return Theory("UPP", entries, rules, level_equations=True)


def upp_names() -> frozenset[str]:
    return frozenset(e.name for e in upp_theory().global_signature)


# -- theory-spec text format ------------------------------------------------------------


def parse_pts_spec(text: str) -> PtsSpec:
    """Read ``sort``/``axiom``/``rule`` lines; ``sorts naturals`` selects the predicative hierarchy."""
    from predicativize.errors import ParseError

    sorts: set[str] = set()
    axioms: set[tuple[str, str]] = set()
    rules: set[tuple[str, str, str]] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        match words:
            case ["sorts", "naturals"]:
                return PtsSpec.naturals()
            case ["sort", s]:
                sorts.add(s)
            case ["axiom", s1, s2]:
                axioms.add((s1, s2))
            case ["rule", s1, s2, s3]:
                rules.add((s1, s2, s3))
            case _:
                raise ParseError(f"bad theory line {line!r}", lineno, 1)
    spec = PtsSpec.of(sorts, axioms, rules)
    spec.validate()
    return spec


def theory_from_spec_text(text: str) -> Theory:
    return build_pts_theory(parse_pts_spec(text), name="custom")


def count_constants(theory: Theory) -> dict[str, int]:
    """How many ``U``/``El``/``u``/``pi`` constants a PTS theory declares."""
    counts = {"U": 0, "El": 0, "u": 0, "pi": 0}
    for e in theory.global_signature:
        parts = parse_sorted_constant(e.name)
        if parts is not None:
            counts[parts[0]] += 1
    return counts
