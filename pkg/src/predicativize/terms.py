"""λΠ terms, signatures and capture-avoiding substitution.

Terms use a named representation.  Universe levels are ordinary terms built
from the reserved constants ``z``, ``s`` and ``lub`` over level variables.
Which variables are level variables is read off their names:

* ``?<n>``   metavariables inserted before constraint generation,
* ``i'<n>``  fresh variables created by the level unifier,
* ``i<n>``   source level variables (also used for abstracted levels in output).

Any variable sitting under ``s`` or ``lub`` is treated as a level as well, so
hand-written signatures may bind levels with arbitrary names.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

from predicativize.errors import LevelKindViolation

LEVEL = "Level"
ZERO = "z"
SUCC = "s"
LUB = "lub"
RESERVED_LEVEL_CONSTANTS = frozenset({ZERO, SUCC, LUB})


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        from predicativize.syntax import show

        return show(self)


@dataclass(frozen=True, slots=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        from predicativize.syntax import show

        return show(self)


@dataclass(frozen=True, slots=True)
class Lam:
    """Abstraction.  ``annot`` is ``None`` for an unannotated ``\\x. M``,
    which can only be checked against a product, never inferred."""

    name: str
    annot: "Term | None"
    body: "Term"

    def __str__(self) -> str:
        from predicativize.syntax import show

        return show(self)


@dataclass(frozen=True, slots=True)
class Pi:
    name: str
    dom: "Term"
    cod: "Term"

    def __str__(self) -> str:
        from predicativize.syntax import show

        return show(self)


@dataclass(frozen=True, slots=True)
class Sort:
    name: str  # "Type" or "Kind"

    def __str__(self) -> str:
        return self.name


TYPE = Sort("Type")
KIND = Sort("Kind")

Term = Union[Var, Const, App, Lam, Pi, Sort]


# -- variable classification -------------------------------------------------


class VarClass(enum.IntEnum):
    TERM = -1
    SOURCE = 0
    META = 1
    FRESH = 2


_META_RE = re.compile(r"\?(\d+)")
_FRESH_RE = re.compile(r"i'(\d+)")
_SOURCE_RE = re.compile(r"i(\d+)")
_STEM_RE = re.compile(r"(.*?)(\d*)")


def classify(name: str) -> VarClass:
    if _META_RE.fullmatch(name):
        return VarClass.META
    if _FRESH_RE.fullmatch(name):
        return VarClass.FRESH
    if _SOURCE_RE.fullmatch(name):
        return VarClass.SOURCE
    return VarClass.TERM


def is_level_name(name: str) -> bool:
    return classify(name) is not VarClass.TERM


def is_meta(name: str) -> bool:
    return classify(name) is VarClass.META


def meta_name(index: int) -> str:
    return f"?{index}"


def fresh_level_name(index: int) -> str:
    return f"i'{index}"


def source_level_name(index: int) -> str:
    return f"i{index}"


def var_order_key(name: str) -> tuple:
    """Total order on level variables: namespace first, then stem and index."""
    cls = classify(name)
    ns = max(int(cls), 0)
    m = _STEM_RE.fullmatch(name)
    stem, digits = m.group(1), m.group(2)
    return (ns, stem, int(digits) if digits else -1, name)


# -- construction helpers ----------------------------------------------------


def app(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def unfold_app(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def arrow(dom: Term, cod: Term) -> Pi:
    return Pi("_", dom, cod)


def pis(binders: Iterable[tuple[str, Term]], body: Term) -> Term:
    for name, ty in reversed(list(binders)):
        body = Pi(name, ty, body)
    return body


def lams(binders: Iterable[tuple[str, Term | None]], body: Term) -> Term:
    for name, ty in reversed(list(binders)):
        body = Lam(name, ty, body)
    return body


def z() -> Term:
    return Const(ZERO)


def succ(level: Term, times: int = 1) -> Term:
    for _ in range(times):
        level = App(Const(SUCC), level)
    return level


def lub(a: Term, b: Term) -> Term:
    return App(App(Const(LUB), a), b)


def is_level_term(t: Term) -> bool:
    """Syntactic level: ``z``, ``s l``, ``l ⊔ l'`` or any variable."""
    match t:
        case Const(name):
            return name == ZERO
        case Var(_):
            return True
        case App(Const(name), a) if name == SUCC:
            return is_level_term(a)
        case App(App(Const(name), a), b) if name == LUB:
            return is_level_term(a) and is_level_term(b)
    return False


def is_level_constructor_term(t: Term) -> bool:
    """A level whose head is one of ``z``, ``s``, ``lub``."""
    return not isinstance(t, Var) and is_level_term(t)


def looks_like_level(t: Term) -> bool:
    """Level headed by a level constructor, or a level-classified variable."""
    if isinstance(t, Var):
        return is_level_name(t.name)
    return is_level_term(t)


# -- free variables -----------------------------------------------------------


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Const() | Sort():
            return frozenset()
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Lam(x, ty, body):
            inner = free_vars(body) - {x}
            return inner | free_vars(ty) if ty is not None else inner
        case Pi(x, dom, cod):
            return free_vars(dom) | (free_vars(cod) - {x})
    raise TypeError(f"not a term: {t!r}")


def _level_occurrences(t: Term, bound: frozenset[str], in_level: bool) -> Iterator[str]:
    match t:
        case Var(name):
            if name not in bound and (in_level or is_level_name(name)):
                yield name
        case App(Const(name), a) if name == SUCC:
            yield from _level_occurrences(a, bound, True)
        case App(App(Const(name), a), b) if name == LUB:
            yield from _level_occurrences(a, bound, True)
            yield from _level_occurrences(b, bound, True)
        case App(f, a):
            yield from _level_occurrences(f, bound, False)
            yield from _level_occurrences(a, bound, False)
        case Lam(x, ty, body):
            if ty is not None:
                yield from _level_occurrences(ty, bound, False)
            yield from _level_occurrences(body, bound | {x}, False)
        case Pi(x, dom, cod):
            yield from _level_occurrences(dom, bound, False)
            yield from _level_occurrences(cod, bound | {x}, False)


def level_vars_in_order(t: Term) -> list[str]:
    """Free level variables in order of first (leftmost) occurrence."""
    seen: dict[str, None] = {}
    for name in _level_occurrences(t, frozenset(), False):
        seen.setdefault(name)
    return list(seen)


def free_level_vars(t: Term) -> list[str]:
    """Free level variables of ``t`` sorted by :func:`var_order_key`."""
    return sorted(set(level_vars_in_order(t)), key=var_order_key)


# -- substitution -------------------------------------------------------------


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    m = _STEM_RE.fullmatch(base)
    stem, digits = m.group(1), m.group(2)
    if is_level_name(base) and digits:
        n = int(digits) + 1
        while f"{stem}{n}" in avoid:
            n += 1
        return f"{stem}{n}"
    candidate = base + "'"
    while candidate in avoid or is_level_name(candidate) != is_level_name(base):
        candidate += "'"
    return candidate


def subst(m: Term, x: str, n: Term) -> Term:
    """``m{n/x}``, renaming binders of ``m`` that would capture ``n``."""
    return subst_many(m, {x: n})


def subst_many(m: Term, mapping: Mapping[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    for x, n in mapping.items():
        if is_level_name(x) and not is_level_term(n):
            raise LevelKindViolation(f"cannot substitute non-level {n} for level variable {x}")
    if not mapping:
        return m
    fvs = {x: free_vars(n) for x, n in mapping.items()}
    return _subst(m, dict(mapping), fvs)


def _subst(m: Term, mapping: dict[str, Term], fvs: dict[str, frozenset[str]]) -> Term:
    match m:
        case Var(name):
            return mapping.get(name, m)
        case Const() | Sort():
            return m
        case App(f, a):
            f2, a2 = _subst(f, mapping, fvs), _subst(a, mapping, fvs)
            if f2 is f and a2 is a:
                return m
            return App(f2, a2)
        case Lam(x, ty, body):
            ty2 = _subst(ty, mapping, fvs) if ty is not None else None
            x2, body2 = _under_binder(x, body, mapping, fvs)
            return Lam(x2, ty2, body2)
        case Pi(x, dom, cod):
            dom2 = _subst(dom, mapping, fvs)
            x2, cod2 = _under_binder(x, cod, mapping, fvs)
            return Pi(x2, dom2, cod2)
    raise TypeError(f"not a term: {m!r}")


def _under_binder(x, body, mapping, fvs):
    inner = {k: v for k, v in mapping.items() if k != x}
    if not inner:
        return x, body
    body_fv = free_vars(body)
    live = {k: v for k, v in inner.items() if k in body_fv}
    if not live:
        return x, body
    captured = set().union(*(fvs[k] for k in live))
    if x in captured:
        x2 = fresh_name(x, captured | body_fv | set(live))
        live = dict(live)
        live[x] = Var(x2)
        fvs = dict(fvs)
        fvs[x] = frozenset((x2,))
        return x2, _subst(body, live, fvs)
    return x, _subst(body, live, fvs)


def rename_bound(x: str, body: Term, new: str) -> Term:
    """Body of a binder on ``x`` with the bound variable renamed to ``new``."""
    if x == new:
        return body
    return subst(body, x, Var(new))


# -- alpha equivalence ----------------------------------------------------------


def alpha_eq(m: Term, n: Term) -> bool:
    return _alpha(m, n, {}, {}, 0)


def _alpha(m, n, env_m, env_n, depth) -> bool:
    match m, n:
        case Var(a), Var(b):
            ia, ib = env_m.get(a), env_n.get(b)
            if ia is None and ib is None:
                return a == b
            return ia == ib
        case Const(a), Const(b):
            return a == b
        case Sort(a), Sort(b):
            return a == b
        case App(f, a), App(g, b):
            return _alpha(f, g, env_m, env_n, depth) and _alpha(a, b, env_m, env_n, depth)
        case Lam(x, tx, bx), Lam(y, ty, by):
            if (tx is None) != (ty is None):
                return False
            if tx is not None and not _alpha(tx, ty, env_m, env_n, depth):
                return False
            return _alpha(bx, by, {**env_m, x: depth}, {**env_n, y: depth}, depth + 1)
        case Pi(x, dx, cx), Pi(y, dy, cy):
            if not _alpha(dx, dy, env_m, env_n, depth):
                return False
            return _alpha(cx, cy, {**env_m, x: depth}, {**env_n, y: depth}, depth + 1)
    return False


def size(t: Term) -> int:
    match t:
        case App(f, a):
            return 1 + size(f) + size(a)
        case Lam(_, ty, body):
            return 1 + (size(ty) if ty is not None else 0) + size(body)
        case Pi(_, dom, cod):
            return 1 + size(dom) + size(cod)
    return 1


# -- signatures -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Decl:
    name: str
    type: Term


@dataclass(frozen=True, slots=True)
class Def:
    name: str
    type: Term
    body: Term


SignatureEntry = Union[Decl, Def]
Context = tuple[tuple[str, Term], ...]


class Signature:
    """Ordered, name-unique sequence of declarations and definitions.

    Instances are treated as immutable; :meth:`extended` returns a copy.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[SignatureEntry] = ()):
        self._entries: dict[str, SignatureEntry] = {}
        for e in entries:
            if e.name in self._entries:
                raise ValueError(f"duplicate entry {e.name!r}")
            self._entries[e.name] = e

    def extended(self, entry: SignatureEntry) -> "Signature":
        if entry.name in self._entries:
            raise ValueError(f"duplicate entry {entry.name!r}")
        new = Signature()
        new._entries = {**self._entries, entry.name: entry}
        return new

    def get(self, name: str) -> SignatureEntry | None:
        return self._entries.get(name)

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[SignatureEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Signature) and list(self) == list(other)

    def __repr__(self) -> str:
        return f"Signature({list(self._entries)!r})"

    def prefix_before(self, name: str) -> "Signature":
        out = []
        for e in self:
            if e.name == name:
                break
            out.append(e)
        return Signature(out)
