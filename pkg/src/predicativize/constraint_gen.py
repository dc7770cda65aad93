"""Metavariable insertion and constraint-computing type inference.

Sort annotations of the source encoding (``El_s``, ``U_s``, ``u_s``,
``pi_s1_s2``) are erased and replaced by fresh level metavariables; every
already translated constant gets one metavariable per level argument it
expects.  The checker below then runs the usual bidirectional algorithm but,
instead of testing two levels for equivalence, records an equation between
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from predicativize.errors import InferenceFailure, UnknownConstant
from predicativize.levels import Constraint
from predicativize.rewriting import Comparator, Env, Fuel, ctx_lookup, open_binder
from predicativize.terms import (
    KIND,
    LEVEL,
    TYPE,
    App,
    Const,
    Context,
    Lam,
    Pi,
    Signature,
    Sort,
    Term,
    Var,
    app,
    free_vars,
    is_level_name,
    meta_name,
    rename_bound,
    subst,
)
from predicativize.theories import Theory, parse_sorted_constant, upp_names


@dataclass
class MetaSession:
    """Supply of metavariables for one signature translation.

    The counter is global so every metavariable is fresh across entries;
    ``records`` lists, per entry, its metavariables in insertion order.
    """

    counter: int = 0
    records: dict[str, list[str]] = field(default_factory=dict)
    current: str | None = None

    def begin(self, entry: str) -> None:
        self.current = entry
        self.records.setdefault(entry, [])

    def fresh(self) -> Var:
        name = meta_name(self.counter)
        self.counter += 1
        if self.current is not None:
            self.records[self.current].append(name)
        return Var(name)

    def metas_of(self, entry: str) -> list[str]:
        return list(self.records.get(entry, []))

    def local_index(self, entry: str, name: str) -> int | None:
        metas = self.records.get(entry, [])
        return metas.index(name) if name in metas else None


def arity(sig: Signature, c: str) -> int:
    """Number of leading ``Level`` products in the type of ``c``."""
    entry = sig.get(c)
    if entry is None:
        raise UnknownConstant(c)
    n, ty = 0, entry.type
    while isinstance(ty, Pi) and ty.dom == Const(LEVEL):
        n += 1
        ty = ty.cod
    return n


_LEVEL_SLOTS = {"U": 1, "El": 1, "u": 1, "pi": 2}


def insert_metas(session: MetaSession, sig: Signature, m: Term) -> Term:
    match m:
        case Var() | Sort():
            return m
        case Const(name):
            if name in sig:
                return app(m, *(session.fresh() for _ in range(arity(sig, name))))
            parts = parse_sorted_constant(name)
            if parts is not None:
                kind = parts[0]
                return app(Const(kind), *(session.fresh() for _ in range(_LEVEL_SLOTS[kind])))
            if name in upp_names():
                return m
            raise UnknownConstant(name)
        case App(f, a):
            f2 = insert_metas(session, sig, f)
            return App(f2, insert_metas(session, sig, a))
        case Lam(x, ty, body):
            ty2 = insert_metas(session, sig, ty) if ty is not None else None
            return Lam(x, ty2, insert_metas(session, sig, body))
        case Pi(x, dom, cod):
            dom2 = insert_metas(session, sig, dom)
            return Pi(x, dom2, insert_metas(session, sig, cod))
    raise TypeError(f"not a term: {m!r}")


def erase_metas(m: Term) -> Term:
    """Drop every metavariable argument; left inverse of :func:`insert_metas` up to sort names."""
    match m:
        case App(f, Var(name)) if is_level_name(name):
            return erase_metas(f)
        case App(f, a):
            return App(erase_metas(f), erase_metas(a))
        case Lam(x, ty, body):
            return Lam(x, erase_metas(ty) if ty is not None else None, erase_metas(body))
        case Pi(x, dom, cod):
            return Pi(x, erase_metas(dom), erase_metas(cod))
    return m


# -- conversion constraints -------------------------------------------------------------


class ConstraintCollector(Comparator):
    strict_levels = True

    def __init__(self, env: Env, fuel: Fuel):
        super().__init__(env, fuel)
        self.constraints: list[Constraint] = []

    def level_pair(self, left: Term, right: Term) -> None:
        c = Constraint(left, right)
        if c not in self.constraints:
            self.constraints.append(c)


def conv_constraints(theory: Theory, sig: Signature, m: Term, n: Term, fuel: Fuel | int | None = None) -> list[Constraint]:
    """Constraints under which two weak head normal forms are convertible."""
    collector = ConstraintCollector(Env(theory, sig), Fuel.coerce(fuel))
    collector.compare_whnf(m, n)
    return collector.constraints


# -- typing constraints ------------------------------------------------------------------


class ConstraintChecker:
    """Bidirectional inference that accumulates level equations.

    All judgments of one checker share a single ordered, duplicate-free
    constraint list and a single fuel budget.
    """

    def __init__(self, theory: Theory, sig: Signature, fuel: Fuel | int | None = None):
        self.env = Env(theory, sig)
        self.fuel = Fuel.coerce(fuel)
        self.collector = ConstraintCollector(self.env, self.fuel)

    @property
    def constraints(self) -> list[Constraint]:
        return self.collector.constraints

    def whnf(self, m: Term) -> Term:
        return self.collector.whnf(m)

    def infer(self, ctx: Context, m: Term) -> Term:
        match m:
            case Var(name):
                ty = ctx_lookup(ctx, name)
                if ty is not None:
                    return ty
                if is_level_name(name):
                    return Const(LEVEL)
                raise InferenceFailure(f"unbound variable {name}")
            case Const(name):
                entry = self.env.lookup(name)
                if entry is None:
                    raise InferenceFailure(f"unknown constant {name}")
                return entry.type
            case Sort("Type"):
                return KIND
            case Sort():
                raise InferenceFailure("Kind has no type")
            case Pi(x, dom, cod):
                self.check(ctx, dom, TYPE)
                x2, cod2 = open_binder(ctx, x, cod)
                return self.infer_sort(ctx + ((x2, dom),), cod2)
            case Lam(x, ty, body):
                if ty is None:
                    raise InferenceFailure(f"cannot infer the type of the unannotated abstraction over {x}")
                self.check(ctx, ty, TYPE)
                x2, body2 = open_binder(ctx, x, body)
                inner = ctx + ((x2, ty),)
                b = self.infer(inner, body2)
                self.infer_sort(inner, b)
                return Pi(x2, ty, b)
            case App(Lam(x, None, body), a):
                # an unannotated redex borrows its domain from the argument
                return self.infer(ctx, App(Lam(x, self.infer(ctx, a), body), a))
            case App(f, a):
                fty = self.whnf(self.infer(ctx, f))
                if not isinstance(fty, Pi):
                    raise InferenceFailure(f"{f} is applied but its type {fty} is not a product")
                self.check(ctx, a, fty.dom)
                return subst(fty.cod, fty.name, a)
        raise TypeError(f"not a term: {m!r}")

    def infer_sort(self, ctx: Context, m: Term) -> Sort:
        ty = self.whnf(self.infer(ctx, m))
        if not isinstance(ty, Sort):
            raise InferenceFailure(f"{m} should be a type but has type {ty}")
        return ty

    def check(self, ctx: Context, m: Term, expected: Term) -> None:
        if isinstance(m, Lam) and m.annot is None:
            pi = self.whnf(expected)
            if not isinstance(pi, Pi):
                raise InferenceFailure(f"abstraction over {m.name} checked against non-product {pi}")
            x2, body2 = open_binder(ctx, m.name, m.body, extra_avoid=free_vars(pi.cod) - {pi.name})
            self.check(ctx + ((x2, pi.dom),), body2, rename_bound(pi.name, pi.cod, x2))
            return
        got = self.infer(ctx, m)
        self.collector.compare_whnf(self.whnf(got), self.whnf(expected))


def infer_constraints(
    theory: Theory, sig: Signature, ctx: Context, m: Term, fuel: Fuel | int | None = None
) -> tuple[Term, list[Constraint]]:
    checker = ConstraintChecker(theory, sig, fuel)
    ty = checker.infer(ctx, m)
    return ty, checker.constraints


def check_constraints(
    theory: Theory, sig: Signature, ctx: Context, m: Term, a: Term, fuel: Fuel | int | None = None
) -> list[Constraint]:
    checker = ConstraintChecker(theory, sig, fuel)
    checker.check(ctx, m, a)
    return checker.constraints

