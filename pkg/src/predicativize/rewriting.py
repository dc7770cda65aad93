"""Reduction, conversion and the plain type checker.

Reduction is head reduction by β, δ (unfolding of local definitions) and the
theory's rewrite rules.  Conversion reduces both sides to weak head normal
form and descends structurally, comparing level subterms by normal form.
Because reduction commutes with level equivalence, rule matching never needs
to work modulo the level equations.
"""

from __future__ import annotations

from typing import Callable, Iterator

from predicativize.errors import FuelExhausted, NotUnifiableStructure, TypeCheckError
from predicativize.levels import level_equiv
from predicativize.terms import (
    KIND,
    TYPE,
    App,
    Const,
    Context,
    Decl,
    Def,
    Lam,
    Pi,
    Signature,
    SignatureEntry,
    Sort,
    Term,
    Var,
    alpha_eq,
    app,
    free_vars,
    fresh_name,
    is_level_constructor_term,
    is_level_term,
    looks_like_level,
    rename_bound,
    subst,
    subst_many,
    unfold_app,
)
from predicativize.theories import RewriteRule, Theory

DEFAULT_FUEL = 1_000_000


class Fuel:
    """Budget of head-reduction steps shared by one judgment."""

    __slots__ = ("remaining", "initial")

    def __init__(self, steps: int = DEFAULT_FUEL):
        if steps <= 0:
            raise ValueError("fuel must be positive")
        self.remaining = steps
        self.initial = steps

    def tick(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise FuelExhausted(f"reduction exceeded {self.initial} steps")

    @classmethod
    def coerce(cls, fuel: "Fuel | int | None") -> "Fuel":
        if isinstance(fuel, Fuel):
            return fuel
        return cls(DEFAULT_FUEL if fuel is None else fuel)


class Env:
    """Constants of a theory together with a local signature."""

    __slots__ = ("theory", "sig")

    def __init__(self, theory: Theory, sig: Signature | None = None):
        self.theory = theory
        self.sig = sig if sig is not None else Signature()

    def lookup(self, name: str) -> SignatureEntry | None:
        found = self.theory.lookup(name)
        return found if found is not None else self.sig.get(name)

    def definition(self, name: str) -> Term | None:
        entry = self.sig.get(name)
        if isinstance(entry, Def):
            return entry.body
        entry = self.theory.lookup(name)
        return entry.body if isinstance(entry, Def) else None

    def rules_for(self, name: str) -> list[RewriteRule]:
        return self.theory.rules_for(name)

    def with_sig(self, sig: Signature) -> "Env":
        return Env(self.theory, sig)


# -- head reduction -----------------------------------------------------------------


def head_step(env: Env, m: Term, fuel: Fuel | None = None) -> Term | None:
    """Contract the head redex of ``m``; ``None`` when ``m`` is head-stable.

    Matching a rule may reduce arguments to weak head normal form, which
    consumes ``fuel``.
    """
    fuel = fuel if fuel is not None else Fuel()
    head, args = unfold_app(m)
    match head:
        case Lam(x, _, body) if args:
            return app(subst(body, x, args[0]), *args[1:])
        case Const(name):
            body = env.definition(name)
            if body is not None:
                return app(body, *args)
            for rule in env.rules_for(name):
                if len(args) < rule.arity:
                    continue
                binding = _match_args(env, rule, args, fuel)
                if binding is not None:
                    return app(subst_many(rule.rhs, binding), *args[rule.arity:])
    return None


def _match_args(env: Env, rule: RewriteRule, args: list[Term], fuel: Fuel) -> dict[str, Term] | None:
    binding: dict[str, Term] = {}
    for pat, arg in zip(rule.lhs_args, args):
        if not _match(env, pat, arg, binding, fuel):
            return None
    return binding


def _match(env: Env, pat: Term, t: Term, binding: dict[str, Term], fuel: Fuel) -> bool:
    if isinstance(pat, Var):
        if pat.name in binding:
            return conv_env(env, binding[pat.name], t, fuel)
        binding[pat.name] = t
        return True
    t = _whnf(env, t, fuel)
    phead, pargs = unfold_app(pat)
    thead, targs = unfold_app(t)
    if not isinstance(phead, Const) or thead != phead or len(pargs) != len(targs):
        return False
    return all(_match(env, p, a, binding, fuel) for p, a in zip(pargs, targs))


def _whnf(env: Env, m: Term, fuel: Fuel) -> Term:
    while True:
        nxt = head_step(env, m, fuel)
        if nxt is None:
            return m
        fuel.tick()
        m = nxt


def whnf(theory: Theory, sig: Signature | None, m: Term, fuel: Fuel | int | None = None) -> Term:
    return _whnf(Env(theory, sig), m, Fuel.coerce(fuel))


def whnf_env(env: Env, m: Term, fuel: Fuel | int | None = None) -> Term:
    return _whnf(env, m, Fuel.coerce(fuel))


# -- one-step reducts anywhere and full normalisation (used by property tests) --------


def root_reducts(env: Env, m: Term) -> list[Term]:
    """Terms obtained by contracting a redex exactly at the root of ``m``."""
    out = []
    match m:
        case App(Lam(x, _, body), a):
            out.append(subst(body, x, a))
        case Const(name) if env.definition(name) is not None:
            out.append(env.definition(name))
    head, args = unfold_app(m)
    if isinstance(head, Const):
        for rule in env.rules_for(head.name):
            if len(args) != rule.arity:
                continue
            binding: dict[str, Term] = {}
            if all(_match_syntactic(p, a, binding) for p, a in zip(rule.lhs_args, args)):
                out.append(subst_many(rule.rhs, binding))
    return out


def _match_syntactic(pat: Term, t: Term, binding: dict[str, Term]) -> bool:
    match pat:
        case Var(name):
            if name in binding:
                return alpha_eq(binding[name], t)
            binding[name] = t
            return True
        case Const():
            return pat == t
        case App(pf, pa):
            return isinstance(t, App) and _match_syntactic(pf, t.fun, binding) and _match_syntactic(pa, t.arg, binding)
    return False


def one_step_reducts(env: Env, m: Term) -> Iterator[Term]:
    """Every term reachable from ``m`` by one rewrite step at any position."""
    yield from root_reducts(env, m)
    match m:
        case App(f, a):
            for f2 in one_step_reducts(env, f):
                yield App(f2, a)
            for a2 in one_step_reducts(env, a):
                yield App(f, a2)
        case Lam(x, ty, body):
            if ty is not None:
                for ty2 in one_step_reducts(env, ty):
                    yield Lam(x, ty2, body)
            for b2 in one_step_reducts(env, body):
                yield Lam(x, ty, b2)
        case Pi(x, dom, cod):
            for d2 in one_step_reducts(env, dom):
                yield Pi(x, d2, cod)
            for c2 in one_step_reducts(env, cod):
                yield Pi(x, dom, c2)


def normalize(env: Env, m: Term, fuel: Fuel | int | None = None) -> Term:
    fuel = Fuel.coerce(fuel)
    m = _whnf(env, m, fuel)
    match m:
        case App():
            head, args = unfold_app(m)
            return app(head, *(normalize(env, a, fuel) for a in args))
        case Lam(x, ty, body):
            return Lam(x, normalize(env, ty, fuel) if ty is not None else None, normalize(env, body, fuel))
        case Pi(x, dom, cod):
            return Pi(x, normalize(env, dom, fuel), normalize(env, cod, fuel))
    return m


# -- conversion ---------------------------------------------------------------------


class Comparator:
    """Structural comparison of weak head normal forms.

    Subclasses decide what happens when two levels meet: the plain checker
    tests level equivalence, the constraint generator records an equation.
    """

    strict_levels = False

    def __init__(self, env: Env, fuel: Fuel):
        self.env = env
        self.fuel = fuel

    def level_pair(self, left: Term, right: Term) -> None:
        raise NotImplementedError

    def whnf(self, m: Term) -> Term:
        return _whnf(self.env, m, self.fuel)

    def compare(self, m: Term, n: Term) -> None:
        if alpha_eq(m, n):
            return
        self.compare_whnf(self.whnf(m), self.whnf(n))

    def _both_levels(self, m: Term, n: Term) -> bool:
        if self.strict_levels:
            lm, ln = looks_like_level(m), looks_like_level(n)
            if lm != ln:
                raise NotUnifiableStructure(f"level {m if lm else n} against non-level {n if lm else m}")
            return lm
        if is_level_constructor_term(m):
            return is_level_term(n)
        if is_level_constructor_term(n):
            return is_level_term(m)
        return looks_like_level(m) and looks_like_level(n) and m != n

    def compare_whnf(self, m: Term, n: Term) -> None:
        if alpha_eq(m, n):
            return
        if self._both_levels(m, n):
            self.level_pair(m, n)
            return
        match m, n:
            case App(f, a), App(g, b):
                self.compare_whnf(f, g)
                self.compare(a, b)
            case Pi(x, a, b), Pi(y, a2, b2):
                self.compare(a, a2)
                v = _common_binder(x, b, y, b2)
                self.compare(rename_bound(x, b, v), rename_bound(y, b2, v))
            case Lam(x, a, b), Lam(y, a2, b2):
                if a is not None and a2 is not None:
                    self.compare(a, a2)
                v = _common_binder(x, b, y, b2)
                self.compare(rename_bound(x, b, v), rename_bound(y, b2, v))
            case _:
                raise NotUnifiableStructure(f"cannot match {m} with {n}")


def _common_binder(x: str, b: Term, y: str, b2: Term) -> str:
    if x == y:
        return x
    avoid = free_vars(b) | free_vars(b2)
    if x not in free_vars(b2):
        return x
    if y not in free_vars(b):
        return y
    return fresh_name(x, avoid | {x, y})


class _LevelMismatch(Exception):
    pass


class ConvChecker(Comparator):
    def level_pair(self, left: Term, right: Term) -> None:
        if not level_equiv(left, right):
            raise _LevelMismatch


def conv_env(env: Env, m: Term, n: Term, fuel: Fuel | int | None = None) -> bool:
    try:
        ConvChecker(env, Fuel.coerce(fuel)).compare(m, n)
    except (NotUnifiableStructure, _LevelMismatch):
        return False
    return True


def conv(theory: Theory, sig: Signature | None, m: Term, n: Term, fuel: Fuel | int | None = None) -> bool:
    """Decide ``m ≡ n`` modulo β, δ, the theory's rules and the level equations."""
    return conv_env(Env(theory, sig), m, n, fuel)


# -- plain type checker ---------------------------------------------------------------


def ctx_lookup(ctx: Context, name: str) -> Term | None:
    for x, ty in reversed(ctx):
        if x == name:
            return ty
    return None


def open_binder(ctx: Context, x: str, body: Term, extra_avoid=()) -> tuple[str, Term]:
    """Pick a name for a binder that does not clash with ``ctx``."""
    names = {n for n, _ in ctx}
    if x not in names and x not in extra_avoid:
        return x, body
    x2 = fresh_name(x, names | free_vars(body) | set(extra_avoid))
    return x2, rename_bound(x, body, x2)


class TypeChecker:
    """Bidirectional implementation of the framework's typing rules."""

    def __init__(self, theory: Theory, sig: Signature | None = None, fuel: Fuel | int | None = None):
        self.env = Env(theory, sig)
        self.fuel = Fuel.coerce(fuel)
        self.entry: str | None = None

    def _error(self, msg, subterm=None, expected=None, got=None) -> TypeCheckError:
        return TypeCheckError(msg, entry=self.entry, subterm=subterm, expected=expected, got=got)

    def whnf(self, m: Term) -> Term:
        return _whnf(self.env, m, self.fuel)

    def conv(self, m: Term, n: Term) -> bool:
        return conv_env(self.env, m, n, self.fuel)

    def infer(self, ctx: Context, m: Term) -> Term:
        match m:
            case Var(name):
                ty = ctx_lookup(ctx, name)
                if ty is None:
                    raise self._error(f"unbound variable {name}", subterm=m)
                return ty
            case Const(name):
                entry = self.env.lookup(name)
                if entry is None:
                    raise self._error(f"unknown constant {name}", subterm=m)
                return entry.type
            case Sort("Type"):
                return KIND
            case Sort():
                raise self._error("Kind has no type", subterm=m)
            case Pi(x, dom, cod):
                self.check(ctx, dom, TYPE)
                x2, cod2 = open_binder(ctx, x, cod)
                return self.infer_sort(ctx + ((x2, dom),), cod2)
            case Lam(x, ty, body):
                if ty is None:
                    raise self._error("cannot infer the type of an unannotated abstraction", subterm=m)
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
                    raise self._error("applying a term whose type is not a product", subterm=m, got=fty)
                self.check(ctx, a, fty.dom)
                return subst(fty.cod, fty.name, a)
        raise TypeError(f"not a term: {m!r}")

    def infer_sort(self, ctx: Context, m: Term) -> Sort:
        ty = self.whnf(self.infer(ctx, m))
        if not isinstance(ty, Sort):
            raise self._error("expected a type or a kind", subterm=m, got=ty)
        return ty

    def check(self, ctx: Context, m: Term, expected: Term) -> None:
        if isinstance(m, Lam) and m.annot is None:
            pi = self.whnf(expected)
            if not isinstance(pi, Pi):
                raise self._error("abstraction checked against a non-product", subterm=m, expected=expected)
            x2, body2 = open_binder(ctx, m.name, m.body, extra_avoid=free_vars(pi.cod) - {pi.name})
            self.check(ctx + ((x2, pi.dom),), body2, rename_bound(pi.name, pi.cod, x2))
            return
        got = self.infer(ctx, m)
        if not self.conv(got, expected):
            raise self._error("type mismatch", subterm=m, expected=expected, got=got)

    def check_entry(self, entry: SignatureEntry) -> None:
        self.entry = entry.name
        if self.env.lookup(entry.name) is not None:
            raise self._error(f"{entry.name} is already declared")
        self.infer_sort((), entry.type)
        if isinstance(entry, Def):
            self.check((), entry.body, entry.type)
        self.env = self.env.with_sig(self.env.sig.extended(entry))
        self.entry = None


def typecheck_signature(
    theory: Theory,
    sig: Signature,
    fuel: int | None = None,
    base: Signature | None = None,
) -> None:
    """Check every entry in order; raises :class:`TypeCheckError` on the first failure.

    Each entry gets its own fuel budget.  ``base`` holds entries assumed
    already checked.
    """
    current = base if base is not None else Signature()
    for entry in sig:
        tc = TypeChecker(theory, current, fuel)
        tc.check_entry(entry)
        current = tc.env.sig


def infer_type(theory: Theory, sig: Signature | None, ctx: Context, m: Term, fuel: int | None = None) -> Term:
    return TypeChecker(theory, sig, fuel).infer(ctx, m)


def has_type(theory: Theory, sig: Signature | None, ctx: Context, m: Term, ty: Term, fuel: int | None = None) -> bool:
    try:
        TypeChecker(theory, sig, fuel).check(ctx, m, ty)
    except TypeCheckError:
        return False
    return True


def is_sort(t: Term) -> bool:
    return t == TYPE or t == KIND


Reducer = Callable[[Term], Term]
