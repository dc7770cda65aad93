"""Entry-by-entry translation into the universe-polymorphic theory.

For each entry: insert metavariables, compute the typing constraints, solve
them together with any user constraints, instantiate, send level variables
that only occur in the body to ``z``, and abstract the remaining ones as
leading ``Level`` products.  Successful entries are threaded into the
signature used for the next ones.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from predicativize.constraint_gen import ConstraintChecker, MetaSession, insert_metas
from predicativize.errors import (
    FuelExhausted,
    IndexOutOfRange,
    InferenceFailure,
    InternalError,
    LevelKindViolation,
    NotALevel,
    NotUnifiableStructure,
    TypeCheckError,
    UnknownConstant,
)
from predicativize.levels import Constraint, ConstraintNF, ZERO_NF
from predicativize.rewriting import DEFAULT_FUEL, TypeChecker, typecheck_signature
from predicativize.terms import (
    LEVEL,
    Const,
    Decl,
    Def,
    Lam,
    Pi,
    Signature,
    SignatureEntry,
    Term,
    Var,
    is_meta,
    lams,
    level_vars_in_order,
    meta_name,
    pis,
    source_level_name,
    subst_many,
    succ,
    z,
)
from predicativize.theories import Theory, upp_theory
from predicativize.unify import LevelSubst, Solved, Stuck, Unsolvable, unify

UserConstraints = Mapping[str, list[Constraint]]

CONSTRAINTS, UNIFICATION, STUCK = "constraints", "unification", "stuck"


@dataclass(frozen=True)
class Translated:
    entry: SignatureEntry
    theta: LevelSubst
    abstracted: tuple[str, ...]
    """Variables of the instantiated type, in the order they were abstracted, before renaming."""
    constraints: tuple[Constraint, ...] = ()

    @property
    def name(self) -> str:
        return self.entry.name

    @property
    def status(self) -> str:
        return "translated"


@dataclass(frozen=True)
class Failed:
    name: str
    stage: str
    detail: str
    residual: tuple[str, ...] = ()

    @property
    def status(self) -> str:
        return "stuck" if self.stage == STUCK else f"failed-{self.stage}"


Outcome = Translated | Failed


@dataclass
class TranslationReport:
    outcomes: dict[str, Outcome] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(isinstance(o, Translated) for o in self.outcomes.values())

    def failures(self) -> list[Failed]:
        return [o for o in self.outcomes.values() if isinstance(o, Failed)]

    def lines(self) -> list[str]:
        out = []
        for name, o in self.outcomes.items():
            if isinstance(o, Translated):
                detail = f"levels={len(o.abstracted)}"
            elif o.residual:
                detail = f"{o.detail}: " + "; ".join(o.residual)
            else:
                detail = o.detail
            out.append(f"{name}\t{o.status}\t{detail}")
        return out

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines())


# -- helpers -------------------------------------------------------------------------


def localize(session: MetaSession, entry: str, text: str) -> str:
    """Rewrite global metavariable names in ``text`` into the entry-local ``?n`` numbering."""
    index = {name: n for n, name in enumerate(session.metas_of(entry))}
    return re.sub(r"\?\d+", lambda m: meta_name(index[m.group()]) if m.group() in index else m.group(), text)


def _globalize(session: MetaSession, entry: str, c: Constraint) -> Constraint:
    metas = session.metas_of(entry)
    mapping: dict[str, Term] = {}
    for side in (c.lhs, c.rhs):
        for v in level_vars_in_order(side):
            if not is_meta(v):
                continue
            n = int(v[1:])
            if n >= len(metas):
                raise IndexOutOfRange(f"{entry} has {len(metas)} metavariables, no {v}")
            mapping[v] = Var(metas[n])
    return Constraint(subst_many(c.lhs, mapping), subst_many(c.rhs, mapping))


def _show_nf(c: ConstraintNF) -> str:
    return str(c.to_constraint())


def canonical_names(names: list[str]) -> dict[str, Term]:
    return {v: Var(source_level_name(k)) for k, v in enumerate(names)}


# -- translation --------------------------------------------------------------------------


def translate_entry(
    theory: Theory,
    sig: Signature,
    entry: SignatureEntry,
    user: list[Constraint] | None = None,
    session: MetaSession | None = None,
    fuel: int = DEFAULT_FUEL,
) -> Outcome:
    """Translate one entry against the already translated ``sig``."""
    session = session if session is not None else MetaSession()
    session.begin(entry.name)
    name = entry.name
    try:
        a1 = insert_metas(session, sig, entry.type)
        m1 = insert_metas(session, sig, entry.body) if isinstance(entry, Def) else None
        checker = ConstraintChecker(theory, sig, fuel)
        checker.infer_sort((), a1)
        if m1 is not None:
            checker.check((), m1, a1)
        extra = [_globalize(session, name, c) for c in (user or [])]
    except (UnknownConstant, InferenceFailure, NotUnifiableStructure, FuelExhausted,
            LevelKindViolation, NotALevel, IndexOutOfRange) as e:
        return Failed(name, CONSTRAINTS, f"{type(e).__name__}: {localize(session, name, str(e))}")

    constraints = list(checker.constraints) + [c for c in extra if c not in checker.constraints]
    outcome = unify(constraints)
    if isinstance(outcome, Unsolvable):
        detail = f"no solution: {localize(session, name, _show_nf(outcome.clash))}"
        return Failed(name, UNIFICATION, detail)
    if isinstance(outcome, Stuck):
        residual = tuple(localize(session, name, _show_nf(c)) for c in outcome.residual)
        return Failed(name, STUCK, "no rule applies", residual)
    assert isinstance(outcome, Solved)
    theta = outcome.theta

    a2 = theta.apply(a1)
    kept = level_vars_in_order(a2)
    rename = canonical_names(kept)
    binders = [(str(v), Const(LEVEL)) for v in (rename[k].name for k in kept)]
    a3 = subst_many(a2, rename)
    if m1 is None:
        new: SignatureEntry = Decl(name, pis(binders, a3))
    else:
        m2 = theta.apply(m1)
        stray = [v for v in level_vars_in_order(m2) if v not in kept]
        m3 = LevelSubst({v: ZERO_NF for v in stray}).apply(m2)
        m4 = subst_many(m3, rename)
        new = Def(name, pis(binders, a3), lams(binders, m4))
    return Translated(new, theta, tuple(kept), tuple(constraints))


def translate_signature(
    delta: Signature,
    user_constraints: UserConstraints | None = None,
    *,
    theory: Theory | None = None,
    fuel: int = DEFAULT_FUEL,
    check: bool = True,
) -> tuple[Signature, TranslationReport]:
    """Translate every entry of ``delta`` in order.

    Failed entries are reported and left out of the output, so entries using
    them fail in turn.  With ``check`` the output is re-typechecked, and a
    rejection raises :class:`InternalError`.
    """
    theory = theory if theory is not None else upp_theory()
    user_constraints = dict(user_constraints or {})
    unknown = sorted(set(user_constraints) - {e.name for e in delta})
    if unknown:
        raise UnknownConstant(f"constraints given for unknown entries: {', '.join(unknown)}")
    session = MetaSession()
    out = Signature()
    report = TranslationReport()
    for entry in delta:
        result = translate_entry(theory, out, entry, user_constraints.get(entry.name), session, fuel)
        report.outcomes[entry.name] = result
        if isinstance(result, Translated):
            out = out.extended(result.entry)
    if check:
        try:
            typecheck_signature(theory, out, fuel)
        except TypeCheckError as e:
            raise InternalError(f"translated output rejected at {e.entry}: {e}") from e
    return out, report


# -- specialisation ---------------------------------------------------------------------------


def level_arity(entry: SignatureEntry) -> int:
    n, ty = 0, entry.type
    while isinstance(ty, Pi) and ty.dom == Const(LEVEL):
        n, ty = n + 1, ty.cod
    return n


def specialize(entry: SignatureEntry, levels: list[Term]) -> SignatureEntry:
    """Instantiate the leading level abstractions of ``entry``."""
    ty, body = entry.type, entry.body if isinstance(entry, Def) else None
    for lvl in levels:
        if not (isinstance(ty, Pi) and ty.dom == Const(LEVEL)):
            raise ValueError(f"{entry.name} has fewer than {len(levels)} level parameters")
        ty = subst_many(ty.cod, {ty.name: lvl})
        if body is not None:
            assert isinstance(body, Lam)
            body = subst_many(body.body, {body.name: lvl})
    return Def(entry.name, ty, body) if body is not None else Decl(entry.name, ty)


def ground_specializations(entry: SignatureEntry, max_value: int = 2, limit: int = 9) -> Iterator[SignatureEntry]:
    """Up to ``limit`` instances with every level parameter set to ``s^k z``, ``k <= max_value``."""
    n = level_arity(entry)
    combos = itertools.product(range(max_value + 1), repeat=n)
    for values in itertools.islice(combos, limit):
        yield specialize(entry, [succ(z(), k) for k in values])


def check_specializations(theory: Theory, sig: Signature, max_value: int = 2, limit: int = 9) -> int:
    """Typecheck ground instances of every entry of ``sig``; returns how many were checked."""
    count = 0
    for entry in sig:
        prefix = sig.prefix_before(entry.name)
        for inst in ground_specializations(entry, max_value, limit):
            TypeChecker(theory, prefix).check_entry(inst)
            count += 1
    return count

