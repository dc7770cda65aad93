"""Unification of level constraints modulo the max-successor equations.

The six rules (Trivial, Orient, Eliminate 1/2, Decompose, Clash) are applied
in packed form: every step either discharges exactly one constraint or
reports a clash, so a run takes at most as many steps as there are
constraints.  When no rule applies to any remaining constraint the run is
*stuck*; the residue is returned instead of guessing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from predicativize.levels import (
    ZERO_NF,
    Constraint,
    ConstraintNF,
    LevelNF,
    constraint_nf,
    constraint_nf_of,
    level_nf,
    nf_subst,
    nf_to_compact_level,
    nf_to_level,
    normalize_levels,
    var_nf,
)
from predicativize.terms import Term, fresh_level_name, subst_many


@dataclass(frozen=True)
class LevelSubst:
    """Map from level variables to levels in normal form."""

    bindings: Mapping[str, LevelNF] = field(default_factory=dict)

    def __getitem__(self, name: str) -> LevelNF:
        return self.bindings.get(name, var_nf(name))

    def __contains__(self, name: object) -> bool:
        return name in self.bindings

    def __len__(self) -> int:
        return len(self.bindings)

    @property
    def domain(self) -> set[str]:
        return set(self.bindings)

    @property
    def range(self) -> set[str]:
        return set().union(*(nf.variables for nf in self.bindings.values())) if self.bindings else set()

    def apply_nf(self, nf: LevelNF) -> LevelNF:
        return nf_subst(nf, self.bindings)

    def apply_level(self, level: Term) -> Term:
        return nf_to_level(self.apply_nf(level_nf(level)))

    def apply(self, t: Term) -> Term:
        """Instantiate the level variables of an arbitrary term; levels come out compact."""
        mapping = {v: nf_to_compact_level(nf) for v, nf in self.bindings.items()}
        return normalize_levels(subst_many(t, mapping))

    def as_terms(self) -> dict[str, Term]:
        return {v: nf_to_level(nf) for v, nf in self.bindings.items()}

    def restrict(self, names: Iterable[str]) -> "LevelSubst":
        keep = set(names)
        return LevelSubst({v: nf for v, nf in self.bindings.items() if v in keep})

    def __str__(self) -> str:
        inner = ", ".join(f"{v} ↦ {nf}" for v, nf in self.bindings.items())
        return "{" + inner + "}"


@dataclass(frozen=True)
class Solved:
    theta: LevelSubst
    steps: int = 0


@dataclass(frozen=True)
class Unsolvable:
    clash: ConstraintNF
    steps: int = 0


@dataclass(frozen=True)
class Stuck:
    residual: tuple[ConstraintNF, ...]
    partial: LevelSubst
    steps: int = 0


UnifyOutcome = Solved | Unsolvable | Stuck


@dataclass(frozen=True)
class State:
    """Intermediate configuration ``C; θ`` together with the last rule name."""

    constraints: tuple[ConstraintNF, ...]
    theta: LevelSubst
    rule: str = "start"


def _is_var_shape(nf: LevelNF) -> bool:
    return nf.single_var() is not None


def _is_zero_or_var(nf: LevelNF) -> bool:
    return nf.is_zero() or _is_var_shape(nf)


class _Run:
    def __init__(self, constraints: list[ConstraintNF]):
        self.cs = list(constraints)
        self.theta: dict[str, LevelNF] = {}
        self._fresh = itertools.count()

    def used_names(self) -> set[str]:
        names = set(self.theta)
        for nf in self.theta.values():
            names |= set(nf.variables)
        for c in self.cs:
            names |= c.variables()
        return names

    def fresh(self, avoid: Iterable[str] = ()) -> str:
        used = self.used_names() | set(avoid)
        while True:
            name = fresh_level_name(next(self._fresh))
            if name not in used:
                return name

    def eliminate(self, i: str, level: LevelNF) -> None:
        mapping = {i: level}
        self.cs = [constraint_nf_of(nf_subst(c.lhs, mapping), nf_subst(c.rhs, mapping)) for c in self.cs]
        self.theta = {v: nf_subst(nf, mapping) for v, nf in self.theta.items()}
        self.theta[i] = level

    def step(self) -> str | None:
        """Apply one packed step; returns the rule name, ``"clash"`` or ``None`` if stuck."""
        order = sorted(range(len(self.cs)), key=lambda n: (self.cs[n].atom_count(), n))
        for n in order:
            c = self.cs[n]
            if c.lhs == c.rhs:
                del self.cs[n]
                return "trivial"
            lhs, rhs = c.lhs, c.rhs
            rule = ""
            if not _is_zero_or_var(lhs):
                if not _is_zero_or_var(rhs):
                    continue
                lhs, rhs, rule = rhs, lhs, "orient+"
            del self.cs[n]
            i = lhs.single_var()
            if i is not None:
                if i not in rhs.variables:
                    self.eliminate(i, rhs)
                    return rule + "eliminate1"
                i2 = self.fresh(rhs.variables)
                self.eliminate(i, nf_subst(rhs, {i: var_nf(i2)}))
                return rule + "eliminate2"
            if rhs.k > 0 or any(m > 0 for _, m in rhs.atoms):
                self.cs.insert(n, c)
                return "clash"
            for v in rhs.variables:
                self.eliminate(v, ZERO_NF)
            return rule + "decompose"
        return None


def _normalize_input(constraints: Iterable[Constraint | ConstraintNF]) -> list[ConstraintNF]:
    out = []
    for c in constraints:
        out.append(c if isinstance(c, ConstraintNF) else constraint_nf(c))
    return out


def unify_steps(constraints: Iterable[Constraint | ConstraintNF]) -> Iterator[State]:
    """Yield the configuration after every packed step, starting with the initial one.

    The final yielded state has rule ``"clash"``, ``"stuck"`` or ``"solved"``.
    """
    run = _Run(_normalize_input(constraints))
    yield State(tuple(run.cs), LevelSubst(dict(run.theta)))
    while run.cs:
        rule = run.step()
        if rule is None:
            yield State(tuple(run.cs), LevelSubst(dict(run.theta)), "stuck")
            return
        yield State(tuple(run.cs), LevelSubst(dict(run.theta)), rule)
        if rule == "clash":
            return
    yield State((), LevelSubst(dict(run.theta)), "solved")


def unify(constraints: Iterable[Constraint | ConstraintNF]) -> UnifyOutcome:
    run = _Run(_normalize_input(constraints))
    steps = 0
    while run.cs:
        rule = run.step()
        if rule is None:
            return Stuck(tuple(run.cs), LevelSubst(dict(run.theta)), steps)
        steps += 1
        if rule == "clash":
            return Unsolvable(_first_clash(run.cs), steps)
    return Solved(LevelSubst(dict(run.theta)), steps)


def _first_clash(cs: list[ConstraintNF]) -> ConstraintNF:
    for c in cs:
        for a, b in ((c.lhs, c.rhs), (c.rhs, c.lhs)):
            if a.is_zero() and (b.k > 0 or any(m > 0 for _, m in b.atoms)):
                return c
    raise AssertionError("clash reported without a clashing constraint")
