"""Universe levels over zero, successor and max.

A level in normal form is ``s^k z ⊔ s^n1 i1 ⊔ ... ⊔ s^np ip`` with the
variables strictly increasing in :func:`~predicativize.terms.var_order_key`
and every ``n_j <= k``.  Two levels are equivalent exactly when their normal
forms coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from predicativize.errors import NotALevel, UnboundVariable
from predicativize.terms import (
    LUB,
    SUCC,
    ZERO,
    App,
    Const,
    Term,
    Var,
    lub,
    succ,
    var_order_key,
    z,
)


@dataclass(frozen=True, slots=True)
class LevelNF:
    k: int
    atoms: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [v for v, _ in self.atoms]
        if names != sorted(set(names), key=var_order_key):
            raise ValueError(f"atoms not in variable order: {self.atoms}")
        if any(n < 0 or n > self.k for _, n in self.atoms):
            raise ValueError(f"shift exceeds constant part: {self}")

    @property
    def shifts(self) -> dict[str, int]:
        return dict(self.atoms)

    @property
    def variables(self) -> list[str]:
        return [v for v, _ in self.atoms]

    def is_zero(self) -> bool:
        return self.k == 0 and not self.atoms

    def single_var(self) -> str | None:
        """The ``i`` when this is exactly ``z ⊔ i``."""
        if self.k == 0 and len(self.atoms) == 1:
            return self.atoms[0][0]
        return None

    def __str__(self) -> str:
        parts = [_show_shift("z", self.k)] + [_show_shift(v, n) for v, n in self.atoms]
        return " ⊔ ".join(parts)


def _show_shift(base: str, n: int) -> str:
    if n == 0:
        return base
    if n == 1:
        return f"s {base}"
    return f"s^{n} {base}"


def make_nf(k: int, shifts: Mapping[str, int]) -> LevelNF:
    k = max([k, *shifts.values()])
    atoms = tuple(sorted(shifts.items(), key=lambda kv: var_order_key(kv[0])))
    return LevelNF(k, atoms)


ZERO_NF = LevelNF(0)


def var_nf(name: str) -> LevelNF:
    return LevelNF(0, ((name, 0),))


def nf_shift(nf: LevelNF, n: int = 1) -> LevelNF:
    return LevelNF(nf.k + n, tuple((v, m + n) for v, m in nf.atoms))


def nf_join(a: LevelNF, b: LevelNF) -> LevelNF:
    shifts = dict(a.atoms)
    for v, n in b.atoms:
        shifts[v] = max(shifts.get(v, 0), n)
    return make_nf(max(a.k, b.k), shifts)


def nf_join_all(nfs: Iterable[LevelNF]) -> LevelNF:
    out = ZERO_NF
    for nf in nfs:
        out = nf_join(out, nf)
    return out


def nf_subst(nf: LevelNF, mapping: Mapping[str, LevelNF]) -> LevelNF:
    parts = [LevelNF(nf.k)]
    for v, n in nf.atoms:
        parts.append(nf_shift(mapping[v], n) if v in mapping else LevelNF(n, ((v, n),)))
    return nf_join_all(parts)


def level_nf(level: Term) -> LevelNF:
    """Normal form of a level term; raises :class:`NotALevel` otherwise."""
    match level:
        case Const(name) if name == ZERO:
            return ZERO_NF
        case Var(name):
            return var_nf(name)
        case App(Const(name), a) if name == SUCC:
            return nf_shift(level_nf(a))
        case App(App(Const(name), a), b) if name == LUB:
            return nf_join(level_nf(a), level_nf(b))
    raise NotALevel(f"not a level: {level}")


def nf_to_level(nf: LevelNF) -> Term:
    """Render as ``s^k z ⊔ (s^n1 i1 ⊔ (... ⊔ s^np ip))``."""
    parts = [succ(Var(v), n) for v, n in nf.atoms]
    rest = None
    for p in reversed(parts):
        rest = p if rest is None else lub(p, rest)
    head = succ(z(), nf.k)
    return head if rest is None else lub(head, rest)


def nf_to_compact_level(nf: LevelNF) -> Term:
    """Shortest equivalent rendering, used when levels are printed inside terms.

    The constant part is dropped when some variable already carries the
    maximal shift; ``s`` is factored out of the whole join when possible.
    """
    if not nf.atoms:
        return succ(z(), nf.k)
    common = min([nf.k] + [n for _, n in nf.atoms])
    drop_const = max(n for _, n in nf.atoms) == nf.k
    parts = [] if drop_const else [succ(z(), nf.k - common)]
    parts += [succ(Var(v), n - common) for v, n in nf.atoms]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = lub(p, out)
    return succ(out, common)


def interp(level: Term, sigma: Mapping[str, int]) -> int:
    """Value of ``level`` in the naturals under the assignment ``sigma``."""
    match level:
        case Const(name) if name == ZERO:
            return 0
        case Var(name):
            if name not in sigma:
                raise UnboundVariable(name)
            return sigma[name]
        case App(Const(name), a) if name == SUCC:
            return interp(a, sigma) + 1
        case App(App(Const(name), a), b) if name == LUB:
            return max(interp(a, sigma), interp(b, sigma))
    raise NotALevel(f"not a level: {level}")


def interp_nf(nf: LevelNF, sigma: Mapping[str, int]) -> int:
    try:
        return max([nf.k] + [sigma[v] + n for v, n in nf.atoms])
    except KeyError as e:
        raise UnboundVariable(e.args[0]) from None


def level_equiv(l1: Term, l2: Term) -> bool:
    return level_nf(l1) == level_nf(l2)


def level_vars(level: Term) -> set[str]:
    return set(level_nf(level).variables)


# -- constraints ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Constraint:
    """An equation ``lhs = rhs`` between two level terms."""

    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        from predicativize.syntax import show

        return f"{show(self.lhs)} = {show(self.rhs)}"


@dataclass(frozen=True, slots=True)
class ConstraintNF:
    lhs: LevelNF
    rhs: LevelNF

    def to_constraint(self) -> Constraint:
        return Constraint(nf_to_level(self.lhs), nf_to_level(self.rhs))

    def variables(self) -> set[str]:
        return set(self.lhs.variables) | set(self.rhs.variables)

    def atom_count(self) -> int:
        return len(self.lhs.atoms) + len(self.rhs.atoms)

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


def constraint_nf(c: Constraint) -> ConstraintNF:
    return constraint_nf_of(level_nf(c.lhs), level_nf(c.rhs))


def constraint_nf_of(l1: LevelNF, l2: LevelNF) -> ConstraintNF:
    """Put ``l1 = l2`` (already level normal forms) into constraint normal form.

    For a variable on both sides only the occurrence with the larger shift
    survives; then the minimum index is subtracted everywhere.
    """
    s1, s2 = dict(l1.atoms), dict(l2.atoms)
    for v in set(s1) & set(s2):
        if s1[v] < s2[v]:
            del s1[v]
        elif s1[v] > s2[v]:
            del s2[v]
    low = min([l1.k, l2.k, *s1.values(), *s2.values()])
    lhs = LevelNF(l1.k - low, tuple((v, n - low) for v, n in l1.atoms if v in s1))
    rhs = LevelNF(l2.k - low, tuple((v, n - low) for v, n in l2.atoms if v in s2))
    return ConstraintNF(lhs, rhs)


def satisfies(sigma: Mapping[str, int], c: Constraint) -> bool:
    """Ground satisfaction: both sides evaluate to the same natural."""
    return interp(c.lhs, sigma) == interp(c.rhs, sigma)


def satisfies_nf(sigma: Mapping[str, int], c: ConstraintNF) -> bool:
    return interp_nf(c.lhs, sigma) == interp_nf(c.rhs, sigma)


# -- levels inside terms -----------------------------------------------------------


def normalize_levels(t: Term) -> Term:
    """Replace every maximal level subterm headed by ``z``/``s``/``lub`` by its compact normal form."""
    from predicativize.terms import Lam, Pi, is_level_constructor_term

    if is_level_constructor_term(t):
        return nf_to_compact_level(level_nf(t))
    match t:
        case App(f, a):
            return App(normalize_levels(f), normalize_levels(a))
        case Lam(x, ty, body):
            return Lam(x, normalize_levels(ty) if ty is not None else None, normalize_levels(body))
        case Pi(x, dom, cod):
            return Pi(x, normalize_levels(dom), normalize_levels(cod))
    return t
