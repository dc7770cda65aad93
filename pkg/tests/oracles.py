"""Reference implementations used as test oracles.

Nothing here calls the package's level normaliser or solver: levels are
evaluated directly on the term structure and solutions are found by
exhaustive search.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, Mapping

from predicativize.levels import Constraint
from predicativize.terms import App, Const, Term, Var, lub, succ, z

LEVEL_VARS = ("i1", "i2", "i3")


def evaluate(level: Term, sigma: Mapping[str, int]) -> int:
    match level:
        case Const("z"):
            return 0
        case Var(name):
            return sigma[name]
        case App(Const("s"), a):
            return evaluate(a, sigma) + 1
        case App(App(Const("lub"), a), b):
            return max(evaluate(a, sigma), evaluate(b, sigma))
    raise ValueError(f"not a level: {level}")


def variables(level: Term) -> set[str]:
    match level:
        case Var(name):
            return {name}
        case App(f, a):
            return variables(f) | variables(a)
    return set()


def max_constant(level: Term) -> int:
    """Largest number of successors stacked anywhere in ``level``."""
    match level:
        case App(Const("s"), a):
            return 1 + max_constant(a)
        case App(App(Const("lub"), a), b):
            return max(max_constant(a), max_constant(b))
    return 0


def assignments(names: Iterable[str], bound: int) -> Iterator[dict[str, int]]:
    names = sorted(set(names))
    for values in itertools.product(range(bound + 1), repeat=len(names)):
        yield dict(zip(names, values))


def semantically_equal(l1: Term, l2: Term) -> bool:
    bound = max(max_constant(l1), max_constant(l2)) + 2
    return all(evaluate(l1, s) == evaluate(l2, s) for s in assignments(variables(l1) | variables(l2), bound))


def constraint_vars(cs: Iterable[Constraint]) -> set[str]:
    out: set[str] = set()
    for c in cs:
        out |= variables(c.lhs) | variables(c.rhs)
    return out


def holds(c: Constraint, sigma: Mapping[str, int]) -> bool:
    return evaluate(c.lhs, sigma) == evaluate(c.rhs, sigma)


def ground_solutions(cs: list[Constraint], bound: int) -> list[dict[str, int]]:
    names = constraint_vars(cs)
    return [s for s in assignments(names, bound) if all(holds(c, s) for c in cs)]


def set_bound(cs: Iterable[Constraint]) -> int:
    return max([max(max_constant(c.lhs), max_constant(c.rhs)) for c in cs] + [0]) + 2


def factors_through(tau: Mapping[str, int], theta: Mapping[str, Term], names: Iterable[str]) -> bool:
    """Is there a ground ``tau'`` with ``tau(v) = theta(v) tau'`` for every ``v`` in ``names``?"""
    names = list(names)
    images = {v: theta.get(v, Var(v)) for v in names}
    free = set().union(*(variables(t) for t in images.values())) if images else set()
    top = max(tau.values(), default=0)
    for tau2 in assignments(free, top):
        if all(evaluate(images[v], tau2) == tau[v] for v in names):
            return True
    return False


# -- random levels and constraints ------------------------------------------------------


def random_level(rng: random.Random, names=LEVEL_VARS, depth: int = 3, max_succ: int = 3) -> Term:
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        if rng.random() < 0.25:
            return succ(z(), rng.randint(0, max_succ))
        return succ(Var(rng.choice(names)), rng.randint(0, 1))
    if roll < 0.55:
        return succ(random_level(rng, names, depth - 1, max_succ), 1)
    return lub(random_level(rng, names, depth - 1, max_succ), random_level(rng, names, depth - 1, max_succ))


def _capped(rng: random.Random, names, depth: int, max_const: int) -> Term:
    while True:
        t = random_level(rng, names, depth, max_const)
        if max_constant(t) <= max_const:
            return t


def perturb(rng: random.Random, level: Term) -> Term:
    """An equivalent rewrite of ``level`` using the level equations."""
    choices = [
        lambda t: lub(t, t),
        lambda t: lub(z(), t),
        lambda t: lub(t, z()),
        lambda t: t,
    ]
    match level:
        case App(App(Const("lub"), a), b):
            if rng.random() < 0.5:
                return lub(perturb(rng, b), perturb(rng, a))
            return lub(perturb(rng, a), perturb(rng, b))
        case App(Const("s"), App(App(Const("lub"), a), b)):
            return lub(succ(perturb(rng, a)), succ(perturb(rng, b)))
        case App(Const("s"), a):
            if rng.random() < 0.3:
                return lub(a, succ(perturb(rng, a)))
            return succ(perturb(rng, a))
    return rng.choice(choices)(level)


def random_level_pair(rng: random.Random) -> tuple[Term, Term]:
    l1 = _capped(rng, LEVEL_VARS, 3, 3)
    if rng.random() < 0.5:
        return l1, perturb(rng, l1)
    return l1, _capped(rng, LEVEL_VARS, 3, 3)


def random_constraint(rng: random.Random, names=LEVEL_VARS, depth: int = 2, max_succ: int = 2) -> Constraint:
    return Constraint(random_level(rng, names, depth, max_succ), random_level(rng, names, depth, max_succ))


def simple_constraint(rng: random.Random, names=LEVEL_VARS) -> Constraint:
    """Small constraints that the solver often finishes on."""

    def side() -> Term:
        parts = []
        for _ in range(rng.randint(1, 2)):
            if rng.random() < 0.2:
                parts.append(succ(z(), rng.randint(0, 1)))
            else:
                parts.append(succ(Var(rng.choice(names)), rng.choice([0, 0, 0, 1])))
        out = parts[0]
        for p in parts[1:]:
            out = lub(out, p)
        return out

    return Constraint(side(), side())


def random_constraint_set(rng: random.Random, names=LEVEL_VARS) -> list[Constraint]:
    return [simple_constraint(rng, names) for _ in range(rng.randint(1, 3))]


def find_ground_solution(cs: list[Constraint], bound: int) -> dict[str, int] | None:
    """Backtracking search for a solution with values ``<= bound``.

    A constraint is checked as soon as all of its variables are assigned,
    which keeps sets with a few dozen variables tractable.
    """
    order: list[str] = []
    for c in cs:
        for v in sorted(constraint_vars([c])):
            if v not in order:
                order.append(v)
    ready: dict[int, list[Constraint]] = {}
    for c in cs:
        names = constraint_vars([c])
        last = max((order.index(v) for v in names), default=-1)
        ready.setdefault(last, []).append(c)
    if any(not holds(c, {}) for c in ready.get(-1, [])):
        return None
    sigma: dict[str, int] = {}

    def go(n: int) -> bool:
        if n == len(order):
            return True
        for value in range(bound + 1):
            sigma[order[n]] = value
            if all(holds(c, sigma) for c in ready.get(n, [])) and go(n + 1):
                return True
        del sigma[order[n]]
        return False

    return dict(sigma) if go(0) else None
