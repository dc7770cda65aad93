from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import constraint_vars, factors_through, ground_solutions, set_bound
from strategies import LEVEL_NAMES, constraints

from predicativize.levels import Constraint, LevelNF, level_equiv, nf_to_level
from predicativize.syntax import parse_term as p
from predicativize.terms import VarClass, classify
from predicativize.unify import LevelSubst, Solved, Stuck, Unsolvable, unify, unify_steps


def c(lhs: str, rhs: str) -> Constraint:
    return Constraint(p(lhs), p(rhs))


def test_eliminate_one():
    r = unify([c(r"z \/ i1", "z")])
    assert isinstance(r, Solved) and str(r.theta) == "{i1 ↦ z}"


def test_clash():
    r = unify([c("z", "s z")])
    assert isinstance(r, Unsolvable)
    assert str(r.clash) == "z = s z"


def test_decompose():
    r = unify([c("z", r"z \/ i1 \/ i2")])
    assert isinstance(r, Solved)
    assert r.theta.bindings == {"i1": LevelNF(0), "i2": LevelNF(0)}


def test_no_mgu_instance_is_stuck():
    r = unify([c("s i1", r"i2 \/ i3")])
    assert isinstance(r, Stuck)
    assert [str(x) for x in r.residual] == ["s z ⊔ s i1 = z ⊔ i2 ⊔ i3"]


def test_eliminate_two_introduces_a_fresh_variable():
    r = unify([c(r"z \/ i1", r"z \/ i1 \/ i2")])
    assert isinstance(r, Solved)
    image = r.theta["i1"]
    fresh = [v for v in image.variables if classify(v) is VarClass.FRESH]
    assert fresh == ["i'0"] and "i2" in image.variables


def test_fresh_names_avoid_existing_ones():
    r = unify([c(r"z \/ i1", r"z \/ i1 \/ i'0")])
    assert isinstance(r, Solved)
    assert "i'1" in r.theta["i1"].variables


def test_orient_then_eliminate():
    r = unify([c("s i2", "i1")])
    assert isinstance(r, Solved) and r.theta["i1"] == LevelNF(1, (("i2", 1),))


def test_steps_are_traced():
    states = list(unify_steps([c("i1", "s i2"), c("i2", r"i3 \/ s z")]))
    assert states[0].rule == "start"
    assert [s.rule for s in states[1:]] == ["eliminate1", "eliminate1", "solved"]
    assert str(states[-1].theta) == "{i1 ↦ s^2 z ⊔ s i3, i2 ↦ s z ⊔ i3}"


def test_running_example_solution():
    cs = [c("s i4", "i2"), c("i4", "i5"), c("i4", "i6"), c(r"i5 \/ i6", "i3"), c(r"i2 \/ i3", "i1")]
    r = unify(cs)
    assert isinstance(r, Solved)
    # one variable survives; the two levels of the outer product sit one above it
    (v,) = {r.theta[i].single_var() for i in ("i3", "i4", "i5", "i6")}
    assert v is not None
    assert r.theta["i1"] == r.theta["i2"] == LevelNF(1, ((v, 1),))


def test_empty_set_is_solved():
    assert unify([]) == Solved(LevelSubst({}), 0)


@settings(max_examples=300, deadline=None)
@given(st.lists(constraints(), min_size=1, max_size=3))
def test_outcomes_agree_with_brute_force(cs):
    r = unify(cs)
    bound = min(set_bound(cs), 4)
    if isinstance(r, Solved):
        for x in cs:
            assert level_equiv(r.theta.apply_level(x.lhs), r.theta.apply_level(x.rhs))
        names = sorted(constraint_vars(cs))
        images = {v: nf_to_level(r.theta[v]) for v in names}
        for tau in ground_solutions(cs, 2):
            assert factors_through(tau, images, names)
    elif isinstance(r, Unsolvable):
        assert ground_solutions(cs, bound) == []


@settings(max_examples=300, deadline=None)
@given(st.lists(constraints(), max_size=4))
def test_step_invariants(cs):
    states = list(unify_steps(cs))
    steps = [x for x in states[1:] if x.rule not in ("stuck", "solved")]
    assert len(steps) <= len(cs)
    for prev, state in zip(states, states[1:]):
        theta = state.theta
        assert not (theta.domain & theta.range)
        live = set().union(*(x.variables() for x in state.constraints)) if state.constraints else set()
        assert not (theta.domain & live)
        for nf in theta.bindings.values():
            assert LevelNF(nf.k, nf.atoms) == nf
        if state.rule not in ("stuck", "clash", "solved"):
            assert len(state.constraints) < len(prev.constraints)
    fresh_in_input = [v for v in constraint_vars(cs) if classify(v) is VarClass.FRESH]
    assert not fresh_in_input
    assert set(LEVEL_NAMES) >= constraint_vars(cs)
