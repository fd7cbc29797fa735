import random
from fractions import Fraction
from itertools import product

import pytest

from conftest import random_ita_minus
from src.ita.classgraph import explore, reachable
from src.ita.errors import ConstraintCapExceeded, PathChainError
from src.ita.lpreach import (
    ALL_PRUNING, CYCLE_PRUNING, NO_PRUNING, LinConstraintSystem, bounded_reach, compute_bound,
    constant_bits, encode_path, feasible, general_ita_bound, general_ita_bound_terms, prunable,
)
from src.ita.model import parse_ita
from src.ita.numerics import Comparator, LinExpr
from src.ita.semantics import FireStep, TimeStep, accepts, replay


def _system(*constraints):
    s = LinConstraintSystem()
    s.add_variable("d1")
    s.add_variable("d2")
    for expr, op in constraints:
        s.add(expr, op)
    return s


D1 = LinExpr.var(1)
D2 = LinExpr.var(2)


def test_open_interval_is_feasible():
    s = LinConstraintSystem()
    x = LinExpr.var(s.add_variable("x"))
    s.add(x, Comparator.GT)
    s.add(x.shift(-1), Comparator.LT)
    result = feasible(s)
    assert result
    assert result.value(1) == Fraction(1, 2)


def test_contradiction_is_infeasible():
    s = LinConstraintSystem()
    x = LinExpr.var(s.add_variable("x"))
    s.add(x.shift(-1), Comparator.GE)
    s.add(x.shift(-1), Comparator.LT)
    assert not feasible(s)


def test_strictness_is_tracked():
    s = _system((D1 - D2, Comparator.LT), (D2 - D1, Comparator.LT))
    assert not feasible(s)
    s = _system((D1 - D2, Comparator.LE), (D2 - D1, Comparator.LE))
    assert feasible(s)


def test_two_level_path_system():
    s = _system(
        (D1, Comparator.GE), (D2, Comparator.GE), (D1.shift(-1), Comparator.LT),
        (D1 + D2.scale(2) - LinExpr.constant(2), Comparator.EQ),
    )
    assert feasible(s).point == (Fraction(1, 2), Fraction(3, 4))
    preferred = feasible(s, prefer={1: Fraction(7, 10)})
    assert preferred.point == (Fraction(7, 10), Fraction(13, 20))


def _satisfies(s: LinConstraintSystem, point) -> bool:
    return all(op.holds(expr.evaluate(point)) for expr, op in s.constraints)


@pytest.mark.parametrize("prefer", [{1: 5}, {2: 5}, {1: 3, 2: 7}])
def test_cancelled_variable_honours_preference(prefer):
    # eliminating d2 cancels d1 as well, leaving d1 free
    s = _system((D1 - D2, Comparator.GE), (D2 - D1, Comparator.GE))
    result = feasible(s, prefer=prefer)
    assert result
    assert _satisfies(s, result.point)
    if 1 in prefer:
        assert result.point == (prefer[1], prefer[1])


def test_empty_system_is_feasible():
    result = feasible(LinConstraintSystem())
    assert result
    assert result.point == ()


def test_constraint_cap():
    s = LinConstraintSystem()
    xs = [LinExpr.var(s.add_variable(f"x{i}")) for i in range(1, 5)]
    for a in xs:
        for b in xs:
            if a != b:
                s.add(a - b + LinExpr.constant(1), Comparator.GE)
        s.add(a, Comparator.GE)
        s.add(a.shift(-10), Comparator.LE)
    with pytest.raises(ConstraintCapExceeded):
        feasible(s, max_constraints=2)


def test_encode_two_level_path(a1):
    encoding = encode_path(a1, [0, 1])
    constraints = set(encoding.system.constraints)
    assert constraints == {
        (D1, Comparator.GE),
        (D1.shift(-1), Comparator.LT),
        (D2, Comparator.GE),
        (D1 + D2.scale(2) - LinExpr.constant(2), Comparator.EQ),
    }
    assert encoding.states == ["q0", "q1", "q2"]
    assert encoding.entry_times[-1] == D1 + D2
    assert encoding.clocks[-1] == (D1, D2)


def test_encode_empty_path(a1):
    encoding = encode_path(a1, [])
    assert encoding.system.variables == []
    assert feasible(encoding.system)


def test_urgent_delay_is_zero(policies):
    encoding = encode_path(policies, [0, 1])
    assert (D1, Comparator.EQ) in encoding.system.constraints
    assert (D2, Comparator.GT) in encoding.system.constraints


def test_path_must_chain(a1):
    with pytest.raises(PathChainError):
        encode_path(a1, [1])


def test_witness_replays(a1):
    encoding = encode_path(a1, [0, 1], trailing=True)
    result = feasible(encoding.system)
    steps = encoding.witness(result)
    assert steps[-1] == TimeStep(result.value(encoding.trailing))
    final, _ = replay(a1, steps)
    assert final.state == "q2"


def test_bounded_reach_finds_witness(a1):
    found = bounded_reach(a1, "q2", depth=4)
    assert found.hit
    assert found.path == (0, 1)
    assert found.witness == [TimeStep(Fraction(1, 2)), FireStep(0), TimeStep(Fraction(3, 4)), FireStep(1)]
    assert accepts(a1, [("a", Fraction(1, 2)), ("b", Fraction(5, 4))], found.witness)


def test_bounded_reach_too_shallow(a1):
    found = bounded_reach(a1, "q2", depth=1)
    assert not found.hit
    assert not found.complete


def test_bounded_reach_exhausts_acyclic_model(a1_strengthened):
    found = bounded_reach(a1_strengthened, "q2")
    assert not found.hit
    assert found.complete
    assert reachable(a1_strengthened, "q2")[0] is False


def test_bounded_reach_through_translation(a2):
    found = bounded_reach(a2, "q5", depth=8)
    assert found.hit
    assert found.transformed
    final, _ = replay(a2, found.witness)
    assert final.state == "q5"


def test_bounds():
    assert compute_bound(2, 2) == 4096
    assert compute_bound(1, 1) == 8
    assert general_ita_bound_terms(2, 3, 4) == (4, 12 * 3 * 4 * 8)
    assert general_ita_bound(1, 1, 1) == 3 ** 12


def test_constant_bits(a1):
    assert constant_bits(a1) == 3


def test_pruning_rules(a4):
    # the q1 loop resets x2, so a second pass through it is redundant
    assert prunable(a4, [0, 1, 1], ALL_PRUNING)
    assert prunable(a4, [0, 1, 1], CYCLE_PRUNING)
    assert not prunable(a4, [0, 1, 1], NO_PRUNING)
    assert not prunable(a4, [0, 1], ALL_PRUNING)


def test_wait_earlier_rule():
    model = parse_ita("ita idle { clocks 1; state s level 1 policy lazy initial final; trans s -> s on a when x1 > 0; }")
    assert prunable(model, [0, 0], ALL_PRUNING)
    assert not prunable(model, [0, 0], CYCLE_PRUNING)
    urgent = parse_ita("ita rush { clocks 1; state s level 1 policy urgent initial final; trans s -> s on a; }")
    assert prunable(urgent, [0, 0], CYCLE_PRUNING)


@pytest.mark.parametrize("seed", range(20))
def test_bounded_search_agrees_with_class_graph(seed):
    model = random_ita_minus(seed)
    g = explore(model)
    for state in model.states:
        found = bounded_reach(model, state.name, depth=24)
        expected = reachable(model, state.name, g)[0]
        if found.hit:
            assert expected, state.name
            final, _ = replay(model, found.witness)
            assert final.state == state.name
        elif found.complete:
            assert not expected, state.name


@pytest.mark.parametrize("seed", range(10))
def test_deeper_search_keeps_shallower_hits(seed):
    model = random_ita_minus(seed)
    for state in model.states:
        hit_at = None
        for depth in range(9):
            found = bounded_reach(model, state.name, depth=depth)
            if found.hit:
                assert len(found.path) <= depth
                hit_at = depth if hit_at is None else hit_at
            else:
                assert hit_at is None, (state.name, depth)


@pytest.mark.parametrize("seed", range(6))
def test_parallel_search_matches_sequential(seed):
    model = random_ita_minus(seed)
    for state in model.states:
        sequential = bounded_reach(model, state.name, depth=8, jobs=1)
        parallel = bounded_reach(model, state.name, depth=8, jobs=3)
        assert parallel == sequential


def test_parallel_search_through_translation(a2):
    assert bounded_reach(a2, "q5", depth=8, jobs=2) == bounded_reach(a2, "q5", depth=8, jobs=1)


GRID = [Fraction(k, 2) for k in range(-8, 9)]


def _random_system(rng):
    s = LinConstraintSystem()
    s.add_variable("u")
    s.add_variable("v")
    for _ in range(rng.randint(1, 4)):
        expr = LinExpr.build({1: rng.randint(-2, 2), 2: rng.randint(-2, 2)}, rng.randint(-3, 3))
        s.add(expr, rng.choice(list(Comparator)))
    return s


def test_elimination_agrees_with_sampling():
    rng = random.Random(7)
    for case in range(200):
        s = _random_system(rng)
        result = feasible(s)
        if result:
            assert _satisfies(s, result.point), case
        if any(_satisfies(s, point) for point in product(GRID, GRID)):
            assert result, case
