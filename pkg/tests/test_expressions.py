from fractions import Fraction

import pytest

from conftest import random_ita_minus
from src.ita.errors import ExpressionCapExceeded
from src.ita.expressions import (
    ACTIVE, ZERO, Provenance, build_expression_sets, build_expression_sets_with_formula, closure_is_stable,
    expression_bound,
)
from src.ita.numerics import Comparator, LinExpr

HALF = Fraction(1, 2)


def test_two_level_sets(a1):
    esets = build_expression_sets(a1)
    assert esets.as_sets() == {
        1: frozenset({LinExpr.var(1), LinExpr.constant(0), LinExpr.constant(1), LinExpr.constant(2)}),
        2: frozenset({LinExpr.var(2), LinExpr.constant(0), LinExpr.build({1: -HALF}, 1)}),
    }


def test_seed_members_come_first(a1):
    esets = build_expression_sets(a1)
    for k in (1, 2):
        assert esets.at(k)[ACTIVE] == LinExpr.var(k)
        assert esets.at(k)[ZERO] == LinExpr.constant(0)


def test_level_difference_reaches_lower_level(a1):
    esets = build_expression_sets(a1)
    position = esets.index_of(1, LinExpr.constant(2))
    assert esets.provenance[0][position] is Provenance.LEVEL_DIFFERENCE


def test_formula_comparisons_extend_sets(a1):
    comparison = (LinExpr.var(2) - LinExpr.var(1), Comparator.GT)
    esets = build_expression_sets_with_formula(a1, [comparison])
    assert esets.as_sets()[1] == frozenset({
        LinExpr.var(1), LinExpr.constant(0), LinExpr.constant(1),
        LinExpr.constant(Fraction(2, 3)), LinExpr.constant(2),
    })
    assert esets.as_sets()[2] == frozenset({
        LinExpr.var(2), LinExpr.constant(0), LinExpr.build({1: -HALF}, 1), LinExpr.var(1),
    })


def test_saturated_sets_are_closed(a1, a4):
    for model in (a1, a4, random_ita_minus(3), random_ita_minus(11)):
        assert closure_is_stable(model, build_expression_sets(model))


def test_expression_cap(a1):
    with pytest.raises(ExpressionCapExceeded) as info:
        build_expression_sets(a1, max_exprs=2)
    assert info.value.limit == 2


def test_json_export_lists_provenance(a1):
    exported = build_expression_sets(a1).to_json()
    assert exported["1"][0] == {"expr": "x1", "provenance": "initial"}
    assert {"expr": "-1/2*x1 + 1", "provenance": "guard"} in exported["2"]


def test_expression_bound():
    assert expression_bound(2, 2, 2) == 4 ** 5
    assert expression_bound(2, 2, 1) == 4 ** 17
