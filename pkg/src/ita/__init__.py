"""
Interrupt timed automata: models, semantics, class graphs, ITA⁻ translation,
bounded path search and timed temporal logic checks
"""
from .classgraph import ClassGraph, explore, reachable, to_dot, to_json, untimed_automaton
from .errors import (
    ClassCapExceeded, ConstraintCapExceeded, ExpressionCapExceeded, FormulaError, ItaError,
    ItaSyntaxError, ModelError, PathChainError, ResourceCapExceeded, StateCapExceeded, StepError,
)
from .expressions import build_expression_sets, build_expression_sets_with_formula
from .itaminus import build_F_sets, build_ita_minus, to_ita_minus
from .lpreach import bounded_reach, compute_bound, encode_path, feasible
from .model import ITAModel, Policy, is_ita_minus, parse_ita, render_ita, validate
from .numerics import Comparator, LinExpr, Update
from .semantics import FireStep, TimeStep, parse_run, render_run, replay
from .tctl import check_formula, parse_formula

__all__ = [
    "ClassCapExceeded", "ClassGraph", "Comparator", "ConstraintCapExceeded",
    "ExpressionCapExceeded", "FireStep", "FormulaError", "ITAModel", "ItaError",
    "ItaSyntaxError", "LinExpr", "ModelError", "PathChainError", "Policy",
    "ResourceCapExceeded", "StateCapExceeded", "StepError", "TimeStep", "Update",
    "bounded_reach", "build_F_sets", "build_expression_sets", "build_expression_sets_with_formula",
    "build_ita_minus", "check_formula", "compute_bound", "encode_path", "explore", "feasible",
    "is_ita_minus", "parse_formula", "parse_ita", "parse_run", "reachable", "render_ita",
    "render_run", "replay", "to_dot", "to_ita_minus", "to_json", "untimed_automaton", "validate",
]
