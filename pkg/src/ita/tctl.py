"""
Timed temporal logic over ITA

Two fragments are decided:

* clock-comparison CTL (untils without time bounds, atoms may compare the
  model's own clocks), checked by fixpoints on a class graph whose expression
  sets are extended with the formula's comparisons;
* duration-bounded untils over propositions (no nesting), checked by bounded
  path search with exact linear feasibility, on the ITA⁻ translation when the
  model updates frozen clocks.

Until semantics differ between the two fragments: the clock fragment lets the
positions before the witness satisfy either operand, the bounded fragment
requires the left operand strictly before the witness position. Positions of
the bounded fragment are the initial configuration and every configuration
entered by a discrete step.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx
from lark import Lark, v_args

from ..config import get_settings
from .classgraph import ClassGraph, EdgeKind, NodeTag, class_constraints, comparison_holds, dead_nodes, explore
from .errors import FormulaError
from .expressions import build_expression_sets_with_formula
from .itaminus import ItaMinusResult, build_ita_minus, lower_run
from .lpreach import (
    ALL_PRUNING, CYCLE_PRUNING, NO_PRUNING, Constraint, FeasibilityResult, PathEncoding,
    encode_path, feasible, search_paths,
)
from .model import ITAModel, is_ita_minus
from .numerics import Comparator, LinExpr, parse_rational
from .semantics import RunStep
from .syntax import EXPRESSION_GRAMMAR, ExpressionBuilder, run_parser, unquote

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class Quantifier(Enum):
    EXISTS = "E"
    ALWAYS = "A"


@dataclass(frozen=True)
class TimeBound:
    op: Comparator
    value: Fraction

    def __str__(self) -> str:
        return f"{{{self.op.value}{self.value}}}"


@dataclass(frozen=True)
class Bool:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Prop:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Compare:
    """`expr op 0` over the model clocks"""

    expr: LinExpr
    op: Comparator

    def __str__(self) -> str:
        return f"{self.expr} {self.op.value} 0"


@dataclass(frozen=True)
class Not:
    arg: "Formula"

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} && {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} || {_wrap(self.right)}"


@dataclass(frozen=True)
class Until:
    quantifier: Quantifier
    left: "Formula"
    right: "Formula"
    bound: Optional[TimeBound] = None

    def __str__(self) -> str:
        bound = "" if self.bound is None else str(self.bound)
        return f"{self.quantifier.value} {_wrap(self.left)} U{bound} {_wrap(self.right)}"


Formula = Union[Bool, Prop, Compare, Not, And, Or, Until]

TRUE = Bool(True)


def _wrap(f: Formula) -> str:
    if isinstance(f, (Bool, Prop, Not)):
        return str(f)
    return f"({f})"


FORMULA_GRAMMAR = r"""
?start: formula
?formula: disjunction
        | disjunction "->" formula            -> implies
?disjunction: conjunction
            | disjunction "||" conjunction    -> or_
?conjunction: unary
            | conjunction "&&" unary          -> and_
?unary: "!" unary                             -> not_
      | "E" unary "U" bound? unary            -> exists_until
      | "A" unary "U" bound? unary            -> always_until
      | "EF" bound? unary                     -> ef
      | "AF" bound? unary                     -> af
      | "EG" bound? unary                     -> eg
      | "AG" bound? unary                     -> ag
      | "(" formula ")"
      | "true"                                -> true
      | "false"                               -> false
      | sum COMP sum                          -> comparison
      | name
bound: "{" COMP NUMBER "}"
name: CNAME | ESCAPED_STRING

%import common.CNAME
%import common.ESCAPED_STRING
""" + EXPRESSION_GRAMMAR

_parser = Lark(FORMULA_GRAMMAR, parser="lalr", propagate_positions=True)


@v_args(inline=True)
class _FormulaBuilder(ExpressionBuilder):
    def name(self, token):
        return Prop(unquote(token))

    def true(self):
        return TRUE

    def false(self):
        return Bool(False)

    def comparison(self, left, op, right):
        return Compare(left - right, Comparator.parse(str(op)))

    def bound(self, op, value):
        comparator = Comparator.parse(str(op))
        if comparator is Comparator.EQ:
            raise FormulaError(f"time bounds use <, <=, >= or >, not {op}")
        return TimeBound(comparator, parse_rational(value))

    def not_(self, arg):
        return Not(arg)

    def and_(self, left, right):
        return And(left, right)

    def or_(self, left, right):
        return Or(left, right)

    def implies(self, left, right):
        return Or(Not(left), right)

    def exists_until(self, left, *rest):
        return Until(Quantifier.EXISTS, left, rest[-1], rest[0] if len(rest) == 2 else None)

    def always_until(self, left, *rest):
        return Until(Quantifier.ALWAYS, left, rest[-1], rest[0] if len(rest) == 2 else None)

    def ef(self, *args):
        return Until(Quantifier.EXISTS, TRUE, args[-1], args[0] if len(args) == 2 else None)

    def af(self, *args):
        return Until(Quantifier.ALWAYS, TRUE, args[-1], args[0] if len(args) == 2 else None)

    def eg(self, *args):
        return Not(self.af(*args[:-1], Not(args[-1])))

    def ag(self, *args):
        return Not(self.ef(*args[:-1], Not(args[-1])))


def parse_formula(text: str) -> Formula:
    """Parse a formula; EF/AF/EG/AG are expanded into untils"""
    return run_parser(_parser, _FormulaBuilder(), text)


def _children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or, Until)):
        return (f.left, f.right)
    return ()


def _walk(f: Formula):
    yield f
    for child in _children(f):
        yield from _walk(child)


def comparisons_of(f: Formula) -> List[Tuple[LinExpr, Comparator]]:
    found: List[Tuple[LinExpr, Comparator]] = []
    for node in _walk(f):
        if isinstance(node, Compare) and (node.expr, node.op) not in found:
            found.append((node.expr, node.op))
    return found


class Logic(Enum):
    CLOCK_CTL = "tctl-c-int"
    BOUNDED_UNTIL = "tctl-p"


def classify(f: Formula) -> Logic:
    """Fragment of `f`; FormulaError when it belongs to neither"""
    untils = [n for n in _walk(f) if isinstance(n, Until)]
    if not any(u.bound is not None for u in untils):
        return Logic.CLOCK_CTL
    if any(isinstance(n, Compare) for n in _walk(f)):
        raise FormulaError("time-bounded untils cannot be combined with clock comparisons")
    for u in untils:
        if any(isinstance(n, Until) for side in (u.left, u.right) for n in _walk(side)):
            raise FormulaError(f"time-bounded untils cannot be nested: {u}")
    return Logic.BOUNDED_UNTIL


# ---------------------------------------------------------------------------
# Clock-comparison CTL on the class graph
# ---------------------------------------------------------------------------

@dataclass
class LabeledClassGraph:
    graph: ClassGraph
    comparisons: Dict[Tuple[LinExpr, Comparator], FrozenSet[int]] = field(default_factory=dict)

    def holds(self, node_id: int, atom: Union[Prop, Compare]) -> bool:
        if isinstance(atom, Prop):
            return atom.name in self.graph.props_of(node_id)
        return node_id in self.comparisons[(atom.expr, atom.op)]


def label_comparisons(g: ClassGraph, comparisons: Sequence[Tuple[LinExpr, Comparator]]) -> LabeledClassGraph:
    m = g.model
    labels = {}
    for expr, op in comparisons:
        labels[(expr, op)] = frozenset(
            n for n in g.graph.nodes
            if comparison_holds(g.node(n), g.esets, expr, op, m.level(g.node(n).state))
        )
    return LabeledClassGraph(g, labels)


def ctl_check(lg: LabeledClassGraph, f: Formula) -> FrozenSet[int]:
    """Classes satisfying `f`

    Untils are least fixpoints; runs end at classes without edges and at
    time-divergent classes, so AU never holds there unless the right operand does.
    """
    g = lg.graph
    everything = frozenset(g.graph.nodes)

    if isinstance(f, Bool):
        return everything if f.value else frozenset()
    if isinstance(f, (Prop, Compare)):
        return frozenset(n for n in everything if lg.holds(n, f))
    if isinstance(f, Not):
        return everything - ctl_check(lg, f.arg)
    if isinstance(f, And):
        return ctl_check(lg, f.left) & ctl_check(lg, f.right)
    if isinstance(f, Or):
        return ctl_check(lg, f.left) | ctl_check(lg, f.right)
    if f.bound is not None:
        raise FormulaError(f"time-bounded until in a clock-comparison formula: {f}")

    left = ctl_check(lg, f.left)
    right = ctl_check(lg, f.right)
    if f.quantifier is Quantifier.EXISTS:
        return _exists_until(g, left, right)
    return _always_until(g, left, right, dead_nodes(g))


def _exists_until(g: ClassGraph, left: FrozenSet[int], right: FrozenSet[int]) -> FrozenSet[int]:
    result: Set[int] = set(right)
    stack = list(right)
    while stack:
        v = stack.pop()
        for u in g.graph.predecessors(v):
            if u not in result and u in left:
                result.add(u)
                stack.append(u)
    return frozenset(result)


def _always_until(g: ClassGraph, left: FrozenSet[int], right: FrozenSet[int],
                  dead: FrozenSet[int]) -> FrozenSet[int]:
    result: Set[int] = set(right)
    changed = True
    while changed:
        changed = False
        for n in g.graph.nodes:
            if n in result or n not in left or n in dead:
                continue
            if all(v in result for _, v in g.graph.out_edges(n)):
                result.add(n)
                changed = True
    return frozenset(result)


@dataclass
class CintResult:
    verdict: bool
    labeled: LabeledClassGraph
    satisfying: FrozenSet[int]

    @property
    def complete(self) -> bool:
        return True

    def truth(self) -> Dict[int, bool]:
        return {n: n in self.satisfying for n in sorted(self.labeled.graph.graph.nodes)}


def check_tctl_cint(m: ITAModel, f: Formula, max_classes: Optional[int] = None,
                    max_exprs: Optional[int] = None, jobs: Optional[int] = None) -> CintResult:
    comparisons = comparisons_of(f)
    for expr, _ in comparisons:
        if expr.top_level > m.clocks:
            raise FormulaError(f"comparison mentions a clock beyond x{m.clocks}: {expr}")
    esets = build_expression_sets_with_formula(m, comparisons, max_exprs=max_exprs)
    g = explore(m, esets, max_classes=max_classes, jobs=jobs)
    lg = label_comparisons(g, comparisons)
    satisfying = ctl_check(lg, f)
    verdict = g.initial in satisfying
    logger.info("%s on %s: %s (%d classes)", f, m.name, verdict, len(g))
    return CintResult(verdict, lg, satisfying)


# ---------------------------------------------------------------------------
# Duration-bounded untils by path search
# ---------------------------------------------------------------------------

StatePredicate = Callable[[str], bool]


def state_holds(m: ITAModel, f: Formula, state: str) -> bool:
    """Truth of a propositional formula in a state"""
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, Prop):
        return f.name in m.props_of(state)
    if isinstance(f, Not):
        return not state_holds(m, f.arg, state)
    if isinstance(f, And):
        return state_holds(m, f.left, state) and state_holds(m, f.right, state)
    if isinstance(f, Or):
        return state_holds(m, f.left, state) or state_holds(m, f.right, state)
    raise FormulaError(f"not a state proposition: {f}")


@dataclass
class TctlPResult:
    """Verdict of a bounded-until check

    `evidence` is a witness run for true existential verdicts and a
    counterexample run for false universal ones, always on the input model.
    """

    verdict: bool
    complete: bool
    procedure: str
    evidence: Optional[List[RunStep]] = None
    path: Tuple[int, ...] = ()
    pumped: Optional[Tuple[int, int]] = None
    depth: int = 0
    transformed: bool = False

    def negated(self) -> "TctlPResult":
        return TctlPResult(not self.verdict, self.complete, self.procedure, self.evidence,
                           self.path, self.pumped, self.depth, self.transformed)


@dataclass
class _Searched:
    model: ITAModel
    translation: Optional[ItaMinusResult]

    def lower(self, run: Optional[List[RunStep]]) -> Optional[List[RunStep]]:
        if run is None or self.translation is None:
            return run
        return lower_run(self.translation, run)


def _prepare(m: ITAModel, max_states: Optional[int] = None) -> _Searched:
    if is_ita_minus(m)[0]:
        return _Searched(m, None)
    translation = build_ita_minus(m, max_states=max_states)
    return _Searched(translation.model, translation)


def _predicate(m: ITAModel, f: Formula) -> StatePredicate:
    cache: Dict[str, bool] = {}

    def holds(state: str) -> bool:
        if state not in cache:
            cache[state] = state_holds(m, f, state)
        return cache[state]

    return holds


def _depth(depth: Optional[int]) -> int:
    return get_settings().tctl_depth if depth is None else depth


def check_EU_bounded_below(m: ITAModel, p: Formula, r: Formula, a, strict: bool,
                           depth: Optional[int] = None,
                           max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    """E p U{<=a} r, or E p U{<a} r when `strict`"""
    depth = _depth(depth)
    a = Fraction(a)
    searched = _prepare(m)
    model = searched.model
    p_holds, r_holds = _predicate(model, p), _predicate(model, r)
    op = Comparator.LT if strict else Comparator.LE

    def in_time(encoding: PathEncoding) -> List[Constraint]:
        return [(encoding.entry_times[-1].shift(-a), op)]

    def accept(encoding: PathEncoding, point: FeasibilityResult):
        if r_holds(encoding.states[-1]):
            return point, encoding, None
        return None

    outcome = search_paths(model, depth, accept, extend=p_holds, rules=ALL_PRUNING,
                           constrain=in_time, max_constraints=max_constraints, jobs=jobs)
    return TctlPResult(outcome.hit, outcome.complete, "direct",
                       searched.lower(outcome.witness), outcome.path,
                       depth=depth, transformed=searched.translation is not None)


def _pumping_constraints(model: ITAModel, encoding: PathEncoding, i: int, j: int
                         ) -> Optional[List[Constraint]]:
    """Constraints making steps i+1..j repeatable, None when their structure forbids it"""
    path = encoding.path
    e = model.transition(path[i - 1])
    k = model.level(e.source)
    for s in range(i + 1, j):
        if model.level(model.transition(path[s - 1]).source) < k:
            return None
    elapsed = encoding.delay_sum(i + 1, j)
    constraints: List[Constraint] = [(elapsed, Comparator.GT)]
    if e.update.assigns(k):
        return constraints
    if any(model.transition(path[s - 1]).update.assigns(k) for s in range(i + 1, j)):
        return None
    for s in range(i + 1, j + 1):
        if model.level(encoding.states[s - 1]) == k:
            constraints.append((LinExpr.var(encoding.delays[s - 1]), Comparator.EQ))
    return constraints


def _pump(encoding: PathEncoding, point: FeasibilityResult, i: int, j: int,
          a: Fraction, strict: bool) -> List[RunStep]:
    """Witness run with steps i+1..j repeated until the final position is late enough"""
    steps = encoding.witness(point)
    delta = sum((point.value(d) for d in encoding.delays[i:j]), Fraction(0))
    reached = sum((point.value(d) for d in encoding.delays), Fraction(0))
    copies = 0
    if reached < a or (strict and reached == a):
        copies = math.ceil((a - reached) / delta)
        if strict and reached + copies * delta == a:
            copies += 1
    block = steps[2 * i:2 * j]
    return steps[:2 * j] + block * copies + steps[2 * j:]


def check_EU_bounded_above(m: ITAModel, p: Formula, r: Formula, a, strict: bool,
                           depth: Optional[int] = None,
                           max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    """E p U{>=a} r, or E p U{>a} r when `strict`

    A direct search for a late enough witness is followed, on failure, by a
    search for a path whose repeated transition encloses a repeatable segment
    during which time elapses.
    """
    depth = _depth(depth)
    a = Fraction(a)
    searched = _prepare(m)
    model = searched.model
    transformed = searched.translation is not None
    p_holds, r_holds = _predicate(model, p), _predicate(model, r)
    op = Comparator.GT if strict else Comparator.GE

    def late(encoding: PathEncoding, point: FeasibilityResult):
        if not r_holds(encoding.states[-1]):
            return None
        extra = [(encoding.entry_times[-1].shift(-a), op)]
        return feasible(encoding.system.extended(extra), max_constraints=max_constraints), encoding, None

    direct = search_paths(model, depth, late, extend=p_holds, rules=CYCLE_PRUNING,
                          max_constraints=max_constraints, jobs=jobs)
    if direct.hit:
        return TctlPResult(True, True, "direct", searched.lower(direct.witness), direct.path,
                           depth=depth, transformed=transformed)

    def pumpable(encoding: PathEncoding, point: FeasibilityResult):
        if not r_holds(encoding.states[-1]):
            return None
        path = encoding.path
        for j in range(2, len(path) + 1):
            for i in range(1, j):
                if path[i - 1] != path[j - 1]:
                    continue
                extra = _pumping_constraints(model, encoding, i, j)
                if extra is None:
                    continue
                result = feasible(encoding.system.extended(extra), max_constraints=max_constraints)
                if result:
                    return result, encoding, (i, j)
        return None

    pumping = search_paths(model, 2 * depth + 1, pumpable, extend=p_holds, rules=NO_PRUNING,
                           max_constraints=max_constraints, jobs=jobs)
    if pumping.hit:
        i, j = pumping.payload
        run = _pump(pumping.encoding, pumping.result, i, j, a, strict)
        logger.info("pumping steps %d..%d of %s", i + 1, j, pumping.path)
        return TctlPResult(True, True, "pumping", searched.lower(run), pumping.path,
                           pumped=(i, j), depth=depth, transformed=transformed)
    return TctlPResult(False, direct.complete and pumping.complete, "exhausted",
                       depth=depth, transformed=transformed)


def escape_nodes(g: ClassGraph, r_holds: StatePredicate) -> FrozenSet[int]:
    """Classes from which some maximal continuation never enters an r-state"""
    avoid = nx.MultiDiGraph()
    avoid.add_nodes_from(g.graph.nodes)
    for u, v, data in g.graph.edges(data=True):
        if data["kind"] is EdgeKind.TIME or not r_holds(g.node(v).state):
            avoid.add_edge(u, v, **data)
    goals = set(dead_nodes(g))
    for component in nx.strongly_connected_components(avoid):
        sub = avoid.subgraph(component)
        if any(data["kind"] is EdgeKind.DISCRETE for _, _, data in sub.edges(data=True)):
            goals |= component
    escaping = set(goals)
    for goal in goals:
        escaping |= nx.ancestors(avoid, goal)
    return frozenset(escaping)


def _tag_constraints(node_tag: NodeTag, trailing: LinExpr) -> List[Constraint]:
    if node_tag is NodeTag.MINUS:
        return [(trailing, Comparator.EQ)]
    if node_tag is NodeTag.PLUS:
        return [(trailing, Comparator.GT)]
    return []


def check_AU_bounded_above(m: ITAModel, p: Formula, r: Formula, a, strict: bool,
                           depth: Optional[int] = None, max_classes: Optional[int] = None,
                           max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    """A p U{>=a} r, or A p U{>a} r when `strict`, by counterexample search

    A counterexample path has all its r-positions too early and either ends in
    a position violating p, or ends in a configuration whose class lets the
    run continue forever, or stop, without entering an r-state.
    """
    depth = _depth(depth)
    a = Fraction(a)
    searched = _prepare(m)
    model = searched.model
    transformed = searched.translation is not None
    p_holds, r_holds = _predicate(model, p), _predicate(model, r)
    early = Comparator.LE if strict else Comparator.LT
    g = explore(model, max_classes=max_classes, jobs=jobs)
    escaping = escape_nodes(g, r_holds)
    candidates: Dict[str, List[int]] = {}
    for n in sorted(escaping):
        candidates.setdefault(g.node(n).state, []).append(n)

    def too_early(encoding: PathEncoding) -> List[Constraint]:
        return [(t.shift(-a), early)
                for t, state in zip(encoding.entry_times, encoding.states) if r_holds(state)]

    def counterexample(encoding: PathEncoding, point: FeasibilityResult):
        last = encoding.states[-1]
        if not p_holds(last):
            return point, encoding, "violation"
        if not candidates.get(last):
            return None
        extended = encode_path(model, encoding.path, trailing=True)
        base = extended.system.extended(too_early(extended))
        trailing = LinExpr.var(extended.trailing)
        for n in candidates[last]:
            node = g.node(n)
            extra = class_constraints(node, g.esets, extended.final_clocks)
            extra += _tag_constraints(node.tag, trailing)
            result = feasible(base.extended(extra), max_constraints=max_constraints)
            if result:
                return result, extended, "maximal"
        return None

    outcome = search_paths(model, depth, counterexample, extend=p_holds, rules=ALL_PRUNING,
                           constrain=too_early, max_constraints=max_constraints, jobs=jobs)
    if outcome.hit:
        return TctlPResult(False, True, f"counterexample-{outcome.payload}",
                           searched.lower(outcome.witness), outcome.path,
                           depth=depth, transformed=transformed)
    return TctlPResult(True, outcome.complete, "exhausted", depth=depth, transformed=transformed)


def check_AU_bounded_below(m: ITAModel, p: Formula, r: Formula, a, strict: bool,
                           depth: Optional[int] = None, max_classes: Optional[int] = None,
                           max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    """A p U{<=a} r as (A p U{>=0} r) and not (E !r U{>a} true); `strict` gives <a and >=a"""
    always = check_AU_bounded_above(m, p, r, 0, False, depth=depth, max_classes=max_classes,
                                    max_constraints=max_constraints, jobs=jobs)
    if not always.verdict:
        return always
    late = check_EU_bounded_above(m, Not(r), TRUE, a, not strict, depth=depth,
                                  max_constraints=max_constraints, jobs=jobs)
    if late.verdict:
        return TctlPResult(False, True, f"late-{late.procedure}", late.evidence, late.path,
                           late.pumped, late.depth, late.transformed)
    return TctlPResult(True, always.complete and late.complete, "exhausted",
                       depth=always.depth, transformed=always.transformed)


def check_bounded_until(m: ITAModel, u: Until, depth: Optional[int] = None,
                        max_classes: Optional[int] = None,
                        max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    bound = u.bound or TimeBound(Comparator.GE, Fraction(0))
    below = bound.op in (Comparator.LT, Comparator.LE)
    strict = bound.op.is_strict
    if u.quantifier is Quantifier.EXISTS:
        check = check_EU_bounded_below if below else check_EU_bounded_above
        return check(m, u.left, u.right, bound.value, strict, depth=depth,
                     max_constraints=max_constraints, jobs=jobs)
    check = check_AU_bounded_below if below else check_AU_bounded_above
    return check(m, u.left, u.right, bound.value, strict, depth=depth,
                 max_classes=max_classes, max_constraints=max_constraints, jobs=jobs)


def check_tctl_p(m: ITAModel, f: Formula, depth: Optional[int] = None,
                 max_classes: Optional[int] = None,
                 max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> TctlPResult:
    """Boolean combinations of bounded untils and propositions, at the initial position"""
    if isinstance(f, Until):
        return check_bounded_until(m, f, depth=depth, max_classes=max_classes,
                                   max_constraints=max_constraints, jobs=jobs)
    if isinstance(f, Not):
        return check_tctl_p(m, f.arg, depth=depth, max_classes=max_classes,
                            max_constraints=max_constraints, jobs=jobs).negated()
    if isinstance(f, (And, Or)):
        left = check_tctl_p(m, f.left, depth=depth, max_classes=max_classes,
                            max_constraints=max_constraints, jobs=jobs)
        decisive = isinstance(f, Or)
        if left.verdict is decisive and left.complete:
            return left
        right = check_tctl_p(m, f.right, depth=depth, max_classes=max_classes,
                            max_constraints=max_constraints, jobs=jobs)
        if right.verdict is decisive and right.complete:
            return right
        verdict = (left.verdict or right.verdict) if decisive else (left.verdict and right.verdict)
        chosen = left if left.verdict is verdict else right
        return TctlPResult(verdict, left.complete and right.complete, chosen.procedure,
                           chosen.evidence, chosen.path, chosen.pumped, chosen.depth,
                           left.transformed or right.transformed)
    verdict = state_holds(m, f, m.initial_state.name)
    return TctlPResult(verdict, True, "initial-state")


@dataclass
class FormulaCheck:
    logic: Logic
    verdict: bool
    complete: bool
    procedure: str
    evidence: Optional[List[RunStep]] = None
    detail: Union[CintResult, TctlPResult, None] = None


def check_formula(m: ITAModel, f: Union[str, Formula], depth: Optional[int] = None,
                  max_classes: Optional[int] = None, max_exprs: Optional[int] = None,
                  max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> FormulaCheck:
    if isinstance(f, str):
        f = parse_formula(f)
    logic = classify(f)
    if logic is Logic.CLOCK_CTL:
        result = check_tctl_cint(m, f, max_classes=max_classes, max_exprs=max_exprs, jobs=jobs)
        return FormulaCheck(logic, result.verdict, True, "class-graph", None, result)
    result = check_tctl_p(m, f, depth=depth, max_classes=max_classes,
                          max_constraints=max_constraints, jobs=jobs)
    logger.info("%s on %s: %s (%s, complete=%s)", f, m.name, result.verdict,
                result.procedure, result.complete)
    return FormulaCheck(logic, result.verdict, result.complete, result.procedure, result.evidence, result)
