"""
Interrupt timed automaton data model, `.ita` concrete syntax and structural checks
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from lark import Lark, v_args

from .errors import ItaSyntaxError
from .numerics import Comparator, LinExpr, Number, Orientation, Update, normalize
from .syntax import EXPRESSION_GRAMMAR, ExpressionBuilder, render_name, run_parser, unquote

logger = logging.getLogger(__name__)

EPSILON = "eps"


class Policy(Enum):
    LAZY = "lazy"
    URGENT = "urgent"
    DELAYED = "delayed"


@dataclass(frozen=True)
class GuardAtom:
    """Constraint `expr ⋈ 0`"""

    expr: LinExpr
    op: Comparator

    def holds(self, valuation: Sequence[Number]) -> bool:
        return self.op.holds(self.expr.evaluate(valuation))

    def render(self) -> str:
        return f"{self.expr} {self.op.value} 0"


@dataclass(frozen=True)
class StateDecl:
    name: str
    level: int
    policy: Policy = Policy.LAZY
    labels: FrozenSet[str] = frozenset()
    initial: bool = False
    final: bool = False


@dataclass(frozen=True)
class TransitionDecl:
    tid: int
    source: str
    target: str
    letter: Optional[str] = None
    guard: Tuple[GuardAtom, ...] = ()
    update: Update = field(default_factory=Update)

    @property
    def is_epsilon(self) -> bool:
        return self.letter is None

    @property
    def action(self) -> str:
        return self.letter if self.letter is not None else EPSILON

    def guard_holds(self, valuation: Sequence[Number]) -> bool:
        return all(atom.holds(valuation) for atom in self.guard)


@dataclass(frozen=True)
class ITAModel:
    name: str
    clocks: int
    states: Tuple[StateDecl, ...]
    transitions: Tuple[TransitionDecl, ...] = ()

    @cached_property
    def state_map(self) -> Dict[str, StateDecl]:
        result: Dict[str, StateDecl] = {}
        for state in self.states:
            result.setdefault(state.name, state)
        return result

    @cached_property
    def outgoing(self) -> Dict[str, Tuple[TransitionDecl, ...]]:
        table: Dict[str, List[TransitionDecl]] = {s.name: [] for s in self.states}
        for t in self.transitions:
            table.setdefault(t.source, []).append(t)
        return {name: tuple(ts) for name, ts in table.items()}

    @cached_property
    def initial_state(self) -> StateDecl:
        for state in self.states:
            if state.initial:
                return state
        raise ItaSyntaxError(f"model {self.name} has no initial state")

    @cached_property
    def finals(self) -> FrozenSet[str]:
        return frozenset(s.name for s in self.states if s.final)

    @cached_property
    def alphabet(self) -> Tuple[str, ...]:
        return tuple(sorted({t.letter for t in self.transitions if t.letter is not None}))

    @cached_property
    def propositions(self) -> FrozenSet[str]:
        props = set()
        for state in self.states:
            props |= self.props_of(state.name)
        return frozenset(props)

    def state(self, name: str) -> StateDecl:
        return self.state_map[name]

    def level(self, name: str) -> int:
        return self.state_map[name].level

    def policy(self, name: str) -> Policy:
        return self.state_map[name].policy

    def transition(self, tid: int) -> TransitionDecl:
        return self.transitions[tid]

    def transition_level(self, t: TransitionDecl) -> int:
        return self.level(t.source)

    def props_of(self, name: str) -> FrozenSet[str]:
        """Labels of a state plus its own name"""
        return self.state_map[name].labels | {name}


def reset_bound(source_level: int, target_level: int) -> int:
    """Highest clock an update may set to a non-zero value"""
    return target_level if target_level < source_level else source_level


def complete_update(update: Update, source_level: int, target_level: int, clocks: int) -> Update:
    """Add the mandatory `x_i := 0` for clocks above the reset bound"""
    mapping = update.as_mapping()
    for index in range(reset_bound(source_level, target_level) + 1, clocks + 1):
        mapping.setdefault(index, LinExpr.constant(0))
    return Update.build(mapping)


def make_transition(tid: int, source: StateDecl, target: StateDecl, clocks: int,
                    letter: Optional[str] = None, guard: Sequence[GuardAtom] = (),
                    update: Optional[Update] = None) -> TransitionDecl:
    """Transition for programmatic builders, mandatory resets included"""
    update = complete_update(update or Update(), source.level, target.level, clocks)
    return TransitionDecl(tid, source.name, target.name, letter, tuple(guard), update)


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

MODEL_GRAMMAR = r"""
start: "ita" name "{" "clocks" INT ";" declaration* "}"
?declaration: state_decl | trans_decl
state_decl: "state" name "level" INT "policy" policy state_flag* ";"
policy: "lazy"      -> lazy
      | "urgent"    -> urgent
      | "delayed"   -> delayed
state_flag: "initial"                          -> initial_flag
          | "final"                            -> final_flag
          | "labels" "{" (name ("," name)*)? "}" -> labels_flag
trans_decl: "trans" name "->" name action? guard? update? ";"
action: "on" CNAME
guard: "when" atom ("&&" atom)*
     | "when" "true"                           -> true_guard
atom: sum COMP sum
update: "do" assignment ("," assignment)*
assignment: CLOCK ":=" sum
name: CNAME | ESCAPED_STRING

%import common.CNAME
%import common.ESCAPED_STRING
%import common.INT
""" + EXPRESSION_GRAMMAR

_parser = Lark(MODEL_GRAMMAR, parser="lalr", propagate_positions=True)


@v_args(inline=True)
class _ModelBuilder(ExpressionBuilder):
    def name(self, token):
        return token.update(value=unquote(token))

    def lazy(self):
        return Policy.LAZY

    def urgent(self):
        return Policy.URGENT

    def delayed(self):
        return Policy.DELAYED

    def initial_flag(self):
        return ("initial", True)

    def final_flag(self):
        return ("final", True)

    def labels_flag(self, *names):
        return ("labels", frozenset(str(n) for n in names))

    def state_decl(self, name, level, policy, *flags):
        options = dict(flags)
        return StateDecl(
            name=str(name),
            level=int(level),
            policy=policy,
            labels=options.get("labels", frozenset()),
            initial=options.get("initial", False),
            final=options.get("final", False),
        )

    def action(self, token):
        return ("action", None if token == EPSILON else str(token))

    def atom(self, left, op, right):
        return GuardAtom(left - right, Comparator.parse(str(op)))

    def guard(self, *atoms):
        return ("guard", tuple(atoms))

    def true_guard(self):
        return ("guard", ())

    def assignment(self, clock, expr):
        return (int(clock[1:]), expr, clock)

    def update(self, *assignments):
        seen = set()
        for index, _, token in assignments:
            if index in seen:
                raise ItaSyntaxError(f"clock x{index} assigned twice", token.line, token.column)
            seen.add(index)
        return ("update", Update.build({index: expr for index, expr, _ in assignments}))

    def trans_decl(self, source, target, *parts):
        return (source, target, dict(parts))

    def start(self, name, clocks, *declarations):
        return str(name), int(clocks), declarations


def parse_ita(text: str) -> ITAModel:
    """Parse `.ita` source; updates are kept as written and semantic problems are left to validate()"""
    name, clocks, declarations = run_parser(_parser, _ModelBuilder(), text)
    states = tuple(d for d in declarations if isinstance(d, StateDecl))
    by_name = {}
    for state in states:
        by_name.setdefault(state.name, state)

    transitions = []
    for decl in declarations:
        if isinstance(decl, StateDecl):
            continue
        source_token, target_token, parts = decl
        for token in (source_token, target_token):
            if str(token) not in by_name:
                raise ItaSyntaxError(f"unknown state {token}", token.line, token.column)
        transitions.append(TransitionDecl(
            len(transitions),
            str(source_token),
            str(target_token),
            parts.get("action"),
            tuple(parts.get("guard", ())),
            parts.get("update", Update()),
        ))
    model = ITAModel(name, clocks, states, tuple(transitions))
    logger.debug("parsed model %s: %d states, %d transitions", name, len(states), len(transitions))
    return model


def render_ita(m: ITAModel) -> str:
    """Inverse of parse_ita"""
    lines = [f"ita {render_name(m.name)} {{", f"  clocks {m.clocks};"]
    for s in m.states:
        flags = ""
        if s.initial:
            flags += " initial"
        if s.final:
            flags += " final"
        if s.labels:
            flags += " labels {" + ", ".join(render_name(p) for p in sorted(s.labels)) + "}"
        lines.append(f"  state {render_name(s.name)} level {s.level} policy {s.policy.value}{flags};")
    for t in m.transitions:
        parts = [f"  trans {render_name(t.source)} -> {render_name(t.target)} on {t.action}"]
        if t.guard:
            parts.append("when " + " && ".join(atom.render() for atom in t.guard))
        if not t.update.is_identity:
            parts.append("do " + t.update.render())
        lines.append(" ".join(parts) + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

def validate(m: ITAModel) -> List[str]:
    """Every way `m` departs from the definition of an ITA; empty when well formed"""
    violations: List[str] = []
    if m.clocks < 1:
        violations.append("at least one clock is required")

    initial = [s for s in m.states if s.initial]
    if len(initial) != 1:
        violations.append(f"exactly one initial state required (found {len(initial)})")

    seen = set()
    for s in m.states:
        if s.name in seen:
            violations.append(f"duplicate state name {s.name}")
        seen.add(s.name)
        if not 1 <= s.level <= m.clocks:
            violations.append(f"state {s.name}: level {s.level} outside 1..{m.clocks}")

    for t in m.transitions:
        if t.source not in m.state_map or t.target not in m.state_map:
            violations.append(f"transition {t.tid}: unknown state")
            continue
        violations.extend(_transition_violations(m, t))
    return violations


def _transition_violations(m: ITAModel, t: TransitionDecl) -> List[str]:
    found = []
    source_level = m.level(t.source)
    bound = reset_bound(source_level, m.level(t.target))
    for atom in t.guard:
        if atom.expr.top_level > m.clocks:
            found.append(f"transition {t.tid}: clock index out of range in guard")
        elif atom.expr.top_level > source_level:
            found.append(f"transition {t.tid}: guard uses clock above level")
    for index, expr in t.update.items():
        if index > m.clocks or expr.top_level > m.clocks:
            found.append(f"transition {t.tid}: clock index out of range in update")
        elif index > bound:
            if expr != LinExpr.constant(0):
                found.append(f"transition {t.tid}: clock {index} above level must be reset to 0")
        elif expr.top_level >= index:
            found.append(f"transition {t.tid}: update of clock {index} uses clock ≥ {index}")
    for index in range(bound + 1, m.clocks + 1):
        if not t.update.assigns(index):
            found.append(f"transition {t.tid}: clock {index} above level must be reset to 0")
    return found


def is_ita_minus(m: ITAModel) -> Tuple[bool, List[str]]:
    """Check that the only updates are resets and updates of the source level clock"""
    violations = []
    for t in m.transitions:
        source_level = m.level(t.source)
        target_level = m.level(t.target)
        bound = reset_bound(source_level, target_level)
        for index, expr in t.update.items():
            if index > bound:
                continue
            if target_level < source_level or index != source_level:
                violations.append(
                    f"transition {t.tid} ({t.source} -> {t.target}): "
                    f"update x{index} := {expr} changes a frozen clock"
                )
    return not violations, violations


def complete_resets(m: ITAModel) -> ITAModel:
    """Write out every omitted `x_i := 0` that the level structure requires"""
    transitions = tuple(
        replace(t, update=complete_update(t.update, m.level(t.source), m.level(t.target), m.clocks))
        for t in m.transitions
    )
    return replace(m, transitions=transitions)


def normalize_guards(m: ITAModel) -> ITAModel:
    """Give every guard atom a source-level clock coefficient of 0 or 1"""
    transitions = []
    for t in m.transitions:
        level = m.level(t.source)
        atoms = []
        for atom in t.guard:
            expr, orientation = normalize(atom.expr, level)
            op = atom.op.flipped() if orientation is Orientation.FLIPPED else atom.op
            atoms.append(GuardAtom(expr, op))
        transitions.append(replace(t, guard=tuple(atoms)))
    return replace(m, transitions=tuple(transitions))


def scale_constants(m: ITAModel, factor: Number) -> ITAModel:
    """Multiply every constant of guards and updates by `factor` (rescales time)"""
    factor = Fraction(factor)
    if factor <= 0:
        raise ValueError("scaling factor must be positive")

    def scaled(expr: LinExpr) -> LinExpr:
        return LinExpr(expr.terms, expr.const * factor)

    transitions = tuple(
        replace(
            t,
            guard=tuple(GuardAtom(scaled(a.expr), a.op) for a in t.guard),
            update=Update.build({i: scaled(e) for i, e in t.update.items()}),
        )
        for t in m.transitions
    )
    return replace(m, transitions=transitions)


def constant_denominators_lcm(m: ITAModel) -> int:
    """lcm of the denominators of every constant term in guards and updates"""
    result = 1
    for t in m.transitions:
        exprs = [a.expr for a in t.guard] + [e for _, e in t.update.items()]
        for expr in exprs:
            result = lcm(result, expr.const.denominator)
    return result
