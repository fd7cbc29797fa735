"""
Translation of an ITA into an equivalent ITA without updates of frozen clocks

Each expanded state remembers, for every frozen clock, the expression that
its delayed updates would have given it. Guards read the remembered values,
and an urgent ε-transition writes the remembered value back when the run
returns to that clock's level.
"""
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from ..config import get_settings
from .errors import ExpressionCapExceeded, StateCapExceeded
from .model import GuardAtom, ITAModel, Policy, StateDecl, TransitionDecl, make_transition, reset_bound
from .numerics import LinExpr, Update
from .semantics import FireStep, RunStep, TimeStep, resolve_run

logger = logging.getLogger(__name__)


class Polarity(Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class FSets:
    """F_{i,j} for every pair of levels i >= j"""

    clocks: int
    table: Tuple[Tuple[Tuple[LinExpr, ...], ...], ...]

    def get(self, i: int, j: int) -> Tuple[LinExpr, ...]:
        if not 1 <= j <= i <= self.clocks:
            raise KeyError((i, j))
        return self.table[i - 1][j - 1]

    def aggregate(self, j: int) -> Tuple[LinExpr, ...]:
        return self.get(self.clocks, j)

    def render(self) -> str:
        lines = []
        for i in range(1, self.clocks + 1):
            cells = ["{" + ", ".join(str(e) for e in self.get(i, j)) + "}" for j in range(1, i + 1)]
            lines.append(f"F{i}: " + " ".join(cells))
        return "\n".join(lines) + "\n"


def build_F_sets(m: ITAModel, max_exprs: Optional[int] = None) -> FSets:
    if max_exprs is None:
        max_exprs = get_settings().max_exprs
    n = m.clocks
    table: Dict[Tuple[int, int], List[LinExpr]] = {}
    for i in range(1, n + 1):
        table[(i, i)] = [LinExpr.var(i)]
        edges = [t for t in m.transitions if m.level(t.source) == i]
        for j in range(1, i):
            members = list(table[(i - 1, j)])
            for t in edges:
                if j > reset_bound(i, m.level(t.target)) or not t.update.assigns(j):
                    continue
                expr = t.update.expr_for(j)
                lower = expr.clocks
                for choice in product(*(table[(i, k)] for k in lower)):
                    candidate = expr.substitute(dict(zip(lower, choice)))
                    if candidate not in members:
                        if len(members) >= max_exprs:
                            logger.warning("expression cap %d reached in F(%d,%d)", max_exprs, i, j)
                            raise ExpressionCapExceeded(j, max_exprs)
                        members.append(candidate)
            table[(i, j)] = members
    return FSets(n, tuple(
        tuple(tuple(table[(i, j)]) for j in range(1, i + 1))
        for i in range(1, n + 1)
    ))


@dataclass(frozen=True)
class ExpandedState:
    base: str
    polarity: Polarity
    memorized: Tuple[LinExpr, ...]

    @property
    def name(self) -> str:
        name = f"{self.base}{self.polarity.value}"
        if self.memorized:
            name += "{" + ";".join(str(e) for e in self.memorized) + "}"
        return name


@dataclass(frozen=True)
class ItaMinusResult:
    model: ITAModel
    origins: Tuple[Optional[int], ...]
    fsets: FSets
    expanded: Tuple[ExpandedState, ...]

    def origin(self, tid: int) -> Optional[int]:
        return self.origins[tid]


def build_ita_minus(m: ITAModel, max_states: Optional[int] = None,
                    max_exprs: Optional[int] = None) -> ItaMinusResult:
    """Forward closure of the expanded states reachable in the transition structure"""
    if max_states is None:
        max_states = get_settings().max_states
    fsets = build_F_sets(m, max_exprs=max_exprs)

    expanded: List[ExpandedState] = []
    decls: Dict[ExpandedState, StateDecl] = {}
    queue = deque()

    def intern(state: ExpandedState) -> StateDecl:
        decl = decls.get(state)
        if decl is None:
            if len(expanded) >= max_states:
                logger.warning("state cap %d reached while expanding %s", max_states, m.name)
                raise StateCapExceeded(max_states)
            original = m.state(state.base)
            plus = state.polarity is Polarity.PLUS
            decl = StateDecl(
                name=state.name,
                level=original.level,
                policy=original.policy if plus else Policy.URGENT,
                labels=original.labels | {original.name},
                initial=plus and original.initial and not expanded,
                final=plus and original.final,
            )
            decls[state] = decl
            expanded.append(state)
            queue.append(state)
        return decl

    start = m.initial_state
    intern(ExpandedState(start.name, Polarity.PLUS,
                         tuple(LinExpr.var(j) for j in range(1, start.level))))

    transitions: List[TransitionDecl] = []
    origins: List[Optional[int]] = []

    def emit(source: StateDecl, target: StateDecl, letter, guard, update, origin) -> None:
        transitions.append(make_transition(len(transitions), source, target, m.clocks,
                                           letter=letter, guard=guard, update=update))
        origins.append(origin)

    while queue:
        state = queue.popleft()
        source = decls[state]
        level = source.level
        if state.polarity is Polarity.MINUS:
            target = intern(ExpandedState(state.base, Polarity.PLUS, state.memorized[:level - 1]))
            emit(source, target, None, (), Update.build({level: state.memorized[level - 1]}), None)
            continue

        sigma = {j: e for j, e in enumerate(state.memorized, start=1)}
        for t in m.outgoing.get(state.base, ()):
            guard = _substituted_guard(t, sigma)
            if guard is None:
                continue
            target_level = m.level(t.target)
            if level <= target_level:
                memorized = tuple(t.update.expr_for(j).substitute(sigma) for j in range(1, level))
                memorized += tuple(LinExpr.var(j) for j in range(level, target_level))
                target = intern(ExpandedState(t.target, Polarity.PLUS, memorized))
                update = Update.build({level: t.update.expr_for(level).substitute(sigma)})
            else:
                memorized = tuple(t.update.expr_for(j).substitute(sigma) for j in range(1, target_level + 1))
                target = intern(ExpandedState(t.target, Polarity.MINUS, memorized))
                update = Update()
            emit(source, target, t.letter, guard, update, t.tid)

    model = ITAModel(f"{m.name}_minus", m.clocks,
                     tuple(decls[s] for s in expanded), tuple(transitions))
    logger.debug("%s expanded to %d states and %d transitions",
                 m.name, len(model.states), len(model.transitions))
    return ItaMinusResult(model, tuple(origins), fsets, tuple(expanded))


def _substituted_guard(t: TransitionDecl, sigma: Dict[int, LinExpr]) -> Optional[Tuple[GuardAtom, ...]]:
    """Guard with memorized values in place of frozen clocks; None when it can never hold"""
    atoms = []
    for atom in t.guard:
        expr = atom.expr.substitute(sigma)
        if expr.is_constant:
            if not atom.op.holds(expr.const):
                return None
            continue
        atoms.append(GuardAtom(expr, atom.op))
    return tuple(atoms)


def to_ita_minus(m: ITAModel, max_states: Optional[int] = None) -> ITAModel:
    return build_ita_minus(m, max_states=max_states).model


def count_expanded(m: ITAModel, max_states: Optional[int] = None) -> Tuple[int, int]:
    result = build_ita_minus(m, max_states=max_states)
    return len(result.model.states), len(result.model.transitions)


# ---------------------------------------------------------------------------
# Moving runs across the translation
# ---------------------------------------------------------------------------

def lift_run(m: ITAModel, result: ItaMinusResult, run: Sequence[RunStep]) -> List[RunStep]:
    """Run of the translated model with the same delays and timed word"""
    table: Dict[Tuple[str, Optional[int]], int] = {}
    for t in result.model.transitions:
        table[(t.source, result.origins[t.tid])] = t.tid

    current = result.model.initial_state.name
    lifted: List[RunStep] = []
    for step in resolve_run(m, run):
        if isinstance(step, TimeStep):
            lifted.append(step)
            continue
        tid = table.get((current, step.transition))
        if tid is None:
            raise KeyError(f"transition {step.transition} has no counterpart from {current}")
        lifted.append(FireStep(tid))
        current = result.model.transition(tid).target
        restore = table.get((current, None))
        if restore is not None:
            lifted.append(FireStep(restore))
            current = result.model.transition(restore).target
    return lifted


def lower_run(result: ItaMinusResult, run: Sequence[RunStep]) -> List[RunStep]:
    """Run of the original model: ε-restorations dropped, adjacent delays merged"""
    lowered: List[RunStep] = []
    for step in resolve_run(result.model, run):
        if isinstance(step, TimeStep):
            if lowered and isinstance(lowered[-1], TimeStep):
                lowered[-1] = TimeStep(lowered[-1].delay + step.delay)
            else:
                lowered.append(step)
            continue
        origin = result.origins[step.transition]
        if origin is not None:
            lowered.append(FireStep(origin))
    return [s for s in lowered if not (isinstance(s, TimeStep) and s.delay == Fraction(0))]
