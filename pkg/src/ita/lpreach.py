"""
Exact linear feasibility, path encodings and bounded path search

Feasibility is decided by Fourier-Motzkin elimination over rationals with
strictness tracking; a feasible system always comes back with an exact
witness point. Paths are encoded with one delay variable per discrete step
and clock values kept as linear expressions over the delays.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from ..config import get_settings
from .errors import ConstraintCapExceeded, PathChainError
from .model import ITAModel, Policy, is_ita_minus
from .numerics import Comparator, LinExpr, Number
from .semantics import FireStep, RunStep, TimeStep

logger = logging.getLogger(__name__)

Constraint = Tuple[LinExpr, Comparator]


@dataclass
class LinConstraintSystem:
    """Constraints `expr op 0` over variables 1..len(variables)"""

    variables: List[str] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)

    def add_variable(self, name: str) -> int:
        self.variables.append(name)
        return len(self.variables)

    def var(self, name: str) -> LinExpr:
        return LinExpr.var(self.variables.index(name) + 1)

    def add(self, expr: LinExpr, op: Comparator) -> None:
        if expr.is_constant and op.holds(expr.const):
            return
        self.constraints.append((expr, op))

    def extended(self, extra: Sequence[Constraint]) -> "LinConstraintSystem":
        copy = LinConstraintSystem(list(self.variables), list(self.constraints))
        for expr, op in extra:
            copy.add(expr, op)
        return copy

    def name_of(self, index: int) -> str:
        return self.variables[index - 1]

    def render(self) -> str:
        return "\n".join(
            f"{expr.render(self.name_of)} {op.value} 0" for expr, op in self.constraints
        )


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    point: Optional[Tuple[Fraction, ...]] = None

    def __bool__(self) -> bool:
        return self.feasible

    def value(self, index: int) -> Fraction:
        return self.point[index - 1]


# Internal form: (expr, strict) meaning expr > 0 when strict, expr >= 0 otherwise
_Ineq = Tuple[LinExpr, bool]


def _canonical(expr: LinExpr, strict: bool) -> _Ineq:
    """Scale by the magnitude of the first coefficient so duplicates coincide"""
    if expr.terms:
        return expr.scale(1 / abs(expr.terms[0][1])), strict
    return expr, strict


def _holds(expr: LinExpr, strict: bool) -> bool:
    return expr.const > 0 if strict else expr.const >= 0


def feasible(s: LinConstraintSystem, prefer: Optional[Mapping[int, Number]] = None,
             max_constraints: Optional[int] = None) -> FeasibilityResult:
    """Decide the system exactly and build a witness when it is satisfiable"""
    if max_constraints is None:
        max_constraints = get_settings().max_constraints
    prefer = {k: Fraction(v) for k, v in (prefer or {}).items()}
    count = len(s.variables)

    equalities = [e for e, op in s.constraints if op is Comparator.EQ]
    inequalities: List[_Ineq] = []
    for expr, op in s.constraints:
        if op is Comparator.EQ:
            continue
        if op in (Comparator.LT, Comparator.LE):
            expr = -expr
        inequalities.append((expr, op.is_strict))

    # Equalities: solve for the highest variable and substitute everywhere
    solved: List[Tuple[int, LinExpr]] = []
    while equalities:
        expr = equalities.pop(0)
        if expr.is_constant:
            if expr.const != 0:
                return FeasibilityResult(False)
            continue
        v = expr.top_level
        c = expr.coeff(v)
        value = (expr - LinExpr.var(v, c)).scale(-1 / c)
        mapping = {v: value}
        solved.append((v, value))
        equalities = [e.substitute(mapping) for e in equalities]
        inequalities = [(e.substitute(mapping), strict) for e, strict in inequalities]

    eliminated: List[Tuple[int, List[_Ineq]]] = []
    current = _simplify(inequalities)
    if current is None:
        return FeasibilityResult(False)
    while True:
        remaining = sorted({i for e, _ in current for i in e.clocks})
        if not remaining:
            break
        v = min(remaining, key=lambda i: (_product_size(current, i), -i))
        touching = [(e, st) for e, st in current if e.coeff(v) != 0]
        rest = [(e, st) for e, st in current if e.coeff(v) == 0]
        lower = [(e, st) for e, st in touching if e.coeff(v) > 0]
        upper = [(e, st) for e, st in touching if e.coeff(v) < 0]
        for low, low_strict in lower:
            a = low.coeff(v)
            for up, up_strict in upper:
                b = up.coeff(v)
                rest.append((low.scale(-b) + up.scale(a), low_strict or up_strict))
        eliminated.append((v, touching))
        current = _simplify(rest)
        if current is None:
            return FeasibilityResult(False)
        if len(current) > max_constraints:
            logger.warning("constraint cap %d reached during elimination", max_constraints)
            raise ConstraintCapExceeded(max_constraints)

    # variables that cancelled out without being eliminated are free: fix them first
    values: Dict[int, Fraction] = {}
    chosen = {v for v, _ in eliminated} | {v for v, _ in solved}
    for v in range(1, count + 1):
        if v not in chosen:
            values[v] = prefer.get(v, Fraction(0))
    for v, touching in reversed(eliminated):
        values[v] = _choose(v, touching, values, prefer.get(v))
    for v, expr in reversed(solved):
        values[v] = _evaluate(expr, values)
    point = tuple(values.get(v, Fraction(0)) for v in range(1, count + 1))
    return FeasibilityResult(True, point)


def _evaluate(expr: LinExpr, values: Mapping[int, Fraction]) -> Fraction:
    total = expr.const
    for i, c in expr.terms:
        total += c * values.get(i, Fraction(0))
    return total


def _simplify(ineqs: Sequence[_Ineq]) -> Optional[List[_Ineq]]:
    """Drop satisfied constants and duplicates; None when a constant is violated"""
    strictness: Dict[LinExpr, bool] = {}
    for expr, strict in ineqs:
        if expr.is_constant:
            if not _holds(expr, strict):
                return None
            continue
        key, _ = _canonical(expr, strict)
        # a strict copy subsumes the non-strict one
        strictness[key] = strictness.get(key, False) or strict
    return list(strictness.items())


def _product_size(ineqs: Sequence[_Ineq], v: int) -> int:
    pos = sum(1 for e, _ in ineqs if e.coeff(v) > 0)
    neg = sum(1 for e, _ in ineqs if e.coeff(v) < 0)
    return pos * neg - pos - neg


def _choose(v: int, touching: Sequence[_Ineq], values: Mapping[int, Fraction],
            preferred: Optional[Fraction]) -> Fraction:
    low: Optional[Fraction] = None
    low_strict = False
    high: Optional[Fraction] = None
    high_strict = False
    for expr, strict in touching:
        c = expr.coeff(v)
        bound = -_evaluate(expr - LinExpr.var(v, c), values) / c
        if c > 0:
            if low is None or bound > low or (bound == low and strict):
                low, low_strict = bound, strict
        else:
            if high is None or bound < high or (bound == high and strict):
                high, high_strict = bound, strict

    def admissible(x: Fraction) -> bool:
        if low is not None and (x < low or (low_strict and x == low)):
            return False
        if high is not None and (x > high or (high_strict and x == high)):
            return False
        return True

    if preferred is not None and admissible(preferred):
        return preferred
    if low is not None and high is not None:
        if low == high:
            return low
        return (low + high) / 2
    if low is not None:
        return low + 1 if low_strict else low
    if high is not None:
        return high - 1 if high_strict else high
    return Fraction(0)


# ---------------------------------------------------------------------------
# Path encoding
# ---------------------------------------------------------------------------

@dataclass
class PathEncoding:
    """Constraints of a path; position j is the configuration entered by step j (0 is initial)"""

    system: LinConstraintSystem
    path: Tuple[int, ...]
    delays: List[int]
    entry_times: List[LinExpr]
    clocks: List[Tuple[LinExpr, ...]]
    states: List[str]
    trailing: Optional[int] = None
    final_clocks: Optional[Tuple[LinExpr, ...]] = None

    def witness(self, result: FeasibilityResult) -> List[RunStep]:
        steps: List[RunStep] = []
        for delay, tid in zip(self.delays, self.path):
            steps.append(TimeStep(result.value(delay)))
            steps.append(FireStep(tid))
        if self.trailing is not None:
            steps.append(TimeStep(result.value(self.trailing)))
        return steps

    def delay_sum(self, first: int, last: int) -> LinExpr:
        """Sum of the delays before steps first..last (1-based, inclusive)"""
        total = LinExpr()
        for j in range(first, last + 1):
            total = total + LinExpr.var(self.delays[j - 1])
        return total


def _delay_constraint(m: ITAModel, state: str, system: LinConstraintSystem, d: LinExpr,
                      before_discrete: bool) -> None:
    policy = m.policy(state)
    if policy is Policy.URGENT:
        system.add(d, Comparator.EQ)
    elif policy is Policy.DELAYED and before_discrete:
        system.add(d, Comparator.GT)
    else:
        system.add(d, Comparator.GE)


def encode_path(m: ITAModel, path: Sequence[int], trailing: bool = False) -> PathEncoding:
    system = LinConstraintSystem()
    state = m.initial_state.name
    values = tuple(LinExpr() for _ in range(m.clocks))
    now = LinExpr()
    delays: List[int] = []
    entry_times = [now]
    clocks = [values]
    states = [state]
    for j, tid in enumerate(path, start=1):
        t = m.transition(tid)
        if t.source != state:
            raise PathChainError(f"transition {tid} leaves {t.source}, not {state}")
        d = system.add_variable(f"d{j}")
        delays.append(d)
        delay = LinExpr.var(d)
        _delay_constraint(m, state, system, delay, True)
        level = m.level(state)
        values = values[:level - 1] + (values[level - 1] + delay,) + values[level:]
        now = now + delay
        mapping = {i: v for i, v in enumerate(values, start=1)}
        for atom in t.guard:
            system.add(atom.expr.substitute(mapping), atom.op)
        values = tuple(t.update.expr_for(i).substitute(mapping) for i in range(1, m.clocks + 1))
        state = t.target
        entry_times.append(now)
        clocks.append(values)
        states.append(state)
    encoding = PathEncoding(system, tuple(path), delays, entry_times, clocks, states)
    if trailing:
        d = system.add_variable(f"d{len(path) + 1}")
        _delay_constraint(m, state, system, LinExpr.var(d), False)
        level = m.level(state)
        encoding.trailing = d
        encoding.final_clocks = values[:level - 1] + (values[level - 1] + LinExpr.var(d),) + values[level:]
    return encoding


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------

def compute_bound(transitions: int, clocks: int) -> int:
    """Path length sufficient for reachability in an ITA without frozen updates"""
    return (transitions + clocks) ** (3 * clocks)


def general_ita_bound_terms(clocks: int, bits: int, transitions: int) -> Tuple[int, int]:
    return clocks + 2, 12 * bits * transitions * clocks ** 3


def general_ita_bound(clocks: int, bits: int, transitions: int) -> int:
    base, exponent = general_ita_bound_terms(clocks, bits, transitions)
    return base ** exponent


def constant_bits(m: ITAModel) -> int:
    """Bits needed for the largest numerator or denominator, sign included"""
    bits = 1
    for t in m.transitions:
        exprs = [a.expr for a in t.guard] + [e for _, e in t.update.items()]
        for expr in exprs:
            for value in [expr.const] + [c for _, c in expr.terms]:
                bits = max(bits, abs(value.numerator).bit_length(), value.denominator.bit_length())
    return bits + 1


# ---------------------------------------------------------------------------
# Depth-first path search
# ---------------------------------------------------------------------------

class Pruning(Enum):
    REPEATED_UPDATE = "repeated-update"
    WAIT_EARLIER = "wait-earlier"
    URGENT_SEGMENT = "urgent-segment"


ALL_PRUNING: FrozenSet[Pruning] = frozenset(Pruning)
CYCLE_PRUNING: FrozenSet[Pruning] = frozenset({Pruning.REPEATED_UPDATE, Pruning.URGENT_SEGMENT})
NO_PRUNING: FrozenSet[Pruning] = frozenset()


def prunable(m: ITAModel, path: Sequence[int], rules: FrozenSet[Pruning]) -> bool:
    """Whether the last transition of `path` closes a removable repetition"""
    if not rules or len(path) < 2:
        return False
    last = m.transition(path[-1])
    k = m.level(last.source)
    for start in range(len(path) - 2, -1, -1):
        if m.level(m.transition(path[start]).source) < k:
            return False
        if path[start] != path[-1]:
            continue
        segment = [m.transition(tid) for tid in path[start:]]
        if Pruning.REPEATED_UPDATE in rules and last.update.assigns(k):
            return True
        if any(t.update.assigns(k) for t in segment):
            continue
        if Pruning.WAIT_EARLIER in rules and m.policy(last.source) is not Policy.URGENT:
            return True
        if Pruning.URGENT_SEGMENT in rules and all(
            m.policy(t.source) is Policy.URGENT for t in segment if m.level(t.source) == k
        ):
            return True
    return False


@dataclass
class SearchOutcome:
    hit: bool
    complete: bool
    explored: int
    path: Tuple[int, ...] = ()
    encoding: Optional[PathEncoding] = None
    result: Optional[FeasibilityResult] = None
    payload: object = None

    @property
    def witness(self) -> Optional[List[RunStep]]:
        if not self.hit or self.encoding is None:
            return None
        return self.encoding.witness(self.result)


Acceptor = Callable[[PathEncoding, FeasibilityResult],
                    Optional[Tuple[FeasibilityResult, PathEncoding, object]]]
Constrainer = Callable[[PathEncoding], Sequence[Constraint]]


Path = Tuple[int, ...]


@dataclass
class _PathSearch:
    m: ITAModel
    depth: int
    accept: Acceptor
    extend: Callable[[str], bool]
    rules: FrozenSet[Pruning]
    constrain: Optional[Constrainer]
    max_constraints: Optional[int]

    def step(self, path: Path) -> Tuple[Optional[SearchOutcome], List[Path], bool, int]:
        """Visit one path: (hit, children in order, cut by depth, explored count)"""
        encoding = encode_path(self.m, path)
        if self.constrain is not None:
            for expr, op in self.constrain(encoding):
                encoding.system.add(expr, op)
        point = feasible(encoding.system, max_constraints=self.max_constraints)
        if not point:
            return None, [], False, 0
        found = self.accept(encoding, point)
        if found is not None and found[0]:
            result, used, payload = found
            return SearchOutcome(True, True, 1, path, used, result, payload), [], False, 1
        state = encoding.states[-1]
        if not self.extend(state) or prunable(self.m, path, self.rules):
            return None, [], False, 1
        outgoing = self.m.outgoing.get(state, ())
        if len(path) >= self.depth:
            return None, [], bool(outgoing), 1
        return None, [path + (t.tid,) for t in outgoing], False, 1

    def run(self, roots: Sequence[Path]) -> SearchOutcome:
        explored = 0
        cut = False
        stack = list(reversed(roots))
        while stack:
            found, children, cut_here, counted = self.step(stack.pop())
            explored += counted
            if found is not None:
                return replace(found, explored=explored)
            cut = cut or cut_here
            stack.extend(reversed(children))
        return SearchOutcome(False, not cut, explored)

    def run_split(self, jobs: int) -> SearchOutcome:
        """Search the subtree of each first transition on its own thread

        Subtrees are merged in transition order, so hit, path and explored
        count match the single-threaded search.
        """
        found, children, cut, explored = self.step(())
        if found is not None or not children:
            return found or SearchOutcome(False, not cut, explored)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(self.run, [child]) for child in children]
            for i, future in enumerate(futures):
                sub = future.result()
                explored += sub.explored
                if sub.hit:
                    for pending in futures[i + 1:]:
                        pending.cancel()
                    return replace(sub, explored=explored)
                cut = cut or not sub.complete
        return SearchOutcome(False, not cut, explored)


def search_paths(m: ITAModel, depth: int, accept: Acceptor,
                 extend: Callable[[str], bool] = lambda state: True,
                 rules: FrozenSet[Pruning] = ALL_PRUNING,
                 constrain: Optional[Constrainer] = None,
                 max_constraints: Optional[int] = None,
                 jobs: Optional[int] = None) -> SearchOutcome:
    """Lexicographic depth-first search over feasible transition sequences

    `accept` is asked about every feasible path, together with its feasibility
    point, and returns a feasible result (with the encoding it was found on and
    any extra payload) to stop the search. `constrain` adds constraints every
    prefix must meet. Paths are extended only from states where `extend` holds.
    With `jobs` > 1 the subtrees below the initial state are searched in parallel.
    """
    jobs = get_settings().jobs if jobs is None else jobs
    search = _PathSearch(m, depth, accept, extend, rules, constrain, max_constraints)
    outcome = search.run_split(jobs) if jobs > 1 else search.run([()])
    if not outcome.complete:
        logger.warning("path search on %s stopped at depth %d before exhausting", m.name, depth)
    return outcome


# ---------------------------------------------------------------------------
# Bounded reachability
# ---------------------------------------------------------------------------

@dataclass
class ReachResult:
    hit: bool
    complete: bool
    depth: int
    bound: Optional[int]
    explored: int
    witness: Optional[List[RunStep]] = None
    path: Tuple[int, ...] = ()
    transformed: bool = False

    def __bool__(self) -> bool:
        return self.hit


def _state_matcher(m: ITAModel, target) -> Callable[[str], bool]:
    if callable(target):
        return target
    return lambda state: target in m.props_of(state)


def bounded_reach(m: ITAModel, target, depth: Optional[int] = None,
                  max_constraints: Optional[int] = None, jobs: Optional[int] = None) -> ReachResult:
    """First feasible path (in lexicographic order) into a state matching `target`

    Models with frozen-clock updates are searched through their ITA⁻
    translation and the witness is mapped back.
    """
    from .itaminus import build_ita_minus, lower_run

    translation = None
    searched = m
    if not is_ita_minus(m)[0]:
        translation = build_ita_minus(m)
        searched = translation.model
    bound = compute_bound(len(searched.transitions), searched.clocks)
    if depth is None:
        depth = min(bound, get_settings().depth)
    matches = _state_matcher(searched, target)

    def accept(encoding: PathEncoding, point: FeasibilityResult):
        if matches(encoding.states[-1]):
            return point, encoding, None
        return None

    outcome = search_paths(searched, depth, accept, max_constraints=max_constraints, jobs=jobs)
    complete = outcome.complete or depth >= bound
    witness = outcome.witness
    if witness is not None and translation is not None:
        witness = lower_run(translation, witness)
    logger.info("bounded search on %s: hit=%s complete=%s explored=%d",
                m.name, outcome.hit, complete, outcome.explored)
    return ReachResult(outcome.hit, complete, depth, bound, outcome.explored,
                       witness, outcome.path, translation is not None)
