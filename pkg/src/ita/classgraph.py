"""
Finite class graph of an ITA

A class is a state plus, for each level up to the state's level, a total
preorder over E_k. Preorders are stored as tuples of blocks of expression
indices; blocks are listed by increasing value and members of one block are
equal.
"""
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import graphviz
import networkx as nx

from ..config import get_settings
from .errors import ClassCapExceeded, ExpressionAboveLevel, ItaError
from .expressions import ACTIVE, ZERO, ExpressionSets, build_expression_sets
from .model import EPSILON, ITAModel, Policy, TransitionDecl
from .numerics import Comparator, LinExpr, complement
from .semantics import Configuration

logger = logging.getLogger(__name__)

Block = Tuple[int, ...]
Preorder = Tuple[Block, ...]
Target = Union[str, Callable[[str], bool]]


class NodeTag(Enum):
    OPEN = "open"
    PLUS = "plus"
    MINUS = "minus"


class EdgeKind(Enum):
    DISCRETE = "discrete"
    TIME = "time"


@dataclass(frozen=True)
class ClassNode:
    state: str
    preorders: Tuple[Preorder, ...]
    tag: NodeTag = NodeTag.OPEN

    def active_block(self) -> Block:
        for block in self.preorders[-1]:
            if ACTIVE in block:
                return block
        raise ItaError(f"active clock missing from the preorder of {self.state}")

    @property
    def time_closed(self) -> bool:
        return len(self.active_block()) > 1

    def render(self, esets: ExpressionSets) -> str:
        levels = [render_preorder(p, esets.at(k)) for k, p in enumerate(self.preorders, start=1)]
        suffix = "" if self.tag is NodeTag.OPEN else f" [{self.tag.value}]"
        return f"{self.state}: " + " | ".join(levels) + suffix


def render_preorder(preorder: Preorder, exprs: Sequence[LinExpr]) -> str:
    return " < ".join(" = ".join(str(exprs[i]) for i in block) for block in preorder)


@lru_cache(maxsize=65536)
def _ranks(preorder: Preorder) -> Dict[int, int]:
    return {i: position for position, block in enumerate(preorder) for i in block}


def _sign(value) -> int:
    return (value > 0) - (value < 0)


def _group(indices: Iterable[int], key) -> Preorder:
    """Blocks of indices with equal key, ordered by key"""
    table: Dict[object, List[int]] = {}
    for i in indices:
        table.setdefault(key(i), []).append(i)
    return tuple(tuple(sorted(table[k])) for k in sorted(table))


def _group_by_comparison(size: int, compare: Callable[[int, int], int]) -> Preorder:
    ordered = sorted(range(size), key=cmp_to_key(compare))
    blocks: List[List[int]] = []
    for i in ordered:
        if blocks and compare(blocks[-1][0], i) == 0:
            blocks[-1].append(i)
        else:
            blocks.append([i])
    return tuple(tuple(sorted(b)) for b in blocks)


# ---------------------------------------------------------------------------
# Deciding signs from preorders
# ---------------------------------------------------------------------------

def sign_at_level(node: ClassNode, esets: ExpressionSets, expr: LinExpr, level: int) -> int:
    """Sign (-1, 0 or 1) of `expr` on every configuration of the class"""
    if expr.is_constant:
        return _sign(expr.const)
    if expr.top_level > level:
        raise ExpressionAboveLevel(f"expression above level {level}: {expr}")
    ranks = _ranks(node.preorders[level - 1])
    c = expr.coeff(level)
    if c != 0:
        pivot = complement(expr.scale(1 / c), level)
        i = esets.index_of(level, pivot)
        if i is not None:
            s = _sign(ranks[ACTIVE] - ranks[i])
            return s if c > 0 else -s
    else:
        i = esets.index_of(level, -expr)
        if i is not None:
            return _sign(ranks[ZERO] - ranks[i])
        i = esets.index_of(level, expr)
        if i is not None:
            return _sign(ranks[i] - ranks[ZERO])
        return sign_at_level(node, esets, expr, expr.top_level)
    raise ItaError(f"sign of {expr} is not decided at level {level}")


def comparison_holds(node: ClassNode, esets: ExpressionSets, expr: LinExpr, op: Comparator,
                     level: int) -> bool:
    """Truth of `expr op 0` in the class, clocks above `level` being 0"""
    return op.holds(sign_at_level(node, esets, expr.restrict(level), level))


def class_constraints(node: ClassNode, esets: ExpressionSets,
                      clock_values: Sequence[LinExpr]) -> List[Tuple[LinExpr, Comparator]]:
    """The class as linear constraints over symbolic clock values (clock i -> clock_values[i-1])"""
    mapping = {i: value for i, value in enumerate(clock_values, start=1)}
    constraints = []
    for k, preorder in enumerate(node.preorders, start=1):
        exprs = [e.substitute(mapping) for e in esets.at(k)]
        for block in preorder:
            for a, b in zip(block, block[1:]):
                constraints.append((exprs[a] - exprs[b], Comparator.EQ))
        for lower, upper in zip(preorder, preorder[1:]):
            constraints.append((exprs[lower[0]] - exprs[upper[0]], Comparator.LT))
    return [(e, op) for e, op in constraints if not (e.is_constant and op.holds(e.const))]


# ---------------------------------------------------------------------------
# Classes of configurations and successors
# ---------------------------------------------------------------------------

def _tag_for(m: ITAModel, state: str, preorders: Tuple[Preorder, ...], elapsed: bool) -> NodeTag:
    if m.policy(state) is not Policy.DELAYED:
        return NodeTag.OPEN
    node = ClassNode(state, preorders)
    if not node.time_closed:
        return NodeTag.OPEN
    return NodeTag.PLUS if elapsed else NodeTag.MINUS


def class_of(m: ITAModel, esets: ExpressionSets, c: Configuration) -> ClassNode:
    preorders = []
    for k in range(1, m.level(c.state) + 1):
        values = [e.evaluate(c.valuation) for e in esets.at(k)]
        preorders.append(_group(range(len(values)), lambda i: values[i]))
    preorders = tuple(preorders)
    return ClassNode(c.state, preorders, _tag_for(m, c.state, preorders, c.beta))


def initial_class(m: ITAModel, esets: ExpressionSets) -> ClassNode:
    state = m.initial_state
    zero = Configuration(state.name, tuple(Fraction(0) for _ in range(m.clocks)), False)
    return class_of(m, esets, zero)


def is_firable(m: ITAModel, esets: ExpressionSets, node: ClassNode, t: TransitionDecl) -> bool:
    if t.source != node.state or node.tag is NodeTag.MINUS:
        return False
    level = m.level(node.state)
    return all(atom.op.holds(sign_at_level(node, esets, atom.expr, level)) for atom in t.guard)


def discrete_successor(m: ITAModel, esets: ExpressionSets, node: ClassNode,
                       t: TransitionDecl) -> Optional[ClassNode]:
    """Class reached through `t`, or None when `t` is not firable from `node`"""
    if not is_firable(m, esets, node, t):
        return None
    source_level = m.level(node.state)
    mapping = t.update.as_mapping()
    preorders = []
    for k in range(1, m.level(t.target) + 1):
        moved = [e.substitute(mapping) for e in esets.at(k)]
        if k <= source_level:
            ranks = _ranks(node.preorders[k - 1])
            positions = [esets.index_of(k, e) for e in moved]
            if all(p is not None for p in positions):
                preorders.append(_group(range(len(moved)), lambda i: ranks[positions[i]]))
                continue
            level = k
        else:
            level = source_level

        def compare(a: int, b: int, moved=moved, level=level) -> int:
            return sign_at_level(node, esets, moved[a] - moved[b], level)

        preorders.append(_group_by_comparison(len(moved), compare))
    preorders = tuple(preorders)
    return ClassNode(t.target, preorders, _tag_for(m, t.target, preorders, False))


def post(node: ClassNode) -> Optional[Preorder]:
    """Time successor preorder of the active level, None when time leaves the class unchanged"""
    preorder = node.preorders[-1]
    position = next(i for i, block in enumerate(preorder) if ACTIVE in block)
    block = preorder[position]
    if len(block) == 1:
        if position == len(preorder) - 1:
            return None
        merged = tuple(sorted(block + preorder[position + 1]))
        return preorder[:position] + (merged,) + preorder[position + 2:]
    rest = tuple(i for i in block if i != ACTIVE)
    return preorder[:position] + (rest, (ACTIVE,)) + preorder[position + 1:]


def time_successor(m: ITAModel, node: ClassNode) -> Optional[ClassNode]:
    """Class entered by letting time elapse; None for urgent states and time-divergent classes"""
    if m.policy(node.state) is Policy.URGENT:
        return None
    preorder = post(node)
    if preorder is None:
        return None
    preorders = node.preorders[:-1] + (preorder,)
    return ClassNode(node.state, preorders, _tag_for(m, node.state, preorders, True))


def is_divergent(m: ITAModel, node: ClassNode) -> bool:
    return m.policy(node.state) is not Policy.URGENT and post(node) is None


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------

@dataclass
class ClassGraph:
    model: ITAModel
    esets: ExpressionSets
    graph: nx.MultiDiGraph
    classes: List[ClassNode]
    index: Dict[ClassNode, int]
    initial: int = 0

    def node(self, node_id: int) -> ClassNode:
        return self.classes[node_id]

    def id_of(self, node: ClassNode) -> Optional[int]:
        return self.index.get(node)

    def __len__(self) -> int:
        return len(self.classes)

    def edges(self) -> List[Tuple[int, int, EdgeKind, Optional[int]]]:
        """(source, target, kind, transition id) sorted by source then kind order"""
        result = [
            (u, v, data["kind"], data["transition"])
            for u, v, data in self.graph.edges(data=True)
        ]
        return sorted(result, key=lambda e: (e[0], e[2] is EdgeKind.TIME, -1 if e[3] is None else e[3], e[1]))

    def successors(self, node_id: int) -> List[Tuple[EdgeKind, Optional[int], int]]:
        found = [
            (data["kind"], data["transition"], v)
            for _, v, data in self.graph.out_edges(node_id, data=True)
        ]
        return sorted(found, key=lambda e: (e[0] is EdgeKind.TIME, -1 if e[1] is None else e[1], e[2]))

    def has_edges(self, node_id: int) -> bool:
        return self.graph.out_degree(node_id) > 0

    def is_accepting(self, node_id: int) -> bool:
        return self.graph.nodes[node_id]["accepting"]

    def is_divergent(self, node_id: int) -> bool:
        return self.graph.nodes[node_id]["divergent"]

    @property
    def accepting(self) -> FrozenSet[int]:
        return frozenset(n for n in self.graph.nodes if self.is_accepting(n))

    def props_of(self, node_id: int) -> FrozenSet[str]:
        return self.model.props_of(self.classes[node_id].state)


def _successors(m: ITAModel, esets: ExpressionSets,
                node: ClassNode) -> List[Tuple[EdgeKind, Optional[int], ClassNode]]:
    found = []
    for t in m.outgoing.get(node.state, ()):
        target = discrete_successor(m, esets, node, t)
        if target is not None:
            found.append((EdgeKind.DISCRETE, t.tid, target))
    target = time_successor(m, node)
    if target is not None:
        found.append((EdgeKind.TIME, None, target))
    return found


def explore(m: ITAModel, esets: Optional[ExpressionSets] = None,
            max_classes: Optional[int] = None, jobs: Optional[int] = None) -> ClassGraph:
    """Breadth-first construction of the reachable classes

    With `jobs` > 1 the successors of each breadth-first layer are computed
    on a thread pool; classes are still numbered in layer order, so the
    graph is identical to the single-threaded one.
    """
    if esets is None:
        esets = build_expression_sets(m)
    if max_classes is None:
        max_classes = get_settings().max_classes
    if jobs is None:
        jobs = get_settings().jobs

    graph = nx.MultiDiGraph(name=m.name)
    classes: List[ClassNode] = []
    index: Dict[ClassNode, int] = {}
    queue = deque()

    def intern(node: ClassNode) -> int:
        node_id = index.get(node)
        if node_id is None:
            if len(classes) >= max_classes:
                logger.warning("class cap %d reached while exploring %s", max_classes, m.name)
                raise ClassCapExceeded(max_classes)
            node_id = len(classes)
            index[node] = node_id
            classes.append(node)
            graph.add_node(node_id, state=node.state,
                           accepting=node.state in m.finals,
                           divergent=is_divergent(m, node))
            queue.append(node_id)
        return node_id

    def expand(node: ClassNode) -> List[Tuple[EdgeKind, Optional[int], ClassNode]]:
        return _successors(m, esets, node)

    intern(initial_class(m, esets))
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while queue:
            layer = list(queue)
            queue.clear()
            nodes = [classes[i] for i in layer]
            expanded = pool.map(expand, nodes) if pool is not None else map(expand, nodes)
            for source_id, successors in zip(layer, expanded):
                for kind, tid, target in successors:
                    graph.add_edge(source_id, intern(target), kind=kind, transition=tid)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)

    logger.debug("explored %s: %d classes, %d edges", m.name, len(classes), graph.number_of_edges())
    return ClassGraph(m, esets, graph, classes, index)


def dead_nodes(g: ClassGraph) -> FrozenSet[int]:
    """Classes where a maximal run can stop producing positions"""
    return frozenset(n for n in g.graph.nodes if not g.has_edges(n) or g.is_divergent(n))


def _matcher(m: ITAModel, target: Target) -> Callable[[str], bool]:
    if callable(target):
        return target
    return lambda state: target in m.props_of(state)


def reachable(m: ITAModel, target: Target, g: Optional[ClassGraph] = None
              ) -> Tuple[bool, List[Tuple[EdgeKind, Optional[int]]]]:
    """Whether a class of a matching state is reachable, with the shortest abstract path"""
    if g is None:
        g = explore(m)
    matches = _matcher(m, target)
    paths = nx.single_source_shortest_path(g.graph, g.initial)
    hits = [n for n in paths if matches(g.classes[n].state)]
    if not hits:
        return False, []
    best = min(hits, key=lambda n: (len(paths[n]), n))
    steps = []
    route = paths[best]
    for u, v in zip(route, route[1:]):
        options = sorted(
            (data["kind"] is EdgeKind.TIME, -1 if data["transition"] is None else data["transition"],
             data["kind"], data["transition"])
            for data in g.graph.get_edge_data(u, v).values()
        )
        steps.append((options[0][2], options[0][3]))
    return True, steps


def render_path(m: ITAModel, path: Sequence[Tuple[EdgeKind, Optional[int]]]) -> str:
    parts = []
    for kind, tid in path:
        parts.append("time" if kind is EdgeKind.TIME else f"{m.transition(tid).action}#{tid}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def to_json(g: ClassGraph) -> dict:
    nodes = []
    for node_id, node in enumerate(g.classes):
        nodes.append({
            "id": node_id,
            "state": node.state,
            "tag": node.tag.value,
            "preorders": [[list(block) for block in p] for p in node.preorders],
            "accepting": g.is_accepting(node_id),
            "divergent": g.is_divergent(node_id),
        })
    edges = [
        {"src": u, "dst": v, "kind": kind.value, "transition": tid}
        for u, v, kind, tid in g.edges()
    ]
    return {"schema": 1, "model": g.model.name, "initial": g.initial, "nodes": nodes, "edges": edges}


def to_dot(g: ClassGraph, highlight: Iterable[int] = ()) -> str:
    """DOT source; `highlight` classes are filled grey"""
    highlight = frozenset(highlight)
    dot = graphviz.Digraph(g.model.name)
    dot.attr(rankdir="LR")
    dot.attr("node", shape="box", style="rounded")
    for node_id, node in enumerate(g.classes):
        extra = {"style": "rounded,filled", "fillcolor": "lightgrey"} if node_id in highlight else {}
        dot.node(f"n{node_id}", node.render(g.esets),
                 peripheries="2" if g.is_accepting(node_id) else "1", **extra)
    dot.node("init", "", shape="none", width="0", height="0")
    dot.edge("init", f"n{g.initial}")
    for u, v, kind, tid in g.edges():
        if kind is EdgeKind.TIME:
            dot.edge(f"n{u}", f"n{v}", style="dashed")
        else:
            dot.edge(f"n{u}", f"n{v}", label=g.model.transition(tid).action)
    return dot.source


# ---------------------------------------------------------------------------
# Untimed language
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteAutomaton:
    """Nondeterministic automaton with ε-moves (label None)"""

    states: Tuple[int, ...]
    initial: int
    finals: FrozenSet[int]
    transitions: Tuple[Tuple[int, Optional[str], int], ...]

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return tuple(sorted({a for _, a, _ in self.transitions if a is not None}))

    def closure(self, states: Iterable[int]) -> FrozenSet[int]:
        stack = list(states)
        seen: Set[int] = set(stack)
        while stack:
            s = stack.pop()
            for u, a, v in self.transitions:
                if u == s and a is None and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return frozenset(seen)

    def step(self, states: FrozenSet[int], letter: str) -> FrozenSet[int]:
        moved = {v for u, a, v in self.transitions if u in states and a == letter}
        return self.closure(moved)

    def eliminate_epsilon(self) -> "FiniteAutomaton":
        transitions = set()
        finals = set()
        for s in self.states:
            reach = self.closure([s])
            if reach & self.finals:
                finals.add(s)
            for u, a, v in self.transitions:
                if u in reach and a is not None:
                    transitions.add((s, a, v))
        # keep only states reachable from the initial one
        live = {self.initial}
        frontier = [self.initial]
        while frontier:
            s = frontier.pop()
            for u, _, v in transitions:
                if u == s and v not in live:
                    live.add(v)
                    frontier.append(v)
        return FiniteAutomaton(
            tuple(sorted(live)),
            self.initial,
            frozenset(finals & live),
            tuple(sorted(t for t in transitions if t[0] in live)),
        )

    def accepts(self, word: Sequence[str]) -> bool:
        current = self.closure([self.initial])
        for letter in word:
            current = self.step(current, letter)
            if not current:
                return False
        return bool(current & self.finals)

    def language_up_to(self, length: int) -> FrozenSet[Tuple[str, ...]]:
        """Accepted words of at most `length` letters"""
        words = set()
        frontier = [((), self.closure([self.initial]))]
        for _ in range(length + 1):
            next_frontier = []
            for word, current in frontier:
                if current & self.finals:
                    words.add(word)
                for letter in self.alphabet:
                    moved = self.step(current, letter)
                    if moved:
                        next_frontier.append((word + (letter,), moved))
            frontier = next_frontier
        return frozenset(words)

    def to_dot(self, name: str = "untimed") -> str:
        dot = graphviz.Digraph(name)
        dot.attr(rankdir="LR")
        for s in self.states:
            dot.node(str(s), str(s), shape="doublecircle" if s in self.finals else "circle")
        dot.node("init", "", shape="none", width="0", height="0")
        dot.edge("init", str(self.initial))
        for u, a, v in self.transitions:
            dot.edge(str(u), str(v), label=a if a is not None else EPSILON)
        return dot.source

    def to_json(self) -> dict:
        return {
            "states": list(self.states),
            "initial": self.initial,
            "finals": sorted(self.finals),
            "transitions": [{"src": u, "letter": a, "dst": v} for u, a, v in self.transitions],
        }


def untimed_automaton(m: ITAModel, g: Optional[ClassGraph] = None) -> FiniteAutomaton:
    if g is None:
        g = explore(m)
    transitions = tuple(
        (u, None if kind is EdgeKind.TIME else m.transition(tid).letter, v)
        for u, v, kind, tid in g.edges()
    )
    return FiniteAutomaton(tuple(range(len(g))), g.initial, g.accepting, transitions)
