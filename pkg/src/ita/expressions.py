"""
Level-indexed expression sets

E_k collects the level-k linear expressions whose relative order with the
active clock decides every guard, every formula comparison and every
ordering that a later update can expose.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from ..config import get_settings
from .errors import ExpressionCapExceeded
from .model import ITAModel
from .numerics import Comparator, LinExpr, complement, normalize

logger = logging.getLogger(__name__)

# Positions of the two seed members in every E_k
ACTIVE = 0
ZERO = 1


class Provenance(Enum):
    INITIAL = "initial"
    GUARD = "guard"
    UPDATE_CLOSURE = "update-closure"
    LEVEL_DIFFERENCE = "level-difference"
    FORMULA = "formula"


@dataclass(frozen=True)
class ExpressionSets:
    """E_1..E_n in insertion order; entry k - 1 holds level k"""

    levels: Tuple[Tuple[LinExpr, ...], ...]
    provenance: Tuple[Tuple[Provenance, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def at(self, level: int) -> Tuple[LinExpr, ...]:
        return self.levels[level - 1]

    @cached_property
    def _positions(self) -> Tuple[Dict[LinExpr, int], ...]:
        return tuple({expr: i for i, expr in enumerate(exprs)} for exprs in self.levels)

    def index_of(self, level: int, expr: LinExpr) -> Optional[int]:
        return self._positions[level - 1].get(expr)

    def sizes(self) -> Tuple[int, ...]:
        return tuple(len(exprs) for exprs in self.levels)

    def as_sets(self) -> Dict[int, frozenset]:
        return {k: frozenset(self.at(k)) for k in range(1, self.depth + 1)}

    def render(self) -> str:
        lines = []
        for k in range(1, self.depth + 1):
            for i, (expr, tag) in enumerate(zip(self.at(k), self.provenance[k - 1])):
                lines.append(f"E{k}[{i}] {expr}  # {tag.value}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> Dict[str, List[Dict[str, str]]]:
        return {
            str(k): [
                {"expr": str(expr), "provenance": tag.value}
                for expr, tag in zip(self.at(k), self.provenance[k - 1])
            ]
            for k in range(1, self.depth + 1)
        }


class _Saturation:
    def __init__(self, m: ITAModel, max_exprs: int):
        self.m = m
        self.max_exprs = max_exprs
        self.members: Dict[int, List[LinExpr]] = {}
        self.tags: Dict[int, List[Provenance]] = {}
        self.seen: Dict[int, set] = {}
        for k in range(1, m.clocks + 1):
            self.members[k] = []
            self.tags[k] = []
            self.seen[k] = set()
            self.add(k, LinExpr.var(k), Provenance.INITIAL)
            self.add(k, LinExpr.constant(0), Provenance.INITIAL)

    def add(self, level: int, expr: LinExpr, tag: Provenance) -> None:
        if expr in self.seen[level]:
            return
        if len(self.members[level]) >= self.max_exprs:
            logger.warning("expression cap %d reached at level %d", self.max_exprs, level)
            raise ExpressionCapExceeded(level, self.max_exprs)
        self.seen[level].add(expr)
        self.members[level].append(expr)
        self.tags[level].append(tag)

    def seed(self, level: int, expr: LinExpr, tag: Provenance) -> None:
        normalized, _ = normalize(expr, level)
        self.add(level, complement(normalized, level), tag)

    def close(self, k: int) -> None:
        level_of = self.m.level
        within = [t for t in self.m.transitions
                  if level_of(t.source) >= k and level_of(t.target) >= k]
        entering = [t for t in self.m.transitions
                    if level_of(t.source) < k <= level_of(t.target)]
        members = self.members[k]
        j = 0
        while j < len(members):
            current = members[j]
            for t in within:
                self.add(k, current.substitute(t.update.as_mapping()), Provenance.UPDATE_CLOSURE)
            for t in entering:
                low = level_of(t.source)
                mapping = t.update.as_mapping()
                moved = current.substitute(mapping)
                for i in range(j):
                    difference = members[i].substitute(mapping) - moved
                    self.seed(low, difference, Provenance.LEVEL_DIFFERENCE)
            j += 1

    def result(self) -> ExpressionSets:
        n = self.m.clocks
        return ExpressionSets(
            tuple(tuple(self.members[k]) for k in range(1, n + 1)),
            tuple(tuple(self.tags[k]) for k in range(1, n + 1)),
        )


def build_expression_sets_with_formula(m: ITAModel,
                                       comparisons: Sequence[Tuple[LinExpr, Comparator]] = (),
                                       max_exprs: Optional[int] = None) -> ExpressionSets:
    """Saturate E_n down to E_1, seeding every level with the formula comparisons"""
    if max_exprs is None:
        max_exprs = get_settings().max_exprs
    work = _Saturation(m, max_exprs)
    for k in range(m.clocks, 0, -1):
        for t in m.transitions:
            if m.level(t.source) == k:
                for atom in t.guard:
                    work.seed(k, atom.expr, Provenance.GUARD)
        for expr, _ in comparisons:
            work.seed(k, expr.restrict(k), Provenance.FORMULA)
        work.close(k)
        logger.debug("level %d saturated with %d expressions", k, len(work.members[k]))
    return work.result()


def build_expression_sets(m: ITAModel, max_exprs: Optional[int] = None) -> ExpressionSets:
    return build_expression_sets_with_formula(m, (), max_exprs=max_exprs)


def expression_bound(transitions: int, clocks: int, level: int) -> int:
    """Worst-case size of E_level, reported for information only"""
    return (transitions + 2) ** (2 ** (clocks * (clocks - level + 1)) + 1)


def closure_is_stable(m: ITAModel, esets: ExpressionSets) -> bool:
    """True when neither closure rule adds anything to `esets`"""
    for k in range(1, m.clocks + 1):
        members = esets.at(k)
        for t in m.transitions:
            source, target = m.level(t.source), m.level(t.target)
            mapping = t.update.as_mapping()
            if source >= k and target >= k:
                if any(esets.index_of(k, e.substitute(mapping)) is None for e in members):
                    return False
            elif source < k <= target:
                for j, current in enumerate(members):
                    moved = current.substitute(mapping)
                    for earlier in members[:j]:
                        normalized, _ = normalize(earlier.substitute(mapping) - moved, source)
                        if esets.index_of(source, complement(normalized, source)) is None:
                            return False
    return True

