"""
Exact rational arithmetic and linear expressions over indexed clocks

Clock indices start at 1. A valuation is a tuple whose position i - 1 holds
the value of clock i.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

from .errors import ExpressionAboveLevel

Number = Union[int, Fraction]
Valuation = Tuple[Fraction, ...]


def parse_rational(text: str) -> Fraction:
    """Parse an integer, a `p/q` literal or a finite decimal"""
    return Fraction(text.strip())


def format_rational(value: Number) -> str:
    return str(Fraction(value))


def zero_valuation(n: int) -> Valuation:
    return tuple(Fraction(0) for _ in range(n))


class Comparator(Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    def holds(self, value: Number) -> bool:
        """Decide `value ⋈ 0`"""
        if self is Comparator.LT:
            return value < 0
        if self is Comparator.LE:
            return value <= 0
        if self is Comparator.EQ:
            return value == 0
        if self is Comparator.GE:
            return value >= 0
        return value > 0

    def compare(self, left: Number, right: Number) -> bool:
        return self.holds(Fraction(left) - Fraction(right))

    def flipped(self) -> "Comparator":
        return _FLIPPED[self]

    def negated(self) -> "Comparator":
        if self is Comparator.EQ:
            raise ValueError("the negation of = is not a comparator")
        return _NEGATED[self]

    @property
    def is_strict(self) -> bool:
        return self in (Comparator.LT, Comparator.GT)

    @classmethod
    def parse(cls, text: str) -> "Comparator":
        aliases = {"==": "=", "≤": "<=", "≥": ">="}
        return cls(aliases.get(text, text))


_FLIPPED = {
    Comparator.LT: Comparator.GT,
    Comparator.LE: Comparator.GE,
    Comparator.EQ: Comparator.EQ,
    Comparator.GE: Comparator.LE,
    Comparator.GT: Comparator.LT,
}

_NEGATED = {
    Comparator.LT: Comparator.GE,
    Comparator.LE: Comparator.GT,
    Comparator.GE: Comparator.LT,
    Comparator.GT: Comparator.LE,
}


class Orientation(Enum):
    KEPT = "kept"
    FLIPPED = "flipped"


def clock_name(index: int) -> str:
    return f"x{index}"


@dataclass(frozen=True)
class LinExpr:
    """Canonical linear expression `Σ a_i*x_i + b` with no stored zero coefficient"""

    terms: Tuple[Tuple[int, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coefficients: Mapping[int, Number], const: Number = 0) -> "LinExpr":
        terms = tuple(
            (index, Fraction(value))
            for index, value in sorted(coefficients.items())
            if value != 0
        )
        return LinExpr(terms, Fraction(const))

    @staticmethod
    def var(index: int, coefficient: Number = 1) -> "LinExpr":
        return LinExpr.build({index: coefficient})

    @staticmethod
    def constant(value: Number) -> "LinExpr":
        return LinExpr((), Fraction(value))

    @property
    def coefficients(self) -> Dict[int, Fraction]:
        return dict(self.terms)

    def coeff(self, index: int) -> Fraction:
        for i, value in self.terms:
            if i == index:
                return value
        return Fraction(0)

    @property
    def clocks(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.terms)

    @property
    def top_level(self) -> int:
        """Highest clock index mentioned, 0 for constants"""
        return self.terms[-1][0] if self.terms else 0

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def __add__(self, other: "LinExpr") -> "LinExpr":
        merged = self.coefficients
        for index, value in other.terms:
            merged[index] = merged.get(index, Fraction(0)) + value
        return LinExpr.build(merged, self.const + other.const)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def scale(self, factor: Number) -> "LinExpr":
        factor = Fraction(factor)
        return LinExpr.build({i: v * factor for i, v in self.terms}, self.const * factor)

    def shift(self, amount: Number) -> "LinExpr":
        return LinExpr(self.terms, self.const + Fraction(amount))

    def substitute(self, mapping: Mapping[int, "LinExpr"]) -> "LinExpr":
        """Simultaneous substitution; unmapped indices stay in place"""
        result = LinExpr.constant(self.const)
        for index, value in self.terms:
            replacement = mapping.get(index)
            if replacement is None:
                replacement = LinExpr.var(index)
            result = result + replacement.scale(value)
        return result

    def evaluate(self, values: Sequence[Number]) -> Fraction:
        total = Fraction(self.const)
        for index, value in self.terms:
            total += value * values[index - 1]
        return total

    def restrict(self, level: int) -> "LinExpr":
        """Set every clock above `level` to 0"""
        return LinExpr(tuple((i, v) for i, v in self.terms if i <= level), self.const)

    def render(self, name: Optional[Callable[[int], str]] = None) -> str:
        name = name or clock_name
        parts = []
        for index, value in self.terms:
            parts.append(_render_term(value, name(index), first=not parts))
        if self.const != 0 or not parts:
            parts.append(_render_term(self.const, None, first=not parts))
        return "".join(parts)

    def __str__(self) -> str:
        return self.render()


def _render_term(value: Fraction, var: Optional[str], first: bool) -> str:
    negative = value < 0
    magnitude = -value if negative else value
    if var is None:
        body = format_rational(magnitude)
    elif magnitude == 1:
        body = var
    else:
        body = f"{format_rational(magnitude)}*{var}"
    if first:
        return f"-{body}" if negative else body
    return f" - {body}" if negative else f" + {body}"


@dataclass(frozen=True)
class Update:
    """Simultaneous assignment; clocks that are not mentioned keep their value"""

    assignments: Tuple[Tuple[int, LinExpr], ...] = ()

    @staticmethod
    def build(mapping: Mapping[int, LinExpr]) -> "Update":
        return Update(tuple(
            (index, expr)
            for index, expr in sorted(mapping.items())
            if expr != LinExpr.var(index)
        ))

    @staticmethod
    def identity() -> "Update":
        return Update()

    def as_mapping(self) -> Dict[int, LinExpr]:
        return dict(self.assignments)

    def expr_for(self, index: int) -> LinExpr:
        for i, expr in self.assignments:
            if i == index:
                return expr
        return LinExpr.var(index)

    def assigns(self, index: int) -> bool:
        return any(i == index for i, _ in self.assignments)

    @property
    def is_identity(self) -> bool:
        return not self.assignments

    def items(self) -> Iterable[Tuple[int, LinExpr]]:
        return iter(self.assignments)

    def render(self) -> str:
        return ", ".join(f"{clock_name(i)} := {expr}" for i, expr in self.assignments)


def normalize(expr: LinExpr, level: int) -> Tuple[LinExpr, Orientation]:
    """Scale `expr` so that the coefficient of x_level is 1 (or leave it when 0)"""
    if expr.top_level > level:
        raise ExpressionAboveLevel(f"expression above level {level}: {expr}")
    a_k = expr.coeff(level)
    if a_k == 0:
        return expr, Orientation.KEPT
    orientation = Orientation.FLIPPED if a_k < 0 else Orientation.KEPT
    return expr.scale(1 / a_k), orientation


def complement(expr: LinExpr, level: int) -> LinExpr:
    """The part `-(Σ_{i<k} a_i*x_i + b)` of a k-normalized expression"""
    return -(expr - LinExpr.var(level, expr.coeff(level)))


def substitute(expr: LinExpr, update: Update) -> LinExpr:
    return expr.substitute(update.as_mapping())


def evaluate(expr: LinExpr, valuation: Sequence[Number]) -> Fraction:
    return expr.evaluate(valuation)


def apply_update(valuation: Valuation, update: Update) -> Valuation:
    values = list(valuation)
    for index, expr in update.items():
        values[index - 1] = expr.evaluate(valuation)
    return tuple(Fraction(v) for v in values)
