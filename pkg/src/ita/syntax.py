"""
Grammar pieces shared by the model and formula parsers
"""
import json
import re

from lark import Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from .errors import ItaError, ItaSyntaxError
from .numerics import LinExpr, parse_rational

# Linear expressions: rational literals, clocks x1..xn, +, -, scalar *.
EXPRESSION_GRAMMAR = r"""
?sum: product
    | sum "+" product      -> add
    | sum "-" product      -> sub
?product: signed
    | product "*" signed   -> mul
?signed: "-" signed        -> neg
    | NUMBER               -> number
    | CLOCK                -> clock

COMP: "<=" | ">=" | "==" | "<" | ">" | "="
CLOCK.2: /x[0-9]+/
NUMBER: /[0-9]+(\.[0-9]+)?(\/[0-9]+)?/

COMMENT: /#[^\n]*/ | /\/\/[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
"""

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

KEYWORDS = frozenset({
    "ita", "clocks", "state", "level", "policy", "initial", "final", "labels",
    "trans", "on", "when", "do", "true", "false", "lazy", "urgent", "delayed", "eps",
    "E", "A", "U", "EF", "AF", "EG", "AG",
})


def render_name(name: str) -> str:
    """Quote names that are not plain identifiers"""
    if _IDENTIFIER.match(name) and name not in KEYWORDS:
        return name
    return json.dumps(name)


def unquote(token: str) -> str:
    if token.startswith('"'):
        return json.loads(token)
    return str(token)


@v_args(inline=True)
class ExpressionBuilder(Transformer):
    """Builds LinExpr values from the shared expression rules"""

    def number(self, token):
        return LinExpr.constant(parse_rational(token))

    def clock(self, token):
        index = int(token[1:])
        if index < 1:
            raise ItaSyntaxError("clock indices start at 1", token.line, token.column)
        return LinExpr.var(index)

    def neg(self, expr):
        return -expr

    def add(self, left, right):
        return left + right

    def sub(self, left, right):
        return left - right

    def mul(self, left, right):
        if left.is_constant:
            return right.scale(left.const)
        if right.is_constant:
            return left.scale(right.const)
        raise ItaSyntaxError(f"non-linear product {left} * {right}")


def run_parser(parser, transformer: Transformer, text: str):
    """Parse and transform, converting lark failures into ItaSyntaxError"""
    try:
        tree = parser.parse(text)
    except UnexpectedInput as e:
        raise ItaSyntaxError(f"unexpected input: {e.get_context(text).strip()!r}",
                             e.line, e.column) from e
    try:
        return transformer.transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, ItaError):
            raise e.orig_exc from e
        raise
