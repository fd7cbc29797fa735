"""
Exception hierarchy for the ITA toolkit
"""
from typing import Optional


class ItaError(Exception):
    """Base class for every toolkit error"""


class ItaSyntaxError(ItaError):
    """Syntax error in a model, run file or formula"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ModelError(ItaError):
    """Structurally unusable model"""


class ExpressionAboveLevel(ItaError):
    """An expression mentions a clock above the requested level"""


class StepError(ItaError):
    """A time or discrete step is not allowed by the semantics"""

    def __init__(self, message: str, step_index: Optional[int] = None):
        self.step_index = step_index
        where = f" (step {step_index})" if step_index is not None else ""
        super().__init__(f"{message}{where}")


class PathChainError(ItaError):
    """Consecutive transitions of a path do not chain"""


class FormulaError(ItaError):
    """Formula outside the supported logics"""


class ResourceCapExceeded(ItaError):
    """A configurable resource cap was hit"""

    def __init__(self, message: str, limit: int):
        self.limit = limit
        super().__init__(f"{message} (limit {limit})")


class ExpressionCapExceeded(ResourceCapExceeded):
    def __init__(self, level: int, limit: int):
        self.level = level
        super().__init__(f"too many expressions at level {level}", limit)


class ClassCapExceeded(ResourceCapExceeded):
    def __init__(self, limit: int):
        super().__init__("class graph too large", limit)


class StateCapExceeded(ResourceCapExceeded):
    def __init__(self, limit: int):
        super().__init__("too many expanded states", limit)


class ConstraintCapExceeded(ResourceCapExceeded):
    def __init__(self, limit: int):
        super().__init__("too many constraints during elimination", limit)
