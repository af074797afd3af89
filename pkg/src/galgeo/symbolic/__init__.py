from .expr import (
    Binary,
    ChartPoint,
    Const,
    Expression,
    Unary,
    Var,
    differentiate,
    evaluate,
    simplify,
    to_text,
)
from .parser import parse

__all__ = [
    "Binary",
    "ChartPoint",
    "Const",
    "Expression",
    "Unary",
    "Var",
    "differentiate",
    "evaluate",
    "parse",
    "simplify",
    "to_text",
]
