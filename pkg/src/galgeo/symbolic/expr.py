# src/galgeo/symbolic/expr.py
"""Expression trees over the chart coordinates (t, x1..xn, y1..yn).

Nodes are immutable dataclasses. Evaluation goes through closures compiled
once per node and cached on the instance, so repeated evaluation of the
same connection coefficients at many points stays cheap.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, FrozenSet, Sequence, Tuple, Union

import numpy as np

from src.galgeo.base import EvaluationDomainError

logger = logging.getLogger(__name__)

Compiled = Callable[[float, Sequence[float], Sequence[float]], float]
Number = Union[int, float]

UNARY_FUNCTIONS: Tuple[str, ...] = ("sin", "cos", "exp", "log", "sqrt")
BINARY_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}

# printer precedence levels
PREC_ADD = 1
PREC_MUL = 2
PREC_UNARY = 3
PREC_POW = 4
PREC_ATOM = 5


# ============================================================================
# CHART POINTS
# ============================================================================
@dataclass(frozen=True)
class ChartPoint:
    """A point (t, x, y) of the (2n+1)-dimensional chart."""

    t: float
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError(f"x and y must have equal length, got {len(self.x)} and {len(self.y)}")
        if not all(math.isfinite(v) for v in (self.t, *self.x, *self.y)):
            raise ValueError("ChartPoint entries must be finite")

    @property
    def n(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, *self.x, *self.y], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float], n: int = None) -> "ChartPoint":
        values = [float(v) for v in values]
        if n is None:
            n = (len(values) - 1) // 2
        if len(values) != 2 * n + 1:
            raise ValueError(f"expected {2 * n + 1} chart coordinates, got {len(values)}")
        return cls(values[0], tuple(values[1:n + 1]), tuple(values[n + 1:]))

    def coordinate(self, index: int) -> float:
        """Chart coordinate by flat index: 0 = t, 1..n = x, n+1..2n = y."""
        return float(self.as_array()[index])


# ============================================================================
# NODES
# ============================================================================
class Expression:
    """Base class of all expression nodes."""

    # ---------- public API ----------
    def evaluate(self, point: ChartPoint) -> float:
        try:
            value = self._fn(point.t, point.x, point.y)
        except OverflowError:
            raise EvaluationDomainError("overflow", self.to_text()) from None
        except ValueError:
            # math.sin/cos of an infinite intermediate
            raise EvaluationDomainError("math domain error", self.to_text()) from None
        except IndexError:
            raise EvaluationDomainError(f"variable index exceeds point dimension {point.n}", self.to_text()) from None
        if not math.isfinite(value):
            raise EvaluationDomainError("non-finite value", self.to_text())
        return value

    def compile(self) -> Compiled:
        return self._fn

    def to_text(self) -> str:
        return self._text()[0]

    def variables(self) -> FrozenSet["Var"]:
        raise NotImplementedError

    def diff(self, var: "Var") -> "Expression":
        """Raw partial derivative (locally simplified, see `differentiate`)."""
        raise NotImplementedError

    def is_constant(self, value: float = None) -> bool:
        return False

    def to_sympy(self):
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_text()

    # ---------- internals ----------
    @cached_property
    def _fn(self) -> Compiled:
        return self._build()

    def _build(self) -> Compiled:
        raise NotImplementedError

    def _text(self) -> Tuple[str, int]:
        raise NotImplementedError

    # ---------- operators ----------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self


@dataclass(frozen=True, repr=True)
class Const(Expression):
    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError("constants must be finite")

    def variables(self) -> FrozenSet["Var"]:
        return frozenset()

    def diff(self, var: "Var") -> Expression:
        return ZERO

    def is_constant(self, value: float = None) -> bool:
        return value is None or self.value == value

    def to_sympy(self):
        import sympy

        if self.value.is_integer():
            return sympy.Integer(int(self.value))
        return sympy.Float(self.value)

    def _build(self) -> Compiled:
        value = self.value
        return lambda t, x, y: value

    def _text(self) -> Tuple[str, int]:
        text = _format_number(self.value)
        return text, (PREC_UNARY if self.value < 0 else PREC_ATOM)


@dataclass(frozen=True, repr=True)
class Var(Expression):
    """Chart variable: kind "t" (index 0), "x" or "y" (1-based index)."""

    kind: str
    index: int = 0

    def __post_init__(self) -> None:
        if self.kind == "t":
            if self.index != 0:
                raise ValueError("the time variable has no index")
        elif self.kind in ("x", "y"):
            if self.index < 1:
                raise ValueError(f"variable index must be >= 1, got {self.index}")
        else:
            raise ValueError(f"unknown variable kind {self.kind!r}")

    @classmethod
    def time(cls) -> "Var":
        return cls("t", 0)

    @classmethod
    def position(cls, i: int) -> "Var":
        return cls("x", i)

    @classmethod
    def velocity(cls, i: int) -> "Var":
        return cls("y", i)

    @classmethod
    def from_chart_index(cls, index: int, n: int) -> "Var":
        if index == 0:
            return cls.time()
        if 1 <= index <= n:
            return cls.position(index)
        if n < index <= 2 * n:
            return cls.velocity(index - n)
        raise ValueError(f"chart index {index} out of range for n={n}")

    def chart_index(self, n: int) -> int:
        if self.kind == "t":
            return 0
        return self.index if self.kind == "x" else n + self.index

    @property
    def name(self) -> str:
        return "t" if self.kind == "t" else f"{self.kind}{self.index}"

    def variables(self) -> FrozenSet["Var"]:
        return frozenset({self})

    def diff(self, var: "Var") -> Expression:
        return ONE if var == self else ZERO

    def to_sympy(self):
        import sympy

        return sympy.Symbol(self.name, real=True)

    def _build(self) -> Compiled:
        if self.kind == "t":
            return lambda t, x, y: t
        i = self.index - 1
        if self.kind == "x":
            return lambda t, x, y: x[i]
        return lambda t, x, y: y[i]

    def _text(self) -> Tuple[str, int]:
        return self.name, PREC_ATOM


@dataclass(frozen=True, repr=True)
class Unary(Expression):
    """Negation ("neg") or one of the elementary functions."""

    op: str
    arg: Expression

    def __post_init__(self) -> None:
        if self.op != "neg" and self.op not in UNARY_FUNCTIONS:
            raise ValueError(f"unknown unary operator {self.op!r}")

    def variables(self) -> FrozenSet["Var"]:
        return self.arg.variables()

    def diff(self, var: "Var") -> Expression:
        da = self.arg.diff(var)
        if da.is_constant(0.0):
            return ZERO
        a = self.arg
        if self.op == "neg":
            return neg(da)
        if self.op == "sin":
            return mul(apply("cos", a), da)
        if self.op == "cos":
            return neg(mul(apply("sin", a), da))
        if self.op == "exp":
            return mul(self, da)
        if self.op == "log":
            return div(da, a)
        # sqrt
        return div(da, mul(Const(2.0), self))

    def to_sympy(self):
        import sympy

        inner = self.arg.to_sympy()
        if self.op == "neg":
            return -inner
        return getattr(sympy, self.op)(inner)

    def _build(self) -> Compiled:
        f = self.arg._fn
        op = self.op
        if op == "neg":
            return lambda t, x, y: -f(t, x, y)
        if op == "sin":
            return lambda t, x, y: math.sin(f(t, x, y))
        if op == "cos":
            return lambda t, x, y: math.cos(f(t, x, y))

        node = self
        if op == "exp":
            def _exp(t, x, y):
                try:
                    return math.exp(f(t, x, y))
                except OverflowError:
                    raise EvaluationDomainError("exp overflow", node.to_text()) from None
            return _exp
        if op == "log":
            def _log(t, x, y):
                v = f(t, x, y)
                if v <= 0.0:
                    raise EvaluationDomainError("log of non-positive value", node.to_text())
                return math.log(v)
            return _log

        def _sqrt(t, x, y):
            v = f(t, x, y)
            if v < 0.0:
                raise EvaluationDomainError("sqrt of negative value", node.to_text())
            return math.sqrt(v)
        return _sqrt

    def _text(self) -> Tuple[str, int]:
        if self.op == "neg":
            inner, prec = self.arg._text()
            # a bare non-negative literal after "-" would re-parse as a negative constant
            if prec < PREC_UNARY or (isinstance(self.arg, Const) and self.arg.value >= 0):
                inner = f"({inner})"
            return f"-{inner}", PREC_UNARY
        inner, _ = self.arg._text()
        return f"{self.op}({inner})", PREC_ATOM


@dataclass(frozen=True, repr=True)
class Binary(Expression):
    op: str
    left: Expression
    right: Expression

    def __post_init__(self) -> None:
        if self.op not in BINARY_SYMBOLS:
            raise ValueError(f"unknown binary operator {self.op!r}")

    def variables(self) -> FrozenSet["Var"]:
        return self.left.variables() | self.right.variables()

    def diff(self, var: "Var") -> Expression:
        a, b = self.left, self.right
        da, db = a.diff(var), b.diff(var)
        if da.is_constant(0.0) and db.is_constant(0.0):
            return ZERO
        if self.op == "add":
            return add(da, db)
        if self.op == "sub":
            return sub(da, db)
        if self.op == "mul":
            return add(mul(da, b), mul(a, db))
        if self.op == "div":
            return div(sub(mul(da, b), mul(a, db)), power(b, Const(2.0)))
        # pow
        if isinstance(b, Const):
            return mul(mul(b, power(a, Const(b.value - 1.0))), da)
        if isinstance(a, Const):
            return mul(mul(self, apply("log", a)), db)
        return mul(self, add(mul(db, apply("log", a)), div(mul(b, da), a)))

    def to_sympy(self):
        l, r = self.left.to_sympy(), self.right.to_sympy()
        if self.op == "add":
            return l + r
        if self.op == "sub":
            return l - r
        if self.op == "mul":
            return l * r
        if self.op == "div":
            return l / r
        return l ** r

    def _build(self) -> Compiled:
        fa, fb = self.left._fn, self.right._fn
        op = self.op
        if op == "add":
            return lambda t, x, y: fa(t, x, y) + fb(t, x, y)
        if op == "sub":
            return lambda t, x, y: fa(t, x, y) - fb(t, x, y)
        if op == "mul":
            return lambda t, x, y: fa(t, x, y) * fb(t, x, y)

        node = self
        if op == "div":
            def _div(t, x, y):
                den = fb(t, x, y)
                if den == 0.0:
                    raise EvaluationDomainError("division by zero", node.to_text())
                return fa(t, x, y) / den
            return _div

        def _pow(t, x, y):
            base, exponent = fa(t, x, y), fb(t, x, y)
            if base < 0.0 and not float(exponent).is_integer():
                raise EvaluationDomainError("negative base with non-integer exponent", node.to_text())
            if base == 0.0 and exponent < 0.0:
                raise EvaluationDomainError("zero raised to a negative power", node.to_text())
            try:
                return math.pow(base, exponent)
            except OverflowError:
                raise EvaluationDomainError("power overflow", node.to_text()) from None
        return _pow

    def _text(self) -> Tuple[str, int]:
        symbol = BINARY_SYMBOLS[self.op]
        if self.op in ("add", "sub"):
            prec, left_min, right_min = PREC_ADD, PREC_ADD, PREC_MUL
        elif self.op in ("mul", "div"):
            prec, left_min, right_min = PREC_MUL, PREC_MUL, PREC_UNARY
        else:
            prec, left_min, right_min = PREC_POW, PREC_ATOM, PREC_UNARY
        left = _wrap(self.left, left_min)
        right = _wrap(self.right, right_min)
        if self.op == "pow":
            return f"{left}^{right}", prec
        return f"{left} {symbol} {right}", prec


ZERO = Const(0.0)
ONE = Const(1.0)


# ============================================================================
# HELPERS
# ============================================================================
def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _wrap(node: Expression, min_prec: int) -> str:
    text, prec = node._text()
    return text if prec >= min_prec else f"({text})"


def as_expression(value: Union[Expression, Number]) -> Expression:
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to Expression")


def _fold(node: Expression) -> Expression:
    """Replace a closed node by its value unless that raises a domain error."""
    try:
        return Const(node.evaluate(ChartPoint(0.0, (), ())))
    except EvaluationDomainError:
        return node


# ---------- smart constructors (local rewrites) ----------
def add(a, b) -> Expression:
    a, b = as_expression(a), as_expression(b)
    if a.is_constant(0.0):
        return b
    if b.is_constant(0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(Binary("add", a, b))
    return Binary("add", a, b)


def sub(a, b) -> Expression:
    a, b = as_expression(a), as_expression(b)
    if b.is_constant(0.0):
        return a
    if a.is_constant(0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(Binary("sub", a, b))
    return Binary("sub", a, b)


def mul(a, b) -> Expression:
    a, b = as_expression(a), as_expression(b)
    if a.is_constant(0.0) or b.is_constant(0.0):
        return ZERO
    if a.is_constant(1.0):
        return b
    if b.is_constant(1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(Binary("mul", a, b))
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const):
        if a.value == -1.0:
            return neg(b)
        # c1 * (c2 * e) -> (c1 c2) * e
        if isinstance(b, Binary) and b.op == "mul" and isinstance(b.left, Const):
            folded = _fold(Binary("mul", a, b.left))
            if isinstance(folded, Const):
                return mul(folded, b.right)
    return Binary("mul", a, b)


def div(a, b) -> Expression:
    a, b = as_expression(a), as_expression(b)
    if b.is_constant(1.0):
        return a
    if a.is_constant(0.0) and not b.is_constant(0.0):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(Binary("div", a, b))
    return Binary("div", a, b)


def power(a, b) -> Expression:
    a, b = as_expression(a), as_expression(b)
    if b.is_constant(1.0):
        return a
    if b.is_constant(0.0) or a.is_constant(1.0):
        return ONE
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold(Binary("pow", a, b))
    return Binary("pow", a, b)


def neg(a) -> Expression:
    a = as_expression(a)
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def apply(function: str, a) -> Expression:
    a = as_expression(a)
    node = Unary(function, a)
    if isinstance(a, Const):
        return _fold(node)
    return node


_REBUILD = {"add": add, "sub": sub, "mul": mul, "div": div, "pow": power}


# ============================================================================
# MODULE API
# ============================================================================
def simplify(expression: Expression) -> Expression:
    """Bottom-up local rewrites: 0+e, 0*e, 1*e, e^1 and constant folding.

    Not canonical: sin(x1)^2 + cos(x1)^2 is left alone.
    """
    if isinstance(expression, Binary):
        return _REBUILD[expression.op](simplify(expression.left), simplify(expression.right))
    if isinstance(expression, Unary):
        inner = simplify(expression.arg)
        return neg(inner) if expression.op == "neg" else apply(expression.op, inner)
    return expression


def differentiate(expression: Expression, var: Var) -> Expression:
    """Exact partial derivative, simplified."""
    return simplify(expression.diff(var))


def evaluate(expression: Expression, point: ChartPoint) -> float:
    return expression.evaluate(point)


def to_text(expression: Expression) -> str:
    return expression.to_text()

