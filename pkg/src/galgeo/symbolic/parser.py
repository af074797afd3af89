# src/galgeo/symbolic/parser.py
"""Recursive-descent parser for the chart-expression grammar.

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?          right-associative
    primary := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

A minus sign directly in front of a numeric literal that is not the base of
'^' produces a negative constant; "-2^2" stays -(2^2).
"""
import logging
import math
import re
from dataclasses import dataclass
from typing import List

from src.galgeo.base import ExpressionSyntaxError, IndexRangeError, UnknownIdentifierError
from src.galgeo.symbolic.expr import UNARY_FUNCTIONS, Binary, Const, Expression, Unary, Var

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r"|(?P<bad>\S))"
)
_VARIABLE_RE = re.compile(r"^(?:(t)|([xy])(\d+))$")
_BINARY_OPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    position: int


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(source):
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            # only trailing whitespace is left
            break
        kind = match.lastgroup
        if kind is None:
            break
        start = match.start(kind)
        text = match.group(kind)
        if kind == "bad":
            raise ExpressionSyntaxError(f"unexpected character {text!r}", start, source)
        tokens.append(Token(kind, text, start))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, n: int) -> None:
        self.source = source
        self.n = n
        self.tokens = tokenize(source)
        self.pos = 0

    # ---------- token helpers ----------
    def _peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return token

    def _is_op(self, token: Token, *symbols: str) -> bool:
        return token.kind == "op" and token.text in symbols

    def _expect(self, symbol: str) -> Token:
        token = self._peek()
        if not self._is_op(token, symbol):
            raise self._unexpected(token, f"expected {symbol!r}")
        return self._advance()

    def _unexpected(self, token: Token, hint: str = "") -> ExpressionSyntaxError:
        what = "end of input" if token.kind == "end" else f"token {token.text!r}"
        message = f"unexpected {what}" + (f", {hint}" if hint else "")
        return ExpressionSyntaxError(message, token.position, self.source)

    def _number(self, sign: float = 1.0) -> Const:
        token = self._advance()
        value = sign * float(token.text)
        if not math.isfinite(value):
            raise ExpressionSyntaxError(f"number {token.text!r} is out of range", token.position, self.source)
        return Const(value)

    # ---------- grammar ----------
    def parse(self) -> Expression:
        expression = self._expr()
        token = self._peek()
        if token.kind != "end":
            raise self._unexpected(token)
        return expression

    def _expr(self) -> Expression:
        left = self._term()
        while self._is_op(self._peek(), "+", "-"):
            op = _BINARY_OPS[self._advance().text]
            left = Binary(op, left, self._term())
        return left

    def _term(self) -> Expression:
        left = self._unary()
        while self._is_op(self._peek(), "*", "/"):
            op = _BINARY_OPS[self._advance().text]
            left = Binary(op, left, self._unary())
        return left

    def _unary(self) -> Expression:
        token = self._peek()
        if self._is_op(token, "+"):
            self._advance()
            return self._unary()
        if self._is_op(token, "-"):
            self._advance()
            if self._peek().kind == "number" and not self._is_op(self._peek(1), "^"):
                return self._number(-1.0)
            return Unary("neg", self._unary())
        return self._power()

    def _power(self) -> Expression:
        base = self._primary()
        if self._is_op(self._peek(), "^"):
            self._advance()
            return Binary("pow", base, self._unary())
        return base

    def _primary(self) -> Expression:
        token = self._peek()
        if token.kind == "number":
            return self._number()
        if token.kind == "ident":
            self._advance()
            if token.text in UNARY_FUNCTIONS:
                self._expect("(")
                inner = self._expr()
                self._expect(")")
                return Unary(token.text, inner)
            return self._variable(token)
        if self._is_op(token, "("):
            self._advance()
            inner = self._expr()
            self._expect(")")
            return inner
        raise self._unexpected(token)

    def _variable(self, token: Token) -> Var:
        match = _VARIABLE_RE.match(token.text)
        if match is None:
            raise UnknownIdentifierError(f"unknown identifier {token.text!r}", token.position, self.source)
        if match.group(1):
            return Var.time()
        kind, index = match.group(2), int(match.group(3))
        if not 1 <= index <= self.n:
            raise IndexRangeError(
                f"variable {token.text!r} index out of range for n={self.n}", token.position, self.source
            )
        return Var(kind, index)


def parse(source: str, n: int) -> Expression:
    """Parse `source` into an expression over t, x1..xn, y1..yn."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    return _Parser(source, n).parse()
