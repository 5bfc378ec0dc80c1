import re
import math
from fractions import Fraction
from typing import List, Tuple

from src.errors import ExpressionSyntaxError, UnknownSymbolError, VariableRangeError
from src.models.expression import ExpressionAST, ExpressionNode, NodeKind, UNARY_KINDS

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_VARIABLE = re.compile(r"x([0-9]+)$")
_INTEGER = re.compile(r"[+-]?[0-9]+$")

OPERATORS = {
    '+': NodeKind.SUM,
    '-': NodeKind.DIFFERENCE,
    '*': NodeKind.PRODUCT,
    '/': NodeKind.QUOTIENT,
    'neg': NodeKind.NEGATION,
    'pow': NodeKind.POWER,
    'sin': NodeKind.SIN,
    'cos': NodeKind.COS,
    'exp': NodeKind.EXP,
    'log': NodeKind.LOG,
    'sqrt': NodeKind.SQRT,
}

Token = Tuple[str, int]


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            raise ExpressionSyntaxError("Unreadable input", pos)
        start = match.start(match.lastindex)
        tokens.append((match.group(match.lastindex), start))
        pos = match.end()
    return tokens


class _Parser:

    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.tokens = tokenize(text)
        self.cursor = 0

    def _peek(self) -> Token:
        if self.cursor >= len(self.tokens):
            raise ExpressionSyntaxError("Unexpected end of expression", len(self.text))
        return self.tokens[self.cursor]

    def _next(self) -> Token:
        token = self._peek()
        self.cursor += 1
        return token

    def parse(self) -> ExpressionNode:
        if not self.tokens:
            raise ExpressionSyntaxError("Empty expression", 0)
        node = self._expression()
        if self.cursor != len(self.tokens):
            raise ExpressionSyntaxError("Trailing input after expression", self.tokens[self.cursor][1])
        return node

    def _expression(self) -> ExpressionNode:
        token, pos = self._next()
        if token == '(':
            return self._application(pos)
        if token == ')':
            raise ExpressionSyntaxError("Unexpected ')'", pos)
        return self._atom(token, pos)

    def _atom(self, token: str, pos: int) -> ExpressionNode:
        var = _VARIABLE.match(token)
        if var:
            k = int(var.group(1))
            if not 1 <= k <= self.n:
                raise VariableRangeError(f"Variable {token} out of range for chart dimension {self.n}", pos)
            return ExpressionNode(NodeKind.VARIABLE, index=k - 1)
        try:
            value = float(token)
        except ValueError:
            raise UnknownSymbolError(f"Unknown symbol '{token}'", pos) from None
        if not math.isfinite(value):
            raise UnknownSymbolError(f"Non-finite literal '{token}'", pos)
        return ExpressionNode(NodeKind.CONSTANT, value=value)

    def _application(self, open_pos: int) -> ExpressionNode:
        op, op_pos = self._next()
        if op in ('(', ')'):
            raise ExpressionSyntaxError("Expected an operator after '('", op_pos)
        if op not in OPERATORS:
            raise UnknownSymbolError(f"Unknown operator '{op}'", op_pos)
        kind = OPERATORS[op]

        if kind == NodeKind.POWER:
            base = self._expression()
            p = self._integer_literal()
            q = self._integer_literal()
            self._close(open_pos)
            if q == 0:
                raise ExpressionSyntaxError("pow exponent denominator is zero", op_pos)
            return ExpressionNode(kind, (base,), exponent=Fraction(p, q))

        args = []
        while self.cursor < len(self.tokens) and self.tokens[self.cursor][0] != ')':
            args.append(self._expression())
        self._close(open_pos)

        if kind in UNARY_KINDS and len(args) != 1:
            raise ExpressionSyntaxError(f"'{op}' takes 1 argument, got {len(args)}", op_pos)
        if kind == NodeKind.QUOTIENT and len(args) != 2:
            raise ExpressionSyntaxError(f"'/' takes 2 arguments, got {len(args)}", op_pos)
        if not args:
            raise ExpressionSyntaxError(f"'{op}' needs at least one argument", op_pos)
        if kind == NodeKind.DIFFERENCE and len(args) == 1:
            return ExpressionNode(NodeKind.NEGATION, tuple(args))
        return ExpressionNode(kind, tuple(args))

    def _integer_literal(self) -> int:
        token, pos = self._next()
        if not _INTEGER.match(token):
            raise ExpressionSyntaxError(f"pow expects integer literals, got '{token}'", pos)
        return int(token)

    def _close(self, open_pos: int):
        token, pos = self._next() if self.cursor < len(self.tokens) else (None, len(self.text))
        if token != ')':
            raise ExpressionSyntaxError(f"Unbalanced '(' opened at {open_pos}", pos)


def parse_expression(text: str, n: int) -> ExpressionAST:
    if n < 1:
        raise ValueError(f"Chart dimension must be positive, got {n}")
    return ExpressionAST(_Parser(text, n).parse(), n)


def parse_components(texts, n: int) -> Tuple[ExpressionAST, ...]:
    return tuple(parse_expression(text, n) for text in texts)
