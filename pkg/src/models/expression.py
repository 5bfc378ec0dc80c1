from enum import Enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Optional


class NodeKind(Enum):
    VARIABLE = 'var'
    CONSTANT = 'const'
    SUM = '+'
    DIFFERENCE = '-'
    PRODUCT = '*'
    QUOTIENT = '/'
    NEGATION = 'neg'
    POWER = 'pow'
    SIN = 'sin'
    COS = 'cos'
    EXP = 'exp'
    LOG = 'log'
    SQRT = 'sqrt'


UNARY_KINDS = (NodeKind.NEGATION, NodeKind.SIN, NodeKind.COS,
               NodeKind.EXP, NodeKind.LOG, NodeKind.SQRT)


@dataclass(frozen=True)
class ExpressionNode:
    kind: NodeKind
    children: Tuple['ExpressionNode', ...] = ()
    index: int = -1
    value: float = 0.0
    exponent: Optional[Fraction] = None

    def max_variable(self) -> int:
        if self.kind == NodeKind.VARIABLE:
            return self.index
        return max((child.max_variable() for child in self.children), default=-1)

    def to_sexpr(self) -> str:
        if self.kind == NodeKind.VARIABLE:
            return f"x{self.index + 1}"
        if self.kind == NodeKind.CONSTANT:
            return repr(float(self.value))
        args = " ".join(child.to_sexpr() for child in self.children)
        if self.kind == NodeKind.POWER:
            return f"(pow {args} {self.exponent.numerator} {self.exponent.denominator})"
        return f"({self.kind.value} {args})"

    def __str__(self):
        return self.to_sexpr()


@dataclass(frozen=True)
class ExpressionAST:
    """Parsed coordinate function over a chart of dimension n."""
    root: ExpressionNode
    n: int

    def to_sexpr(self) -> str:
        return self.root.to_sexpr()

    def __str__(self):
        return self.to_sexpr()


def constant(value: float) -> ExpressionNode:
    return ExpressionNode(NodeKind.CONSTANT, value=float(value))


def variable(index: int) -> ExpressionNode:
    return ExpressionNode(NodeKind.VARIABLE, index=index)


def add(*terms: ExpressionNode) -> ExpressionNode:
    return ExpressionNode(NodeKind.SUM, tuple(terms))


def multiply(*factors: ExpressionNode) -> ExpressionNode:
    return ExpressionNode(NodeKind.PRODUCT, tuple(factors))
