"""Symbolic partial derivatives of expression trees.

Builders fold constants and drop zero terms as they go, so derivatives of sparse
charts stay small enough to be differentiated again by the jet evaluator.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.models.expression import ExpressionNode, NodeKind, constant

logger = logging.getLogger(__name__)

ZERO = constant(0.0)
ONE = constant(1.0)


def is_constant(node: ExpressionNode, value: Optional[float] = None) -> bool:
    return node.kind == NodeKind.CONSTANT and (value is None or node.value == value)


def total(terms: Iterable[ExpressionNode]) -> ExpressionNode:
    folded = 0.0
    kept = []
    for term in terms:
        if term.kind == NodeKind.CONSTANT:
            folded += term.value
        else:
            kept.append(term)
    if folded != 0.0:
        kept.append(constant(folded))
    if not kept:
        return ZERO
    return kept[0] if len(kept) == 1 else ExpressionNode(NodeKind.SUM, tuple(kept))


def product(factors: Iterable[ExpressionNode]) -> ExpressionNode:
    folded = 1.0
    kept = []
    for factor in factors:
        if factor.kind == NodeKind.CONSTANT:
            folded *= factor.value
        else:
            kept.append(factor)
    if folded == 0.0:
        return ZERO
    if folded != 1.0:
        kept.insert(0, constant(folded))
    if not kept:
        return ONE
    return kept[0] if len(kept) == 1 else ExpressionNode(NodeKind.PRODUCT, tuple(kept))


def negate(node: ExpressionNode) -> ExpressionNode:
    if node.kind == NodeKind.CONSTANT:
        return constant(-node.value) if node.value else ZERO
    if node.kind == NodeKind.NEGATION:
        return node.children[0]
    return ExpressionNode(NodeKind.NEGATION, (node,))


def quotient(numerator: ExpressionNode, denominator: ExpressionNode) -> ExpressionNode:
    if is_constant(numerator, 0.0):
        return ZERO
    if is_constant(denominator, 1.0):
        return numerator
    if is_constant(numerator) and is_constant(denominator) and denominator.value != 0.0:
        return constant(numerator.value / denominator.value)
    return ExpressionNode(NodeKind.QUOTIENT, (numerator, denominator))


def power(base: ExpressionNode, exponent: Fraction) -> ExpressionNode:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    return ExpressionNode(NodeKind.POWER, (base,), exponent=Fraction(exponent))


def derivative(node: ExpressionNode, k: int) -> ExpressionNode:
    """d node / d x_{k+1}."""
    kind = node.kind
    if kind == NodeKind.CONSTANT:
        return ZERO
    if kind == NodeKind.VARIABLE:
        return ONE if node.index == k else ZERO
    children = node.children
    if kind == NodeKind.SUM:
        return total(derivative(child, k) for child in children)
    if kind == NodeKind.DIFFERENCE:
        return total([derivative(children[0], k)] + [negate(derivative(c, k)) for c in children[1:]])
    if kind == NodeKind.PRODUCT:
        terms = []
        for i, child in enumerate(children):
            d = derivative(child, k)
            if not is_constant(d, 0.0):
                terms.append(product(children[:i] + (d,) + children[i + 1:]))
        return total(terms)
    if kind == NodeKind.QUOTIENT:
        a, b = children
        da, db = derivative(a, k), derivative(b, k)
        return quotient(total([product([da, b]), negate(product([a, db]))]), product([b, b]))

    a = children[0]
    da = derivative(a, k)
    if is_constant(da, 0.0):
        return ZERO
    if kind == NodeKind.NEGATION:
        return negate(da)
    if kind == NodeKind.SIN:
        return product([ExpressionNode(NodeKind.COS, (a,)), da])
    if kind == NodeKind.COS:
        return negate(product([ExpressionNode(NodeKind.SIN, (a,)), da]))
    if kind == NodeKind.EXP:
        return product([node, da])
    if kind == NodeKind.LOG:
        return quotient(da, a)
    if kind == NodeKind.SQRT:
        return quotient(da, product([constant(2.0), node]))
    if kind == NodeKind.POWER:
        return product([constant(float(node.exponent)), power(a, node.exponent - 1), da])
    raise ValueError(f"Unsupported node kind {kind}")


def gradient(node: ExpressionNode, n: int) -> List[ExpressionNode]:
    return [derivative(node, k) for k in range(n)]


def determinant(matrix: Sequence[Sequence[ExpressionNode]]) -> ExpressionNode:
    """Cofactor expansion along rows, skipping zero entries and reusing shared minors."""
    size = len(matrix)
    minors: Dict[Tuple[int, Tuple[int, ...]], ExpressionNode] = {}

    def minor(row: int, columns: Tuple[int, ...]) -> ExpressionNode:
        if row == size:
            return ONE
        key = (row, columns)
        if key not in minors:
            terms = []
            for position, column in enumerate(columns):
                entry = matrix[row][column]
                if is_constant(entry, 0.0):
                    continue
                term = product([entry, minor(row + 1, columns[:position] + columns[position + 1:])])
                terms.append(negate(term) if position % 2 else term)
            minors[key] = total(terms)
        return minors[key]

    return minor(0, tuple(range(size)))


def solve(matrix: Sequence[Sequence[ExpressionNode]], rhs: Sequence[ExpressionNode]) -> List[ExpressionNode]:
    """Cramer's rule for matrix @ y = rhs."""
    size = len(matrix)
    volume = determinant(matrix)
    if is_constant(volume, 0.0):
        raise ZeroDivisionError("Singular symbolic matrix")
    solution = []
    for k in range(size):
        replaced = [[rhs[r] if c == k else matrix[r][c] for c in range(size)] for r in range(size)]
        solution.append(quotient(determinant(replaced), volume))
    logger.debug("solved a %dx%d symbolic system", size, size)
    return solution
