"""Forward propagation of truncated multivariate Taylor jets up to order 3.

Each node of an expression is evaluated to (value, grad, hess, third) and
combined with the sum, Leibniz and Faa di Bruno rules. Symmetric tensors are
mirrored from their sorted-index entries so symmetry holds bit for bit.
"""
import math
import logging
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from src.errors import DomainViolation
from src.models.chart import VectorJet
from src.models.expression import ExpressionAST, ExpressionNode, NodeKind
from src.models.jet import Jet3, Point

logger = logging.getLogger(__name__)

_Raw = Tuple[float, np.ndarray, np.ndarray, np.ndarray]


@lru_cache(maxsize=None)
def _canonical_index(n: int, order: int) -> np.ndarray:
    grids = np.indices((n,) * order).reshape(order, -1)
    canonical = np.sort(grids, axis=0)
    return np.ravel_multi_index(tuple(canonical), (n,) * order)


def _mirror(tensor: np.ndarray) -> np.ndarray:
    n, order = tensor.shape[0], tensor.ndim
    return tensor.reshape(-1)[_canonical_index(n, order)].reshape(tensor.shape)


def _compose(a: _Raw, d0: float, d1: float, d2: float, d3: float) -> _Raw:
    _, g, h, t = a
    grad = d1 * g
    hess = d1 * h + d2 * np.outer(g, g)
    third = (d1 * t
             + d2 * (np.einsum('ij,k->ijk', h, g) + np.einsum('ik,j->ijk', h, g) + np.einsum('jk,i->ijk', h, g))
             + d3 * np.einsum('i,j,k->ijk', g, g, g))
    return d0, grad, hess, third


def _product(a: _Raw, b: _Raw) -> _Raw:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    value = a0 * b0
    grad = a0 * b1 + b0 * a1
    hess = a0 * b2 + (np.outer(a1, b1) + np.outer(b1, a1)) + a2 * b0
    third = (a0 * b3
             + np.einsum('i,jk->ijk', a1, b2) + np.einsum('j,ik->ijk', a1, b2) + np.einsum('k,ij->ijk', a1, b2)
             + np.einsum('ij,k->ijk', a2, b1) + np.einsum('ik,j->ijk', a2, b1) + np.einsum('jk,i->ijk', a2, b1)
             + a3 * b0)
    return value, grad, hess, third


def _sum(a: _Raw, b: _Raw, sign: float = 1.0) -> _Raw:
    return a[0] + sign * b[0], a[1] + sign * b[1], a[2] + sign * b[2], a[3] + sign * b[3]


def _scale(a: _Raw, c: float) -> _Raw:
    return c * a[0], c * a[1], c * a[2], c * a[3]


class _Evaluator:

    def __init__(self, at: np.ndarray):
        self.at = at
        self.n = len(at)

    def _fail(self, reason: str, node: ExpressionNode):
        raise DomainViolation(reason, node.to_sexpr(), self.at)

    def evaluate(self, node: ExpressionNode) -> _Raw:
        n = self.n
        kind = node.kind

        if kind == NodeKind.CONSTANT:
            return node.value, np.zeros(n), np.zeros((n, n)), np.zeros((n, n, n))
        if kind == NodeKind.VARIABLE:
            if node.index >= n:
                self._fail(f"variable index {node.index} outside a {n}-dimensional point", node)
            jet = Jet3.variable(node.index, self.at)
            return jet.value, jet.grad, jet.hess, jet.third

        args = [self.evaluate(child) for child in node.children]

        if kind == NodeKind.SUM:
            result = args[0]
            for arg in args[1:]:
                result = _sum(result, arg)
            return result
        if kind == NodeKind.DIFFERENCE:
            result = args[0]
            for arg in args[1:]:
                result = _sum(result, arg, -1.0)
            return result
        if kind == NodeKind.NEGATION:
            return _scale(args[0], -1.0)
        if kind == NodeKind.PRODUCT:
            result = args[0]
            for arg in args[1:]:
                result = _product(result, arg)
            return result
        if kind == NodeKind.QUOTIENT:
            b = args[1][0]
            if abs(b) <= np.finfo(float).tiny:
                self._fail("division by zero", node)
            reciprocal = _compose(args[1], 1.0 / b, -1.0 / b ** 2, 2.0 / b ** 3, -6.0 / b ** 4)
            return _product(args[0], reciprocal)

        a = args[0]
        x = a[0]
        if kind == NodeKind.SIN:
            s, c = math.sin(x), math.cos(x)
            return _compose(a, s, c, -s, -c)
        if kind == NodeKind.COS:
            s, c = math.sin(x), math.cos(x)
            return _compose(a, c, -s, -c, s)
        if kind == NodeKind.EXP:
            try:
                e = math.exp(x)
            except OverflowError:
                self._fail("exp overflow", node)
            return _compose(a, e, e, e, e)
        if kind == NodeKind.LOG:
            if x <= 0.0:
                self._fail("log of a nonpositive value", node)
            return _compose(a, math.log(x), 1.0 / x, -1.0 / x ** 2, 2.0 / x ** 3)
        if kind in (NodeKind.SQRT, NodeKind.POWER):
            r = 0.5 if kind == NodeKind.SQRT else float(node.exponent)
            if x <= 0.0:
                self._fail("power of a nonpositive base", node)
            return _compose(a, x ** r, r * x ** (r - 1), r * (r - 1) * x ** (r - 2),
                            r * (r - 1) * (r - 2) * x ** (r - 3))
        raise ValueError(f"Unsupported node kind {kind}")


def _as_array(at) -> np.ndarray:
    if isinstance(at, Point):
        return at.array
    return np.asarray(at, dtype=float)


def eval_jet(expr: ExpressionAST, at, order: int = 3) -> Jet3:
    if order not in (0, 1, 2, 3):
        raise ValueError(f"Jet order must be 0..3, got {order}")
    point = _as_array(at)
    if len(point) != expr.n:
        raise ValueError(f"Expected a point of dimension {expr.n}, got {len(point)}")
    value, grad, hess, third = _Evaluator(point).evaluate(expr.root)
    jet = Jet3(float(value), np.array(grad, dtype=float), _mirror(np.array(hess, dtype=float)),
               _mirror(np.array(third, dtype=float)))
    return jet.truncated(order)


def eval_vector_jet(components: Sequence[ExpressionAST], at, order: int = 3) -> VectorJet:
    jets = [eval_jet(component, at, order) for component in components]
    return VectorJet(
        np.array([j.value for j in jets]),
        np.array([j.grad for j in jets]),
        np.array([j.hess for j in jets]),
        np.array([j.third for j in jets]),
    )


def eval_value(expr: ExpressionAST, at) -> float:
    return eval_jet(expr, at, order=0).value
