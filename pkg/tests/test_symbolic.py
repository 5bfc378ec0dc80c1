import numpy as np
import pytest

from src.jets.parser import parse_expression
from src.jets.symbolic import derivative, determinant, is_constant, negate, product, solve, total
from src.jets.taylor import eval_jet, eval_value
from src.models.expression import ExpressionAST, constant, variable

EXPRESSIONS = [
    "(* x1 x2 (sin x3))",
    "(/ (exp x1) (+ 2 (cos x2)))",
    "(pow (+ 2 x1 (* x2 x2)) 3 2)",
    "(log (+ 3 x3))",
    "(sqrt (+ 2 (* x1 x2)))",
    "(- (* x1 x1 x1) x2 (- x3))",
]
POINT = (0.3, -0.4, 0.7)


def value_at(node, at=POINT):
    return eval_value(ExpressionAST(node, len(at)), at)


class TestDerivative:

    @pytest.mark.parametrize("text", EXPRESSIONS)
    def test_matches_jets(self, text):
        expr = parse_expression(text, 3)
        jet = eval_jet(expr, POINT, order=2)
        for k in range(3):
            partial = eval_jet(ExpressionAST(derivative(expr.root, k), 3), POINT, order=1)
            assert partial.value == pytest.approx(jet.grad[k], abs=1e-12)
            np.testing.assert_allclose(partial.grad, jet.hess[k], atol=1e-11)

    def test_missing_variable_folds_to_zero(self):
        assert is_constant(derivative(parse_expression("(* x1 (sin x2))", 3).root, 2), 0.0)

    def test_linear_term_folds_to_constant(self):
        d = derivative(parse_expression("(+ x1 (* 3 x2) 5)", 2).root, 1)
        assert is_constant(d, 3.0)

    def test_power_drops_to_base(self):
        d = derivative(parse_expression("(pow x1 2 1)", 1).root, 0)
        assert d.to_sexpr() == "(* 2.0 x1)"


class TestBuilders:

    def test_total_folds(self):
        x = variable(0)
        assert total([constant(1.0), constant(-1.0)]).to_sexpr() == "0.0"
        assert total([x, constant(0.0)]) is x

    def test_product_folds(self):
        x = variable(0)
        assert is_constant(product([x, constant(0.0)]), 0.0)
        assert product([constant(1.0), x]) is x

    def test_double_negation(self):
        x = variable(0)
        assert negate(negate(x)) is x


class TestLinearAlgebra:

    def test_determinant(self):
        x1, x2, x3 = variable(0), variable(1), variable(2)
        det = determinant([[x1, x2], [x3, x1]])
        assert value_at(det) == pytest.approx(0.3 * 0.3 + 0.4 * 0.7)

    def test_determinant_skips_zeros(self):
        x1 = variable(0)
        zero = constant(0.0)
        det = determinant([[x1, zero, zero], [zero, constant(1.0), zero], [zero, zero, constant(2.0)]])
        assert det.to_sexpr() == "(* 2.0 x1)"

    def test_solve_matches_numpy(self):
        texts = [["(+ 2 x1)", "x2", "0"], ["x2", "(+ 3 (* x3 x3))", "x1"], ["0", "x1", "(exp x2)"]]
        matrix = [[parse_expression(text, 3).root for text in row] for row in texts]
        rhs = [parse_expression(text, 3).root for text in ("1", "(sin x1)", "x3")]
        solution = [value_at(node) for node in solve(matrix, rhs)]
        numeric = np.array([[value_at(entry) for entry in row] for row in matrix])
        expected = np.linalg.solve(numeric, [value_at(node) for node in rhs])
        np.testing.assert_allclose(solution, expected, atol=1e-12)

    def test_singular(self):
        zero = constant(0.0)
        with pytest.raises(ZeroDivisionError):
            solve([[zero, zero], [zero, zero]], [zero, zero])
