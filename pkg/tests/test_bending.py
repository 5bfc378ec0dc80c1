import math

import numpy as np
import pytest

from src.bending.tensors import (above_identity_check, b_variation_residual, bending_jet_at, bending_residual,
                                 first_order_isometry_check, identity_residuals, is_bending)
from src.bending.triviality import killing_residual, make_trivial_bending, skewness, triviality_test_hypersurface
from src.catalog.scenes import CYLINDER_OFFSET, CYLINDER_ROTATION, scene_trivial
from src.errors import PreconditionError
from src.forms.theta import vanish_identity_check
from src.jets.parser import parse_components
from src.report.runner import sample_points
from tests.conftest import make_field

POINTS = [(0.5, 0.2, -0.3, 0.1, 0.4), (1.1, -0.7, 0.6, -0.2, 0.0), (0.2, 0.9, 0.1, 0.5, -0.8)]


class TestBendingCondition:

    @pytest.mark.parametrize("point", POINTS)
    def test_cylinder_is_bending(self, cylinder, point):
        assert bending_residual(cylinder.chart, cylinder.tau, point) < 1e-12

    def test_first_order_isometry(self, cylinder):
        for t in (0.5, -1.0, 2.0):
            assert first_order_isometry_check(cylinder.chart, cylinder.tau, POINTS[0], t) < 1e-10

    def test_negative_control_breaks_bending(self, corrupted):
        worst = max(bending_residual(corrupted.chart, corrupted.tau, point) for point in POINTS)
        assert worst >= 1e-2
        assert not is_bending(corrupted.chart, corrupted.tau, POINTS)

    def test_wrong_component_count(self, cylinder):
        with pytest.raises(ValueError):
            bending_residual(cylinder.chart, make_field(["0"] * 5, 5), POINTS[0])


class TestAssociatedTensors:

    def test_closed_form_B(self, cylinder):
        x1 = POINTS[0][0]
        jet = bending_jet_at(cylinder.chart, cylinder.tau, POINTS[0])
        assert abs(jet.beta_coords[0, 0, 0]) == pytest.approx(3 * abs(math.cos(2 * x1)), abs=1e-10)
        assert jet.Y[0, 0, 0] == pytest.approx(-1.5 * math.sin(2 * x1), abs=1e-10)
        assert np.max(np.abs(jet.B[:, 1:, :])) < 1e-12

    def test_reassembled(self, cylinder):
        jet = bending_jet_at(cylinder.chart, cylinder.tau, POINTS[1])
        np.testing.assert_allclose(jet.reassembled(), jet.B, atol=1e-12)

    @pytest.mark.parametrize("point", POINTS)
    def test_identities(self, cylinder, point):
        residuals = identity_residuals(cylinder.chart, cylinder.tau, point)
        assert set(residuals) == {'parte', 'derGauss', 'casicodazzi', 'segderL'}
        assert max(residuals.values()) <= 1e-7

    def test_identities_on_sphere_rotation(self, sphere):
        tau = make_trivial_bending([[0, -1, 0], [1, 0, 0], [0, 0, 0]], [0, 0, 0], sphere.chart)
        assert max(identity_residuals(sphere.chart, tau, (0.2, -0.1)).values()) <= 1e-7

    def test_b_variation(self, cylinder):
        assert b_variation_residual(cylinder.chart, cylinder.tau, POINTS[2]) <= 1e-5

    def test_above_and_vanish(self, cylinder):
        assert above_identity_check(cylinder.chart, cylinder.tau, POINTS[0]) < 1e-10
        assert vanish_identity_check(cylinder.chart, cylinder.tau, POINTS[0]) < 1e-10


class TestTriviality:

    def test_non_skew_matrix(self, cylinder):
        D = np.zeros((6, 6))
        D[0, 1] = 1.0
        with pytest.raises(PreconditionError):
            make_trivial_bending(D, np.zeros(6), cylinder.chart)

    def test_shape_mismatch(self, cylinder):
        with pytest.raises(ValueError):
            make_trivial_bending(np.zeros((3, 3)), np.zeros(3), cylinder.chart)

    def test_skewness_with_signature(self):
        boost = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert skewness(boost, np.array([1.0, -1.0])) == 0.0
        assert skewness(boost, np.array([1.0, 1.0])) > 0.0

    def test_trivial_bending_expressions(self, cylinder):
        tau = make_trivial_bending(CYLINDER_ROTATION, CYLINDER_OFFSET, cylinder.chart)
        assert tau.components[0].to_sexpr() == "(+ (* -1.0 (sin x1)) (* -1.0 x2))"
        assert tau.components[3].to_sexpr() == "1.0"
        assert tau.components[4].to_sexpr() == "0.0"

    def test_rotation_is_trivial(self, cylinder):
        scene = scene_trivial(CYLINDER_ROTATION, CYLINDER_OFFSET)
        points = sample_points(scene.chart, 6, seed=1)
        trivial, worst = triviality_test_hypersurface(scene.chart, scene.tau, points)
        assert trivial
        assert worst < 1e-10

    def test_cylinder_bending_is_not_trivial(self, cylinder):
        trivial, worst = triviality_test_hypersurface(cylinder.chart, cylinder.tau, POINTS)
        assert not trivial
        assert worst > 1.0

    def test_needs_hypersurface(self, padded_cylinder):
        with pytest.raises(PreconditionError):
            triviality_test_hypersurface(padded_cylinder.chart, padded_cylinder.tau, POINTS)

    def test_killing_residual(self, cylinder):
        translation = parse_components(["0", "1", "0", "0", "0"], 5)
        dilation = parse_components(["0", "x2", "0", "0", "0"], 5)
        assert killing_residual(cylinder.chart, translation, POINTS[0]) < 1e-12
        assert killing_residual(cylinder.chart, dilation, POINTS[0]) == pytest.approx(2.0)

    def test_killing_field_length(self, cylinder):
        with pytest.raises(ValueError):
            killing_residual(cylinder.chart, parse_components(["0"], 5), POINTS[0])
