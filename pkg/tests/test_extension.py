import numpy as np
import pytest

from src.bending.tensors import bending_jet_at, bending_residual
from src.catalog.scenes import CYLINDER_OFFSET, CYLINDER_ROTATION, scene_trivial
from src.errors import ChartExitError, PreconditionError
from src.extension.condition_star import declared_star, solve_condition_star, solve_condition_star_at, star_is_valid
from src.extension.cone import cone_chart, cone_lift, cone_signature_ok
from src.extension.lbar import build_varphi, extend_L_bar, impext_identity_check
from src.extension.rulings import (bending_nullity, constant_distribution, relative_nullity,
                                   ruling_check)
from src.extension.singular import build_singular_extension
from src.extension.splitting import splitting_tensor_check
from src.geometry.submanifold import frame_at
from src.jets.parser import parse_components
from src.jets.taylor import eval_vector_jet
from src.models.extension import ExtensionSection
from src.report.runner import sample_points
from tests.conftest import make_chart, make_field

POINTS = [(0.5, 0.2, -0.3, 0.1, 0.4), (1.1, -0.7, 0.6, -0.2, 0.0)]


@pytest.fixture(scope="module")
def declared(star_scene):
    return declared_star(star_scene.chart, star_scene.tau, star_scene.star.eta, star_scene.star.xi, POINTS)


class TestConditionStar:

    def test_solver_follows_reference(self, padded_cylinder):
        reference = np.zeros(7)
        reference[-1] = 1.0
        star = solve_condition_star_at(padded_cylinder.chart, padded_cylinder.tau, POINTS[0], reference)
        assert star is not None
        np.testing.assert_allclose(star.eta, reference, atol=1e-10)
        np.testing.assert_allclose(star.xi, 0.0, atol=1e-10)
        assert star.residual <= 1e-10
        assert star_is_valid(star, padded_cylinder.chart.epsilon)

    def test_solution_over_samples(self, padded_cylinder):
        reference = np.zeros(7)
        reference[-1] = 1.0
        solution = solve_condition_star(padded_cylinder.chart, padded_cylinder.tau, POINTS, reference)
        assert len(solution.points) == 2
        assert solution.max_residual <= 1e-10
        np.testing.assert_allclose(solution.points[0].d_eta, 0.0, atol=1e-6)

    def test_no_solution(self):
        chart = make_chart(["x1", "x2", "0", "0"], [[-1, 1], [-1, 1]])
        tau = make_field(["0", "0", "(* x1 x1)", "(* x2 x2)"], 2)
        assert solve_condition_star_at(chart, tau, (0.3, -0.2)) is None
        assert solve_condition_star(chart, tau, [(0.3, -0.2)]) is None

    def test_declared(self, star_scene, declared):
        assert declared.max_residual <= 1e-10
        for star in declared.points:
            assert star_is_valid(star, star_scene.chart.epsilon)
            assert star.d_eta.shape == (5, 7)

    def test_lookup_by_point(self, declared):
        with pytest.raises(KeyError):
            declared.at((0.0,) * 5)


class TestLBar:

    def test_skew_identity(self, star_scene, declared):
        for star in declared.points:
            jet = bending_jet_at(star_scene.chart, star_scene.tau, star.point)
            lbar = extend_L_bar(jet, star, star_scene.section)
            assert lbar.skew_residual <= 1e-10

    def test_varphi(self, star_scene, declared):
        star = declared.points[0]
        jet = bending_jet_at(star_scene.chart, star_scene.tau, star.point)
        varphi = build_varphi(jet, extend_L_bar(jet, star))
        assert varphi.kernel.shape[1] == 5
        assert varphi.flatness <= 1e-8

    def test_impext(self, star_scene, declared):
        star = declared.points[1]
        jet = bending_jet_at(star_scene.chart, star_scene.tau, star.point)
        assert impext_identity_check(jet, extend_L_bar(jet, star, star_scene.section)) <= 1e-10

    def test_impext_needs_section(self, star_scene, declared):
        star = declared.points[0]
        jet = bending_jet_at(star_scene.chart, star_scene.tau, star.point)
        with pytest.raises(PreconditionError):
            impext_identity_check(jet, extend_L_bar(jet, star))

    def test_needs_derivatives(self, padded_cylinder):
        reference = np.zeros(7)
        reference[-1] = 1.0
        solution = solve_condition_star(padded_cylinder.chart, padded_cylinder.tau, POINTS[:1], reference,
                                        derivatives=False)
        jet = bending_jet_at(padded_cylinder.chart, padded_cylinder.tau, POINTS[0])
        with pytest.raises(PreconditionError, match="derivatives"):
            extend_L_bar(jet, solution.points[0])


class TestSingularExtension:

    def test_condition_star_section(self, star_scene, declared):
        extension = build_singular_extension(star_scene.chart, star_scene.tau, star_scene.section, POINTS,
                                             star=declared)
        assert len(extension.samples) == 2 * 5
        assert not extension.excluded
        for block in ('tt', 'tx', 'xx'):
            assert extension.worst(block) <= 1e-7

    def test_tangent_section_of_trivial_bending(self):
        scene = scene_trivial(CYLINDER_ROTATION, CYLINDER_OFFSET, section=["1", "0", "0", "0", "0"])
        extension = build_singular_extension(scene.chart, scene.tau, scene.section, POINTS, t_values=(-0.1, 0.2))
        assert not extension.excluded
        for block in ('tt', 'tx', 'xx'):
            assert extension.worst(block) <= 1e-12

    def test_extended_chart_matches_samples(self, star_scene, declared):
        extension = build_singular_extension(star_scene.chart, star_scene.tau, star_scene.section, POINTS,
                                             star=declared, eta=star_scene.star.eta, xi=star_scene.star.xi)
        chart = extension.extended_chart()
        field = extension.extended_field()
        assert chart.n == 6
        assert chart.chart_box[-1] == extension.t_interval
        eta = np.zeros(7)
        eta[-1] = 1.0
        for sample in extension.samples:
            assert sample.immersive
            at = sample.point.coords + (sample.t,)
            frame = frame_at(chart, at)
            base = eval_vector_jet(star_scene.chart.components, sample.point, order=0).value
            np.testing.assert_allclose(frame.f_jets.value, base + sample.t * eta, atol=1e-12)
            np.testing.assert_allclose(frame.tangent[:, -1], eta, atol=1e-12)
            residual = bending_residual(chart, field, at, frame)
            sampled = max(sample.identities[block] for block in ('tt', 'tx', 'xx'))
            assert residual == pytest.approx(sampled, abs=1e-9)
            assert sample.identities['symbolic'] == pytest.approx(residual, abs=1e-12)

    def test_tangent_section_has_trees(self):
        scene = scene_trivial(CYLINDER_ROTATION, CYLINDER_OFFSET, section=["1", "0", "0", "0", "0"])
        extension = build_singular_extension(scene.chart, scene.tau, scene.section, POINTS, t_values=(-0.1, 0.2))
        assert extension.F is not None
        assert extension.worst('symbolic') <= 1e-10
        at = POINTS[0] + (0.2,)
        assert bending_residual(extension.extended_chart(), extension.extended_field(), at) <= 1e-10

    def test_solved_star_has_no_trees(self, star_scene, declared):
        extension = build_singular_extension(star_scene.chart, star_scene.tau, star_scene.section, POINTS,
                                             star=declared)
        assert extension.F is None
        assert extension.worst('symbolic') == 0.0
        with pytest.raises(ValueError):
            extension.extended_chart()

    def test_degenerate_interval(self, star_scene, declared):
        with pytest.raises(PreconditionError, match="Degenerate"):
            build_singular_extension(star_scene.chart, star_scene.tau, star_scene.section, POINTS,
                                     star=declared, t_values=(0.1, 0.1))

    def test_phi_needs_star(self, star_scene):
        with pytest.raises(PreconditionError):
            build_singular_extension(star_scene.chart, star_scene.tau, star_scene.section, POINTS)

    def test_section_model(self):
        section = ExtensionSection(tangent=parse_components(["0", "1"], 2))
        assert section.coefficient is None


class TestRulings:

    def test_cylinder_relative_nullity(self, cylinder):
        result = ruling_check(cylinder.chart, relative_nullity(cylinder.chart), POINTS)
        assert result.dimension == 4
        assert result.bound == 3
        assert result.meets_bound
        assert result.totally_geodesic <= 1e-6
        assert result.affine_leaf <= 1e-6

    def test_condition_star_bound(self, cylinder):
        result = ruling_check(cylinder.chart, bending_nullity(cylinder.chart, cylinder.tau), POINTS,
                              bound='condition_star')
        assert result.dimension == 4
        assert result.bound == 6
        assert not result.meets_bound

    def test_unknown_bound(self, cylinder):
        with pytest.raises(ValueError, match="Unknown ruling bound"):
            ruling_check(cylinder.chart, relative_nullity(cylinder.chart), POINTS, bound='global')

    def test_sphere(self, sphere):
        points = sample_points(sphere.chart, 4, seed=0)
        assert ruling_check(sphere.chart, relative_nullity(sphere.chart), points).dimension == 0
        curved = ruling_check(sphere.chart, constant_distribution([[1.0], [0.0]]), [(0.0, 0.3)])
        assert curved.dimension == 1
        assert curved.affine_leaf > 0.1


class TestSplitting:

    def test_cylinder(self, cylinder):
        chart = cylinder.chart
        v = np.zeros(5)
        v[1] = 1.0
        data = splitting_tensor_check(chart, cylinder.tau, chart.center, v, t_max=0.5, step=1e-2, sample_every=10)
        assert len(data.times) == len(data.splitting) == 4
        assert max(np.max(np.abs(C)) for C in data.splitting) <= 1e-8
        assert data.riccati_residual <= 1e-6
        assert data.drift <= 1e-8

    def test_cone(self, spherical_cone):
        data = splitting_tensor_check(spherical_cone.chart, spherical_cone.tau, (0.0, 0.0, 1.0), (0.0, 0.0, 1.0),
                                      t_max=1.0, step=1e-2, sample_every=25)
        for t, position, C in zip(data.times, data.positions, data.splitting):
            assert position[2] == pytest.approx(1.0 + t, abs=1e-8)
            np.testing.assert_allclose(C, -np.eye(2) / (1.0 + t), atol=1e-6)
        assert data.riccati_residual <= 1e-4
        assert data.jacobi_residual <= 1e-6

    def test_velocity_outside_nullity(self, cylinder):
        with pytest.raises(PreconditionError):
            splitting_tensor_check(cylinder.chart, cylinder.tau, cylinder.chart.center, np.eye(5)[0], t_max=0.5)

    def test_positive_t_max(self, cylinder):
        with pytest.raises(ValueError):
            splitting_tensor_check(cylinder.chart, cylinder.tau, cylinder.chart.center, np.eye(5)[1], t_max=0.0)

    def test_leaves_chart(self, cylinder):
        with pytest.raises(ChartExitError):
            splitting_tensor_check(cylinder.chart, cylinder.tau, cylinder.chart.center, np.eye(5)[1],
                                   t_max=5.0, step=1e-2)


class TestCone:

    def test_spherical_lift(self, spherical_cone):
        base = spherical_cone.cone
        lift = cone_lift(base.chart, base.tau, 1.0)
        assert lift.normalization <= 1e-12
        assert lift.bending <= 1e-10
        assert lift.position_orthogonality <= 1e-10
        assert cone_signature_ok(lift)
        assert lift.chart.n == 3

    def test_hyperbolic_lift(self, hyperbolic_cone):
        base = hyperbolic_cone.cone
        lift = cone_lift(base.chart, base.tau, -1.0)
        assert lift.tangent_index == 1
        assert lift.normal_positive
        assert cone_signature_ok(lift)

    def test_hyperbolic_needs_signature(self, spherical_cone):
        base = spherical_cone.cone
        with pytest.raises(PreconditionError):
            cone_lift(base.chart, base.tau, -1.0)

    def test_base_not_normalized(self, sphere):
        chart = make_chart(["(* 2 (cos x1) (cos x2))", "(* 2 (sin x1) (cos x2))", "(* 2 (sin x2))"],
                           sphere.chart.chart_box)
        with pytest.raises(PreconditionError, match="normalized"):
            cone_lift(chart, sphere.tau, 1.0)

    def test_invalid_sign(self, spherical_cone):
        base = spherical_cone.cone
        with pytest.raises(ValueError):
            cone_lift(base.chart, base.tau, 2.0)

    def test_cone_chart_range(self, sphere):
        with pytest.raises(ValueError):
            cone_chart(sphere.chart, (0.0, 1.0))
