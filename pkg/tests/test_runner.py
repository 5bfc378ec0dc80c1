import copy
import json

import pytest

import src.report.checks as checks_module
from config.settings import TOLERANCE_CONFIG
from src.catalog.scenes import scene_cylinder_bending, scene_negative_control
from src.errors import DecompositionFailure
from src.models.report import CheckStatus
from src.models.scene import Outcome
from src.report.runner import run_verification, sample_points
from src.report.scene_file import scene_from_document


def cylinder_with(checks, expected, **changes):
    document = copy.deepcopy(scene_cylinder_bending().document)
    document.update(checks=checks, expected=expected, **changes)
    return scene_from_document(document)


class TestSampling:

    def test_center_first(self, cylinder):
        points = sample_points(cylinder.chart, 5, seed=0)
        assert len(points) == 6
        assert points[0].coords == tuple(cylinder.chart.center)
        assert all(cylinder.chart.contains(p.coords) for p in points)

    def test_deterministic(self, cylinder):
        assert sample_points(cylinder.chart, 5, seed=7) == sample_points(cylinder.chart, 5, seed=7)
        assert sample_points(cylinder.chart, 5, seed=7) != sample_points(cylinder.chart, 5, seed=8)

    def test_grid(self, sphere):
        points = sample_points(sphere.chart, 0, seed=0, include_center=False, grid=2)
        assert [p.coords for p in points] == [(-0.25, -0.25), (-0.25, 0.25), (0.25, -0.25), (0.25, 0.25)]


class TestRun:

    def test_matching_run(self):
        scene = cylinder_with(['frames', 'bending', 'identities'],
                              {'frames': 'pass', 'bending': 'pass', 'identities': 'pass'})
        report = run_verification(scene, samples=3)
        assert report.matched
        assert report.points == 4
        assert [c.name for c in report.checks] == ['frames', 'bending', 'identities']
        assert report.result('identities').observed.residual <= 1e-7

    def test_prerequisite_mismatch_skips_dependents(self):
        scene = cylinder_with(['frames', 'bending', 'identities'], {'bending': 'fail'})
        report = run_verification(scene, samples=2)
        assert report.result('bending').status == CheckStatus.FAIL
        assert report.result('bending').observed.outcome == Outcome.PASS
        assert report.result('identities').status == CheckStatus.SKIPPED
        assert not report.result('identities').executed
        assert not report.matched

    def test_no_expectation_reports_outcome(self):
        scene = cylinder_with(['frames', 'triviality'], {})
        report = run_verification(scene, samples=2)
        assert report.result('frames').status == CheckStatus.PASS
        assert report.result('triviality').status == CheckStatus.FAIL

    def test_checks_run_in_registry_order(self):
        scene = cylinder_with(['bending', 'frames'], {})
        report = run_verification(scene, samples=1)
        assert [c.name for c in report.checks] == ['frames', 'bending']

    def test_prerequisites_added(self):
        stretch = {'name': 'stretch', 'n': 2, 'ambient_dim': 3, 'chart_box': [[-1.0, 1.0], [-1.0, 1.0]],
                   'f': ['x1', 'x2', '0'], 'tau': ['x1', '0', '0'], 'checks': ['triviality'],
                   'expected': {'triviality': 'pass'}}
        report = run_verification(scene_from_document(stretch), samples=2, strict=True)
        assert [c.name for c in report.checks] == ['frames', 'bending', 'triviality']
        assert report.result('bending').status == CheckStatus.FAIL
        assert report.result('triviality').status == CheckStatus.SKIPPED
        assert report.mismatches == ["expected triviality was not executed"]
        assert not report.matched

    def test_flatness_alone_runs_frames(self):
        scene = cylinder_with(['frames', 'bending', 'flatness_theta'], {'flatness_theta': 'pass'})
        report = run_verification(scene, checks=['flatness_theta'], samples=1, strict=True)
        assert [c.name for c in report.checks] == ['frames', 'flatness_theta']
        assert report.result('flatness_theta').status == CheckStatus.PASS
        assert report.matched

    def test_unknown_check(self, cylinder):
        with pytest.raises(ValueError, match="Unknown checks"):
            run_verification(cylinder, checks=['frames', 'nonsense'])

    def test_check_override(self):
        scene = cylinder_with(['frames', 'bending', 'identities'], {'frames': 'pass'})
        report = run_verification(scene, checks=['frames'], samples=1, strict=True)
        assert [c.name for c in report.checks] == ['frames']
        assert report.matched

    def test_error_becomes_failure(self):
        geodesic = {'x0': [0.7, 0.0, 0.0, 0.0, 0.0], 'v': [0.0, 1.0, 0.0, 0.0, 0.0], 't_max': 5.0}
        scene = cylinder_with(['frames', 'bending', 'splitting'], {'splitting': 'fail'}, geodesic=geodesic)
        report = run_verification(scene, samples=1)
        splitting = report.result('splitting')
        assert splitting.observed.outcome == Outcome.FAIL
        assert splitting.observed.details['error'] == 'ChartExitError'
        assert splitting.status == CheckStatus.PASS

    def test_tolerance_override(self):
        scene = scene_negative_control(1e-2)
        strict = run_verification(scene, checks=['frames', 'flatness_theta'], samples=2)
        assert strict.result('flatness_theta').status == CheckStatus.PASS
        loose = run_verification(scene, checks=['frames', 'flatness_theta'], samples=2, tol_pointwise=1.0)
        assert loose.result('flatness_theta').observed.outcome == Outcome.PASS
        assert loose.result('flatness_theta').observed.tolerance == 1.0
        assert loose.result('flatness_theta').status == CheckStatus.FAIL


    def test_negative_control_residual_floor(self):
        report = run_verification(scene_negative_control(1e-2), samples=2)
        for name in ('bending', 'flatness_theta'):
            result = report.result(name)
            assert result.observed.outcome == Outcome.FAIL
            assert result.observed.residual > TOLERANCE_CONFIG['negative_control']
            assert result.status == CheckStatus.PASS

    def test_faint_corruption_misses_residual_floor(self):
        report = run_verification(scene_negative_control(1e-5), checks=['bending'], samples=2)
        bending = report.result('bending')
        assert bending.observed.outcome == Outcome.FAIL
        assert bending.status == CheckStatus.FAIL


class TestCodimensionTwo:

    @pytest.fixture(scope="class")
    def report(self, padded_cylinder):
        return run_verification(padded_cylinder, checks=['flatness_theta_hat', 'decomposition', 'normal_pair'],
                                samples=3)

    def test_theta_hat(self, report):
        result = report.result('flatness_theta_hat')
        assert result.status == CheckStatus.PASS
        assert result.observed.details['first_normal_dim'] == 1

    def test_decomposition_outside_hypotheses(self, report):
        result = report.result('decomposition')
        assert result.status == CheckStatus.PASS
        assert result.observed.outcome == Outcome.NOT_APPLICABLE

    def test_normal_pair(self, report):
        result = report.result('normal_pair')
        assert result.status == CheckStatus.PASS
        assert result.observed.residual <= 1e-7
        assert result.observed.details['branch'] in ('condition_star', 'codimension_reduction')

    def test_normal_pair_needs_codimension_two(self, cylinder):
        report = run_verification(cylinder, checks=['normal_pair'], samples=1)
        assert report.result('normal_pair').observed.outcome == Outcome.NOT_APPLICABLE

    def test_decomposition_failure_propagates(self, padded_cylinder, monkeypatch):
        def fail(*args, **kwargs):
            raise DecompositionFailure("no isotropic part")

        monkeypatch.setattr(checks_module, 'main_decomposition', fail)
        with pytest.raises(DecompositionFailure):
            run_verification(padded_cylinder, checks=['decomposition'], samples=1)


class TestStrict:

    def test_missing_expectation(self):
        scene = cylinder_with(['frames', 'bending'], {'frames': 'pass'})
        report = run_verification(scene, samples=1, strict=True)
        assert report.mismatches == ["bending has no expectation"]
        assert not report.matched

    def test_expected_check_not_executed(self):
        scene = cylinder_with(['frames', 'bending'], {'frames': 'fail', 'bending': 'pass'})
        report = run_verification(scene, samples=1, strict=True)
        assert "expected bending was not executed" in report.mismatches

    def test_lenient_by_default(self):
        scene = cylinder_with(['frames', 'bending'], {'frames': 'pass'})
        assert run_verification(scene, samples=1).matched


class TestReport:

    def test_deterministic(self):
        scene = cylinder_with(['frames', 'bending', 'flatness_theta'], {})
        first = run_verification(scene, samples=3, seed=4).to_dict()
        second = run_verification(scene, samples=3, seed=4).to_dict()
        first.pop('wall_time')
        second.pop('wall_time')
        assert first == second

    def test_workers_agree(self):
        scene = cylinder_with(['frames', 'bending', 'identities', 'flatness_theta'], {})
        serial = run_verification(scene, samples=4, workers=1)
        threaded = run_verification(scene, samples=4, workers=2)
        for a, b in zip(serial.checks, threaded.checks):
            assert a.status == b.status
            assert a.observed.residual == b.observed.residual

    def test_json(self):
        scene = cylinder_with(['frames', 'flatness_theta'], {'frames': 'pass'})
        data = json.loads(run_verification(scene, samples=1).to_json())
        assert data['schema_version'] == 1
        assert data['matched'] is True
        assert data['scene']['name'] == 'cylinder_5'
        theta = [c for c in data['checks'] if c['name'] == 'flatness_theta'][0]
        assert theta['details']['nu_star'] == [4]
        assert theta['expected'] is None

    def test_unknown_result(self):
        scene = cylinder_with(['frames'], {})
        with pytest.raises(KeyError):
            run_verification(scene, samples=0).result('bending')
