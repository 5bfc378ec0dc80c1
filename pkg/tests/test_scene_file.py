import copy
import json

import pytest

from src.catalog.scenes import scene_condition_star, scene_cylinder_bending
from src.errors import SceneValidationError
from src.models.scene import Expectation, Outcome
from src.report.checks import CHECKS
from src.report.scene_file import load_scene, scene_from_document, scene_validator


@pytest.fixture
def document():
    return copy.deepcopy(scene_cylinder_bending().document)


def pointer_of(document):
    with pytest.raises(SceneValidationError) as info:
        scene_from_document(document)
    return info.value.pointer


class TestValidation:

    def test_valid(self, document):
        scene = scene_from_document(document)
        assert scene.name == "cylinder_5"
        assert scene.chart.n == 5
        assert scene.ruling.distribution == 'relative_nullity'
        assert scene.geodesic.t_max == 0.5

    def test_tau_length(self, document):
        document['tau'] = document['tau'][:-1]
        assert pointer_of(document) == '/tau'

    def test_missing_name(self, document):
        del document['name']
        assert pointer_of(document) == '/name'

    def test_empty_name(self, document):
        document['name'] = ""
        assert pointer_of(document) == '/name'

    def test_bad_expression(self, document):
        document['f'][0] = "(cos x1"
        with pytest.raises(SceneValidationError) as info:
            scene_from_document(document)
        assert info.value.pointer == '/f/0'
        assert "Unbalanced" in info.value.message

    def test_variable_out_of_range(self, document):
        document['tau'][2] = "x9"
        assert pointer_of(document) == '/tau/2'

    def test_unknown_check(self, document):
        document['checks'] = ['nonsense']
        assert pointer_of(document) == '/checks/0'

    def test_unknown_status(self, document):
        document['expected']['bending'] = {'status': 'maybe'}
        assert pointer_of(document) == '/expected/bending/status'

    def test_unknown_tolerance(self, document):
        document['tolerances'] = {'foo': 1.0}
        assert pointer_of(document) == '/tolerances/foo'

    def test_points_and_grid(self, document):
        document['sampling'] = {'points': 4, 'grid': 2}
        assert pointer_of(document) == '/sampling'

    def test_empty_interval(self, document):
        document['chart_box'][1] = [1.0, -1.0]
        assert pointer_of(document) == '/chart_box/1'

    def test_signature_too_large(self, document):
        document['ambient_signature'] = 9
        assert pointer_of(document) == '/ambient_signature'

    def test_ruling_bound(self, document):
        document['ruling']['bound'] = 'global'
        assert pointer_of(document) == '/ruling/bound'

    def test_geodesic_length(self, document):
        document['geodesic']['t_max'] = -1.0
        assert pointer_of(document) == '/geodesic/t_max'

    def test_unknown_tag(self, document):
        document['tags'] = ['trivial', 'weird']
        assert pointer_of(document) == '/tags/1'

    def test_not_an_object(self):
        assert pointer_of([1, 2]) == ''

    def test_message_format(self, document):
        del document['name']
        with pytest.raises(SceneValidationError, match="^/name: missing required field$"):
            scene_from_document(document)


    def test_type_error_location(self, document):
        document['sampling'] = {'points': "four"}
        with pytest.raises(SceneValidationError) as info:
            scene_from_document(document)
        assert info.value.pointer == '/sampling/points'
        assert "'four' is not of type 'integer'" in info.value.message

    def test_unknown_expectation_field(self, document):
        document['expected']['bending'] = {'status': 'pass', 'margin': 1.0}
        assert pointer_of(document) == '/expected/bending/margin'

    def test_unknown_expected_check(self, document):
        document['expected']['nonsense'] = 'pass'
        assert pointer_of(document) == '/expected/nonsense'

    def test_ambient_dimension_above_n(self, document):
        document['ambient_dim'] = 5
        assert pointer_of(document) == '/ambient_dim'

    def test_residual_floor(self, document):
        document['expected']['bending'] = {'status': 'fail', 'residual_above': 1e-3}
        expectation = scene_from_document(document).expected['bending']
        assert expectation.residual_above == 1e-3
        assert expectation.outcome == Outcome.FAIL

    def test_schema_lists_every_check(self):
        assert scene_validator().schema['$defs']['check']['enum'] == list(CHECKS)


class TestSections:

    def test_lambda_and_star(self):
        scene = scene_condition_star()
        assert scene.section.coefficient.to_sexpr() == "1.0"
        assert len(scene.section.tangent) == 5
        assert scene.star.declared
        assert len(scene.star.xi) == 7

    def test_star_needs_both_fields(self):
        document = copy.deepcopy(scene_condition_star().document)
        del document['star']['xi']
        assert pointer_of(document) == '/star/xi'

    def test_default_checks(self, document):
        del document['checks']
        del document['expected']
        scene = scene_from_document(document, known_checks=['frames', 'bending'])
        assert scene.checks == ('frames', 'bending')


class TestFiles:

    def test_load(self, tmp_path, document):
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(document))
        assert load_scene(path).name == "cylinder_5"

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{\"name\": ")
        with pytest.raises(SceneValidationError) as info:
            load_scene(path)
        assert info.value.pointer == ''
        assert "invalid JSON" in info.value.message

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_scene(tmp_path / "absent.json")


class TestExpectation:

    def test_status_only(self):
        assert Expectation(Outcome.PASS).matches(Outcome.PASS, 3.0)
        assert not Expectation(Outcome.PASS).matches(Outcome.FAIL, None)

    def test_value(self):
        expectation = Expectation(Outcome.PASS, value=4.0, tolerance=0.5)
        assert expectation.matches(Outcome.PASS, 4.4)
        assert not expectation.matches(Outcome.PASS, 3.0)
        assert not expectation.matches(Outcome.PASS, None)

    def test_residual_floor(self):
        expectation = Expectation(Outcome.FAIL, residual_above=1e-3)
        assert expectation.matches(Outcome.FAIL, None, 0.02)
        assert not expectation.matches(Outcome.FAIL, None, 1e-5)
        assert not expectation.matches(Outcome.FAIL, None)
