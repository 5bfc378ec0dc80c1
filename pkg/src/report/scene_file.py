"""Scene documents: JSON ingestion and validation with JSON-pointer error locations.

Structure, types and enumerations are checked against schemas/scene.schema.json.
What the schema cannot state is checked here: expression syntax, component
counts tied to n and ambient_dim, interval order and the caller's check list.
"""
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError

from config.settings import SCHEMA_CONFIG
from src.errors import ExpressionSyntaxError, SceneValidationError
from src.jets.parser import parse_expression
from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST
from src.models.extension import ExtensionSection
from src.models.scene import (ConeSpec, Expectation, GeodesicSpec, Outcome, RulingSpec, Scene,
                              SceneTag, StarSpec)
from src.report.checks import CHECKS

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1)
def scene_validator() -> Draft202012Validator:
    schema = json.loads(SCHEMA_CONFIG['scene'].read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema)


def _pointer(path) -> str:
    return "".join(f"/{part}" for part in path)


def _schema_error(error: ValidationError) -> SceneValidationError:
    """Locate a schema error at the field it concerns, not at its parent object."""
    pointer = _pointer(error.absolute_path)
    instance = error.instance
    if error.validator == 'required':
        missing = [key for key in error.validator_value if key not in instance]
        return SceneValidationError(f"{pointer}/{missing[0]}", "missing required field")
    if error.validator == 'dependentRequired':
        for key, needed in error.validator_value.items():
            missing = [other for other in needed if key in instance and other not in instance]
            if missing:
                return SceneValidationError(f"{pointer}/{missing[0]}", f"missing field required by {key!r}")
    if error.validator == 'additionalProperties':
        extra = sorted(set(instance) - set(error.schema.get('properties', {})))
        return SceneValidationError(f"{pointer}/{extra[0]}", f"unknown field, expected one of "
                                                             f"{sorted(error.schema.get('properties', {}))}")
    if error.validator == 'propertyNames':
        return SceneValidationError(f"{pointer}/{instance}", f"unknown name {instance!r}")
    if error.validator == 'type' and not pointer:
        return SceneValidationError('', "expected a JSON object")
    return SceneValidationError(pointer, error.message)


def validate_document(document: Any):
    errors = list(scene_validator().iter_errors(document))
    if errors:
        logger.debug("%d schema errors, reporting the first", len(errors))
        raise _schema_error(errors[0])


def _expressions(value: Sequence[str], pointer: str, length: int, n: int):
    if len(value) != length:
        raise SceneValidationError(pointer, f"expected {length} expressions, got {len(value)}")
    return tuple(_expression(text, f"{pointer}/{i}", n) for i, text in enumerate(value))


def _expression(text: str, pointer: str, n: int) -> ExpressionAST:
    try:
        return parse_expression(text, n)
    except ExpressionSyntaxError as e:
        raise SceneValidationError(pointer, str(e)) from e


def _numbers(value: Sequence[float], pointer: str, length: int) -> tuple:
    if len(value) != length:
        raise SceneValidationError(pointer, f"expected a list of {length} numbers")
    return tuple(float(v) for v in value)


def _chart(document: Dict, pointer: str = '') -> ImmersionChart:
    n = int(document['n'])
    ambient_dim = int(document['ambient_dim'])
    if ambient_dim <= n:
        raise SceneValidationError(f"{pointer}/ambient_dim", f"expected an integer >= {n + 1}, got {ambient_dim}")
    signature = int(document.get('ambient_signature', 0))
    if signature > ambient_dim:
        raise SceneValidationError(f"{pointer}/ambient_signature", f"exceeds ambient dimension {ambient_dim}")
    box = document['chart_box']
    if len(box) != n:
        raise SceneValidationError(f"{pointer}/chart_box", f"expected {n} intervals")
    intervals = []
    for i, (lo, hi) in enumerate(box):
        if not lo < hi:
            raise SceneValidationError(f"{pointer}/chart_box/{i}", f"empty interval [{lo}, {hi}]")
        intervals.append((float(lo), float(hi)))
    components = _expressions(document['f'], f"{pointer}/f", ambient_dim, n)
    return ImmersionChart(n=n, ambient_dim=ambient_dim, ambient_signature=signature,
                          components=components, chart_box=tuple(intervals))


def _section(value: Dict, n: int) -> ExtensionSection:
    phi = value.get('phi')
    return ExtensionSection(tangent=_expressions(value['Z'], '/lambda/Z', n, n),
                            coefficient=None if phi is None else _expression(phi, '/lambda/phi', n))


def _star(value: Dict, chart: ImmersionChart) -> StarSpec:
    N, n = chart.ambient_dim, chart.n
    if 'eta' in value:
        return StarSpec(eta=_expressions(value['eta'], '/star/eta', N, n),
                        xi=_expressions(value['xi'], '/star/xi', N, n))
    if 'reference' in value:
        return StarSpec(reference=_numbers(value['reference'], '/star/reference', N))
    return StarSpec()


def _geodesic(value: Dict, n: int) -> GeodesicSpec:
    return GeodesicSpec(x0=_numbers(value['x0'], '/geodesic/x0', n),
                        v=_numbers(value['v'], '/geodesic/v', n), t_max=float(value['t_max']))


def _cone(value: Dict) -> ConeSpec:
    chart = _chart(value, '/cone')
    tau = BendingField(_expressions(value['tau'], '/cone/tau', chart.ambient_dim, chart.n))
    return ConeSpec(sign=float(value['sign']), chart=chart, tau=tau)


def _expectation(value: Any) -> Expectation:
    if isinstance(value, str):
        return Expectation(outcome=Outcome(value))
    expected_value = value.get('value')
    residual_above = value.get('residual_above')
    return Expectation(
        outcome=Outcome(value['status']),
        value=None if expected_value is None else float(expected_value),
        tolerance=float(value.get('tolerance', 0.0)),
        residual_above=None if residual_above is None else float(residual_above),
    )


def _known(names: Sequence[str], pointers: Sequence[str], known_checks: Sequence[str]):
    for name, pointer in zip(names, pointers):
        if name not in known_checks:
            raise SceneValidationError(pointer, f"unknown check {name!r}")


def scene_from_document(document: Any, known_checks: Optional[Sequence[str]] = None) -> Scene:
    """Validate a scene document and parse its expressions."""
    validate_document(document)
    known_checks = list(CHECKS) if known_checks is None else known_checks
    chart = _chart(document)
    tau = BendingField(_expressions(document['tau'], '/tau', chart.ambient_dim, chart.n))

    checks = document.get('checks', list(known_checks))
    _known(checks, [f"/checks/{i}" for i in range(len(checks))], known_checks)
    expected_document = document.get('expected', {})
    _known(list(expected_document), [f"/expected/{name}" for name in expected_document], known_checks)
    expected = {name: _expectation(value) for name, value in expected_document.items()}

    ruling = document.get('ruling')
    scene = Scene(
        name=document['name'], chart=chart, tau=tau, document=document,
        section=_section(document['lambda'], chart.n) if 'lambda' in document else None,
        star=_star(document['star'], chart) if 'star' in document else None,
        ruling=RulingSpec(ruling['distribution'], ruling.get('bound', 'local')) if ruling else None,
        geodesic=_geodesic(document['geodesic'], chart.n) if 'geodesic' in document else None,
        cone=_cone(document['cone']) if 'cone' in document else None,
        sampling={key: int(v) for key, v in document.get('sampling', {}).items()},
        tolerances={key: float(v) for key, v in document.get('tolerances', {}).items()},
        checks=tuple(checks), expected=expected, tags=tuple(SceneTag(tag) for tag in document.get('tags', [])),
    )
    logger.debug("loaded %s", scene)
    return scene


def load_scene(path) -> Scene:
    """Read and validate a scene file; OSError propagates to the caller."""
    text = Path(path).read_text()
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneValidationError('', f"invalid JSON: {e.msg} at line {e.lineno}") from e
    return scene_from_document(document)
