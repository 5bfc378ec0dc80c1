import json
from pathlib import Path

import pytest

from src.catalog.scenes import (CATALOG, catalog_scenes, export_catalog, scene_cone, scene_cylinder_bending,
                                scene_flat_plane, scene_killing_normal, scene_negative_control)
from src.errors import PreconditionError
from src.models.scene import Outcome, SceneTag
from src.report.checks import CHECKS
from src.report.runner import run_verification
from src.report.scene_file import load_scene

SCENE_DIR = Path(__file__).resolve().parent.parent / "scenes"


def test_every_scene_builds():
    scenes = catalog_scenes()
    assert len(scenes) == len(CATALOG)
    assert len({scene.name for scene in scenes}) == len(scenes)
    for scene in scenes:
        assert set(scene.expected) <= set(CHECKS)
        assert list(scene.checks) == list(scene.expected)


@pytest.mark.parametrize("key", sorted(CATALOG))
def test_catalog_scene_matches_expectations(key):
    report = run_verification(CATALOG[key](), samples=4, strict=True)
    mismatched = [(c.name, c.status.value) for c in report.checks] + report.mismatches
    assert report.matched, mismatched

IDENTITY_SCENES = sorted(key for key in CATALOG if 'identities' in CATALOG[key]().expected)


def test_identity_suite_covers_six_scenes():
    assert len(IDENTITY_SCENES) >= 6


@pytest.mark.parametrize("key", IDENTITY_SCENES)
def test_identities_on_fifty_points(key):
    report = run_verification(CATALOG[key](), checks=['identities'], samples=49, seed=11)
    identities = report.result('identities')
    assert report.points == 50
    assert identities.status.value == 'pass'
    assert identities.observed.residual <= 1e-7


@pytest.mark.parametrize("key", sorted(CATALOG))
def test_full_report_is_deterministic(key):
    first = json.loads(run_verification(CATALOG[key](), samples=2, seed=5, strict=True).to_json())
    second = json.loads(run_verification(CATALOG[key](), samples=2, seed=5, strict=True).to_json())
    first.pop('wall_time')
    second.pop('wall_time')
    assert first == second


def test_export_round_trip(tmp_path):
    written = export_catalog(tmp_path / "out")
    assert sorted(p.name for p in written) == sorted(f"{key}.json" for key in CATALOG)
    for path in written:
        scene = load_scene(path)
        assert scene.document == CATALOG[path.stem]().document


@pytest.mark.parametrize("key", sorted(CATALOG))
def test_shipped_scene_files_load(key):
    scene = load_scene(SCENE_DIR / f"{key}.json")
    assert scene.name == CATALOG[key]().name
    assert list(scene.checks) == list(scene.expected)


class TestBuilders:

    def test_flat_plane_codimension_one(self):
        scene = scene_flat_plane(n=3, p=1)
        assert scene.expected['triviality'].outcome == Outcome.PASS
        assert scene.expected['theta_rank'].value == 3.0

    def test_flat_plane_arguments(self):
        with pytest.raises(ValueError):
            scene_flat_plane(n=0)

    def test_cylinder_dimension(self):
        with pytest.raises(ValueError):
            scene_cylinder_bending(n=2)

    def test_padded_cylinder(self):
        scene = scene_cylinder_bending(n=4, padded=True)
        assert scene.chart.ambient_dim == 6
        assert scene.star.reference == (0.0,) * 5 + (1.0,)
        assert scene.expected['triviality'].outcome == Outcome.NOT_APPLICABLE

    def test_negative_control(self):
        scene = scene_negative_control(0.05)
        assert SceneTag.NEGATIVE_CONTROL in scene.tags
        assert scene.expected['bending'].outcome == Outcome.FAIL
        assert scene_negative_control(0.0).name == "cylinder_5"
        with pytest.raises(ValueError):
            scene_negative_control(-1.0)

    def test_cone_sign(self):
        with pytest.raises(ValueError):
            scene_cone(2.0)
        assert SceneTag.LORENTZIAN in scene_cone(-1.0).tags

    def test_killing_normal_rejects_non_killing_field(self):
        with pytest.raises(PreconditionError, match="Killing"):
            scene_killing_normal(z=["0", "x2", "0", "0", "0"], pushforward=["0"] * 7, delta=["0"] * 7)

    def test_killing_normal_rejects_tangent_delta(self):
        with pytest.raises(PreconditionError, match="normal field"):
            scene_killing_normal(z=["0", "1", "0", "0", "0"], pushforward=["0", "0", "1", "0", "0", "0", "0"],
                                 delta=["0", "0", "1", "0", "0", "0", "0"])

    def test_killing_normal_component_count(self):
        with pytest.raises(ValueError):
            scene_killing_normal(z=["0"] * 5, pushforward=["0"] * 6, delta=["0"] * 7)
