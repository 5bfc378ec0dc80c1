import numpy as np
import pytest

from src.catalog.scenes import (scene_condition_star, scene_cone, scene_cylinder_bending, scene_flat_plane,
                                scene_negative_control, scene_sphere_patch)
from src.jets.parser import parse_components
from src.models.chart import BendingField, ImmersionChart


def make_chart(f, box, signature=0):
    n = len(box)
    return ImmersionChart(n=n, ambient_dim=len(f), ambient_signature=signature,
                          components=parse_components(f, n), chart_box=tuple(tuple(b) for b in box))


def make_field(components, n):
    return BendingField(parse_components(components, n))


@pytest.fixture(scope="session")
def cylinder():
    return scene_cylinder_bending()


@pytest.fixture(scope="session")
def padded_cylinder():
    return scene_cylinder_bending(padded=True)


@pytest.fixture(scope="session")
def star_scene():
    return scene_condition_star()


@pytest.fixture(scope="session")
def flat_plane():
    return scene_flat_plane()


@pytest.fixture(scope="session")
def sphere():
    return scene_sphere_patch()


@pytest.fixture(scope="session")
def spherical_cone():
    return scene_cone(1.0)


@pytest.fixture(scope="session")
def hyperbolic_cone():
    return scene_cone(-1.0)


@pytest.fixture(scope="session")
def corrupted():
    return scene_negative_control(1e-2)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def cylinder_point():
    return (0.5, 0.2, -0.3, 0.1, 0.4)
