import logging
from typing import Callable, Iterable, Optional

import numpy as np

from config.settings import FINITE_DIFFERENCE_CONFIG
from src.errors import PreconditionError
from src.forms.theta import build_theta
from src.geometry.nullity import nullity_at
from src.geometry.submanifold import frame_at
from src.models.chart import BendingField, ImmersionChart
from src.models.extension import RulingResult
from src.models.frame import PointFrame
from src.models.jet import Point

logger = logging.getLogger(__name__)

Distribution = Callable[[Point], np.ndarray]

BOUNDS = {
    'local': lambda n, p, q: n - 2 * p,
    'condition_star': lambda n, p, q: n - 2 * p + 3,
    'first_normal': lambda n, p, q: n - 2 * q,
}


def relative_nullity(chart: ImmersionChart) -> Distribution:
    return lambda point: nullity_at(frame_at(chart, point)).delta


def bending_nullity(chart: ImmersionChart, tau: BendingField) -> Distribution:
    """Delta* = Delta intersected with the nullity of beta."""
    return lambda point: build_theta(chart, tau, point).delta_star


def constant_distribution(basis) -> Distribution:
    basis = np.asarray(basis, dtype=float)
    return lambda point: basis


def _projector(frame_metric: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Projector onto span(basis), orthogonal for the induced metric."""
    inner = basis.T @ frame_metric @ basis
    return basis @ np.linalg.solve(inner, basis.T @ frame_metric)


def _projector_at(chart: ImmersionChart, distribution: Distribution, coords: np.ndarray, r: int) -> np.ndarray:
    point = Point.of(coords)
    frame = frame_at(chart, point)
    basis = distribution(point)
    if basis.shape[1] != r:
        raise PreconditionError(f"Distribution dimension jumps from {r} to {basis.shape[1]} near {point}")
    return _projector(frame.metric, basis)


def _d_projector(chart: ImmersionChart, distribution: Distribution, point: Point, r: int,
                 step: float) -> np.ndarray:
    base = point.array
    n = len(base)
    derivative = np.zeros((n, n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        d1 = (_projector_at(chart, distribution, base + e, r)
              - _projector_at(chart, distribution, base - e, r)) / (2 * step)
        d2 = (_projector_at(chart, distribution, base + 2 * e, r)
              - _projector_at(chart, distribution, base - 2 * e, r)) / (4 * step)
        derivative[i] = (4.0 * d1 - d2) / 3.0
    return derivative


def _residuals_at(frame: PointFrame, basis: np.ndarray, d_projector: np.ndarray):
    P = _projector(frame.metric, basis)
    complement = np.eye(frame.n) - P
    geodesic, affine = 0.0, 0.0
    for x in basis.T:
        for y in basis.T:
            # D_X Y for the section P y with y constant
            covariant = np.einsum('i,iab,b->a', x, d_projector, y) + np.einsum('kij,i,j->k', frame.christoffel, x, y)
            geodesic = max(geodesic, float(np.linalg.norm(complement @ covariant)))
            affine = max(affine, float(np.linalg.norm(np.einsum('Aij,i,j->A', frame.alpha, x, y))))
    return geodesic, affine


def ruling_check(chart: ImmersionChart, distribution: Distribution, points: Iterable,
                 bound: str = 'local', step: Optional[float] = None) -> RulingResult:
    """Totally geodesic and affine-leaf residuals of a distribution, with its dimension against a bound."""
    step = FINITE_DIFFERENCE_CONFIG['frame_step'] if step is None else step
    if bound not in BOUNDS:
        raise ValueError(f"Unknown ruling bound {bound!r}, expected one of {sorted(BOUNDS)}")
    points = [at if isinstance(at, Point) else Point.of(at) for at in points]
    r = None
    geodesic, affine, first_normal_dim = 0.0, 0.0, 0
    for point in points:
        frame = frame_at(chart, point)
        basis = distribution(point)
        if r is None:
            r = basis.shape[1]
        elif basis.shape[1] != r:
            raise PreconditionError(f"Distribution dimension jumps from {r} to {basis.shape[1]} at {point}")
        first_normal_dim = max(first_normal_dim, nullity_at(frame).first_normal_dim)
        if r == 0:
            continue
        d_projector = _d_projector(chart, distribution, point, r, step)
        g, a = _residuals_at(frame, basis / np.linalg.norm(basis, axis=0), d_projector)
        geodesic, affine = max(geodesic, g), max(affine, a)
    r = 0 if r is None else r
    required = BOUNDS[bound](chart.n, chart.codimension, first_normal_dim)
    logger.info("ruling of dimension %d (bound %s: %d), residuals %.2e / %.2e",
                r, bound, required, geodesic, affine)
    return RulingResult(dimension=r, totally_geodesic=geodesic, affine_leaf=affine,
                        bound=required, bound_name=bound)
