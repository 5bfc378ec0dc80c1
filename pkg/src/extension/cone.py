import logging
from typing import Iterable, Optional, Tuple

import numpy as np

from config.settings import TOLERANCE_CONFIG
from src.bending.tensors import bending_residual
from src.errors import PreconditionError
from src.geometry.submanifold import frame_at
from src.jets.taylor import eval_vector_jet
from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST, multiply, variable
from src.models.extension import ConeLift
from src.models.jet import Point

logger = logging.getLogger(__name__)

CONE_S_RANGE = (0.5, 2.5)


def _scaled(components, n: int) -> Tuple[ExpressionAST, ...]:
    """s * c for each component, as expressions over the (n + 1)-chart with s last."""
    return tuple(ExpressionAST(multiply(variable(n), c.root), n + 1) for c in components)


def cone_chart(chart: ImmersionChart, s_range: Tuple[float, float] = CONE_S_RANGE) -> ImmersionChart:
    if s_range[0] <= 0.0 or s_range[1] <= s_range[0]:
        raise ValueError(f"Expected 0 < s_min < s_max, got {s_range}")
    return ImmersionChart(
        n=chart.n + 1,
        ambient_dim=chart.ambient_dim,
        ambient_signature=chart.ambient_signature,
        components=_scaled(chart.components, chart.n),
        chart_box=tuple(chart.chart_box) + (tuple(s_range),),
    )


def _normalization(chart: ImmersionChart, points, sign: float) -> float:
    E = chart.epsilon
    worst = 0.0
    for point in points:
        g = eval_vector_jet(chart.components, point, order=0).value
        worst = max(worst, abs(float(np.dot(g * E, g)) - sign))
    return worst


def cone_lift(chart: ImmersionChart, tau: BendingField, sign: float = 1.0, points: Optional[Iterable] = None,
              s_values: Iterable[float] = (1.0, 1.5, 2.0), tol: Optional[float] = None,
              s_range: Tuple[float, float] = CONE_S_RANGE) -> ConeLift:
    """Lift g into the sphere (sign 1) or hyperboloid (sign -1) to the cone s * g, with tau_hat = s * tau."""
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    if sign not in (1.0, -1.0):
        raise ValueError(f"Expected sign 1 or -1, got {sign}")
    if sign < 0 and chart.ambient_signature < 1:
        raise PreconditionError("A hyperbolic base needs an ambient signature of at least 1")
    if tau.ambient_dim != chart.ambient_dim:
        raise ValueError(f"Expected {chart.ambient_dim} bending components, got {tau.ambient_dim}")
    points = [Point.of(chart.center)] if points is None else \
        [at if isinstance(at, Point) else Point.of(at) for at in points]
    normalization = _normalization(chart, points, sign)
    if normalization > tol:
        raise PreconditionError(f"Base is not normalized to <g, g> = {sign:+.0f}: off by {normalization:.3e}")

    lifted_chart = cone_chart(chart, s_range)
    lifted_tau = BendingField(_scaled(tau.components, chart.n))
    E = chart.epsilon
    orthogonality, bending = 0.0, 0.0
    tangent_index, normal_signs = 0, ()
    for point in points:
        for s in s_values:
            at = Point.of(point.coords + (float(s),))
            position = eval_vector_jet(lifted_chart.components, at, order=0).value
            d_tau_s = eval_vector_jet(lifted_tau.components, at, order=1).first[:, -1]
            orthogonality = max(orthogonality, abs(float(np.dot(position * E, d_tau_s))))
            frame = frame_at(lifted_chart, at)
            bending = max(bending, bending_residual(lifted_chart, lifted_tau, at, frame))
            tangent_index = max(tangent_index, int(np.sum(np.linalg.eigvalsh(frame.metric) < 0)))
            normal_signs = tuple(float(v) for v in frame.normal_signs)
    logger.info("cone lift: bending %.2e, position orthogonality %.2e, tangent index %d",
                bending, orthogonality, tangent_index)
    return ConeLift(chart=lifted_chart, tau=lifted_tau, sign=sign, normalization=normalization,
                    position_orthogonality=orthogonality, bending=bending,
                    tangent_index=tangent_index, normal_signs=normal_signs)


def cone_signature_ok(lift: ConeLift) -> bool:
    """Positive definite cone over a spherical base; Lorentzian cone with positive normal over a hyperbolic one."""
    if lift.sign > 0:
        return lift.tangent_index == 0
    return lift.tangent_index == 1 and lift.normal_positive
