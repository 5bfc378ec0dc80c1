import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from config.settings import TOLERANCE_CONFIG
from src.bending.tensors import bending_jet_at
from src.errors import PreconditionError
from src.geometry.submanifold import frame_at
from src.jets.taylor import eval_vector_jet
from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST, add, constant, multiply
from src.models.jet import Point

logger = logging.getLogger(__name__)

_SKEW_TOL = 1e-12


def skewness(matrix: np.ndarray, epsilon: np.ndarray) -> float:
    """Norm of D^T E + E D, zero iff D is skew for the ambient product."""
    E = np.diag(epsilon)
    return float(np.linalg.norm(matrix.T @ E + E @ matrix))


def make_trivial_bending(matrix, offset, chart: ImmersionChart) -> BendingField:
    """The restriction tau = D f + w of an ambient Killing field."""
    D = np.asarray(matrix, dtype=float)
    w = np.asarray(offset, dtype=float)
    N = chart.ambient_dim
    if D.shape != (N, N) or w.shape != (N,):
        raise ValueError(f"Expected a {N}x{N} matrix and a vector of length {N}, got {D.shape} and {w.shape}")
    residual = skewness(D, chart.epsilon)
    if residual > _SKEW_TOL:
        raise PreconditionError(f"Matrix is not skew for the ambient product: |D^T E + E D| = {residual:.3e}")

    components = []
    for A in range(N):
        terms = [multiply(constant(D[A, B]), chart.components[B].root)
                 for B in range(N) if D[A, B] != 0.0]
        if w[A] != 0.0 or not terms:
            terms.append(constant(w[A]))
        root = terms[0] if len(terms) == 1 else add(*terms)
        components.append(ExpressionAST(root, chart.n))
    return BendingField(tuple(components))


def triviality_test_hypersurface(chart: ImmersionChart, tau: BendingField, points: Iterable,
                                 tol: Optional[float] = None) -> Tuple[bool, float]:
    """A bending of a hypersurface is trivial iff the normal component of B vanishes."""
    tol = TOLERANCE_CONFIG['triviality'] if tol is None else tol
    if chart.codimension != 1:
        raise PreconditionError(f"Triviality test needs a hypersurface, got codimension {chart.codimension}")
    worst = 0.0
    for point in points:
        jet = bending_jet_at(chart, tau, point)
        worst = max(worst, float(np.max(np.abs(jet.beta_coords))))
    logger.info("sup |B_N| = %.3e", worst)
    return worst <= tol, worst


def killing_residual(chart: ImmersionChart, field: Sequence[ExpressionAST], at) -> float:
    """max |<D_i Z, d_j> + <D_j Z, d_i>| for a tangent field Z given by its chart components."""
    if len(field) != chart.n:
        raise ValueError(f"Expected {chart.n} field components, got {len(field)}")
    point = at if isinstance(at, Point) else Point.of(at)
    frame = frame_at(chart, point)
    z = eval_vector_jet(field, point, order=1)
    covariant = z.first.T + np.einsum('kim,m->ik', frame.christoffel, z.value)
    lowered = covariant @ frame.metric
    return float(np.max(np.abs(lowered + lowered.T)))
