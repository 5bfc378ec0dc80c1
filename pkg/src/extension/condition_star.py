"""Condition (*): a unit normal eta and a normal xi orthogonal to it with B_eta + A_xi = 0."""
import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np

from config.settings import FINITE_DIFFERENCE_CONFIG, TOLERANCE_CONFIG
from src.bending.tensors import bending_jet_at
from src.errors import PreconditionError
from src.forms.indefinite import best_candidate, isotropic_candidates
from src.geometry.nullity import kernel
from src.jets.taylor import eval_vector_jet
from src.models.bending import BendingJet
from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST
from src.models.extension import ConditionStarSolution, StarPoint
from src.models.jet import Point

logger = logging.getLogger(__name__)


def star_residual(jet: BendingJet, eta: np.ndarray, xi: np.ndarray) -> float:
    """max |<beta(d_i, d_j), eta> + <alpha(d_i, d_j), xi>|."""
    E = jet.frame.epsilon
    lhs = np.einsum('Aij,A,A->ij', jet.beta, E, eta) + np.einsum('Aij,A,A->ij', jet.frame.alpha, E, xi)
    return float(np.max(np.abs(lhs)))


def _reference_candidate(solutions: np.ndarray, quadratic: np.ndarray, reference_coords: np.ndarray,
                         p: int, tol: float) -> Optional[np.ndarray]:
    """Kernel coefficients whose mu part is the reference, completed by the least-norm zeta.

    When that completion is not isotropic, a direction with mu = 0 absorbs the defect.
    """
    measure = solutions[:p]
    c0 = np.linalg.lstsq(measure, reference_coords, rcond=None)[0]
    if np.linalg.norm(measure @ c0) <= tol:
        return None
    defect = float(c0 @ quadratic @ c0)
    if abs(defect) <= tol:
        return c0
    free = kernel(measure, solutions.shape[1], scale=1.0)
    if free.shape[1] == 0:
        return None
    slopes = free.T @ quadratic @ c0
    k = int(np.argmax(np.abs(slopes)))
    if abs(slopes[k]) <= tol:
        return None
    return c0 - defect / (2.0 * slopes[k]) * free[:, k]


def _solve_at(jet: BendingJet, reference: Optional[np.ndarray], rank_tol: Optional[float]):
    frame = jet.frame
    p, n = frame.p, frame.n
    signs = frame.normal_signs
    beta = signs[:, None, None] * jet.beta_coords
    alpha = frame.h
    # columns act on (mu, zeta) in normal-frame coordinates
    system = np.concatenate([beta.reshape(p, n * n), alpha.reshape(p, n * n)]).T
    solutions = kernel(system, 2 * p, rank_tol, scale=1.0)
    if solutions.shape[1] == 0:
        return None, 0
    pairing = np.zeros((2 * p, 2 * p))
    pairing[:p, p:] = 0.5 * np.diag(signs)
    pairing[p:, :p] = 0.5 * np.diag(signs)
    quadratic = solutions.T @ pairing @ solutions
    measure = solutions[:p]
    candidates = isotropic_candidates(quadratic, measure, rank_tol)
    count = len([c for c in candidates if c.weight > 1e-8])
    coefficients = None
    if reference is not None:
        reference_coords = frame.normal_coords(reference)
        coefficients = _reference_candidate(solutions, quadratic, reference_coords, p, 1e-10)
        if coefficients is None:
            chosen = best_candidate(candidates, measure, reference_coords)
            coefficients = None if chosen is None else chosen.vector
    else:
        chosen = best_candidate(candidates, measure)
        coefficients = None if chosen is None else chosen.vector
    if coefficients is None:
        return None, count
    coords = solutions @ coefficients
    mu, zeta = coords[:p], coords[p:]
    length = np.sqrt(abs(np.dot(signs * mu, mu))) or np.linalg.norm(mu)
    eta = frame.normal @ (mu / length)
    xi = frame.normal @ (zeta / length)
    if reference is not None and frame.inner(eta, reference) < 0:
        eta, xi = -eta, -xi
    return (eta, xi), count


def solve_condition_star_at(chart: ImmersionChart, tau: BendingField, at,
                            reference: Optional[np.ndarray] = None,
                            rank_tol: Optional[float] = None) -> Optional[StarPoint]:
    point = at if isinstance(at, Point) else Point.of(at)
    jet = bending_jet_at(chart, tau, point)
    solved, count = _solve_at(jet, reference, rank_tol)
    if solved is None:
        return None
    if reference is None:
        # re-solve against the chosen eta so neighbouring points complete xi the same way
        solved, count = _solve_at(jet, solved[0], rank_tol)
    eta, xi = solved
    return StarPoint(point=point, eta=eta, xi=xi, residual=star_residual(jet, eta, xi), candidates=count)


def _differentiate(chart: ImmersionChart, tau: BendingField, star: StarPoint, step: float,
                   rank_tol: Optional[float]):
    """Richardson-extrapolated central differences of the pointwise solution."""
    base = star.point.array
    n = len(base)
    d_eta = np.zeros((n, chart.ambient_dim))
    d_xi = np.zeros((n, chart.ambient_dim))

    def solve(offset: np.ndarray):
        moved = solve_condition_star_at(chart, tau, base + offset, star.eta, rank_tol)
        if moved is None:
            raise PreconditionError(f"Condition (*) has no solution near {star.point}")
        return moved.eta, moved.xi

    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        eta_p, xi_p = solve(e)
        eta_m, xi_m = solve(-e)
        eta_pp, xi_pp = solve(2.0 * e)
        eta_mm, xi_mm = solve(-2.0 * e)
        d_eta[i] = (4.0 * (eta_p - eta_m) / (2 * step) - (eta_pp - eta_mm) / (4 * step)) / 3.0
        d_xi[i] = (4.0 * (xi_p - xi_m) / (2 * step) - (xi_pp - xi_mm) / (4 * step)) / 3.0
    return d_eta, d_xi


def solve_condition_star(chart: ImmersionChart, tau: BendingField, points: Iterable,
                         reference: Optional[np.ndarray] = None, derivatives: bool = True,
                         rank_tol: Optional[float] = None) -> Optional[ConditionStarSolution]:
    """Pointwise solutions over the samples; None when some sample admits no eta."""
    step = FINITE_DIFFERENCE_CONFIG['jet_oracle_step']
    solved: List[StarPoint] = []
    for at in points:
        star = solve_condition_star_at(chart, tau, at, reference, rank_tol)
        if star is None:
            logger.info("condition (*) has no solution at %s", at)
            return None
        if derivatives:
            star.d_eta, star.d_xi = _differentiate(chart, tau, star, step, rank_tol)
        solved.append(star)
    return ConditionStarSolution(solved)


def declared_star(chart: ImmersionChart, tau: BendingField, eta: Sequence[ExpressionAST],
                  xi: Sequence[ExpressionAST], points: Iterable) -> ConditionStarSolution:
    """Condition (*) data given as chart expressions, derivatives from their jets."""
    solved = []
    for at in points:
        point = at if isinstance(at, Point) else Point.of(at)
        eta_jet = eval_vector_jet(eta, point, order=1)
        xi_jet = eval_vector_jet(xi, point, order=1)
        jet = bending_jet_at(chart, tau, point)
        solved.append(StarPoint(point=point, eta=eta_jet.value, xi=xi_jet.value,
                                residual=star_residual(jet, eta_jet.value, xi_jet.value),
                                d_eta=eta_jet.first.T, d_xi=xi_jet.first.T))
    return ConditionStarSolution(solved)


def star_is_valid(star: StarPoint, epsilon: np.ndarray, tol: Optional[float] = None) -> bool:
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    unit = abs(abs(float(np.dot(star.eta * epsilon, star.eta))) - 1.0)
    orthogonal = abs(float(np.dot(star.xi * epsilon, star.eta)))
    return star.residual <= tol and unit <= 1e-12 and orthogonal <= TOLERANCE_CONFIG['exact']
