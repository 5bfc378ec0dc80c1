"""Associated tensors of an infinitesimal bending and the identities they satisfy.

For a variation tau of f the tensors are L X = D_X tau and B(X, Y) = (D_X L) Y,
with B = f_* Y + beta split by the frame projectors. Every residual is a plain
max over coordinate index choices of the absolute difference of both sides.
"""
import logging
from typing import Dict, Optional

import numpy as np

from config.settings import FINITE_DIFFERENCE_CONFIG, TOLERANCE_CONFIG
from src.geometry.submanifold import frame_at, second_fundamental_form
from src.jets.taylor import eval_vector_jet
from src.models.bending import BendingJet
from src.models.chart import BendingField, ImmersionChart
from src.models.frame import PointFrame
from src.models.jet import Point

logger = logging.getLogger(__name__)


def _max_abs(array: np.ndarray) -> float:
    return float(np.max(np.abs(array))) if array.size else 0.0


def _check_field(chart: ImmersionChart, tau: BendingField):
    if tau.ambient_dim != chart.ambient_dim:
        raise ValueError(f"Expected {chart.ambient_dim} bending components, got {tau.ambient_dim}")


def skew_matrix(frame: PointFrame, L: np.ndarray) -> np.ndarray:
    """M[i, j] = <L d_i, f_* d_j>; tau is a bending at the point iff M is skew."""
    return np.einsum('Ai,A,Aj->ij', L, frame.epsilon, frame.tangent)


def bending_residual(chart: ImmersionChart, tau: BendingField, at,
                     frame: Optional[PointFrame] = None) -> float:
    _check_field(chart, tau)
    point = at if isinstance(at, Point) else Point.of(at)
    frame = frame if frame is not None else frame_at(chart, point)
    L = eval_vector_jet(tau.components, point, order=1).first
    M = skew_matrix(frame, L)
    return _max_abs(M + M.T)


def bending_jet_from_frame(frame: PointFrame, tau: BendingField) -> BendingJet:
    tau_jets = eval_vector_jet(tau.components, frame.point)
    E = frame.epsilon
    gamma = frame.christoffel
    L = tau_jets.first
    B = tau_jets.second - np.einsum('ljk,Al->Ajk', gamma, L)
    Y = np.einsum('lm,Am,A,Ajk->ljk', frame.metric_inv, frame.tangent, E, B)
    beta = frame.normal_projector @ B.reshape(B.shape[0], -1)
    beta = beta.reshape(B.shape)
    B_derivative = (tau_jets.third
                    - np.einsum('iljk,Al->Aijk', frame.d_christoffel, L)
                    - np.einsum('ljk,Ail->Aijk', gamma, tau_jets.second))
    return BendingJet(frame=frame, tau_jets=tau_jets, L=L, B=B, Y=Y, beta=beta,
                      B_derivative=B_derivative)


def bending_jet_at(chart: ImmersionChart, tau: BendingField, at,
                   frame: Optional[PointFrame] = None) -> BendingJet:
    _check_field(chart, tau)
    point = at if isinstance(at, Point) else Point.of(at)
    frame = frame if frame is not None else frame_at(chart, point)
    return bending_jet_from_frame(frame, tau)


def covariant_derivative_B(jet: BendingJet) -> np.ndarray:
    """(D_i B)(j, k) with the induced connection on the arguments."""
    gamma = jet.frame.christoffel
    return (jet.B_derivative
            - np.einsum('lij,Alk->Aijk', gamma, jet.B)
            - np.einsum('lik,Ajl->Aijk', gamma, jet.B))


def normal_derivative_beta(jet: BendingJet) -> np.ndarray:
    """(nabla^perp_i beta)(j, k)."""
    frame = jet.frame
    P, dP, gamma = frame.normal_projector, frame.d_normal_projector, frame.christoffel
    d_beta = (np.einsum('iAB,Bjk->Aijk', dP, jet.B)
              + np.einsum('AB,Bijk->Aijk', P, jet.B_derivative))
    return (np.einsum('AB,Bijk->Aijk', P, d_beta)
            - np.einsum('lij,Alk->Aijk', gamma, jet.beta)
            - np.einsum('lik,Ajl->Aijk', gamma, jet.beta))


def curvature_image(jet: BendingJet) -> np.ndarray:
    """L R(d_i, d_j) d_k as ambient vectors, shape (N, n, n, n)."""
    return np.einsum('ijkl,Al->Aijk', jet.frame.riemann_up, jet.L)


def parte_residual(jet: BendingJet) -> float:
    frame = jet.frame
    lhs = np.einsum('Aij,A,Ak->ijk', jet.B, frame.epsilon, frame.tangent)
    rhs = np.einsum('Aij,A,Ak->ijk', frame.alpha, frame.epsilon, jet.L)
    return _max_abs(lhs + rhs)


def der_gauss_residual(jet: BendingJet) -> float:
    E = jet.frame.epsilon
    alpha, beta = jet.frame.alpha, jet.beta
    ba = np.einsum('Aab,A,Acd->abcd', beta, E, alpha)
    # <beta_iw, alpha_jk> + <alpha_iw, beta_jk> - <beta_ik, alpha_jw> - <alpha_ik, beta_jw>
    residual = (np.einsum('iwjk->ijkw', ba) + np.einsum('jkiw->ijkw', ba)
                - np.einsum('ikjw->ijkw', ba) - np.einsum('jwik->ijkw', ba))
    return _max_abs(residual)


def segder_residual(jet: BendingJet) -> float:
    nabla_B = covariant_derivative_B(jet)
    residual = nabla_B - nabla_B.transpose(0, 2, 1, 3) + curvature_image(jet)
    return _max_abs(residual)


def casicodazzi_residual(jet: BendingJet) -> float:
    frame = jet.frame
    nabla_beta = normal_derivative_beta(jet)
    # alpha_Y[:, i, j, k] = alpha(d_i, Y(d_j, d_k))
    alpha_Y = np.einsum('Ail,ljk->Aijk', frame.alpha, jet.Y)
    curvature_normal = np.einsum('AB,Bijk->Aijk', frame.normal_projector, curvature_image(jet))
    lhs = nabla_beta - nabla_beta.transpose(0, 2, 1, 3)
    rhs = alpha_Y.transpose(0, 2, 1, 3) - alpha_Y - curvature_normal
    return _max_abs(lhs - rhs)


def identity_residuals(chart: ImmersionChart, tau: BendingField, at,
                       jet: Optional[BendingJet] = None) -> Dict[str, float]:
    jet = jet if jet is not None else bending_jet_at(chart, tau, at)
    residuals = {
        'parte': parte_residual(jet),
        'derGauss': der_gauss_residual(jet),
        'casicodazzi': casicodazzi_residual(jet),
        'segderL': segder_residual(jet),
    }
    logger.debug("identities at %s: %s", jet.frame.point, residuals)
    return residuals


def first_order_isometry_check(chart: ImmersionChart, tau: BendingField, at, t: float) -> float:
    _check_field(chart, tau)
    point = at if isinstance(at, Point) else Point.of(at)
    E = chart.epsilon
    J = eval_vector_jet(chart.components, point, order=1).first
    L = eval_vector_jet(tau.components, point, order=1).first
    moved = J + t * L
    deformed = np.einsum('Ai,A,Ai->i', moved, E, moved)
    original = np.einsum('Ai,A,Ai->i', J, E, J)
    variation = np.einsum('Ai,A,Ai->i', L, E, L)
    return _max_abs(deformed - original - t * t * variation)


def b_variation_residual(chart: ImmersionChart, tau: BendingField, at,
                         step: Optional[float] = None,
                         jet: Optional[BendingJet] = None) -> float:
    """Compare B with the t-derivative of the second fundamental form of f + t tau."""
    step = FINITE_DIFFERENCE_CONFIG['variation_step'] if step is None else step
    point = at if isinstance(at, Point) else Point.of(at)
    jet = jet if jet is not None else bending_jet_at(chart, tau, point)
    f_jets = jet.frame.f_jets
    E = jet.frame.epsilon

    def alpha(t: float) -> np.ndarray:
        return second_fundamental_form(f_jets + jet.tau_jets.scaled(t), E)

    d1 = (alpha(step) - alpha(-step)) / (2.0 * step)
    d2 = (alpha(2.0 * step) - alpha(-2.0 * step)) / (4.0 * step)
    derivative = (4.0 * d1 - d2) / 3.0
    return _max_abs(derivative - jet.B)


def _field_pairs(n: int, extra: int, seed: int):
    rng = np.random.default_rng(seed)
    eye = np.eye(n)
    pairs = [(eye[i], eye[j]) for i in range(n) for j in range(n)]
    for _ in range(extra):
        pairs.append((rng.standard_normal(n), rng.standard_normal(n)))
    return pairs


def above_identity_value(jet: BendingJet, x: np.ndarray, y: np.ndarray) -> float:
    """<f_*X + D_X Y, LX + D_X LY> - <alpha(X, Y), beta(X, Y)> for constant-coefficient X, Y."""
    frame = jet.frame
    E = frame.epsilon
    position = frame.tangent @ x + np.einsum('Aij,i,j->A', frame.f_jets.second, x, y)
    variation = jet.L @ x + np.einsum('Aij,i,j->A', jet.tau_jets.second, x, y)
    alpha_xy = np.einsum('Aij,i,j->A', frame.alpha, x, y)
    beta_xy = np.einsum('Aij,i,j->A', jet.beta, x, y)
    return float(np.dot(position * E, variation) - np.dot(alpha_xy * E, beta_xy))


def above_identity_check(chart: ImmersionChart, tau: BendingField, at, extra: int = 8,
                         seed: int = 0, jet: Optional[BendingJet] = None) -> float:
    jet = jet if jet is not None else bending_jet_at(chart, tau, at)
    values = [abs(above_identity_value(jet, x, y)) for x, y in _field_pairs(jet.n, extra, seed)]
    return max(values, default=0.0)


def vanish_value(jet: BendingJet, x: np.ndarray, z: np.ndarray) -> float:
    """<f_*X + D_X Z, LX + D_X LZ> for constant-coefficient fields."""
    frame = jet.frame
    position = frame.tangent @ x + np.einsum('Aij,i,j->A', frame.f_jets.second, x, z)
    variation = jet.L @ x + np.einsum('Aij,i,j->A', jet.tau_jets.second, x, z)
    return float(np.dot(position * frame.epsilon, variation))


def is_bending(chart: ImmersionChart, tau: BendingField, points, tol: Optional[float] = None) -> bool:
    tol = TOLERANCE_CONFIG['bending'] if tol is None else tol
    return all(bending_residual(chart, tau, point) <= tol for point in points)
