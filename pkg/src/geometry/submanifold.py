import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import TOLERANCE_CONFIG
from src.errors import MetricSignatureError, RankDeficiencyError, TangentialComponentError
from src.jets.taylor import eval_vector_jet
from src.models.chart import ImmersionChart, VectorJet
from src.models.frame import PointFrame
from src.models.jet import Point

logger = logging.getLogger(__name__)

_ACCEPT_NORMAL = 1e-6


def _check_rank(jacobian: np.ndarray, point: Point, rank_tol: float):
    sigma = np.linalg.svd(jacobian, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0 or sigma[-1] <= rank_tol * sigma[0]:
        largest = sigma[0] if sigma.size else 0.0
        raise RankDeficiencyError(sigma[-1] if sigma.size else 0.0, largest, point.coords)


def _normal_frame(projector: np.ndarray, d_projector: np.ndarray, epsilon: np.ndarray,
                  p: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormalize the projected ambient basis, carrying first derivatives along."""
    N = projector.shape[0]
    n = d_projector.shape[0]
    candidates = projector.T.copy()
    order = sorted(range(N), key=lambda A: (-np.linalg.norm(candidates[A]), A))

    frame, d_frame, signs = [], [], []
    for A in order:
        if len(frame) == p:
            break
        w = projector[:, A].copy()
        dw = d_projector[:, :, A].copy()
        for xi, dxi, sign in zip(frame, d_frame, signs):
            c = sign * np.dot(w * epsilon, xi)
            dc = sign * ((dw * epsilon) @ xi + dxi @ (epsilon * w))
            w = w - c * xi
            dw = dw - np.outer(dc, xi) - c * dxi
        s2 = np.dot(w * epsilon, w)
        if abs(s2) <= _ACCEPT_NORMAL:
            continue
        sign = 1.0 if s2 > 0 else -1.0
        s = np.sqrt(abs(s2))
        ds = sign * (dw @ (epsilon * w)) / s
        frame.append(w / s)
        d_frame.append(dw / s - np.outer(ds, w) / s ** 2)
        signs.append(sign)

    if len(frame) < p:
        raise MetricSignatureError(f"Normal space is degenerate: found {len(frame)} of {p} frame vectors")
    normal = np.array(frame).T if frame else np.zeros((N, 0))
    d_normal = np.stack(d_frame, axis=2) if frame else np.zeros((n, N, 0))
    return normal, d_normal, np.array(signs)


def _check_degenerate(metric: np.ndarray, rank_tol: float):
    eigenvalues = np.linalg.eigvalsh(metric)
    if np.min(np.abs(eigenvalues)) <= rank_tol * np.max(np.abs(eigenvalues)):
        raise MetricSignatureError("Induced metric is degenerate")


def _check_signature(metric: np.ndarray, normal_signs: np.ndarray, epsilon: np.ndarray):
    eigenvalues = np.linalg.eigvalsh(metric)
    tangent_index = int(np.sum(eigenvalues < 0))
    normal_index = int(np.sum(normal_signs < 0))
    ambient_index = int(np.sum(epsilon < 0))
    if tangent_index + normal_index != ambient_index:
        raise MetricSignatureError(
            f"Index mismatch: tangent {tangent_index} + normal {normal_index} != ambient {ambient_index}")
    if ambient_index == 0 and tangent_index:
        raise MetricSignatureError("Induced metric is not positive definite")


def frame_from_jets(f_jets: VectorJet, epsilon: np.ndarray, point: Point,
                    rank_tol: Optional[float] = None) -> PointFrame:
    rank_tol = TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol
    E = np.asarray(epsilon, dtype=float)
    J = f_jets.first
    H = f_jets.second
    T = f_jets.third
    N, n = J.shape
    p = N - n
    _check_rank(J, point, rank_tol)

    metric = J.T @ (E[:, None] * J)
    _check_degenerate(metric, rank_tol)
    metric_inv = np.linalg.inv(metric)
    # d_metric[l, a, b] = d_l g_ab
    HJ = np.einsum('Ala,A,Ab->lab', H, E, J)
    d_metric = HJ + HJ.transpose(0, 2, 1)
    first_kind = 0.5 * (np.einsum('imj->mij', d_metric) + np.einsum('jmi->mij', d_metric)
                        - np.einsum('mij->mij', d_metric))
    christoffel = np.einsum('km,mij->kij', metric_inv, first_kind)

    d_first_kind = (np.einsum('Alm,A,Aij->lmij', H, E, H) + np.einsum('Am,A,Alij->lmij', J, E, T))
    d_metric_inv = -np.einsum('ka,lab,bm->lkm', metric_inv, d_metric, metric_inv)
    d_christoffel = (np.einsum('lkm,mij->lkij', d_metric_inv, first_kind)
                     + np.einsum('km,lmij->lkij', metric_inv, d_first_kind))

    tangent_projector = J @ metric_inv @ (J.T * E)
    normal_projector = np.eye(N) - tangent_projector
    # d_l P_T = H_l g^-1 J^T E + J (d_l g^-1) J^T E + J g^-1 H_l^T E with H_l[:, m] = f_ml
    d_tangent_projector = (np.einsum('Aml,mk,Bk,B->lAB', H, metric_inv, J, E)
                           + np.einsum('Am,lmk,Bk,B->lAB', J, d_metric_inv, J, E)
                           + np.einsum('Am,mk,Bkl,B->lAB', J, metric_inv, H, E))
    d_normal_projector = -d_tangent_projector

    alpha = H - np.einsum('Ak,kij->Aij', J, christoffel)
    normal, d_normal, normal_signs = _normal_frame(normal_projector, d_normal_projector, E, p)
    _check_signature(metric, normal_signs, E)

    h = np.einsum('Aa,A,Aij->aij', normal, E, alpha)
    normal_connection = np.einsum('iAa,A,Ab->iab', d_normal, E, normal)

    riemann_up = (np.einsum('iljk->ijkl', d_christoffel) - np.einsum('jlik->ijkl', d_christoffel)
                  + np.einsum('lim,mjk->ijkl', christoffel, christoffel)
                  - np.einsum('ljm,mik->ijkl', christoffel, christoffel))
    riemann = np.einsum('ijkl,lw->ijkw', riemann_up, metric)
    aa = np.einsum('Aab,A,Acd->abcd', alpha, E, alpha)
    gauss_rhs = np.einsum('iwjk->ijkw', aa) - np.einsum('ikjw->ijkw', aa)
    gauss_residual = float(np.max(np.abs(riemann - gauss_rhs))) if n else 0.0

    d_alpha = (T - np.einsum('iljk,Al->Aijk', d_christoffel, J)
               - np.einsum('ljk,Ail->Aijk', christoffel, H))
    nabla_alpha = (np.einsum('AB,Bijk->Aijk', normal_projector, d_alpha)
                   - np.einsum('lij,Alk->Aijk', christoffel, alpha)
                   - np.einsum('lik,Ajl->Aijk', christoffel, alpha))
    codazzi = nabla_alpha - nabla_alpha.transpose(0, 2, 1, 3)
    codazzi_residual = float(np.max(np.abs(codazzi))) if n else 0.0

    logger.debug("frame at %s: gauss=%.2e codazzi=%.2e", point, gauss_residual, codazzi_residual)
    return PointFrame(
        point=point, epsilon=E, f_jets=f_jets, tangent=J, normal=normal, normal_signs=normal_signs,
        d_normal=d_normal, metric=metric, metric_inv=metric_inv, d_metric=d_metric,
        christoffel=christoffel, d_christoffel=d_christoffel, alpha=alpha, h=h,
        normal_connection=normal_connection, riemann_up=riemann_up, riemann=riemann,
        nabla_alpha=nabla_alpha, normal_projector=normal_projector,
        d_normal_projector=d_normal_projector, gauss_residual=gauss_residual,
        codazzi_residual=codazzi_residual,
    )


def frame_at(chart: ImmersionChart, at, rank_tol: Optional[float] = None) -> PointFrame:
    point = at if isinstance(at, Point) else Point.of(at)
    f_jets = eval_vector_jet(chart.components, point)
    return frame_from_jets(f_jets, chart.epsilon, point, rank_tol)


def shape_operator(frame: PointFrame, xi: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    tol = TOLERANCE_CONFIG['exact'] if tol is None else tol
    xi = np.asarray(xi, dtype=float)
    tangential = frame.tangent_part(xi)
    if np.linalg.norm(tangential) > tol * max(1.0, np.linalg.norm(xi)):
        raise TangentialComponentError(
            f"Vector has tangential part of norm {np.linalg.norm(tangential):.3e}")
    h_xi = np.einsum('Aij,A,A->ij', frame.alpha, frame.epsilon, xi)
    return frame.metric_inv @ h_xi


def _levi_civita(J: np.ndarray, H: np.ndarray, E: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    metric = J.T @ (E[:, None] * J)
    first_kind = np.einsum('Am,A,Aij->mij', J, E, H)
    christoffel = np.linalg.solve(metric, first_kind.reshape(J.shape[1], -1)).reshape(first_kind.shape)
    return metric, christoffel


def second_fundamental_form(f_jets: VectorJet, epsilon: np.ndarray) -> np.ndarray:
    """alpha[:, i, j] from second jets only, without building a normal frame."""
    _, christoffel = _levi_civita(f_jets.first, f_jets.second, np.asarray(epsilon, dtype=float))
    return f_jets.second - np.einsum('Ak,kij->Aij', f_jets.first, christoffel)


def christoffel_at(chart: ImmersionChart, at) -> Tuple[np.ndarray, np.ndarray]:
    """Metric and Christoffel symbols from second jets only."""
    point = at if isinstance(at, Point) else Point.of(at)
    f_jets = eval_vector_jet(chart.components, point, order=2)
    return _levi_civita(f_jets.first, f_jets.second, chart.epsilon)


def signed_orthonormal_basis(vectors: np.ndarray, epsilon: np.ndarray,
                             rank_tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Basis of span(vectors) orthonormal for the ambient product, with the sign of each vector."""
    rank_tol = TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol
    if vectors.shape[1] == 0 or not np.any(vectors):
        return np.zeros((vectors.shape[0], 0)), np.zeros(0)
    basis = linalg.orth(vectors, rcond=rank_tol)
    G = basis.T @ (epsilon[:, None] * basis)
    d, U = np.linalg.eigh(G)
    if np.min(np.abs(d)) <= rank_tol:
        raise MetricSignatureError("Subspace is degenerate for the ambient product")
    return basis @ U / np.sqrt(np.abs(d)), np.sign(d)
