"""The symmetric form theta = (alpha + beta, alpha - beta) of a bending and what is read off it."""
import logging
from typing import Dict, Iterable, Optional

import numpy as np

from config.settings import TOLERANCE_CONFIG
from src.bending.tensors import bending_jet_at, vanish_value
from src.errors import PreconditionError
from src.forms.flat import flatness_residual, image, moore_containment_check, regular_element_search
from src.forms.indefinite import best_candidate, isotropic_candidates, isotropic_part
from src.geometry.nullity import kernel, nullity_at
from src.geometry.submanifold import frame_at, signed_orthonormal_basis
from src.models.bending import BendingJet
from src.models.chart import BendingField, ImmersionChart
from src.models.forms import FormTable, IndefiniteSpace, NormalPair, ThetaData

logger = logging.getLogger(__name__)


def _theta_data(values_plus: np.ndarray, values_minus: np.ndarray, signs: np.ndarray,
                jet: BendingJet, first_normal: np.ndarray, rank_tol: Optional[float]) -> ThetaData:
    space = IndefiniteSpace.split(signs)
    form = FormTable(np.concatenate([values_plus, values_minus]), space, symmetric=True)
    n = jet.n
    delta_star = kernel(form.values.reshape(-1, n), n, rank_tol, scale=1.0)
    span = image(form, rank_tol, scale=1.0)
    return ThetaData(
        form=form,
        delta_star=delta_star,
        nu_star=delta_star.shape[1],
        image=span,
        isotropic_dim=isotropic_part(space, span, rank_tol).shape[1],
        flatness=flatness_residual(form),
        normal=jet.frame.normal,
        first_normal=first_normal,
    )


def theta_from_jet(jet: BendingJet, rank_tol: Optional[float] = None) -> ThetaData:
    frame = jet.frame
    alpha = frame.normal_signs[:, None, None] * frame.h
    beta = jet.beta_coords
    first_normal = nullity_at(frame, rank_tol).first_normal
    first_normal_coords = frame.normal_signs[:, None] * (frame.normal.T @ (frame.epsilon[:, None] * first_normal))
    return _theta_data(alpha + beta, alpha - beta, frame.normal_signs, jet, first_normal_coords, rank_tol)


def build_theta(chart: ImmersionChart, tau: BendingField, at,
                rank_tol: Optional[float] = None) -> ThetaData:
    return theta_from_jet(bending_jet_at(chart, tau, at), rank_tol)


def _first_normal_basis(jet: BendingJet, rank_tol: Optional[float]):
    frame = jet.frame
    first_normal = nullity_at(frame, rank_tol).first_normal
    return signed_orthonormal_basis(first_normal, frame.epsilon, rank_tol)


def build_theta_hat(chart: ImmersionChart, tau: BendingField, at, region: Optional[Iterable] = None,
                    rank_tol: Optional[float] = None) -> ThetaData:
    """theta with beta replaced by its projection onto the first normal space.

    region, when given, is the sample set over which 1-regularity is required.
    """
    jet = bending_jet_at(chart, tau, at)
    if region is not None:
        dims = {nullity_at(frame_at(chart, point), rank_tol).first_normal_dim for point in region}
        dims.add(nullity_at(jet.frame, rank_tol).first_normal_dim)
        if len(dims) > 1:
            raise PreconditionError(f"Immersion is not 1-regular: first normal dimensions {sorted(dims)}")
    basis, signs = _first_normal_basis(jet, rank_tol)
    E = jet.frame.epsilon
    alpha = signs[:, None, None] * np.einsum('Ak,A,Aij->kij', basis, E, jet.frame.alpha)
    beta = signs[:, None, None] * np.einsum('Ak,A,Aij->kij', basis, E, jet.beta)
    identity = np.eye(basis.shape[1])
    return _theta_data(alpha + beta, alpha - beta, signs, jet, identity, rank_tol)


def theta_moore_check(theta: ThetaData, seed: Optional[int] = None) -> float:
    regular = regular_element_search(theta.form, seed=seed)
    return moore_containment_check(theta.form, regular)


def isotropic_normal_pair(theta: ThetaData, rank_tol: Optional[float] = None) -> Optional[NormalPair]:
    """Unit zeta_1, zeta_2 with (zeta_1, zeta_2) orthogonal to every value of theta."""
    form = theta.form
    p = theta.p
    signs = np.asarray(form.space.signs)
    constraints = (signs[:, None] * form.values.reshape(2 * p, -1)).T
    solutions = kernel(constraints, 2 * p, rank_tol, scale=1.0)
    if solutions.shape[1] == 0:
        return None
    quadratic = solutions.T @ (signs[:, None] * solutions)
    measure = solutions[:p]
    candidates = isotropic_candidates(quadratic, measure, rank_tol)
    chosen = best_candidate(candidates, measure)
    if chosen is None:
        return None
    coords = solutions @ chosen.vector
    zeta1, zeta2 = coords[:p], coords[p:]
    length = np.sqrt(abs(np.dot(signs[:p] * zeta1, zeta1))) or np.linalg.norm(zeta1)
    zeta1, zeta2 = zeta1 / length, zeta2 / length
    residual = float(np.max(np.abs(constraints @ np.concatenate([zeta1, zeta2]))))
    logger.debug("normal pair residual %.2e", residual)
    return NormalPair(zeta1=zeta1, zeta2=zeta2, residual=residual)


def almost_branch(theta: ThetaData, pair: NormalPair, tol: Optional[float] = None) -> Dict:
    """Which case of the compact argument a pair falls into.

    zeta_1 + zeta_2 != 0 gives condition (*) with eta along the sum and xi along
    the difference; otherwise the codimension reduces and zeta_1 - zeta_2 must be
    orthogonal to the first normal space.
    """
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    total = pair.zeta1 + pair.zeta2
    difference = pair.zeta1 - pair.zeta2
    if np.linalg.norm(total) > tol:
        eta = total / np.linalg.norm(total)
        pair.branch = 'condition_star'
        return {'branch': pair.branch, 'eta': theta.normal @ eta,
                'xi': theta.normal @ (difference / np.linalg.norm(total))}
    signs = np.asarray(theta.form.space.signs)[:theta.p]
    orthogonality = np.abs(theta.first_normal.T @ (signs * difference))
    pair.branch = 'codimension_reduction'
    return {'branch': pair.branch,
            'orthogonality': float(np.max(orthogonality)) if orthogonality.size else 0.0}


def vanish_identity_check(chart: ImmersionChart, tau: BendingField, at, extra: int = 8,
                          seed: int = 0, rank_tol: Optional[float] = None) -> float:
    """max |<f_*X + D_X Z, LX + D_X LZ>| for Z in the kernel of theta at a regular element."""
    jet = bending_jet_at(chart, tau, at)
    theta = theta_from_jet(jet, rank_tol)
    regular = regular_element_search(theta.form, seed=seed)
    rng = np.random.default_rng(seed)
    directions = list(np.eye(jet.n)) + [rng.standard_normal(jet.n) for _ in range(extra)]
    worst = 0.0
    for x in directions:
        for z in regular.kernel.T:
            worst = max(worst, abs(vanish_value(jet, x, z)))
    return worst
