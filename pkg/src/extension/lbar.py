"""The tensor L extended to f_*TM + P, P = span(eta), and the flat form it induces on R = P^perp in N."""
import logging
from typing import Optional, Tuple

import numpy as np

from config.settings import SAMPLING_CONFIG, TOLERANCE_CONFIG
from src.errors import PreconditionError
from src.extension.condition_star import star_is_valid
from src.forms.flat import flatness_residual, regular_element_search
from src.geometry.submanifold import signed_orthonormal_basis
from src.jets.taylor import eval_jet, eval_vector_jet
from src.models.bending import BendingJet
from src.models.extension import ExtensionSection, LBarData, StarPoint, VarphiData
from src.models.forms import FormTable, IndefiniteSpace
from src.models.jet import Point

logger = logging.getLogger(__name__)


def _require_star(jet: BendingJet, star: StarPoint):
    if star.d_eta is None or star.d_xi is None:
        raise PreconditionError(f"Condition (*) data at {star.point} carries no derivatives")
    if not star_is_valid(star, jet.frame.epsilon):
        raise PreconditionError(f"Condition (*) does not hold at {star.point}: residual {star.residual:.3e}")


def section_jets(section: ExtensionSection, point: Point, n: int) -> Tuple[np.ndarray, np.ndarray, float, np.ndarray]:
    """Z, d_i Z^k (as [k, i]), phi and d_i phi for lambda = f_* Z + phi eta."""
    z = eval_vector_jet(section.tangent, point, order=1)
    if section.coefficient is None:
        return z.value, z.first, 0.0, np.zeros(n)
    phi = eval_jet(section.coefficient, point, order=1)
    return z.value, z.first, phi.value, phi.grad


def extend_L_bar(jet: BendingJet, star: StarPoint, section: Optional[ExtensionSection] = None,
                 tol: Optional[float] = None) -> LBarData:
    """Solve <Y, X> + <LX, eta> = 0 and set L_bar eta = f_* Y + xi."""
    tol = TOLERANCE_CONFIG['exact'] if tol is None else tol
    _require_star(jet, star)
    frame = jet.frame
    E, J, H = frame.epsilon, frame.tangent, frame.f_jets.second
    g_inv = frame.metric_inv
    eta, xi, d_eta, d_xi = star.eta, star.xi, star.d_eta, star.d_xi

    pairing = jet.L.T @ (E * eta)
    Y = -g_inv @ pairing
    d_pairing = (np.einsum('Aik,A,A->ik', jet.tau_jets.second, E, eta)
                 + np.einsum('Ak,A,iA->ik', jet.L, E, d_eta))
    d_g_inv = -np.einsum('ka,lab,bm->lkm', g_inv, frame.d_metric, g_inv)
    d_Y = -np.einsum('ikm,m->ik', d_g_inv, pairing) - np.einsum('km,im->ik', g_inv, d_pairing)
    lbar_eta = J @ Y + xi

    skew = jet.L.T @ (E * eta) + J.T @ (E * lbar_eta)
    skew_residual = float(np.max(np.abs(skew)))
    if skew_residual > tol:
        logger.warning("L_bar skew identity off by %.3e at %s", skew_residual, star.point)
    data = LBarData(star=star, Y=Y, d_Y=d_Y, lbar_eta=lbar_eta, skew_residual=skew_residual)
    if section is None:
        return data

    Z, dZ, phi, d_phi = section_jets(section, frame.point, frame.n)
    value = J @ Z + phi * eta
    d_value = (np.einsum('Aik,k->iA', H, Z) + np.einsum('Ak,ki->iA', J, dZ)
               + np.outer(d_phi, eta) + phi * d_eta)
    d_lbar_eta = np.einsum('Aik,k->iA', H, Y) + np.einsum('Ak,ik->iA', J, d_Y) + d_xi
    lbar_value = jet.L @ Z + phi * lbar_eta
    d_lbar_value = (np.einsum('Ak,ki->iA', jet.L, dZ) + np.einsum('Aik,k->iA', jet.tau_jets.second, Z)
                    + np.outer(d_phi, lbar_eta) + phi * d_lbar_eta)
    data.section, data.d_section = value, d_value
    data.lbar_section, data.d_lbar_section = lbar_value, d_lbar_value
    return data


def _split(jet: BendingJet, eta: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, float, np.ndarray]:
    """Tangent coordinates w, eta coefficient c and R part of an ambient vector."""
    frame = jet.frame
    w = frame.tangent_coords(v)
    c = frame.inner(v, eta) / frame.inner(eta, eta)
    return w, c, v - frame.tangent @ w - c * eta


def covariant_lbar(jet: BendingJet, lbar: LBarData, derivative: np.ndarray,
                   lbar_derivative: np.ndarray) -> np.ndarray:
    """(D_X L_bar) lambda = D_X(L_bar lambda) - L_bar((D_X lambda) projected to f_*TM + P)."""
    w, c, _ = _split(jet, lbar.star.eta, derivative)
    return lbar_derivative - (jet.L @ w + c * lbar.lbar_eta)


def r_part(jet: BendingJet, eta: np.ndarray, v: np.ndarray) -> np.ndarray:
    return _split(jet, eta, v)[2]


def r_basis(jet: BendingJet, eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    frame = jet.frame
    projected = np.column_stack([r_part(jet, eta, frame.normal[:, a]) for a in range(frame.p)])
    return signed_orthonormal_basis(projected, frame.epsilon)


def _basis_sections(jet: BendingJet, lbar: LBarData):
    """D_i lambda and D_i(L_bar lambda) for the constant sections d_1..d_n and eta."""
    frame = jet.frame
    star = lbar.star
    H = frame.f_jets.second
    derivatives, lbar_derivatives = [], []
    for k in range(frame.n):
        derivatives.append(H[:, :, k].T)
        lbar_derivatives.append(jet.tau_jets.second[:, :, k].T)
    d_lbar_eta = (np.einsum('Aik,k->iA', H, lbar.Y) + np.einsum('Ak,ik->iA', frame.tangent, lbar.d_Y)
                  + star.d_xi)
    derivatives.append(star.d_eta)
    lbar_derivatives.append(d_lbar_eta)
    return derivatives, lbar_derivatives


def build_varphi(jet: BendingJet, lbar: LBarData, seed: Optional[int] = None) -> VarphiData:
    """phi(X, lambda) = ((D_X lambda)_R + ((D_X L_bar) lambda)_R, (D_X lambda)_R - ((D_X L_bar) lambda)_R)."""
    seed = SAMPLING_CONFIG['seed'] if seed is None else seed
    frame = jet.frame
    eta = lbar.star.eta
    basis, signs = r_basis(jet, eta)
    n, r = frame.n, basis.shape[1]
    plus = np.zeros((r, n, n + 1))
    minus = np.zeros((r, n, n + 1))
    derivatives, lbar_derivatives = _basis_sections(jet, lbar)
    for k, (d_section, d_lbar) in enumerate(zip(derivatives, lbar_derivatives)):
        for i in range(n):
            moved = r_part(jet, eta, d_section[i])
            bent = r_part(jet, eta, covariant_lbar(jet, lbar, d_section[i], d_lbar[i]))
            coords_moved = signs * (basis.T @ (frame.epsilon * moved))
            coords_bent = signs * (basis.T @ (frame.epsilon * bent))
            plus[:, i, k] = coords_moved + coords_bent
            minus[:, i, k] = coords_moved - coords_bent
    form = FormTable(np.concatenate([plus, minus]), IndefiniteSpace.split(signs))
    regular = regular_element_search(form, seed=seed)
    alpha_r = np.einsum('Ak,A,Aij->kij', basis, frame.epsilon, frame.alpha)
    tangent_kernel = regular.kernel[:n]
    alpha_r_residual = float(np.max(np.abs(np.einsum('kij,jm->kim', alpha_r, tangent_kernel)))) \
        if tangent_kernel.size and alpha_r.size else 0.0
    return VarphiData(form=form, flatness=flatness_residual(form), kernel=regular.kernel,
                      rank=regular.rank, alpha_r_residual=alpha_r_residual)


def impext_identity_check(jet: BendingJet, lbar: LBarData) -> float:
    """max over d_i of |<f_*X + D_X lambda, LX + D_X L_bar lambda> - <(D_X lambda)_R, (D_X L_bar) lambda>|."""
    if lbar.section is None:
        raise PreconditionError("impext check needs a declared section")
    frame = jet.frame
    E = frame.epsilon
    worst = 0.0
    for i in range(frame.n):
        lhs = np.dot((frame.tangent[:, i] + lbar.d_section[i]) * E, jet.L[:, i] + lbar.d_lbar_section[i])
        moved = r_part(jet, lbar.star.eta, lbar.d_section[i])
        bent = covariant_lbar(jet, lbar, lbar.d_section[i], lbar.d_lbar_section[i])
        worst = max(worst, abs(float(lhs - np.dot(moved * E, bent))))
    return worst


def requisito_residual(jet: BendingJet, lbar: LBarData) -> float:
    """max over X of |<(D_X lambda)_R, (D_X L_bar) lambda>|, polarized over coordinate pairs."""
    if lbar.section is None:
        raise PreconditionError("requisito check needs a declared section")
    frame = jet.frame
    E = frame.epsilon
    n = frame.n
    moved = [r_part(jet, lbar.star.eta, lbar.d_section[i]) for i in range(n)]
    bent = [covariant_lbar(jet, lbar, lbar.d_section[i], lbar.d_lbar_section[i]) for i in range(n)]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            value = np.dot(moved[i] * E, bent[j]) + np.dot(moved[j] * E, bent[i])
            worst = max(worst, abs(float(value)))
    return 0.5 * worst
