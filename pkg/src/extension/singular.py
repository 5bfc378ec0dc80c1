import logging
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from config.settings import EXTENSION_CONFIG, TOLERANCE_CONFIG
from src.bending.tensors import bending_jet_at
from src.errors import PreconditionError
from src.extension.lbar import extend_L_bar, requisito_residual, section_jets
from src.jets.symbolic import gradient, negate, product, solve, total
from src.jets.taylor import eval_vector_jet
from src.models.bending import BendingJet
from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST, constant, variable
from src.models.extension import (ConditionStarSolution, ExtensionSample, ExtensionScene,
                                  ExtensionSection)
from src.models.jet import Point

logger = logging.getLogger(__name__)


def _tangent_section(jet: BendingJet, section: ExtensionSection):
    """lambda = f_* Z and L_bar lambda = L Z with their first derivatives."""
    frame = jet.frame
    Z, dZ, _, _ = section_jets(section, frame.point, frame.n)
    value = frame.tangent @ Z
    d_value = (np.einsum('Aik,k->iA', frame.f_jets.second, Z)
               + np.einsum('Ak,ki->iA', frame.tangent, dZ))
    lbar_value = jet.L @ Z
    d_lbar_value = (np.einsum('Aik,k->iA', jet.tau_jets.second, Z)
                    + np.einsum('Ak,ki->iA', jet.L, dZ))
    return value, d_value, lbar_value, d_lbar_value


def _vanish_residual(jet: BendingJet, d_value: np.ndarray, d_lbar_value: np.ndarray) -> float:
    E = jet.frame.epsilon
    products = np.einsum('iA,A,jA->ij', d_value, E, d_lbar_value)
    return 0.5 * float(np.max(np.abs(products + products.T)))


def extension_identities(jet: BendingJet, value: np.ndarray, d_value: np.ndarray, lbar_value: np.ndarray,
                         d_lbar_value: np.ndarray, t: float, rank_tol: float):
    """Blocks of the bending residual of tau + t L_bar lambda along f + t lambda on the (x, t) chart."""
    frame = jet.frame
    E = frame.epsilon
    n = frame.n
    dF = np.column_stack([frame.tangent + t * d_value.T, value])
    dtau = np.column_stack([jet.L + t * d_lbar_value.T, lbar_value])
    sigma = np.linalg.svd(dF, compute_uv=False)
    immersive = bool(sigma[0] > 0.0 and sigma[n] > rank_tol * sigma[0])
    M = dtau.T @ (E[:, None] * dF)
    S = M + M.T
    identities = {
        'tt': float(abs(S[n, n])),
        'tx': float(np.max(np.abs(S[n, :n]))),
        'xx': float(np.max(np.abs(S[:n, :n]))),
    }
    return immersive, identities


def symbolic_extension(chart: ImmersionChart, tau: BendingField, section: ExtensionSection,
                       eta: Optional[Sequence[ExpressionAST]] = None,
                       xi: Optional[Sequence[ExpressionAST]] = None
                       ) -> Optional[Tuple[Tuple[ExpressionAST, ...], Tuple[ExpressionAST, ...]]]:
    """F = f + t lambda and tau_tilde = tau + t L_bar lambda as trees over (x_1, ..., x_n, t).

    An eta component needs (eta, xi) as expressions; None is returned when they are missing.
    L_bar eta = f_* Y + xi with Y = -g^-1 (L^T eps eta), solved by cofactors.
    """
    n, N = chart.n, chart.ambient_dim
    phi = section.coefficient
    if phi is not None and (eta is None or xi is None):
        return None
    E = [constant(float(sign)) for sign in chart.epsilon]
    f = [c.root for c in chart.components]
    u = [c.root for c in tau.components]
    df = [gradient(component, n) for component in f]
    du = [gradient(component, n) for component in u]
    Z = [c.root for c in section.tangent]
    lam = [total(product([Z[k], df[A][k]]) for k in range(n)) for A in range(N)]
    lbar = [total(product([Z[k], du[A][k]]) for k in range(n)) for A in range(N)]
    if phi is not None:
        eta_nodes = [c.root for c in eta]
        xi_nodes = [c.root for c in xi]
        metric = [[total(product([E[A], df[A][k], df[A][l]]) for A in range(N)) for l in range(n)]
                  for k in range(n)]
        pairing = [total(product([E[A], du[A][l], eta_nodes[A]]) for A in range(N)) for l in range(n)]
        Y = [negate(y) for y in solve(metric, pairing)]
        lbar_eta = [total([product([df[A][k], Y[k]]) for k in range(n)] + [xi_nodes[A]]) for A in range(N)]
        lam = [total([lam[A], product([phi.root, eta_nodes[A]])]) for A in range(N)]
        lbar = [total([lbar[A], product([phi.root, lbar_eta[A]])]) for A in range(N)]
    t = variable(n)
    F = tuple(ExpressionAST(total([f[A], product([t, lam[A]])]), n + 1) for A in range(N))
    tau_tilde = tuple(ExpressionAST(total([u[A], product([t, lbar[A]])]), n + 1) for A in range(N))
    return F, tau_tilde


def symbolic_residual(scene: ExtensionScene, point: Point, t: float) -> float:
    """Bending residual of tau_tilde along F at (x, t), from the trees alone."""
    at = Point.of(point.coords + (t,))
    dF = eval_vector_jet(scene.F, at, order=1).first
    dtau = eval_vector_jet(scene.tau_tilde, at, order=1).first
    M = dtau.T @ (scene.chart.epsilon[:, None] * dF)
    return float(np.max(np.abs(M + M.T)))


def build_singular_extension(chart: ImmersionChart, tau: BendingField, section: ExtensionSection,
                             points: Iterable, star: Optional[ConditionStarSolution] = None,
                             eta: Optional[Sequence[ExpressionAST]] = None,
                             xi: Optional[Sequence[ExpressionAST]] = None,
                             t_values: Optional[Sequence[float]] = None,
                             tol: Optional[float] = None,
                             rank_tol: Optional[float] = None) -> ExtensionScene:
    """F = f + t lambda with tau_tilde = tau + t L_bar lambda, verified at sampled (x, t)."""
    t_values = tuple(EXTENSION_CONFIG['t_values'] if t_values is None else t_values)
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    rank_tol = TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol
    if len(t_values) == 0 or min(t_values) == max(t_values):
        raise PreconditionError(f"Degenerate t-interval {t_values}")
    if section.coefficient is not None and star is None:
        raise PreconditionError("A section with an eta component needs condition (*) data")

    scene = ExtensionScene(chart=chart, tau=tau, section=section,
                           t_interval=(float(min(t_values)), float(max(t_values))))
    maps = symbolic_extension(chart, tau, section, eta, xi)
    if maps is None:
        logger.debug("eta and xi are not expressions; extension checked from sampled jets only")
    else:
        scene.F, scene.tau_tilde = maps
    for at in points:
        point = at if isinstance(at, Point) else Point.of(at)
        jet = bending_jet_at(chart, tau, point)
        if star is None:
            value, d_value, lbar_value, d_lbar_value = _tangent_section(jet, section)
            residual = _vanish_residual(jet, d_value, d_lbar_value)
        else:
            lbar = extend_L_bar(jet, star.at(point), section)
            value, d_value = lbar.section, lbar.d_section
            lbar_value, d_lbar_value = lbar.lbar_section, lbar.d_lbar_section
            residual = requisito_residual(jet, lbar)
        if residual > tol:
            raise PreconditionError(f"Section violates the extension requirement at {point}: {residual:.3e}")
        for t in t_values:
            immersive, identities = extension_identities(jet, value, d_value, lbar_value, d_lbar_value,
                                                         float(t), rank_tol)
            if immersive and scene.F is not None:
                identities['symbolic'] = symbolic_residual(scene, point, float(t))
            scene.samples.append(ExtensionSample(point=point, t=float(t), immersive=immersive,
                                                 identities=identities))
    if scene.excluded:
        logger.warning("%d of %d samples excluded: extension is not an immersion there",
                       len(scene.excluded), len(scene.samples))
    return scene
