import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import DECOMPOSITION_CONFIG, SAMPLING_CONFIG, TOLERANCE_CONFIG
from src.errors import DecompositionFailure, PreconditionError
from src.forms.flat import flatness_residual, image, inner_products, left_nullity
from src.forms.indefinite import gram, isotropic_part, orthogonal_complement
from src.models.forms import DecompositionResult, FormTable, IndefiniteSpace

logger = logging.getLogger(__name__)


def _dual_partners(space: IndefiniteSpace, isotropic: np.ndarray,
                   rng: np.random.Generator, restarts: int, tol: float) -> Tuple[np.ndarray, int]:
    """Isotropic u_j with <u_j, s_i> = delta_ij and <u_j, u_k> = 0."""
    ell = isotropic.shape[1]
    constraints = isotropic.T @ space.gram
    target = np.eye(ell)
    for attempt in range(restarts + 1):
        system = constraints
        if attempt:
            system = constraints + 1e-8 * rng.standard_normal(constraints.shape)
        initial = linalg.lstsq(system, target)[0]
        # s_k are isotropic and mutually orthogonal
        correction = 0.5 * isotropic @ gram(space, initial)
        duals = initial - correction
        pairing = constraints @ duals - target
        isotropy = gram(space, duals)
        if max(np.max(np.abs(pairing)), np.max(np.abs(isotropy))) <= tol:
            return duals, attempt
        logger.warning("dual partner residual too large, restart %d", attempt + 1)
    raise DecompositionFailure(f"No isotropic dual partners after {restarts} restarts")


def project_onto_isotropic_pair(space: IndefiniteSpace, isotropic: np.ndarray, duals: np.ndarray,
                                values: np.ndarray) -> np.ndarray:
    """v -> sum_j <v, u_j> s_j + <v, s_j> u_j applied to every value of a form."""
    on_duals = np.einsum('wij,w,wk->kij', values, np.asarray(space.signs), duals)
    on_isotropic = np.einsum('wij,w,wk->kij', values, np.asarray(space.signs), isotropic)
    return (np.einsum('wk,kij->wij', isotropic, on_duals)
            + np.einsum('wk,kij->wij', duals, on_isotropic))


def main_decomposition(form: FormTable, rank_tol: Optional[float] = None,
                       flat_tol: Optional[float] = None, restarts: Optional[int] = None,
                       seed: Optional[int] = None) -> DecompositionResult:
    """Split the target space into an (l, l) part carrying an isotropic component and a flat remainder."""
    rank_tol = TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol
    flat_tol = TOLERANCE_CONFIG['pointwise'] if flat_tol is None else flat_tol
    restarts = DECOMPOSITION_CONFIG['restarts'] if restarts is None else restarts
    seed = SAMPLING_CONFIG['seed'] if seed is None else seed
    space = form.space
    p, q = space.signature
    n = form.n

    if not form.symmetric:
        raise PreconditionError("Decomposition needs a symmetric form")
    if p + q >= n:
        raise PreconditionError(f"Expected p + q < n, got p={p}, q={q}, n={n}")
    flatness = flatness_residual(form)
    if flatness > flat_tol:
        raise PreconditionError(f"Form is not flat: residual {flatness:.3e}")
    scale = float(np.max(np.abs(form.values))) if form.values.size else 0.0
    nullity = left_nullity(form, rank_tol, scale).shape[1]
    if nullity > n - p - q - 1:
        raise PreconditionError(f"Nullity {nullity} exceeds n - p - q - 1 = {n - p - q - 1}")

    messages = []
    outside_guarantee = p > DECOMPOSITION_CONFIG['max_positive_index']
    if outside_guarantee:
        messages.append(f"outside the guaranteed range p <= {DECOMPOSITION_CONFIG['max_positive_index']}")
        logger.warning("p=%d is outside the range where the decomposition is guaranteed", p)

    isotropic = isotropic_part(space, image(form, rank_tol, scale), rank_tol)
    ell = isotropic.shape[1]
    if ell == 0:
        raise DecompositionFailure(
            "span of the form meets its orthogonal complement trivially; hypotheses imply this cannot occur")

    rng = np.random.default_rng(seed)
    duals, used = _dual_partners(space, isotropic, rng, restarts, TOLERANCE_CONFIG['exact'] * 1e2)
    w1 = np.hstack([isotropic, duals])
    w2 = orthogonal_complement(space, w1, rank_tol)

    b1_values = project_onto_isotropic_pair(space, isotropic, duals, form.values)
    b2_values = form.values - b1_values
    b1 = FormTable(b1_values, space, symmetric=True)
    b2 = FormTable(b2_values, space, symmetric=True)

    b2_nullity = left_nullity(b2, rank_tol, scale).shape[1]
    bound = n - p - q + 2 * ell
    leak = w1.T @ space.gram @ b2_values.reshape(space.dim, -1)
    w2_leak = float(np.max(np.abs(leak))) if leak.size else 0.0
    checks = {
        'reassembly': float(np.max(np.abs(form.values - b1_values - b2_values))),
        'b1_isotropy': float(np.max(np.abs(inner_products(b1)))),
        'b1_norm': float(np.max(np.abs(b1_values))),
        'b2_flatness': flatness_residual(b2),
        'b2_in_w2': w2_leak,
        'b2_nullity': float(b2_nullity),
        'b2_nullity_bound': float(bound),
    }
    if b2_nullity < bound:
        messages.append(f"nullity of B2 is {b2_nullity}, expected at least {bound}")
    logger.info("decomposition: l=%d, dim W2=%d, checks=%s", ell, w2.shape[1], checks)
    return DecompositionResult(ell=ell, w1=w1, w2=w2, b1=b1, b2=b2, checks=checks,
                               outside_guarantee=outside_guarantee, restarts=used, messages=messages)


def decomposition_holds(result: DecompositionResult, tol: Optional[float] = None) -> bool:
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    checks = result.checks
    return (checks['reassembly'] <= 1e-12 * max(1.0, checks['b1_norm'])
            and checks['b1_isotropy'] <= tol * 0.1
            and checks['b1_norm'] > tol
            and checks['b2_flatness'] <= tol
            and checks['b2_nullity'] >= checks['b2_nullity_bound'])
