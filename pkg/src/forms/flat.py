import logging
from typing import Optional

import numpy as np

from config.settings import REGULAR_ELEMENT_CONFIG, SAMPLING_CONFIG, TOLERANCE_CONFIG
from src.errors import PreconditionError
from src.forms.indefinite import distance_to_span, isotropic_part, orthonormal_span, pseudo_orthogonal
from src.geometry.nullity import kernel, numerical_rank
from src.models.forms import FormTable, IndefiniteSpace, RegularElement

logger = logging.getLogger(__name__)


def inner_products(form: FormTable) -> np.ndarray:
    """P[x, y, z, w] = <B(x, z), B(y, w)>."""
    return np.einsum('axz,a,ayw->xyzw', form.values, np.asarray(form.space.signs), form.values)


def flatness_residual(form: FormTable) -> float:
    if form.values.size == 0:
        return 0.0
    P = inner_products(form)
    return float(np.max(np.abs(P - P.transpose(0, 1, 3, 2))))


def image(form: FormTable, rank_tol: Optional[float] = None, scale: Optional[float] = None) -> np.ndarray:
    """Orthonormal basis of the span of all values."""
    return orthonormal_span(form.values.reshape(form.space.dim, -1), rank_tol, scale)


def left_nullity(form: FormTable, rank_tol: Optional[float] = None,
                 scale: Optional[float] = None) -> np.ndarray:
    """{x : B(x, y) = 0 for all y}."""
    matrix = form.values.transpose(0, 2, 1).reshape(-1, form.n)
    return kernel(matrix, form.n, rank_tol, scale)


def regular_element_search(form: FormTable, trials: Optional[int] = None, seed: Optional[int] = None,
                           rank_tol: Optional[float] = None) -> RegularElement:
    trials = REGULAR_ELEMENT_CONFIG['trials'] if trials is None else trials
    seed = SAMPLING_CONFIG['seed'] if seed is None else seed
    if trials < 1:
        raise ValueError(f"Expected at least one trial, got {trials}")
    rng = np.random.default_rng(seed)
    samples = list(np.eye(form.n))
    for _ in range(trials):
        y = rng.standard_normal(form.n)
        samples.append(y / np.linalg.norm(y))

    best_y, best_rank = samples[0], -1
    for y in samples:
        rank = numerical_rank(form.partial(y), rank_tol)
        if rank > best_rank:
            best_y, best_rank = y, rank
    kernel_basis = kernel(form.partial(best_y), form.m, rank_tol)
    logger.debug("regular element rank %d, kernel dim %d", best_rank, kernel_basis.shape[1])
    return RegularElement(y=best_y, rank=best_rank, kernel=kernel_basis)


def moore_containment_check(form: FormTable, regular: RegularElement,
                            flat_tol: Optional[float] = None,
                            rank_tol: Optional[float] = None) -> float:
    """Distance of B(e_i, ker B_Y) to B_Y(U) intersected with its orthogonal complement."""
    flat_tol = TOLERANCE_CONFIG['pointwise'] if flat_tol is None else flat_tol
    residual = flatness_residual(form)
    if residual > flat_tol:
        raise PreconditionError(f"Form is not flat: residual {residual:.3e}")
    partial_image = orthonormal_span(form.partial(regular.y), rank_tol)
    target = isotropic_part(form.space, partial_image, rank_tol)
    worst = 0.0
    for i in range(form.n):
        row = form.values[:, i, :]
        for k in regular.kernel.T:
            worst = max(worst, distance_to_span(row @ k, target))
    return worst


def random_flat_form(rng: np.random.Generator, n: int, p: int, q: int, ell: int,
                     diagonal: Optional[int] = None) -> FormTable:
    """Symmetric flat form into W^{p,q}: an isotropic part of rank ell plus a diagonal flat part.

    The isotropic part takes values in span(e_j + e_{p+j}), the diagonal part
    sum_k <x, a_k><y, a_k> w_k uses the remaining orthonormal coordinates.
    """
    space = IndefiniteSpace.of_signature(p, q)
    values = np.zeros((p + q, n, n))
    for j in range(ell):
        s = np.zeros(p + q)
        s[j] = s[p + j] = 1.0
        phi = rng.standard_normal((n, n))
        values += np.einsum('w,ij->wij', s, phi + phi.T)
    remaining = list(range(ell, p)) + list(range(p + ell, p + q))
    count = len(remaining) if diagonal is None else min(diagonal, len(remaining))
    for coordinate in remaining[:count]:
        a = rng.standard_normal(n)
        values[coordinate] += np.outer(a, a)
    scramble = pseudo_orthogonal(space, rng, scale=0.3)
    values = np.einsum('vw,wij->vij', scramble, values)
    return FormTable(values, space, symmetric=True)
