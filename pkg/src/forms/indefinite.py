"""Linear algebra in coordinate spaces carrying an indefinite inner product."""

from typing import List, Optional

import numpy as np
from scipy import linalg

from config.settings import TOLERANCE_CONFIG
from src.geometry.nullity import span
from src.models.forms import IndefiniteSpace, IsotropicCandidate


def _tol(rank_tol: Optional[float]) -> float:
    return TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol


def gram(space: IndefiniteSpace, basis: np.ndarray) -> np.ndarray:
    return basis.T @ space.gram @ basis


def orthonormal_span(vectors: np.ndarray, rank_tol: Optional[float] = None,
                     scale: Optional[float] = None) -> np.ndarray:
    vectors = np.atleast_2d(vectors)
    if vectors.size == 0 or not np.any(vectors):
        return np.zeros((vectors.shape[0], 0))
    return span(vectors, rank_tol, scale)


def orthogonal_complement(space: IndefiniteSpace, basis: np.ndarray,
                          rank_tol: Optional[float] = None) -> np.ndarray:
    if basis.shape[1] == 0:
        return np.eye(space.dim)
    constraints = basis.T @ space.gram
    return linalg.null_space(constraints, rcond=_tol(rank_tol))


def isotropic_part(space: IndefiniteSpace, basis: np.ndarray,
                   rank_tol: Optional[float] = None) -> np.ndarray:
    """Basis of span(basis) intersected with its orthogonal complement."""
    if basis.shape[1] == 0:
        return np.zeros((space.dim, 0))
    G = gram(space, basis)
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G)) <= _tol(rank_tol) * scale:
        return orthonormal_span(basis, rank_tol)
    coefficients = linalg.null_space(G, rcond=_tol(rank_tol))
    if coefficients.shape[1] == 0:
        return np.zeros((space.dim, 0))
    return orthonormal_span(basis @ coefficients, rank_tol)


def distance_to_span(vector: np.ndarray, basis: np.ndarray) -> float:
    if basis.shape[1] == 0:
        return float(np.linalg.norm(vector))
    coefficients = linalg.lstsq(basis, vector)[0]
    return float(np.linalg.norm(vector - basis @ coefficients))


def isotropic_candidates(quadratic: np.ndarray, measure: np.ndarray,
                         rank_tol: Optional[float] = None) -> List[IsotropicCandidate]:
    """Null vectors c of the quadratic form c^T Q c, weighted by |measure @ c|.

    Candidates are the null eigenspace direction seen best by the measure, and
    for each pair of eigenvalues of opposite sign the two null combinations.
    """
    tol = _tol(rank_tol)
    k = quadratic.shape[0]
    if k == 0:
        return []
    d, V = np.linalg.eigh(0.5 * (quadratic + quadratic.T))
    scale = max(1.0, float(np.max(np.abs(d))))
    null = np.abs(d) <= tol * scale * 10.0
    candidates = []

    null_vectors = V[:, null]
    if null_vectors.shape[1]:
        seen = measure @ null_vectors
        if np.any(seen):
            top = np.linalg.svd(seen)[2][0]
            candidates.append(null_vectors @ top)
        else:
            candidates.extend(null_vectors.T)

    positive = [i for i in range(k) if not null[i] and d[i] > 0]
    negative = [j for j in range(k) if not null[j] and d[j] < 0]
    for i in positive:
        for j in negative:
            for sign in (1.0, -1.0):
                c = V[:, i] * np.sqrt(-d[j]) + sign * V[:, j] * np.sqrt(d[i])
                candidates.append(c / np.linalg.norm(c))

    return [IsotropicCandidate(vector=c, weight=float(np.linalg.norm(measure @ c)))
            for c in candidates]


def best_candidate(candidates: List[IsotropicCandidate], measure: np.ndarray,
                   reference: Optional[np.ndarray] = None,
                   floor: float = 1e-8) -> Optional[IsotropicCandidate]:
    """Largest measured candidate, or the one whose measured image aligns best with reference."""
    usable = [c for c in candidates if c.weight > floor]
    if not usable:
        return None
    if reference is None:
        return max(usable, key=lambda c: c.weight)
    reference = reference / np.linalg.norm(reference)

    def alignment(candidate: IsotropicCandidate) -> float:
        image = measure @ candidate.vector
        return abs(float(np.dot(image, reference))) / candidate.weight

    return max(usable, key=alignment)


def pseudo_orthogonal(space: IndefiniteSpace, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random element of the isometry group of the space, as exp(E K) with K skew."""
    K = rng.standard_normal((space.dim, space.dim)) * scale
    K = K - K.T
    return linalg.expm(space.gram @ K)
