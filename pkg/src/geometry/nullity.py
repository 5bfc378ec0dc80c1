from typing import Iterable, Optional

import numpy as np
from scipy import linalg

from config.settings import TOLERANCE_CONFIG
from src.models.frame import NullityData, PointFrame


def _threshold(matrix: np.ndarray, rank_tol: Optional[float], scale: Optional[float]) -> float:
    rank_tol = TOLERANCE_CONFIG['rank'] if rank_tol is None else rank_tol
    largest = float(np.linalg.norm(matrix, 2))
    return rank_tol * max(largest, scale or 0.0)


def numerical_rank(matrix: np.ndarray, rank_tol: Optional[float] = None,
                   scale: Optional[float] = None) -> int:
    if matrix.size == 0 or not np.any(matrix):
        return 0
    sigma = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(sigma > _threshold(matrix, rank_tol, scale)))


def kernel(matrix: np.ndarray, columns: int, rank_tol: Optional[float] = None,
           scale: Optional[float] = None) -> np.ndarray:
    """Orthonormal kernel basis (columns).

    Singular values up to rank_tol * max(sigma_max, scale) count as zero, so
    a matrix of pure rounding noise has a full kernel once scale is given.
    """
    if matrix.size == 0 or not np.any(matrix):
        return np.eye(columns)
    threshold = _threshold(matrix, rank_tol, scale)
    return linalg.null_space(matrix, rcond=threshold / np.linalg.norm(matrix, 2))


def span(matrix: np.ndarray, rank_tol: Optional[float] = None,
         scale: Optional[float] = None) -> np.ndarray:
    if matrix.size == 0 or not np.any(matrix):
        return np.zeros((matrix.shape[0], 0))
    threshold = _threshold(matrix, rank_tol, scale)
    return linalg.orth(matrix, rcond=threshold / np.linalg.norm(matrix, 2))


def nullity_at(frame: PointFrame, rank_tol: Optional[float] = None) -> NullityData:
    n, p = frame.n, frame.p
    stacked = frame.h.reshape(p * n, n)
    delta = kernel(stacked, n, rank_tol, scale=1.0)
    coords = (frame.normal_signs[:, None, None] * frame.h).reshape(p, n * n)
    first_normal_coords = span(coords, rank_tol, scale=1.0)
    first_normal = frame.normal @ first_normal_coords
    return NullityData(
        delta=delta,
        nu=delta.shape[1],
        first_normal=first_normal,
        first_normal_dim=first_normal_coords.shape[1],
    )


def one_regular(samples: Iterable[NullityData]) -> bool:
    dims = {data.first_normal_dim for data in samples}
    return len(dims) <= 1
