from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.models.chart import VectorJet
from src.models.jet import Point


@dataclass
class PointFrame:
    """Pointwise submanifold data. Ambient vectors are stored in ambient coordinates.

    christoffel[k, i, j] = Gamma^k_ij, d_christoffel[l, k, i, j] = d_l Gamma^k_ij,
    alpha[:, i, j] = alpha(d_i, d_j), h[a, i, j] = <alpha(d_i, d_j), xi_a>,
    normal_connection[i, a, b] = <nabla^perp_{d_i} xi_a, xi_b>,
    riemann[i, j, k, w] = <R(d_i, d_j) d_k, d_w>,
    nabla_alpha[:, i, j, k] = (nabla^perp_{d_i} alpha)(d_j, d_k).
    """
    point: Point
    epsilon: np.ndarray
    f_jets: VectorJet
    tangent: np.ndarray
    normal: np.ndarray
    normal_signs: np.ndarray
    d_normal: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    d_metric: np.ndarray
    christoffel: np.ndarray
    d_christoffel: np.ndarray
    alpha: np.ndarray
    h: np.ndarray
    normal_connection: np.ndarray
    riemann_up: np.ndarray
    riemann: np.ndarray
    nabla_alpha: np.ndarray
    normal_projector: np.ndarray
    d_normal_projector: np.ndarray
    gauss_residual: float
    codazzi_residual: float

    @property
    def n(self) -> int:
        return self.tangent.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.tangent.shape[0]

    @property
    def p(self) -> int:
        return self.normal.shape[1]

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(u * self.epsilon, v))

    def normal_coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of (the normal part of) v in the orthonormal normal frame."""
        return self.normal_signs * (self.normal.T @ (self.epsilon * v))

    def tangent_coords(self, v: np.ndarray) -> np.ndarray:
        return self.metric_inv @ (self.tangent.T @ (self.epsilon * v))

    def normal_part(self, v: np.ndarray) -> np.ndarray:
        return self.normal_projector @ v

    def tangent_part(self, v: np.ndarray) -> np.ndarray:
        return v - self.normal_projector @ v

    def gauss_curvature(self) -> float:
        if self.n != 2:
            raise ValueError(f"Gauss curvature needs a surface, got n={self.n}")
        return float(self.riemann[0, 1, 1, 0] / np.linalg.det(self.metric))


@dataclass
class NullityData:
    delta: np.ndarray
    nu: int
    first_normal: np.ndarray
    first_normal_dim: int
    one_regular: Optional[bool] = None
