from dataclasses import dataclass

import numpy as np

from src.models.chart import VectorJet
from src.models.frame import PointFrame


@dataclass
class BendingJet:
    """Associated tensors of a variation at one point.

    L[:, k] = d_k tau, B[:, j, k] = (D_j L) d_k, Y[l, j, k] tangent coordinates of B,
    beta[:, j, k] normal part of B. B_derivative[:, i, j, k] is d_i B_jk (plain partial).
    """
    frame: PointFrame
    tau_jets: VectorJet
    L: np.ndarray
    B: np.ndarray
    Y: np.ndarray
    beta: np.ndarray
    B_derivative: np.ndarray

    @property
    def n(self) -> int:
        return self.L.shape[1]

    @property
    def beta_coords(self) -> np.ndarray:
        """beta in the orthonormal normal frame, shape (p, n, n)."""
        frame = self.frame
        return np.einsum('a,Aa,A,Aij->aij', frame.normal_signs, frame.normal, frame.epsilon, self.beta)

    def reassembled(self) -> np.ndarray:
        return np.einsum('Al,ljk->Ajk', self.frame.tangent, self.Y) + self.beta
