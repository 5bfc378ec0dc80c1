from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class IndefiniteSpace:
    """Coordinate space with inner product sum(signs[i] * u[i] * v[i])."""
    signs: Tuple[float, ...]

    @classmethod
    def of_signature(cls, p: int, q: int) -> 'IndefiniteSpace':
        return cls(tuple([1.0] * p + [-1.0] * q))

    @classmethod
    def split(cls, signs) -> 'IndefiniteSpace':
        """The doubled space W (+) W with the second copy's product negated."""
        signs = tuple(float(s) for s in signs)
        return cls(signs + tuple(-s for s in signs))

    @property
    def dim(self) -> int:
        return len(self.signs)

    @property
    def signature(self) -> Tuple[int, int]:
        positive = sum(1 for s in self.signs if s > 0)
        return positive, self.dim - positive

    @property
    def gram(self) -> np.ndarray:
        return np.diag(self.signs)

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(np.asarray(self.signs) * u, v))


@dataclass
class FormTable:
    """values[:, i, j] = B(e_i, e_j) in coordinates of space."""
    values: np.ndarray
    space: IndefiniteSpace
    symmetric: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise ValueError(f"Expected a (dim W, n, m) table, got shape {self.values.shape}")
        if self.values.shape[0] != self.space.dim:
            raise ValueError(f"Expected {self.space.dim} value coordinates, got {self.values.shape[0]}")
        if self.symmetric:
            if self.values.shape[1] != self.values.shape[2]:
                raise ValueError(f"Symmetric form needs V = U, got {self.values.shape[1:]}")
            self.values = 0.5 * (self.values + self.values.transpose(0, 2, 1))

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def m(self) -> int:
        return self.values.shape[2]

    def apply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum('wij,i,j->w', self.values, x, y)

    def partial(self, x: np.ndarray) -> np.ndarray:
        """Matrix of B_x: U -> W, shape (dim W, m)."""
        return np.einsum('wij,i->wj', self.values, x)

    def to_dict(self) -> Dict:
        return {
            'signature': list(self.space.signature),
            'signs': list(self.space.signs),
            'symmetric': self.symmetric,
            'values': self.values.tolist(),
        }


@dataclass
class ThetaData:
    form: FormTable
    delta_star: np.ndarray
    nu_star: int
    image: np.ndarray
    isotropic_dim: int
    flatness: float
    normal: np.ndarray = field(default=None, repr=False)
    first_normal: np.ndarray = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.form.space.dim // 2


@dataclass
class RegularElement:
    y: np.ndarray
    rank: int
    kernel: np.ndarray


@dataclass
class DecompositionResult:
    ell: int
    w1: np.ndarray
    w2: np.ndarray
    b1: FormTable
    b2: FormTable
    checks: Dict[str, float]
    outside_guarantee: bool = False
    restarts: int = 0
    messages: List[str] = field(default_factory=list)


@dataclass
class IsotropicCandidate:
    vector: np.ndarray
    weight: float


@dataclass
class NormalPair:
    zeta1: np.ndarray
    zeta2: np.ndarray
    residual: float
    branch: Optional[str] = None
