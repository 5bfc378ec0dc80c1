from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.models.expression import ExpressionAST


@dataclass(frozen=True)
class ImmersionChart:
    n: int
    ambient_dim: int
    ambient_signature: int
    components: Tuple[ExpressionAST, ...]
    chart_box: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if len(self.components) != self.ambient_dim:
            raise ValueError(f"Expected {self.ambient_dim} components, got {len(self.components)}")
        if len(self.chart_box) != self.n:
            raise ValueError(f"Expected {self.n} chart intervals, got {len(self.chart_box)}")
        if not 0 <= self.ambient_signature <= self.ambient_dim:
            raise ValueError(f"Invalid ambient signature {self.ambient_signature}")

    @property
    def codimension(self) -> int:
        return self.ambient_dim - self.n

    @property
    def epsilon(self) -> np.ndarray:
        signs = np.ones(self.ambient_dim)
        if self.ambient_signature:
            signs[-self.ambient_signature:] = -1.0
        return signs

    @property
    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.chart_box])

    def contains(self, coords: Sequence[float]) -> bool:
        return all(lo <= c <= hi for c, (lo, hi) in zip(coords, self.chart_box))


@dataclass(frozen=True)
class BendingField:
    components: Tuple[ExpressionAST, ...]

    @property
    def ambient_dim(self) -> int:
        return len(self.components)


@dataclass
class VectorJet:
    """Jets of a vector-valued map: value (N,), first (N, n), second (N, n, n), third (N, n, n, n)."""
    value: np.ndarray
    first: np.ndarray
    second: np.ndarray
    third: np.ndarray

    @property
    def n(self) -> int:
        return self.first.shape[1]

    def __add__(self, other: 'VectorJet') -> 'VectorJet':
        return VectorJet(self.value + other.value, self.first + other.first,
                         self.second + other.second, self.third + other.third)

    def scaled(self, t: float) -> 'VectorJet':
        return VectorJet(t * self.value, t * self.first, t * self.second, t * self.third)
