from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Point:
    coords: Tuple[float, ...]

    @classmethod
    def of(cls, coords: Sequence[float]) -> 'Point':
        return cls(tuple(float(c) for c in coords))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __str__(self):
        return "(" + ", ".join(f"{c:.6g}" for c in self.coords) + ")"


@dataclass
class Jet3:
    value: float
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray

    @classmethod
    def constant(cls, value: float, n: int) -> 'Jet3':
        return cls(float(value), np.zeros(n), np.zeros((n, n)), np.zeros((n, n, n)))

    @classmethod
    def variable(cls, index: int, at: np.ndarray) -> 'Jet3':
        n = len(at)
        grad = np.zeros(n)
        grad[index] = 1.0
        return cls(float(at[index]), grad, np.zeros((n, n)), np.zeros((n, n, n)))

    @property
    def n(self) -> int:
        return len(self.grad)

    def truncated(self, order: int) -> 'Jet3':
        n = self.n
        return Jet3(
            self.value,
            self.grad if order >= 1 else np.zeros(n),
            self.hess if order >= 2 else np.zeros((n, n)),
            self.third if order >= 3 else np.zeros((n, n, n)),
        )
