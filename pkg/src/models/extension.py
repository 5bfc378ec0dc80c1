from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST
from src.models.forms import FormTable
from src.models.jet import Point


@dataclass
class StarPoint:
    """Condition (*) data at one point: B_eta + A_xi = 0 with <xi, eta> = 0.

    d_eta[i] and d_xi[i] are the partial derivatives along d_i.
    """
    point: Point
    eta: np.ndarray
    xi: np.ndarray
    residual: float
    d_eta: Optional[np.ndarray] = None
    d_xi: Optional[np.ndarray] = None
    candidates: int = 1


@dataclass
class ConditionStarSolution:
    points: List[StarPoint]

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.points), default=0.0)

    def at(self, point: Point) -> StarPoint:
        for star in self.points:
            if star.point == point:
                return star
        raise KeyError(f"No condition (*) data at {point}")


@dataclass(frozen=True)
class ExtensionSection:
    """lambda = f_* Z + phi eta, given by chart expressions."""
    tangent: Tuple[ExpressionAST, ...]
    coefficient: Optional[ExpressionAST] = None


@dataclass
class LBarData:
    """The extended tensor at a point, with lambda and its derivatives when a section is given."""
    star: StarPoint
    Y: np.ndarray
    d_Y: np.ndarray
    lbar_eta: np.ndarray
    skew_residual: float
    section: Optional[np.ndarray] = None
    d_section: Optional[np.ndarray] = None
    lbar_section: Optional[np.ndarray] = None
    d_lbar_section: Optional[np.ndarray] = None


@dataclass
class ExtensionSample:
    point: Point
    t: float
    immersive: bool
    identities: Dict[str, float]


@dataclass
class ExtensionScene:
    """Sampled identities of F = f + t lambda; F and tau_tilde hold the maps as trees in (x, t) when available."""
    chart: ImmersionChart
    tau: BendingField
    section: ExtensionSection
    t_interval: Tuple[float, float]
    samples: List[ExtensionSample] = field(default_factory=list)
    F: Optional[Tuple[ExpressionAST, ...]] = None
    tau_tilde: Optional[Tuple[ExpressionAST, ...]] = None

    @property
    def excluded(self) -> List[ExtensionSample]:
        return [s for s in self.samples if not s.immersive]

    def worst(self, name: str) -> float:
        values = [s.identities[name] for s in self.samples if s.immersive and name in s.identities]
        return max(values, default=0.0)

    def extended_chart(self) -> ImmersionChart:
        if self.F is None:
            raise ValueError("Expected symbolic extension components, got none")
        return ImmersionChart(n=self.chart.n + 1, ambient_dim=self.chart.ambient_dim,
                              ambient_signature=self.chart.ambient_signature, components=self.F,
                              chart_box=self.chart.chart_box + (self.t_interval,))

    def extended_field(self) -> BendingField:
        if self.tau_tilde is None:
            raise ValueError("Expected symbolic extension components, got none")
        return BendingField(self.tau_tilde)


@dataclass
class VarphiData:
    form: FormTable
    flatness: float
    kernel: np.ndarray
    rank: int
    alpha_r_residual: float


@dataclass
class RulingResult:
    dimension: int
    totally_geodesic: float
    affine_leaf: float
    bound: int
    bound_name: str

    @property
    def meets_bound(self) -> bool:
        return self.dimension >= self.bound


@dataclass
class SplittingData:
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    splitting: List[np.ndarray]
    riccati_residual: float
    transport_angle: float
    jacobi_residual: float
    drift: float


@dataclass
class ConeLift:
    """Cone s * g over a spherical (sign 1) or hyperbolic (sign -1) immersion g, with tau_hat = s * tau."""
    chart: ImmersionChart
    tau: BendingField
    sign: float
    normalization: float
    position_orthogonality: float
    bending: float
    tangent_index: int
    normal_signs: Tuple[float, ...]

    @property
    def normal_positive(self) -> bool:
        return all(s > 0 for s in self.normal_signs)
