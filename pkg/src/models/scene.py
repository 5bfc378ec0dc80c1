from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from src.models.chart import BendingField, ImmersionChart
from src.models.expression import ExpressionAST
from src.models.extension import ExtensionSection


class SceneTag(Enum):
    TRIVIAL = 'trivial'
    GENUINE_CANDIDATE = 'genuine-candidate'
    NEGATIVE_CONTROL = 'negative-control'
    CONE = 'cone'
    LORENTZIAN = 'lorentzian'


class Outcome(Enum):
    PASS = 'pass'
    FAIL = 'fail'
    NOT_APPLICABLE = 'not-applicable'


@dataclass(frozen=True)
class Expectation:
    """Expected outcome, optionally a value within tolerance or a residual above a floor."""
    outcome: Outcome
    value: Optional[float] = None
    tolerance: float = 0.0
    residual_above: Optional[float] = None

    def matches(self, outcome: Outcome, value: Optional[float], residual: Optional[float] = None) -> bool:
        if outcome != self.outcome:
            return False
        if self.residual_above is not None and (residual is None or residual <= self.residual_above):
            return False
        if self.value is None:
            return True
        return value is not None and abs(value - self.value) <= self.tolerance


@dataclass(frozen=True)
class StarSpec:
    """Declared (eta, xi) expressions, or a reference direction for the solver."""
    eta: Optional[Tuple[ExpressionAST, ...]] = None
    xi: Optional[Tuple[ExpressionAST, ...]] = None
    reference: Optional[Tuple[float, ...]] = None

    @property
    def declared(self) -> bool:
        return self.eta is not None


@dataclass(frozen=True)
class RulingSpec:
    distribution: str
    bound: str = 'local'


@dataclass(frozen=True)
class GeodesicSpec:
    x0: Tuple[float, ...]
    v: Tuple[float, ...]
    t_max: float


@dataclass(frozen=True)
class ConeSpec:
    """The base immersion g and its bending tau that the scene chart is the cone over."""
    sign: float
    chart: ImmersionChart
    tau: BendingField


@dataclass
class Scene:
    name: str
    chart: ImmersionChart
    tau: BendingField
    document: Dict[str, Any]
    section: Optional[ExtensionSection] = None
    star: Optional[StarSpec] = None
    ruling: Optional[RulingSpec] = None
    geodesic: Optional[GeodesicSpec] = None
    cone: Optional[ConeSpec] = None
    sampling: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)
    checks: Tuple[str, ...] = ()
    expected: Dict[str, Expectation] = field(default_factory=dict)
    tags: Tuple[SceneTag, ...] = ()

    def __str__(self):
        return f"Scene {self.name} (n={self.chart.n}, ambient {self.chart.ambient_dim})"
