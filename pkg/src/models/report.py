from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import json

import numpy as np

from config.settings import REPORT_CONFIG
from src.models.scene import Expectation, Outcome


def _builtin(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Expected a JSON-serializable value, got {type(value).__name__}")


class CheckStatus(Enum):
    PASS = 'pass'
    FAIL = 'fail'
    SKIPPED = 'skipped'
    NOT_APPLICABLE = 'not-applicable'


@dataclass
class CheckOutcome:
    """What a check observed, before it is compared with the scene's expectation."""
    outcome: Outcome
    residual: Optional[float] = None
    tolerance: Optional[float] = None
    worst_point: Optional[Tuple[float, ...]] = None
    value: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CheckResult:
    name: str
    status: CheckStatus
    observed: Optional[CheckOutcome] = None
    expected: Optional[Expectation] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def executed(self) -> bool:
        return self.observed is not None

    def to_dict(self) -> Dict[str, Any]:
        observed = self.observed
        data = {
            'name': self.name,
            'status': self.status.value,
            'observed': None if observed is None else observed.outcome.value,
            'expected': None if self.expected is None else self.expected.outcome.value,
            'residual': None if observed is None else observed.residual,
            'tolerance': None if observed is None else observed.tolerance,
            'worst_point': None if observed is None or observed.worst_point is None
            else list(observed.worst_point),
            'value': None if observed is None else observed.value,
            'details': dict(self.details),
        }
        if observed is not None:
            data['details'].update(observed.details)
        return data


@dataclass
class Report:
    scene: Dict[str, Any]
    version: str
    seed: int
    points: int
    strict: bool
    checks: List[CheckResult] = field(default_factory=list)
    mismatches: List[str] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def matched(self) -> bool:
        return not self.mismatches and all(
            c.status in (CheckStatus.PASS, CheckStatus.NOT_APPLICABLE) for c in self.checks)

    def result(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(f"No check named {name} in report")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': REPORT_CONFIG['schema_version'],
            'version': self.version,
            'scene': self.scene,
            'seed': self.seed,
            'points': self.points,
            'strict': self.strict,
            'matched': self.matched,
            'mismatches': list(self.mismatches),
            'checks': [c.to_dict() for c in self.checks],
            'wall_time': self.wall_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=REPORT_CONFIG['indent'], default=_builtin)
