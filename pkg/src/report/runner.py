import itertools
import logging
import time
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import SAMPLING_CONFIG
from src import __version__
from src.errors import BendcheckError, DecompositionFailure
from src.models.chart import ImmersionChart
from src.models.jet import Point
from src.models.report import CheckOutcome, CheckResult, CheckStatus, Report
from src.models.scene import Outcome, Scene
from src.report.checks import CHECKS, VerificationContext

logger = logging.getLogger(__name__)

_STATUS = {
    Outcome.PASS: CheckStatus.PASS,
    Outcome.FAIL: CheckStatus.FAIL,
    Outcome.NOT_APPLICABLE: CheckStatus.NOT_APPLICABLE,
}


def sample_points(chart: ImmersionChart, count: int, seed: int, include_center: bool = True,
                  grid: Optional[int] = None) -> List[Point]:
    """The chart-box center followed by seeded uniform samples, or a regular interior grid."""
    points = [Point.of(chart.center)] if include_center else []
    if grid is not None:
        axes = [[lo + (k + 0.5) / grid * (hi - lo) for k in range(grid)] for lo, hi in chart.chart_box]
        points.extend(Point.of(coords) for coords in itertools.product(*axes))
        return points
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in chart.chart_box])
    highs = np.array([hi for _, hi in chart.chart_box])
    for _ in range(count):
        points.append(Point.of(rng.uniform(lows, highs)))
    return points


def _selected(scene: Scene, checks: Optional[Sequence[str]]) -> List[str]:
    """Requested checks plus their transitive prerequisites, in registry order."""
    wanted = list(scene.checks) if checks is None else list(checks)
    unknown = [name for name in wanted if name not in CHECKS]
    if unknown:
        raise ValueError(f"Unknown checks {unknown}, expected names from {list(CHECKS)}")
    closed = set()
    pending = list(wanted)
    while pending:
        name = pending.pop()
        if name not in closed:
            closed.add(name)
            pending.extend(CHECKS[name].depends)
    added = sorted(closed - set(wanted))
    if added:
        logger.info("adding prerequisites %s", ", ".join(added))
    return [name for name in CHECKS if name in closed]


def _run_check(name: str, ctx: VerificationContext, scene: Scene, results: Dict[str, CheckResult]) -> CheckResult:
    check = CHECKS[name]
    expected = scene.expected.get(name)
    blocked = [dep for dep in check.depends
               if dep in results and results[dep].status in (CheckStatus.FAIL, CheckStatus.SKIPPED)]
    if blocked:
        logger.info("%s skipped: prerequisite %s did not match", name, blocked[0])
        return CheckResult(name, CheckStatus.SKIPPED, expected=expected,
                           details={'reason': f"prerequisite {blocked[0]} did not match"})
    try:
        observed = check.function(ctx)
    except DecompositionFailure:
        raise
    except BendcheckError as e:
        logger.warning("%s failed: %s", name, e)
        observed = CheckOutcome(Outcome.FAIL, details={'error': type(e).__name__, 'message': str(e)})

    if expected is not None:
        matched = expected.matches(observed.outcome, observed.value, observed.residual)
        status = CheckStatus.PASS if matched else CheckStatus.FAIL
    else:
        status = _STATUS[observed.outcome]
    logger.info("%s: observed %s, status %s", name, observed.outcome.value, status.value)
    return CheckResult(name, status, observed=observed, expected=expected)


def run_verification(scene: Scene, checks: Optional[Sequence[str]] = None, samples: Optional[int] = None,
                     seed: Optional[int] = None, tol_pointwise: Optional[float] = None, strict: bool = False,
                     workers: Optional[int] = None) -> Report:
    """Run the requested checks in dependency order and compare them with the scene's expectations."""
    started = time.perf_counter()
    sampling = scene.sampling
    seed = sampling.get('seed', SAMPLING_CONFIG['seed']) if seed is None else seed
    count = sampling.get('points', SAMPLING_CONFIG['points']) if samples is None else samples
    grid = sampling.get('grid') if samples is None else None
    points = sample_points(scene.chart, count, seed, SAMPLING_CONFIG['include_center'], grid)
    overrides = {} if tol_pointwise is None else {'pointwise': tol_pointwise}
    ctx = VerificationContext(scene, points, seed, overrides, workers)

    selected = _selected(scene, checks)
    requested = set(scene.checks if checks is None else checks)
    logger.info("verifying %s on %d points: %s", scene, len(points), ", ".join(selected))
    results: Dict[str, CheckResult] = {}
    for name in selected:
        results[name] = _run_check(name, ctx, scene, results)

    report = Report(scene=scene.document, version=__version__, seed=seed, points=len(points),
                    strict=strict, checks=list(results.values()))
    if strict:
        for name in scene.expected:
            if checks is not None and name not in requested:
                continue
            if name not in results or not results[name].executed:
                report.mismatches.append(f"expected {name} was not executed")
        for name, result in results.items():
            if result.executed and name in requested and name not in scene.expected:
                report.mismatches.append(f"{name} has no expectation")
    report.wall_time = round(time.perf_counter() - started, 3)
    return report
