"""Registry of scene checks, in the order they run.

Each check reads the shared VerificationContext and returns a CheckOutcome.
A check depending on another runs only if that one matched its expectation.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import EXTENSION_CONFIG, SAMPLING_CONFIG, TOLERANCE_CONFIG
from src.bending.tensors import (above_identity_check, b_variation_residual, bending_jet_from_frame,
                                 bending_residual, first_order_isometry_check, identity_residuals)
from src.bending.triviality import triviality_test_hypersurface
from src.errors import PreconditionError
from src.extension.condition_star import declared_star, solve_condition_star, star_is_valid
from src.extension.cone import cone_lift, cone_signature_ok
from src.extension.lbar import build_varphi, extend_L_bar, impext_identity_check
from src.extension.rulings import bending_nullity, relative_nullity, ruling_check
from src.extension.singular import build_singular_extension
from src.extension.splitting import splitting_tensor_check
from src.forms.decomposition import decomposition_holds, main_decomposition
from src.forms.theta import (almost_branch, build_theta_hat, isotropic_normal_pair, theta_from_jet,
                             theta_moore_check, vanish_identity_check)
from src.geometry.nullity import nullity_at
from src.geometry.submanifold import frame_at
from src.jets.taylor import eval_vector_jet
from src.models.bending import BendingJet
from src.models.extension import ConditionStarSolution
from src.models.frame import PointFrame
from src.models.jet import Point
from src.models.report import CheckOutcome
from src.models.scene import Outcome, Scene

logger = logging.getLogger(__name__)

ISOMETRY_T = 1e-3
DRIFT_TOL = 1e-6


class VerificationContext:
    """Sample points, tolerances and per-point data shared by the checks of one run."""

    def __init__(self, scene: Scene, points: List[Point], seed: int,
                 tolerances: Optional[Dict[str, float]] = None, workers: Optional[int] = None):
        self.scene = scene
        self.chart = scene.chart
        self.tau = scene.tau
        self.points = points
        self.seed = seed
        self.tolerances = dict(TOLERANCE_CONFIG)
        self.tolerances.update(scene.tolerances)
        self.tolerances.update(tolerances or {})
        self.workers = SAMPLING_CONFIG['workers'] if workers is None else workers
        self._frames: Optional[List[PointFrame]] = None
        self._jets: Optional[List[BendingJet]] = None
        self._stars: Dict[bool, Optional[ConditionStarSolution]] = {}

    @property
    def rank_tol(self) -> float:
        return self.tolerances['rank']

    @property
    def heavy_points(self) -> List[Point]:
        """The leading samples, used by checks that differentiate numerically or integrate."""
        return self.points[:EXTENSION_CONFIG['x_points']]

    def tol(self, key: str) -> float:
        return self.tolerances[key]

    def map(self, function: Callable, items: Sequence) -> List:
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(function, items))
        return [function(item) for item in items]

    def frames(self) -> List[PointFrame]:
        if self._frames is None:
            self._frames = self.map(lambda point: frame_at(self.chart, point, self.rank_tol), self.points)
        return self._frames

    def jets(self) -> List[BendingJet]:
        if self._jets is None:
            self._jets = self.map(lambda frame: bending_jet_from_frame(frame, self.tau), self.frames())
        return self._jets

    def jet(self, point: Point) -> BendingJet:
        return self.jets()[self.points.index(point)]

    def star(self, derivatives: bool) -> Optional[ConditionStarSolution]:
        if derivatives not in self._stars:
            spec = self.scene.star
            points = self.heavy_points if derivatives else self.points
            if spec is not None and spec.declared:
                solution = declared_star(self.chart, self.tau, spec.eta, spec.xi, points)
            else:
                reference = None if spec is None or spec.reference is None else np.array(spec.reference)
                solution = solve_condition_star(self.chart, self.tau, points, reference,
                                                derivatives=derivatives, rank_tol=self.rank_tol)
            self._stars[derivatives] = solution
        return self._stars[derivatives]

    def require_star(self) -> ConditionStarSolution:
        star = self.star(derivatives=True)
        if star is None:
            raise PreconditionError("Condition (*) has no solution on the samples")
        return star

    def pointwise(self, residuals: Sequence[float], tolerance: float, points: Optional[Sequence[Point]] = None,
                  **details) -> CheckOutcome:
        """Outcome of a residual that must stay below tolerance at every sample."""
        points = self.points if points is None else points
        if not residuals:
            return CheckOutcome(Outcome.PASS, 0.0, tolerance, details=details)
        worst = int(np.argmax(residuals))
        residual = float(residuals[worst])
        return CheckOutcome(Outcome.PASS if residual <= tolerance else Outcome.FAIL, residual, tolerance,
                            worst_point=points[worst].coords, details=details)


@dataclass(frozen=True)
class Check:
    name: str
    function: Callable[[VerificationContext], CheckOutcome]
    depends: Tuple[str, ...] = ()


CHECKS: Dict[str, Check] = {}


def check(name: str, depends: Sequence[str] = ()):
    def register(function: Callable[[VerificationContext], CheckOutcome]):
        CHECKS[name] = Check(name, function, tuple(depends))
        return function
    return register


def _not_applicable(reason: str) -> CheckOutcome:
    return CheckOutcome(Outcome.NOT_APPLICABLE, details={'reason': reason})


@check('frames')
def check_frames(ctx: VerificationContext) -> CheckOutcome:
    frames = ctx.frames()
    return ctx.pointwise([max(f.gauss_residual, f.codazzi_residual) for f in frames], ctx.tol('frame'))


@check('bending', depends=('frames',))
def check_bending(ctx: VerificationContext) -> CheckOutcome:
    residuals = [bending_residual(ctx.chart, ctx.tau, f.point, f) for f in ctx.frames()]
    return ctx.pointwise(residuals, ctx.tol('bending'))


@check('first_order_isometry', depends=('frames',))
def check_first_order_isometry(ctx: VerificationContext) -> CheckOutcome:
    residuals = [first_order_isometry_check(ctx.chart, ctx.tau, p, ISOMETRY_T) / ISOMETRY_T for p in ctx.points]
    return ctx.pointwise(residuals, ctx.tol('bending'), t=ISOMETRY_T)


@check('identities', depends=('bending',))
def check_identities(ctx: VerificationContext) -> CheckOutcome:
    table = [identity_residuals(ctx.chart, ctx.tau, jet.frame.point, jet) for jet in ctx.jets()]
    per_identity = {name: max(row[name] for row in table) for name in table[0]} if table else {}
    return ctx.pointwise([max(row.values()) for row in table], ctx.tol('pointwise'), identities=per_identity)


@check('b_variation', depends=('bending',))
def check_b_variation(ctx: VerificationContext) -> CheckOutcome:
    residuals = [b_variation_residual(ctx.chart, ctx.tau, jet.frame.point, jet=jet) for jet in ctx.jets()]
    return ctx.pointwise(residuals, ctx.tol('variation'))


@check('triviality', depends=('bending',))
def check_triviality(ctx: VerificationContext) -> CheckOutcome:
    if ctx.chart.codimension != 1:
        return _not_applicable(f"codimension {ctx.chart.codimension}")
    trivial, worst = triviality_test_hypersurface(ctx.chart, ctx.tau, ctx.points, ctx.tol('triviality'))
    return CheckOutcome(Outcome.PASS if trivial else Outcome.FAIL, worst, ctx.tol('triviality'),
                        details={'trivial': trivial})


@check('flatness_theta', depends=('frames',))
def check_flatness_theta(ctx: VerificationContext) -> CheckOutcome:
    thetas = [theta_from_jet(jet, ctx.rank_tol) for jet in ctx.jets()]
    return ctx.pointwise([t.flatness for t in thetas], ctx.tol('pointwise'),
                         nu_star=sorted({t.nu_star for t in thetas}))


@check('flatness_theta_hat', depends=('flatness_theta',))
def check_flatness_theta_hat(ctx: VerificationContext) -> CheckOutcome:
    dims = sorted({nullity_at(frame, ctx.rank_tol).first_normal_dim for frame in ctx.frames()})
    if len(dims) > 1:
        raise PreconditionError(f"Immersion is not 1-regular: first normal dimensions {dims}")
    residuals = [build_theta_hat(ctx.chart, ctx.tau, p, rank_tol=ctx.rank_tol).flatness for p in ctx.points]
    return ctx.pointwise(residuals, ctx.tol('pointwise'), first_normal_dim=dims[0] if dims else 0)


@check('moore', depends=('flatness_theta',))
def check_moore(ctx: VerificationContext) -> CheckOutcome:
    residuals = [theta_moore_check(theta_from_jet(jet, ctx.rank_tol), ctx.seed) for jet in ctx.jets()]
    return ctx.pointwise(residuals, ctx.tol('pointwise'))


@check('theta_rank', depends=('flatness_theta',))
def check_theta_rank(ctx: VerificationContext) -> CheckOutcome:
    """nu* over the samples; passes when it is constant."""
    values = sorted({theta_from_jet(jet, ctx.rank_tol).nu_star for jet in ctx.jets()})
    outcome = Outcome.PASS if len(values) == 1 else Outcome.FAIL
    return CheckOutcome(outcome, value=float(values[0]), details={'nu_star': values})


@check('decomposition', depends=('flatness_theta',))
def check_decomposition(ctx: VerificationContext) -> CheckOutcome:
    theta = theta_from_jet(ctx.jets()[0], ctx.rank_tol)
    try:
        result = main_decomposition(theta.form, ctx.rank_tol, ctx.tol('pointwise'), seed=ctx.seed)
    except PreconditionError as e:
        return _not_applicable(str(e))
    holds = decomposition_holds(result, ctx.tol('pointwise'))
    residual = max(result.checks['b2_flatness'], result.checks['b1_isotropy'])
    return CheckOutcome(Outcome.PASS if holds else Outcome.FAIL, residual, ctx.tol('pointwise'),
                        worst_point=ctx.points[0].coords, value=float(result.ell),
                        details={'checks': result.checks, 'messages': result.messages})


@check('above_vanish', depends=('bending',))
def check_above_vanish(ctx: VerificationContext) -> CheckOutcome:
    residuals = []
    for jet in ctx.jets():
        above = above_identity_check(ctx.chart, ctx.tau, jet.frame.point, seed=ctx.seed, jet=jet)
        vanish = vanish_identity_check(ctx.chart, ctx.tau, jet.frame.point, seed=ctx.seed, rank_tol=ctx.rank_tol)
        residuals.append(max(above, vanish))
    return ctx.pointwise(residuals, ctx.tol('pointwise'))


@check('normal_pair', depends=('flatness_theta',))
def check_normal_pair(ctx: VerificationContext) -> CheckOutcome:
    if ctx.chart.codimension != 2:
        return _not_applicable(f"codimension {ctx.chart.codimension}")
    theta = theta_from_jet(ctx.jets()[0], ctx.rank_tol)
    pair = isotropic_normal_pair(theta, ctx.rank_tol)
    if pair is None:
        return CheckOutcome(Outcome.FAIL, details={'reason': "no isotropic pair annihilates theta"})
    branch = almost_branch(theta, pair, ctx.tol('pointwise'))
    details = {'branch': branch['branch']}
    if 'orthogonality' in branch:
        details['orthogonality'] = branch['orthogonality']
    outcome = Outcome.PASS if pair.residual <= ctx.tol('pointwise') else Outcome.FAIL
    return CheckOutcome(outcome, pair.residual, ctx.tol('pointwise'), worst_point=ctx.points[0].coords,
                        details=details)


@check('condition_star', depends=('bending',))
def check_condition_star(ctx: VerificationContext) -> CheckOutcome:
    star = ctx.star(derivatives=False)
    if star is None:
        return CheckOutcome(Outcome.FAIL, details={'reason': "no solution at some sample"})
    E = ctx.chart.epsilon
    residuals = [s.residual if star_is_valid(s, E, ctx.tol('pointwise')) else float('inf') for s in star.points]
    return ctx.pointwise(residuals, ctx.tol('pointwise'), [s.point for s in star.points],
                         candidates=max(s.candidates for s in star.points))


@check('lbar', depends=('condition_star',))
def check_lbar(ctx: VerificationContext) -> CheckOutcome:
    star = ctx.require_star()
    residuals = [extend_L_bar(ctx.jet(s.point), s).skew_residual for s in star.points]
    return ctx.pointwise(residuals, ctx.tol('exact'), [s.point for s in star.points])


@check('varphi', depends=('lbar',))
def check_varphi(ctx: VerificationContext) -> CheckOutcome:
    star = ctx.require_star()
    residuals, kernel_dims = [], []
    for s in star.points:
        varphi = build_varphi(ctx.jet(s.point), extend_L_bar(ctx.jet(s.point), s), ctx.seed)
        residuals.append(max(varphi.flatness, varphi.alpha_r_residual))
        kernel_dims.append(varphi.kernel.shape[1])
    n, p = ctx.chart.n, ctx.chart.codimension
    bound = n + 3 - 2 * p
    outcome = ctx.pointwise(residuals, ctx.tol('pointwise'), [s.point for s in star.points],
                            kernel_bound=bound)
    outcome.value = float(min(kernel_dims))
    if min(kernel_dims) < bound:
        outcome.outcome = Outcome.FAIL
    return outcome


@check('impext', depends=('lbar',))
def check_impext(ctx: VerificationContext) -> CheckOutcome:
    if ctx.scene.section is None:
        return _not_applicable("scene declares no section")
    star = ctx.require_star()
    residuals = [impext_identity_check(ctx.jet(s.point), extend_L_bar(ctx.jet(s.point), s, ctx.scene.section))
                 for s in star.points]
    return ctx.pointwise(residuals, 10.0 * ctx.tol('pointwise'), [s.point for s in star.points])


@check('extension', depends=('bending',))
def check_extension(ctx: VerificationContext) -> CheckOutcome:
    section = ctx.scene.section
    if section is None:
        return _not_applicable("scene declares no section")
    star = ctx.require_star() if section.coefficient is not None else None
    spec = ctx.scene.star
    declared = spec is not None and spec.declared
    scene = build_singular_extension(ctx.chart, ctx.tau, section, ctx.heavy_points, star,
                                     eta=spec.eta if declared else None, xi=spec.xi if declared else None,
                                     tol=ctx.tol('pointwise'), rank_tol=ctx.rank_tol)
    immersive = [s for s in scene.samples if s.immersive]
    details = {'samples': len(scene.samples), 'excluded': len(scene.excluded),
               'identities': {name: scene.worst(name) for name in ('tt', 'tx', 'xx')},
               'symbolic': None if scene.F is None else scene.worst('symbolic')}
    if not immersive:
        return CheckOutcome(Outcome.FAIL, details=dict(details, reason="no sample is an immersion point"))
    residuals = [max(s.identities.values()) for s in immersive]
    return ctx.pointwise(residuals, ctx.tol('pointwise'), [s.point for s in immersive], **details)


@check('ruling', depends=('frames',))
def check_ruling(ctx: VerificationContext) -> CheckOutcome:
    spec = ctx.scene.ruling
    if spec is None:
        return _not_applicable("scene declares no ruling")
    distribution = relative_nullity(ctx.chart) if spec.distribution == 'relative_nullity' \
        else bending_nullity(ctx.chart, ctx.tau)
    result = ruling_check(ctx.chart, distribution, ctx.heavy_points, spec.bound)
    residual = max(result.totally_geodesic, result.affine_leaf)
    holds = residual <= ctx.tol('pointwise') and result.meets_bound
    return CheckOutcome(Outcome.PASS if holds else Outcome.FAIL, residual, ctx.tol('pointwise'),
                        value=float(result.dimension),
                        details={'bound': result.bound, 'bound_name': result.bound_name,
                                 'totally_geodesic': result.totally_geodesic,
                                 'affine_leaf': result.affine_leaf})


@check('splitting', depends=('bending',))
def check_splitting(ctx: VerificationContext) -> CheckOutcome:
    spec = ctx.scene.geodesic
    if spec is None:
        return _not_applicable("scene declares no geodesic")
    data = splitting_tensor_check(ctx.chart, ctx.tau, spec.x0, spec.v, spec.t_max, rank_tol=ctx.rank_tol)
    residual = max(data.riccati_residual, data.jacobi_residual, data.transport_angle)
    holds = residual <= ctx.tol('integration') and data.drift <= DRIFT_TOL
    return CheckOutcome(Outcome.PASS if holds else Outcome.FAIL, residual, ctx.tol('integration'),
                        worst_point=tuple(float(c) for c in spec.x0),
                        details={'riccati': data.riccati_residual, 'jacobi': data.jacobi_residual,
                                 'transport_angle': data.transport_angle, 'drift': data.drift,
                                 'samples': len(data.times)})


@check('cone', depends=('frames',))
def check_cone(ctx: VerificationContext) -> CheckOutcome:
    spec = ctx.scene.cone
    if spec is None:
        return _not_applicable("scene is not a cone")
    base_points = [Point.of(p.coords[:-1]) for p in ctx.heavy_points]
    lift = cone_lift(spec.chart, spec.tau, spec.sign, base_points, tol=ctx.tol('pointwise'))
    consistency = max(
        float(np.max(np.abs(eval_vector_jet(ctx.chart.components, p, order=0).value
                            - eval_vector_jet(lift.chart.components, p, order=0).value)))
        for p in ctx.heavy_points)
    residual = max(lift.position_orthogonality, consistency)
    holds = (lift.bending <= ctx.tol('bending') and residual <= ctx.tol('pointwise')
             and cone_signature_ok(lift))
    return CheckOutcome(Outcome.PASS if holds else Outcome.FAIL, max(residual, lift.bending),
                        ctx.tol('pointwise'),
                        details={'bending': lift.bending, 'position_orthogonality': lift.position_orthogonality,
                                 'chart_consistency': consistency, 'tangent_index': lift.tangent_index,
                                 'normal_signs': list(lift.normal_signs)})

