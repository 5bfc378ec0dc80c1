"""Splitting tensor of the bending nullity Delta* along a geodesic tangent to it.

The geodesic and a Levi-Civita transported frame are integrated together with
a classical fourth-order Runge-Kutta scheme. At the sampled steps C is solved
from theta(C_S X, Y) = (nabla_X theta)(S, Y) with S the geodesic velocity.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from config.settings import GEODESIC_CONFIG, TOLERANCE_CONFIG
from src.bending.tensors import bending_jet_at, normal_derivative_beta
from src.errors import ChartExitError, PreconditionError
from src.forms.indefinite import distance_to_span
from src.forms.theta import theta_from_jet
from src.geometry.nullity import kernel
from src.geometry.submanifold import christoffel_at
from src.models.bending import BendingJet
from src.models.chart import BendingField, ImmersionChart
from src.models.extension import SplittingData
from src.models.forms import ThetaData
from src.models.jet import Point

logger = logging.getLogger(__name__)

State = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _norm(matrix: np.ndarray) -> float:
    return float(np.linalg.norm(matrix, 2)) if matrix.size else 0.0


def _geodesic_rhs(chart: ImmersionChart, state: State) -> State:
    x, u, frame = state
    if not chart.contains(x):
        raise ChartExitError(f"Geodesic leaves the chart box at {Point.of(x)}")
    _, gamma = christoffel_at(chart, x)
    return (u, -np.einsum('kij,i,j->k', gamma, u, u),
            -np.einsum('kij,i,jm->km', gamma, u, frame))


def _rk4_step(chart: ImmersionChart, state: State, h: float) -> State:
    def shifted(base: State, slope: State, c: float) -> State:
        return tuple(b + c * s for b, s in zip(base, slope))

    k1 = _geodesic_rhs(chart, state)
    k2 = _geodesic_rhs(chart, shifted(state, k1, h / 2))
    k3 = _geodesic_rhs(chart, shifted(state, k2, h / 2))
    k4 = _geodesic_rhs(chart, shifted(state, k3, h))
    return tuple(s + h / 6.0 * (a + 2 * b + 2 * c + d) for s, a, b, c, d in zip(state, k1, k2, k3, k4))


def _g_orthonormal(basis: np.ndarray, metric: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return basis
    d, U = np.linalg.eigh(basis.T @ metric @ basis)
    if np.min(d) <= 0.0:
        raise PreconditionError("Splitting check needs a positive definite induced metric")
    return basis @ U / np.sqrt(d)


def _complement(delta_star: np.ndarray, metric: np.ndarray) -> np.ndarray:
    n = metric.shape[0]
    if delta_star.shape[1] == 0:
        return np.eye(n)
    return kernel(delta_star.T @ metric, n, scale=1.0)


def _delta_projector(delta_star: np.ndarray, metric: np.ndarray) -> np.ndarray:
    if delta_star.shape[1] == 0:
        return np.zeros_like(metric)
    inner = delta_star.T @ metric @ delta_star
    return delta_star @ np.linalg.solve(inner, delta_star.T @ metric)


def splitting_operator(jet: BendingJet, theta: ThetaData, s: np.ndarray) -> np.ndarray:
    """C_S as an (n, n) matrix on coordinate vectors, with values in E."""
    frame = jet.frame
    n = frame.n
    signs = frame.normal_signs

    def coords(tensor: np.ndarray) -> np.ndarray:
        return np.einsum('a,Aa,A,Aijk->aijk', signs, frame.normal, frame.epsilon, tensor)

    nabla_alpha = coords(frame.nabla_alpha)
    nabla_beta = coords(normal_derivative_beta(jet))
    nabla_theta = np.concatenate([nabla_alpha + nabla_beta, nabla_alpha - nabla_beta])
    system = theta.form.values.transpose(0, 2, 1).reshape(-1, n)
    rhs = np.einsum('cijk,j->cki', nabla_theta, s).reshape(-1, n)
    C = linalg.lstsq(system, rhs)[0]
    return (np.eye(n) - _delta_projector(theta.delta_star, frame.metric)) @ C


def _principal_angle(transported: np.ndarray, current: np.ndarray, metric: np.ndarray) -> float:
    if transported.shape[1] == 0:
        return 0.0
    upper = linalg.cholesky(metric)
    return float(np.max(linalg.subspace_angles(upper @ transported, upper @ current)))


class _Sampler:
    """Theta data and the splitting tensor in the transported E frame."""

    def __init__(self, chart: ImmersionChart, tau: BendingField, nu_star: int, rank_tol: Optional[float]):
        self.chart = chart
        self.tau = tau
        self.nu_star = nu_star
        self.rank_tol = rank_tol

    def theta(self, x: np.ndarray) -> Tuple[BendingJet, ThetaData]:
        jet = bending_jet_at(self.chart, self.tau, x)
        theta = theta_from_jet(jet, self.rank_tol)
        if theta.nu_star != self.nu_star:
            raise PreconditionError(
                f"Bending nullity jumps from {self.nu_star} to {theta.nu_star} at {jet.frame.point}")
        return jet, theta

    def sample(self, state: State):
        x, u, frame = state
        jet, theta = self.theta(x)
        metric = jet.frame.metric
        transported = frame[:, self.nu_star:]
        C = splitting_operator(jet, theta, u)
        C_frame = transported.T @ metric @ C @ transported
        off_leaf = (np.eye(len(x)) - _delta_projector(theta.delta_star, metric)) @ u
        drift = float(np.sqrt(max(off_leaf @ metric @ off_leaf, 0.0)))
        angle = _principal_angle(frame[:, :self.nu_star], theta.delta_star, metric)
        return C_frame, drift, angle


def splitting_tensor_check(chart: ImmersionChart, tau: BendingField, x0, v, t_max: float,
                           step: Optional[float] = None, sample_every: Optional[int] = None,
                           tol: Optional[float] = None, rank_tol: Optional[float] = None) -> SplittingData:
    """Integrate the unit speed geodesic from x0 along v in Delta* and check the Riccati equation."""
    step = GEODESIC_CONFIG['step'] if step is None else step
    sample_every = GEODESIC_CONFIG['sample_every'] if sample_every is None else sample_every
    tol = TOLERANCE_CONFIG['pointwise'] if tol is None else tol
    if t_max <= 0.0 or step <= 0.0:
        raise ValueError(f"Expected positive t_max and step, got {t_max} and {step}")
    steps = int(np.ceil(t_max / step))
    if steps < 2:
        raise ValueError(f"Expected at least two integration steps, got {steps}")
    h = t_max / steps

    point = x0 if isinstance(x0, Point) else Point.of(x0)
    x = point.array
    jet = bending_jet_at(chart, tau, point)
    theta = theta_from_jet(jet, rank_tol)
    v = np.asarray(v, dtype=float)
    if distance_to_span(v / np.linalg.norm(v), theta.delta_star) > tol:
        raise PreconditionError(f"Initial velocity is not in the bending nullity at {point}")
    metric = jet.frame.metric
    speed = float(v @ metric @ v)
    if speed <= 0.0:
        raise PreconditionError(f"Initial velocity is not spacelike at {point}")
    u = v / np.sqrt(speed)
    frame = np.column_stack([_g_orthonormal(theta.delta_star, metric),
                             _g_orthonormal(_complement(theta.delta_star, metric), metric)])

    trajectory: List[State] = [(x, u, frame)]
    for _ in range(steps):
        trajectory.append(_rk4_step(chart, trajectory[-1], h))
    logger.info("integrated %d geodesic steps from %s", steps, point)

    sampler = _Sampler(chart, tau, theta.nu_star, rank_tol)
    C0, _, _ = sampler.sample(trajectory[0])
    identity = np.eye(C0.shape[0])
    indices = list(range(sample_every, steps, sample_every)) or [steps // 2]
    splitting, times, riccati, jacobi, drift, angle = [], [], 0.0, 0.0, 0.0, 0.0
    for k in indices:
        C, off_leaf, transport = sampler.sample(trajectory[k])
        C_next = sampler.sample(trajectory[k + 1])[0]
        C_prev = sampler.sample(trajectory[k - 1])[0]
        t = k * h
        riccati = max(riccati, _norm((C_next - C_prev) / (2 * h) - C @ C))
        jacobi = max(jacobi, _norm(C @ (identity - t * C0) - C0))
        drift, angle = max(drift, off_leaf), max(angle, transport)
        splitting.append(C)
        times.append(t)
        logger.debug("t=%.3f riccati=%.2e drift=%.2e", t, riccati, off_leaf)

    return SplittingData(
        times=np.array(times),
        positions=np.array([trajectory[k][0] for k in indices]),
        velocities=np.array([trajectory[k][1] for k in indices]),
        splitting=splitting,
        riccati_residual=riccati,
        transport_angle=angle,
        jacobi_residual=jacobi,
        drift=drift,
    )
