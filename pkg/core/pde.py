"""
Exact simulation of the boundary-controlled transport PDE and the operator
probes of its state space.

The flux w = lambda0 z is transported unchanged along characteristics, so in
travel-time coordinates the boundary trace obeys the delay recursion
w(1, t + p(1)) = w(0, t) = (A_d + B_d F) w(1, t) under the feedback
u = F w(1, t). One period of the trace is obtained from z0 and every later
period is a matrix multiple of it: no CFL condition, no numerical diffusion.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core import numerics
from core.exceptions import DimensionMismatch, OutOfDomain, OverflowGuard, UnstableMatrix
from core.model import StateFunction, integrate_samples, travel_time_inverse, weighted_inner_product
from core.numerics import TOLERANCES, adjoint
from core.riccati import closed_loop_lyapunov

logger = logging.getLogger(__name__)

# The recursion below only forms e^{-s dp}, so only absurd s are refused.
MAX_SP1 = 1e6
SERIES_CUTOFF = 1e-4


@dataclass(frozen=True, eq=False)
class TravelTimeTrace:
    """Samples of w(1, t) = (lambda0 z)(1, t) at t = k dt."""
    dt: float
    samples: np.ndarray

    @property
    def times(self):
        return self.dt * np.arange(self.samples.shape[0])


@dataclass(frozen=True, eq=False)
class SimulationResult:
    trace: TravelTimeTrace
    inputs: np.ndarray
    outputs: np.ndarray
    measured_cost: float
    tail_cost: Optional[float]
    predicted_cost: Optional[float]
    gain_used: np.ndarray
    period_costs: list
    stable: bool

    @property
    def total_cost(self):
        return self.measured_cost + (self.tail_cost or 0.0)


@dataclass(frozen=True)
class CostReport:
    value: float
    certified: bool


@dataclass(frozen=True, eq=False)
class YosidaProbe:
    s_values: list
    values: list
    target: np.ndarray
    errors: list


def _interpolate_columns(x, xp, columns):
    """np.interp per column, real and imaginary parts separately."""
    result = np.empty((np.size(x), columns.shape[1]), dtype=columns.dtype)
    for j in range(columns.shape[1]):
        column = columns[:, j]
        interpolated = np.interp(x, xp, column.real)
        if np.iscomplexobj(columns):
            interpolated = interpolated + 1j * np.interp(x, xp, column.imag)
        result[:, j] = interpolated
    return result


def initial_trace(profile, z0, points_per_period, include_endpoint=False):
    """
    h(t_k) = (lambda0 z0)(p^{-1}(p(1) - t_k)) for t_k = k p(1)/points_per_period,
    k = 0 .. points_per_period - 1 (and the left limit at t = p(1) when
    include_endpoint is set).
    """
    if z0.values.shape[0] != profile.points:
        raise OutOfDomain(f"z0 has {z0.values.shape[0]} samples, the profile grid {profile.points}")
    p1 = profile.p1
    count = points_per_period + 1 if include_endpoint else points_per_period
    times = p1 / points_per_period * np.arange(count)
    positions = travel_time_inverse(profile, np.clip(p1 - times, 0.0, p1))
    flux = z0.values * profile.values[:, None]
    return _interpolate_columns(positions, profile.grid, flux)


def _segment_cost(segment, gain, output_map, dt):
    """int over one period of ||F w||^2 + ||(C_d + D_d F) w||^2."""
    integrand = np.sum(np.abs(segment @ gain.T) ** 2, axis=1) + np.sum(np.abs(segment @ output_map.T) ** 2, axis=1)
    return float(integrate_samples(integrand, dt * np.arange(segment.shape[0])))


def simulate_closed_loop(profile, quad, F, z0, periods, points_per_period, require_tail=True):
    """
    Run the closed loop u = F w(1, t) for `periods` delays. The trace holds
    periods * points_per_period + 1 samples; the sample at t = k p(1) is the
    right limit (start of period k).

    measured_cost integrates period by period (the trace may jump at period
    boundaries); tail_cost is the exact remainder int h_K* Sigma_F h_K over
    one period with h_K the first unsimulated period.
    """
    F = numerics.as_matrix(F)
    if F.shape != (quad.inputs, quad.n):
        raise DimensionMismatch(f"gain has shape {F.shape}, expected {(quad.inputs, quad.n)}")
    A_cl = quad.A_d + quad.B_d @ F
    output_map = quad.C_d + quad.D_d @ F
    dt = profile.p1 / points_per_period

    stable = numerics.spectral_radius(A_cl) < 1 - TOLERANCES.stability_margin
    if not stable and require_tail:
        raise UnstableMatrix(f"closed loop spectral radius {numerics.spectral_radius(A_cl):.12g}: no finite tail")

    segment = initial_trace(profile, z0, points_per_period, include_endpoint=True)
    segment = segment.astype(np.result_type(segment, A_cl, float))
    blocks, period_costs = [], []
    for _ in range(periods):
        blocks.append(segment[:-1])
        period_costs.append(_segment_cost(segment, F, output_map, dt))
        segment = segment @ A_cl.T
    blocks.append(segment[:1])
    samples = np.concatenate(blocks, axis=0)

    tail_cost = predicted_cost = None
    if stable:
        sigma = closed_loop_lyapunov(quad, F)
        tail_integrand = np.real(np.einsum('ki,ij,kj->k', np.conj(segment), sigma, segment))
        tail_cost = float(integrate_samples(tail_integrand, dt * np.arange(segment.shape[0])))
        predicted_cost = float(np.real(weighted_inner_product(z0.map(sigma), z0, profile)))
    else:
        logger.warning("closed loop is not stable; simulating without the tail cost")

    return SimulationResult(
        trace=TravelTimeTrace(dt=dt, samples=samples),
        inputs=samples @ F.T,
        outputs=samples @ output_map.T,
        measured_cost=float(sum(period_costs)),
        tail_cost=tail_cost,
        predicted_cost=predicted_cost,
        gain_used=F,
        period_costs=period_costs,
        stable=stable,
    )


def cost_exact(profile, quad, F, z0):
    """J(F) = <Sigma_F z0, z0>_X = int z0* lambda0 Sigma_F z0."""
    sigma = closed_loop_lyapunov(quad, F)
    return float(np.real(weighted_inner_product(z0.map(sigma), z0, profile)))


def optimal_cost(profile, care, z0, uniqueness=None):
    """
    <z0, Pi z0>_X. Without a positive uniqueness report the value is only a
    candidate and is flagged as not certified.
    """
    value = float(np.real(weighted_inner_product(z0.map(care.Pi), z0, profile)))
    certified = bool(uniqueness is not None and uniqueness.unique)
    if not certified:
        logger.warning("optimal cost reported without a uniqueness certificate")
    return CostReport(value=value, certified=certified)


# ===== RESOLVENT OF A* =====
def _fitted_weights(x):
    """
    int_0^1 e^{-x t} (1 - t) dt and int_0^1 e^{-x t} t dt, with a series
    below SERIES_CUTOFF to avoid cancellation.
    """
    small = np.abs(x) < SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    phi0 = np.where(small, 1 - x / 2 + x * x / 6, -np.expm1(-safe) / safe)
    phi1 = np.where(small, 0.5 - x / 3 + x * x / 8, (1 - (1 + safe) * np.exp(-safe)) / (safe * safe))
    return phi0 - phi1, phi1


def _tail_transforms(profile, s, values):
    """
    I(zeta_j) = int_{zeta_j}^1 e^{-s (p(eta) - p(zeta_j))} g(eta) d eta at every
    grid point, by backward recursion over cells with g and p linear on each
    cell and the exponential integrated exactly.
    """
    h = np.diff(profile.grid)
    dp = np.diff(profile.cumulative)
    x = s * dp
    w_left, w_right = _fitted_weights(x)
    decay = np.exp(-x)
    cells = h[:, None] * (w_left[:, None] * values[:-1] + w_right[:, None] * values[1:])
    transforms = np.zeros_like(values, dtype=np.result_type(values, float))
    for j in range(profile.points - 2, -1, -1):
        transforms[j] = cells[j] + decay[j] * transforms[j + 1]
    return transforms


def apply_resolvent_adjoint(profile, quad, s, g):
    """
    ((sI - A*)^{-1} g)(zeta) = lambda0(zeta)^{-1} [ e^{-s (p(1) - p(zeta))} A_d* (I - e^{-s p(1)} A_d*)^{-1} c
                                                    + int_zeta^1 e^{-s (p(eta) - p(zeta))} g(eta) d eta ]
    with c = int_0^1 e^{-s p(eta)} g(eta) d eta, for real s > 0. The travel
    time between zeta and eta is read as p(eta) - p(zeta).
    """
    s = float(s)
    p1 = profile.p1
    if not np.isfinite(s) or s <= 0:
        raise OutOfDomain(f"resolvent parameter must be a positive real, got {s}")
    if s * p1 > MAX_SP1:
        raise OverflowGuard(f"s p(1) = {s * p1:.3e} exceeds {MAX_SP1:.0e}")
    if g.values.shape != (profile.points, quad.n):
        raise DimensionMismatch(f"g has shape {g.values.shape}, expected {(profile.points, quad.n)}")

    transforms = _tail_transforms(profile, s, g.values)
    A_adj = adjoint(quad.A_d)
    boundary = numerics.solve_linear(np.eye(quad.n) - np.exp(-s * p1) * A_adj, transforms[0])
    reach = np.exp(-s * (p1 - profile.cumulative))
    flux = reach[:, None] * (boundary @ A_adj.T)[None, :] + transforms
    return StateFunction(profile.grid, flux / profile.values[:, None])


def apply_b_star(profile, quad, g):
    """B* g = B_d* (lambda0 g)(0)."""
    return adjoint(quad.B_d) @ (profile.values[0] * g.values[0])


def yosida_probe(profile, quad, g, s_list):
    """
    B* s (sI - A*)^{-1} g for growing s, against the Yosida extension
    B*_w g = B_d* (lambda0 g)(0+) (the grid value at zeta = 0).
    """
    target = apply_b_star(profile, quad, g)
    s_values, values, errors = [], [], []
    for s in s_list:
        resolved = apply_resolvent_adjoint(profile, quad, s, g)
        value = adjoint(quad.B_d) @ (profile.values[0] * float(s) * resolved.values[0])
        s_values.append(float(s))
        values.append(value)
        errors.append(float(np.linalg.norm(value - target)))
    return YosidaProbe(s_values=s_values, values=values, target=target, errors=errors)
