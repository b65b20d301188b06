"""
The boundary-controlled transport system

    dz/dt = -d/dzeta (lambda0 z) + M z,   z(., 0) = z0
    [0; I] u = -K lambda0(0) z(0) - L lambda0(1) z(1)
    y = -K_y lambda0(0) z(0) - L_y lambda0(1) z(1)

on [0, 1], its validation, the change of variables that removes M, travel
times along characteristics, and the reduction to the discrete quadruple
(A_d, B_d, C_d, D_d).
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from core import numerics
from core.exceptions import (
    DimensionMismatch, NonPositiveSpeed, OutOfDomain, SingularK, SingularMatrix,
    SingularQ, ZeroOrderTermPresent,
)

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 2001
DOMAIN_SLACK = 1e-12


def _frozen(array):
    array = np.array(array)
    array.setflags(write=False)
    return array


# ===== SPATIAL PROFILE =====
@dataclass(frozen=True, eq=False)
class SpatialProfile:
    """
    Scalar transport speed lambda0 sampled on a grid of [0, 1], with the
    travel-time map p(zeta) = int_0^zeta 1/lambda0 precomputed by the
    trapezoid rule.
    """
    grid: np.ndarray
    values: np.ndarray
    epsilon: float = field(init=False)
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise DimensionMismatch(f"grid has shape {grid.shape}, speed samples {values.shape}")
        if grid.size < 2 or grid[0] != 0.0 or grid[-1] != 1.0:
            raise DimensionMismatch("grid must start at 0, end at 1 and hold at least two points")
        if np.any(np.diff(grid) <= 0):
            raise DimensionMismatch("grid must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.min(values) <= 0:
            raise NonPositiveSpeed(f"lambda0 must be positive, minimum sample is {np.min(values)}")

        object.__setattr__(self, 'grid', _frozen(grid))
        object.__setattr__(self, 'values', _frozen(values))
        object.__setattr__(self, 'epsilon', float(np.min(values)))
        object.__setattr__(self, 'cumulative', _frozen(
            integrate.cumulative_trapezoid(1.0 / values, grid, initial=0.0)
        ))

    @property
    def points(self):
        return self.grid.size

    @property
    def p1(self):
        """Total travel time p(1), the delay of the system."""
        return float(self.cumulative[-1])

    def speed_at(self, zeta):
        return np.interp(zeta, self.grid, self.values)


def constant_profile(value, points=DEFAULT_GRID_POINTS):
    grid = np.linspace(0.0, 1.0, points)
    return SpatialProfile(grid, np.full(points, float(value)))


def affine_profile(a, b, points=DEFAULT_GRID_POINTS):
    """lambda0(zeta) = a + b zeta."""
    grid = np.linspace(0.0, 1.0, points)
    return SpatialProfile(grid, a + b * grid)


def sampled_profile(grid, values):
    return SpatialProfile(grid, values)


def travel_time(profile, zeta):
    """p(zeta), linearly interpolated between grid points."""
    zeta_array = np.asarray(zeta, dtype=float)
    if np.any(zeta_array < -DOMAIN_SLACK) or np.any(zeta_array > 1 + DOMAIN_SLACK):
        raise OutOfDomain(f"position {zeta} outside [0, 1]")
    result = np.interp(np.clip(zeta_array, 0.0, 1.0), profile.grid, profile.cumulative)
    return float(result) if result.ndim == 0 else result


def travel_time_inverse(profile, tau):
    """
    p^{-1}(tau): bisection on the monotone cumulative table followed by
    linear interpolation inside the bracketing cell.
    """
    tau_array = np.asarray(tau, dtype=float)
    p1 = profile.p1
    if np.any(tau_array < -DOMAIN_SLACK) or np.any(tau_array > p1 + DOMAIN_SLACK * (1 + p1)):
        raise OutOfDomain(f"travel time {tau} outside [0, {p1}]")
    tau_array = np.clip(tau_array, 0.0, p1)
    cumulative = profile.cumulative
    cell = np.clip(np.searchsorted(cumulative, tau_array, side='right') - 1, 0, profile.points - 2)
    left, right = cumulative[cell], cumulative[cell + 1]
    weight = (tau_array - left) / (right - left)
    result = profile.grid[cell] + weight * (profile.grid[cell + 1] - profile.grid[cell])
    return float(result) if result.ndim == 0 else result


# ===== STATE FUNCTIONS =====
@dataclass(frozen=True, eq=False)
class StateFunction:
    """A C^n-valued function on the profile grid, one row per grid point."""
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.shape[0] != np.asarray(self.grid).size:
            raise DimensionMismatch(f"{values.shape[0]} samples for a grid of {np.asarray(self.grid).size} points")
        object.__setattr__(self, 'grid', _frozen(self.grid))
        object.__setattr__(self, 'values', _frozen(values))

    @property
    def n(self):
        return self.values.shape[1]

    @classmethod
    def constant(cls, grid, vector):
        vector = np.atleast_1d(np.asarray(vector))
        return cls(grid, np.tile(vector, (np.asarray(grid).size, 1)))

    @classmethod
    def from_callable(cls, grid, function):
        """Sample `function(zeta) -> vector` at every grid point."""
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.array([np.atleast_1d(function(zeta)) for zeta in grid]))

    def map(self, matrix):
        """Pointwise product matrix @ f(zeta)."""
        return StateFunction(self.grid, self.values @ np.asarray(matrix).T)


def integrate_samples(samples, grid):
    """Composite Simpson on odd point counts, trapezoid otherwise."""
    if np.asarray(grid).size % 2 == 1:
        return integrate.simpson(samples, x=grid, axis=0)
    return integrate.trapezoid(samples, x=grid, axis=0)


def weighted_inner_product(f, g, profile):
    """<f, g>_X = int_0^1 g(zeta)* lambda0(zeta) f(zeta) dzeta."""
    if f.values.shape != g.values.shape or f.values.shape[0] != profile.points:
        raise DimensionMismatch(f"cannot pair {f.values.shape} with {g.values.shape} on {profile.points} points")
    integrand = np.einsum('ki,ki->k', np.conj(g.values), f.values) * profile.values
    return complex(integrate_samples(integrand, profile.grid))


# ===== BOUNDARY SYSTEM =====
@dataclass(frozen=True, eq=False)
class BoundarySystem:
    """
    Boundary matrices of the PDE. The inputs enter through the last
    `inputs` rows of the boundary relation. M, when given, is an array of
    shape (grid points, n, n) on the profile grid.
    """
    K: np.ndarray
    L: np.ndarray
    K_y: np.ndarray
    L_y: np.ndarray
    lambda0: SpatialProfile
    inputs: int
    M: np.ndarray = None

    def __post_init__(self):
        for name in ('K', 'L', 'K_y', 'L_y'):
            object.__setattr__(self, name, _frozen(numerics.as_matrix(getattr(self, name))))
        if self.M is not None:
            object.__setattr__(self, 'M', _frozen(self.M))

    @property
    def n(self):
        return self.K.shape[0]

    @property
    def outputs(self):
        return self.K_y.shape[0]

    @property
    def has_zero_order_term(self):
        return self.M is not None and np.any(self.M)

    def input_selector(self):
        """The n x inputs block [0; I]."""
        return np.eye(self.n)[:, self.n - self.inputs:]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    condition_number: float
    epsilon: float


def validate(system):
    n, m = system.n, system.outputs
    expected = {'K': (n, n), 'L': (n, n), 'K_y': (m, n), 'L_y': (m, n)}
    for name, shape in expected.items():
        actual = getattr(system, name).shape
        if actual != shape:
            raise DimensionMismatch(f"{name} has shape {actual}, expected {shape}")
    if not 0 <= system.inputs <= n:
        raise DimensionMismatch(f"{system.inputs} inputs for {n} state components")
    if system.M is not None and system.M.shape != (system.lambda0.points, n, n):
        raise DimensionMismatch(f"M has shape {system.M.shape}, expected {(system.lambda0.points, n, n)}")
    if np.min(system.lambda0.values) <= 0:
        raise NonPositiveSpeed("lambda0 must be positive")

    condition = float(np.linalg.cond(system.K)) if n else 1.0
    if not np.isfinite(condition) or condition * numerics.TOLERANCES.pivot >= 1:
        raise SingularK(f"K is singular (condition number {condition:.3e})")
    return ValidationReport(ok=True, condition_number=condition, epsilon=system.lambda0.epsilon)


def q_profile(system):
    """
    Q(zeta) at every grid point, shape (points, n, n), for the change of
    variables z~ = Q z with Q' = -lambda0^{-1} Q M, Q(0) = I, integrated by
    classical RK4 on the grid (M and lambda0 interpolated linearly at half
    steps). The identity everywhere when M is absent or zero.
    """
    n, points = system.n, system.lambda0.points
    if not system.has_zero_order_term:
        return np.broadcast_to(np.eye(n), (points, n, n)).copy()

    grid, speed, M = system.lambda0.grid, system.lambda0.values, system.M

    def rate(Q, M_at, speed_at):
        return -(Q @ M_at) / speed_at

    Q = np.eye(n, dtype=np.result_type(M, float))
    profile = np.empty((points, n, n), dtype=Q.dtype)
    profile[0] = Q
    for k in range(points - 1):
        h = grid[k + 1] - grid[k]
        M_mid = (M[k] + M[k + 1]) / 2
        speed_mid = (speed[k] + speed[k + 1]) / 2
        k1 = rate(Q, M[k], speed[k])
        k2 = rate(Q + h / 2 * k1, M_mid, speed_mid)
        k3 = rate(Q + h / 2 * k2, M_mid, speed_mid)
        k4 = rate(Q + h * k3, M[k + 1], speed[k + 1])
        Q = Q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        profile[k + 1] = Q
    return profile


def transform_state(z, Q):
    """z~(zeta) = Q(zeta) z(zeta) for a profile Q from q_profile."""
    return StateFunction(z.grid, np.einsum('kij,kj->ki', Q, z.values))


def q_transform(system, Q=None):
    """
    Remove the zero-order term with z~ = Q z (see q_profile; a profile
    already computed may be passed as Q).

    Since Q(0) = I the boundary relations become
    K~ = K, L~ = L Q(1)^{-1}, K~_y = K_y, L~_y = L_y Q(1)^{-1}.

    Returns the transformed system (M = None) and Q(1). States of the
    original system map to the transformed one through transform_state.
    """
    n = system.n
    if not system.has_zero_order_term:
        return BoundarySystem(system.K, system.L, system.K_y, system.L_y, system.lambda0, system.inputs), np.eye(n)

    Q1 = (q_profile(system) if Q is None else Q)[-1]
    try:
        L_new = numerics.solve_linear(Q1.T, system.L.T).T
        L_y_new = numerics.solve_linear(Q1.T, system.L_y.T).T if system.outputs else system.L_y
    except SingularMatrix as exc:
        raise SingularQ(f"Q(1) is not invertible: {exc}") from exc

    logger.info(f"q_transform: ||Q(1) - I||_F = {np.linalg.norm(Q1 - np.eye(n)):.6g}")
    transformed = BoundarySystem(system.K, L_new, system.K_y, L_y_new, system.lambda0, system.inputs)
    return transformed, Q1


# ===== DISCRETE QUADRUPLE =====
@dataclass(frozen=True, eq=False)
class DiscreteQuadruple:
    A_d: np.ndarray
    B_d: np.ndarray
    C_d: np.ndarray
    D_d: np.ndarray

    def __post_init__(self):
        for name in ('A_d', 'B_d', 'C_d', 'D_d'):
            object.__setattr__(self, name, _frozen(numerics.as_matrix(getattr(self, name))))
        n, p, m = self.A_d.shape[0], self.B_d.shape[1], self.C_d.shape[0]
        expected = {'A_d': (n, n), 'B_d': (n, p), 'C_d': (m, n), 'D_d': (m, p)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DimensionMismatch(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def n(self):
        return self.A_d.shape[0]

    @property
    def inputs(self):
        return self.B_d.shape[1]

    @property
    def outputs(self):
        return self.C_d.shape[0]

    def dual(self):
        """(A_d*, C_d*, B_d*, D_d*), whose control problem is the filter problem."""
        adj = numerics.adjoint
        return DiscreteQuadruple(adj(self.A_d), adj(self.C_d), adj(self.B_d), adj(self.D_d))

    def conjugated(self, S):
        """Change of state coordinates x = S x~ for unitary S."""
        adj = numerics.adjoint
        return DiscreteQuadruple(adj(S) @ self.A_d @ S, adj(S) @ self.B_d, self.C_d @ S, self.D_d)


def reduce(system):
    """
    A_d = -K^{-1} L, B_d = -K^{-1} [0; I], C_d = K_y K^{-1} L - L_y,
    D_d = K_y K^{-1} [0; I].
    """
    if system.has_zero_order_term:
        raise ZeroOrderTermPresent("apply q_transform before reducing a system with M != 0")
    try:
        K_inv_L = numerics.solve_linear(system.K, system.L)
        K_inv_E = numerics.solve_linear(system.K, system.input_selector())
    except SingularMatrix as exc:
        raise SingularK(str(exc)) from exc

    quadruple = DiscreteQuadruple(
        A_d=-K_inv_L,
        B_d=-K_inv_E,
        C_d=system.K_y @ K_inv_L - system.L_y,
        D_d=system.K_y @ K_inv_E,
    )
    logger.debug(f"reduced n={system.n}, inputs={system.inputs}, outputs={system.outputs}")
    return quadruple
