"""
Discrete-time Riccati equations of the reduced quadruple.

CARE:  A_d* Pi A_d - Pi + C_d* C_d = V* P^{-1} V,
       P = I + D_d* D_d + B_d* Pi B_d,  V = D_d* C_d + B_d* Pi A_d
FARE:  A_d Pt A_d* - Pt + B_d B_d* = W T^{-1} W*,
       W = B_d D_d* + A_d Pt C_d*,  T = I + D_d D_d* + C_d Pt C_d*

Both are solved by monotone value iteration from zero, which converges to
the smallest nonnegative solution whenever one exists. The optimal boundary
feedback is u(t) = F_d lambda0(1) z(1, t) with F_d = -P^{-1} V.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core import numerics
from core.exceptions import NoConvergence, NotPositiveDefinite, SingularMatrix
from core.numerics import TOLERANCES, adjoint, hermitian_part

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """
    Pi is also the matrix realization of the optimal cost operator
    Z = Pi I_X acting pointwise on lambda0 z.
    """
    Pi: np.ndarray
    P: np.ndarray
    V: np.ndarray
    F_d: np.ndarray
    A_Pi: np.ndarray
    Omega: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class FilterSolution:
    PiTilde: np.ndarray
    W: np.ndarray
    T: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True, eq=False)
class NaiveSolution:
    """Solution of the Riccati equation weighted by (I + D_d* D_d)^{-1}."""
    Pi: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class StabilityCertificate:
    r_closed: float
    r_open: float
    stable: bool


@dataclass(frozen=True)
class UniquenessReport:
    fare_solvable: bool
    r_closed: float
    unique: bool
    reasons: list = field(default_factory=list)


# ===== EQUATION TERMS =====
def care_terms(quad, Pi):
    """(P, V) built from Pi."""
    A, B, C, D = quad.A_d, quad.B_d, quad.C_d, quad.D_d
    P = hermitian_part(np.eye(quad.inputs) + adjoint(D) @ D + adjoint(B) @ Pi @ B)
    V = adjoint(D) @ C + adjoint(B) @ Pi @ A
    return P, V


def care_residual(quad, Pi):
    A, C = quad.A_d, quad.C_d
    P, V = care_terms(quad, Pi)
    lhs = adjoint(A) @ Pi @ A - Pi + adjoint(C) @ C
    return float(np.linalg.norm(lhs - adjoint(V) @ numerics.solve_linear(P, V)))


def fare_terms(quad, PiTilde):
    """(W, T) built from PiTilde."""
    A, B, C, D = quad.A_d, quad.B_d, quad.C_d, quad.D_d
    W = B @ adjoint(D) + A @ PiTilde @ adjoint(C)
    T = hermitian_part(np.eye(quad.outputs) + D @ adjoint(D) + C @ PiTilde @ adjoint(C))
    return W, T


def fare_residual(quad, PiTilde):
    A, B = quad.A_d, quad.B_d
    W, T = fare_terms(quad, PiTilde)
    lhs = A @ PiTilde @ adjoint(A) - PiTilde + B @ adjoint(B)
    return float(np.linalg.norm(lhs - W @ numerics.solve_linear(T, adjoint(W))))


def _care_step(quad, Pi):
    A, C = quad.A_d, quad.C_d
    P, V = care_terms(quad, Pi)
    return adjoint(A) @ Pi @ A + adjoint(C) @ C - adjoint(V) @ numerics.solve_linear(P, V)


def _fare_step(quad, PiTilde):
    A, B = quad.A_d, quad.B_d
    W, T = fare_terms(quad, PiTilde)
    return A @ PiTilde @ adjoint(A) + B @ adjoint(B) - W @ numerics.solve_linear(T, adjoint(W))


def _naive_step(quad, Pi):
    A, C, D = quad.A_d, quad.C_d, quad.D_d
    _, V = care_terms(quad, Pi)
    weight = np.eye(quad.inputs) + adjoint(D) @ D
    return adjoint(A) @ Pi @ A + adjoint(C) @ C - adjoint(V) @ numerics.solve_linear(weight, V)


def naive_residual_matrix(quad, Pi):
    return _naive_step(quad, Pi) - Pi


# ===== VALUE ITERATION =====
def value_iteration(quad, step=_care_step, size=None):
    """
    Yield the iterates Pi_1, Pi_2, ... of Pi_{k+1} = step(Pi_k) from Pi_0 = 0,
    each symmetrized to suppress Hermitian drift.
    """
    size = quad.n if size is None else size
    dtype = np.result_type(quad.A_d, quad.B_d, quad.C_d, quad.D_d, float)
    current = np.zeros((size, size), dtype=dtype)
    while True:
        current = hermitian_part(step(quad, current))
        yield current


def _iterate(quad, step, label, tol, max_iter, size=None):
    size = quad.n if size is None else size
    iterates = value_iteration(quad, step, size)
    previous = np.zeros((size, size))
    for iteration in range(1, max_iter + 1):
        current = next(iterates)
        norm = np.linalg.norm(current)
        if not np.isfinite(norm) or norm > TOLERANCES.divergence:
            raise NoConvergence(f"{label} iterates diverged (||Pi||_F = {norm:.3e} at iteration {iteration})")
        change = np.linalg.norm(current - previous)
        if change <= tol * (1 + np.linalg.norm(previous)):
            logger.info(f"{label} value iteration converged in {iteration} iterations")
            return current, iteration
        if iteration % 10000 == 0:
            logger.debug(f"{label} iteration {iteration}: step {change:.3e}")
        previous = current
    raise NoConvergence(f"{label} value iteration hit max_iter={max_iter} without converging")


def solution_from_pi(quad, Pi, iterations=0):
    """Assemble P, V, F_d, the closed loop and Omega = P^{1/2} around a given Pi."""
    Pi = hermitian_part(np.asarray(Pi))
    P, V = care_terms(quad, Pi)
    try:
        F_d = -numerics.solve_linear(P, V)
        Omega = numerics.sqrtm_hpd(P)
    except (SingularMatrix, NotPositiveDefinite) as exc:
        raise NotPositiveDefinite(f"P = I + D_d*D_d + B_d*Pi B_d is not positive definite: {exc}") from exc
    return RiccatiSolution(
        Pi=Pi,
        P=P,
        V=V,
        F_d=F_d,
        A_Pi=quad.A_d + quad.B_d @ F_d,
        Omega=Omega,
        iterations=iterations,
        residual=care_residual(quad, Pi),
    )


def solve_care(quad, tol=TOLERANCES.care, max_iter=TOLERANCES.care_max_iter):
    Pi, iterations = _iterate(quad, _care_step, 'CARE', tol, max_iter)
    solution = solution_from_pi(quad, Pi, iterations)
    logger.info(f"CARE residual {solution.residual:.3e}, ||Pi||_F = {np.linalg.norm(Pi):.6g}")
    return solution


def solve_fare(quad, tol=TOLERANCES.care, max_iter=TOLERANCES.care_max_iter):
    """
    The constant term is B_d B_d*, the only dimensionally consistent reading
    when n != inputs.
    """
    PiTilde, iterations = _iterate(quad, _fare_step, 'FARE', tol, max_iter)
    W, T = fare_terms(quad, PiTilde)
    return FilterSolution(
        PiTilde=PiTilde,
        W=W,
        T=T,
        iterations=iterations,
        residual=fare_residual(quad, PiTilde),
    )


def solve_naive_care(quad, tol=TOLERANCES.care, max_iter=TOLERANCES.care_max_iter):
    """
    Fixed point of the Riccati equation that keeps the weight (I + D_d* D_d)^{-1}
    instead of P^{-1}. It differs from the CARE solution whenever
    B_d* Pi B_d != 0.
    """
    Pi, iterations = _iterate(quad, _naive_step, 'naive CARE', tol, max_iter)
    residual = float(np.linalg.norm(naive_residual_matrix(quad, Pi)))
    return NaiveSolution(Pi=Pi, iterations=iterations, residual=residual)


# ===== CERTIFICATES =====
def feedback_gain(sol):
    return sol.F_d


def stability_certificate(quad, sol):
    r_closed = numerics.spectral_radius(quad.A_d + quad.B_d @ sol.F_d)
    r_open = numerics.spectral_radius(quad.A_d)
    return StabilityCertificate(
        r_closed=r_closed,
        r_open=r_open,
        stable=r_closed < 1 - TOLERANCES.stability_margin,
    )


def uniqueness_certificate(quad, care, fare_result: Optional[FilterSolution]):
    """
    Pi is the unique nonnegative CARE solution, and <z0, Pi z0>_X the optimal
    cost, when the FARE is solvable and r(A_Pi) < 1.
    """
    r_closed = stability_certificate(quad, care).r_closed
    fare_solvable = fare_result is not None
    reasons = []
    if not fare_solvable:
        reasons.append('FARE has no nonnegative solution within the iteration budget')
    if r_closed >= 1 - TOLERANCES.stability_margin:
        reasons.append(f'closed loop spectral radius {r_closed:.12g} is not below 1')
    return UniquenessReport(
        fare_solvable=fare_solvable,
        r_closed=r_closed,
        unique=not reasons,
        reasons=reasons,
    )


def closed_loop_lyapunov(quad, F):
    """
    Sigma_F = sum_k (A_F*)^k Q_F A_F^k with A_F = A_d + B_d F and
    Q_F = F*F + (C_d + D_d F)*(C_d + D_d F): the cost matrix of the gain F.
    """
    F = numerics.as_matrix(F)
    A_F = quad.A_d + quad.B_d @ F
    output_map = quad.C_d + quad.D_d @ F
    return numerics.solve_dlyap(A_F, adjoint(F) @ F + adjoint(output_map) @ output_map)
