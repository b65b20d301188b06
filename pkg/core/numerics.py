"""
Dense matrix kernels for the small matrices (n <= ~16) used by every other
module: guarded linear solves, eigenvalues, Hermitian square roots and the
discrete Lyapunov equation.

Matrices are plain numpy arrays; real matrices stay real, complex inputs are
handled throughout.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from core.exceptions import NoConvergence, NotPositiveDefinite, SingularMatrix, UnstableMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold of the library in one place."""
    pivot: float = 1e-13
    hermitian: float = 1e-12
    positive_definite: float = 1e-13
    stability_margin: float = 1e-10
    dlyap_max_doublings: int = 128
    care: float = 1e-13
    care_max_iter: int = 200000
    divergence: float = 1e12


TOLERANCES = Tolerances()
EPS = np.finfo(float).eps


def as_matrix(value, dtype=None):
    """Return `value` as a 2-D array (scalars become 1x1)."""
    matrix = np.asarray(value, dtype=dtype)
    if matrix.ndim == 0:
        return matrix.reshape(1, 1)
    if matrix.ndim == 1:
        return matrix.reshape(-1, 1)
    return matrix


def adjoint(M):
    return np.conj(M).T


def hermitian_part(M):
    return (M + adjoint(M)) / 2


def is_hermitian(M, tol=TOLERANCES.hermitian):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return np.max(np.abs(M - adjoint(M)), initial=0.0) <= tol * (1 + np.linalg.norm(M))


def solve_linear(A, B, tol=TOLERANCES.pivot):
    """
    Solve A X = B by partial-pivoted LU elimination.

    Raises SingularMatrix when a pivot of the factorization falls below
    tol * ||A||_F.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SingularMatrix(f"expected a square matrix, got shape {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise SingularMatrix(f"right-hand side has {B.shape[0]} rows, matrix has {A.shape[0]}")
    if A.shape[0] == 0:
        return np.zeros(B.shape, dtype=np.result_type(A, B))

    scale = np.linalg.norm(A)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', la.LinAlgWarning)
        lu, piv = la.lu_factor(A, check_finite=False)
    smallest_pivot = np.min(np.abs(np.diag(lu)))
    if not np.isfinite(smallest_pivot) or smallest_pivot <= tol * scale:
        raise SingularMatrix(f"pivot {smallest_pivot:.3e} below {tol:.0e} * ||A||_F = {tol * scale:.3e}")
    return la.lu_solve((lu, piv), B, check_finite=False)


def eigenvalues(A):
    """
    Eigenvalues of a square matrix.

    1x1 and 2x2 matrices use closed forms; larger ones go through LAPACK's
    Hessenberg reduction and shifted QR.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if n == 0:
        return []
    if n == 1:
        return [complex(A[0, 0])]
    if n == 2:
        half_trace = complex(A[0, 0] + A[1, 1]) / 2
        det = complex(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
        root = np.sqrt(half_trace * half_trace - det)
        return [half_trace + root, half_trace - root]
    try:
        values = la.eigvals(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QR iteration did not converge: {exc}") from exc
    return [complex(value) for value in values]


def spectral_radius(A):
    values = eigenvalues(A)
    return max((abs(value) for value in values), default=0.0)


def sqrtm_hpd(P, tol=TOLERANCES.positive_definite):
    """Hermitian positive-definite square root via the Hermitian eigendecomposition."""
    P = np.asarray(P)
    if not is_hermitian(P):
        raise NotPositiveDefinite("matrix is not Hermitian")
    if P.shape[0] == 0:
        return P.copy()
    w, V = la.eigh(hermitian_part(P), check_finite=False)
    floor = tol * np.linalg.norm(P)
    if w[0] <= floor:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} <= {floor:.3e}")
    S = (V * np.sqrt(w)) @ adjoint(V)
    S = hermitian_part(S)
    return S.real if np.isrealobj(P) else S


def solve_dlyap(A, Q, max_doublings=TOLERANCES.dlyap_max_doublings):
    """
    Solve Sigma - A* Sigma A = Q by the doubling iteration
    A <- A^2, Q <- Q + A* Q A.

    Raises UnstableMatrix when the spectral radius of A is not below 1.
    """
    A = np.asarray(A)
    Q = np.asarray(Q)
    radius = spectral_radius(A)
    if radius >= 1 - TOLERANCES.stability_margin:
        raise UnstableMatrix(f"spectral radius {radius:.12g} is not below 1")

    sigma = hermitian_part(Q.astype(np.result_type(A, Q, float)))
    power = A.copy()
    for step in range(1, max_doublings + 1):
        increment = adjoint(power) @ sigma @ power
        sigma = hermitian_part(sigma + increment)
        power = power @ power
        if np.linalg.norm(increment) <= EPS * np.linalg.norm(sigma) or not np.any(power):
            logger.debug(f"solve_dlyap converged after {step} doublings (radius {radius:.6g})")
            return sigma
    raise NoConvergence(f"doubling iteration did not settle after {max_doublings} steps")
