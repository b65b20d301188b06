"""
Numerical oracles for the three Riccati identities on the operator level:

* the operator-node Riccati equation on D(S), with
  K&L[z; u] = P^{-1/2} V lambda0(1) z(1) + P^{1/2} u,
* the Riccati equation on D(A) weighted by (Omega* Omega)^{-1} = P^{-1},
* the same equation weighted by (I + D* D)^{-1}, which fails whenever
  B_d* Pi B_d != 0.

Test functions are polynomials in the flux w = lambda0 z, so
<A&B[z; u], Z z>_X = -int_0^1 w* Pi w' d zeta is evaluated exactly from the
coefficients, independently of lambda0.
"""
import enum
import logging
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as poly

from core import numerics
from core.concurrency import ordered_map
from core.numerics import adjoint

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 8


class Membership(enum.Enum):
    DOMAIN_S = 'DomainS'
    DOMAIN_A = 'DomainA'


@dataclass(frozen=True, eq=False)
class TestFunctionPair:
    """
    coefficients[i] holds the increasing-power coefficients of w_i(zeta);
    u is the input paired with z in D(S) (zero for D(A)).
    """
    __test__ = False

    coefficients: np.ndarray
    u: np.ndarray
    membership: Membership

    def w_at(self, zeta):
        return np.array([poly.polyval(zeta, row) for row in self.coefficients])

    def scaled(self, alpha):
        return replace(self, coefficients=alpha * self.coefficients, u=alpha * self.u)

    def normalized(self):
        """Rescale so that ||w(1)|| = 1 (left unchanged when w(1) = 0)."""
        norm = np.linalg.norm(self.w_at(1.0))
        return self.scaled(1.0 / norm) if norm > 0 else self


@dataclass(frozen=True)
class BatchReport:
    trials: int
    node_max: float
    weiss_weiss_max: float
    naive_max: float


def _rng(seed):
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _draw(rng, shape, complex_valued):
    values = rng.uniform(-1.0, 1.0, size=shape)
    if complex_valued:
        values = values + 1j * rng.uniform(-1.0, 1.0, size=shape)
    return values


def boundary_defect(quad, coefficients, u):
    """B_d u + A_d w(1) - w(0)."""
    w0 = coefficients[:, 0]
    w1 = coefficients.sum(axis=1)
    return quad.B_d @ u + quad.A_d @ w1 - w0


def make_test_pair(quad, seed, membership=Membership.DOMAIN_S, degree=DEFAULT_DEGREE):
    """
    Draw polynomial coefficients (and u for D(S)) from a PCG64 stream seeded
    by `seed`, then add (1 - zeta) delta with delta the boundary defect:
    that moves w(0) by delta and leaves w(1) alone, so
    w(0) - A_d w(1) - B_d u = 0.
    """
    membership = Membership(membership)
    degree = max(int(degree), 1)
    complex_valued = any(np.iscomplexobj(M) for M in (quad.A_d, quad.B_d, quad.C_d, quad.D_d))
    rng = _rng(seed)
    coefficients = _draw(rng, (quad.n, degree + 1), complex_valued)
    if membership is Membership.DOMAIN_S:
        u = _draw(rng, quad.inputs, complex_valued)
    else:
        u = np.zeros(quad.inputs, dtype=coefficients.dtype)

    delta = boundary_defect(quad, coefficients, u)
    coefficients = coefficients.astype(np.result_type(coefficients, delta))
    coefficients[:, 0] += delta
    coefficients[:, 1] -= delta
    return TestFunctionPair(coefficients=coefficients, u=u, membership=membership)


def membership_residual(quad, pair):
    return float(np.linalg.norm(pair.w_at(0.0) - quad.A_d @ pair.w_at(1.0) - quad.B_d @ pair.u))


def _dynamics_form(Pi, coefficients):
    """
    2 Re <A&B[z; u], Z z>_X = -2 Re int_0^1 w* Pi w' by exact moments:
    int_0^1 zeta^(a+b) = 1/(a+b+1).
    """
    derivative = np.array([poly.polyder(row) for row in coefficients])
    a = np.arange(coefficients.shape[1])[:, None]
    b = np.arange(derivative.shape[1])[None, :]
    moments = 1.0 / (a + b + 1)
    gram = np.conj(coefficients) @ moments @ derivative.T
    return -2.0 * float(np.real(np.sum(Pi * gram)))


def kl_operator(quad, care, pair):
    """K&L[z; u] = P^{-1/2} V w(1) + P^{1/2} u."""
    w1 = pair.w_at(1.0)
    return numerics.solve_linear(care.Omega, care.V @ w1) + care.Omega @ pair.u


def node_residual(quad, care, pair):
    """
    |LHS - RHS| / (1 + |LHS|) for
    2 Re <A&B[z; u], Z z> + ||C&D[z; u]||^2 + ||u||^2 = ||K&L[z; u]||^2.
    """
    w1 = pair.w_at(1.0)
    output = quad.C_d @ w1 + quad.D_d @ pair.u
    lhs = _dynamics_form(care.Pi, pair.coefficients) + np.vdot(output, output).real + np.vdot(pair.u, pair.u).real
    kl = kl_operator(quad, care, pair)
    rhs = np.vdot(kl, kl).real
    return abs(lhs - rhs) / (1 + abs(lhs))


def _riccati_sides(quad, care, pair, weight):
    """
    LHS = 2 Re <A z, Z z> + ||C z||^2 and
    RHS = <weight^{-1} b, b> with b = B_d* Pi w(0) + D_d* C_d w(1).
    """
    w0, w1 = pair.w_at(0.0), pair.w_at(1.0)
    output = quad.C_d @ w1
    lhs = _dynamics_form(care.Pi, pair.coefficients) + np.vdot(output, output).real
    b = adjoint(quad.B_d) @ care.Pi @ w0 + adjoint(quad.D_d) @ output
    rhs = np.vdot(b, numerics.solve_linear(weight, b)).real
    return lhs, rhs


def _relative_gap(lhs, rhs):
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def weiss_weiss_residual(quad, care, pair):
    lhs, rhs = _riccati_sides(quad, care, pair, care.P)
    return _relative_gap(lhs, rhs)


def naive_residual(quad, care, pair):
    weight = np.eye(quad.inputs) + adjoint(quad.D_d) @ quad.D_d
    lhs, rhs = _riccati_sides(quad, care, pair, weight)
    return _relative_gap(lhs, rhs)


def boundary_forms(quad, care, w1):
    """
    The quadratic forms both Riccati equations reduce to on D(A), as
    functions of w(1) alone: lhs = w1* (A_d* Pi A_d - Pi + C_d* C_d) w1,
    and V w1 weighted by P^{-1} (weiss) or (I + D_d* D_d)^{-1} (naive).
    """
    w1 = np.atleast_1d(np.asarray(w1))
    A, C, D, Pi = quad.A_d, quad.C_d, quad.D_d, care.Pi
    lhs = np.vdot(w1, (adjoint(A) @ Pi @ A - Pi + adjoint(C) @ C) @ w1).real
    b = care.V @ w1
    naive_weight = np.eye(quad.inputs) + adjoint(D) @ D
    return {
        'lhs': float(lhs),
        'weiss': float(np.vdot(b, numerics.solve_linear(care.P, b)).real),
        'naive': float(np.vdot(b, numerics.solve_linear(naive_weight, b)).real),
    }


def batch_residuals(quad, care, trials, seed, degree=DEFAULT_DEGREE, threads=1):
    """
    Max of each residual over `trials` seeded pairs normalized to
    ||w(1)|| = 1. Trial k draws from the k-th child of SeedSequence(seed).
    """
    if trials <= 0:
        return BatchReport(trials=0, node_max=0.0, weiss_weiss_max=0.0, naive_max=0.0)

    def run(child):
        seed_s, seed_a = child.spawn(2)
        pair_s = make_test_pair(quad, seed_s, Membership.DOMAIN_S, degree).normalized()
        pair_a = make_test_pair(quad, seed_a, Membership.DOMAIN_A, degree).normalized()
        return (
            node_residual(quad, care, pair_s),
            weiss_weiss_residual(quad, care, pair_a),
            naive_residual(quad, care, pair_a),
        )

    children = np.random.SeedSequence(seed).spawn(trials)
    results = np.array(ordered_map(run, children, threads))
    report = BatchReport(
        trials=trials,
        node_max=float(results[:, 0].max()),
        weiss_weiss_max=float(results[:, 1].max()),
        naive_max=float(results[:, 2].max()),
    )
    logger.info(f"verified {trials} pairs: node {report.node_max:.3e}, weiss {report.weiss_weiss_max:.3e}, "
                f"naive {report.naive_max:.3e}")
    return report
