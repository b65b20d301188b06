"""
Frequency-domain side of the synthesis: the transfer function
G(s) = C_d (e^{s p(1)} - A_d)^{-1} B_d + D_d, the Popov function
Phi(iw) = I + G(iw)* G(iw), and the spectral factor
chi(s) = P^{1/2} [I - F_d (e^{s p(1)} - A_d)^{-1} B_d] built from the CARE.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from core import numerics
from core.concurrency import ordered_map
from core.exceptions import PoleHit, SingularMatrix
from core.numerics import TOLERANCES, adjoint, hermitian_part

logger = logging.getLogger(__name__)

DEFAULT_OMEGA_POINTS = 1001
DEFAULT_OMEGA_SPAN = 50.0


@dataclass(frozen=True, eq=False)
class FrequencySample:
    s: complex
    G: np.ndarray
    Phi: np.ndarray
    Chi: np.ndarray
    factorization_residual: float
    min_eig_phi: float

    @property
    def omega(self):
        return self.s.imag


@dataclass(frozen=True, eq=False)
class SweepResult:
    samples: list
    skipped: list = field(default_factory=list)


@dataclass(frozen=True)
class FactorizationReport:
    residual: float
    worst_omega: float
    skipped: list


@dataclass(frozen=True)
class CoercivityReport:
    margin: float
    worst_omega: float
    skipped: list


@dataclass(frozen=True, eq=False)
class OmegaGap:
    omega: np.ndarray
    naive: np.ndarray
    gap: float


@dataclass(frozen=True)
class HInfProxy:
    r_open: float
    r_closed: float
    chi_bounded: bool
    chi_inv_bounded: bool


def default_omega_grid(p1, points=DEFAULT_OMEGA_POINTS):
    """Uniform grid on [-50/p(1), 50/p(1)], several periods of the 2 pi/p(1)-periodic response."""
    span = DEFAULT_OMEGA_SPAN / p1
    return np.linspace(-span, span, points)


def _resolvent_times_B(quad, p1, s):
    """(e^{s p1} I - A_d)^{-1} B_d."""
    shifted = np.exp(s * p1) * np.eye(quad.n) - quad.A_d
    try:
        return numerics.solve_linear(shifted, quad.B_d.astype(complex))
    except SingularMatrix as exc:
        raise PoleHit(f"e^(s p1) is an eigenvalue of A_d at s = {s}") from exc


def transfer(quad, p1, s):
    return quad.C_d @ _resolvent_times_B(quad, p1, s) + quad.D_d


def popov(quad, p1, omega):
    G = transfer(quad, p1, 1j * omega)
    return hermitian_part(np.eye(quad.inputs) + adjoint(G) @ G)


def spectral_factor(quad, sol, p1, s):
    return sol.Omega @ (np.eye(quad.inputs) - sol.F_d @ _resolvent_times_B(quad, p1, s))


def factorization_identity(quad, sol, p1, s):
    """||chi(-conj s)* chi(s) - I - G(-conj s)* G(s)||_F, valid off the imaginary axis too."""
    mirrored = -np.conj(s)
    lhs = adjoint(spectral_factor(quad, sol, p1, mirrored)) @ spectral_factor(quad, sol, p1, s)
    rhs = np.eye(quad.inputs) + adjoint(transfer(quad, p1, mirrored)) @ transfer(quad, p1, s)
    return float(np.linalg.norm(lhs - rhs))


def evaluate_sample(quad, sol, p1, omega):
    s = 1j * omega
    G = transfer(quad, p1, s)
    Phi = hermitian_part(np.eye(quad.inputs) + adjoint(G) @ G)
    Chi = spectral_factor(quad, sol, p1, s) if sol is not None else None
    residual = float(np.linalg.norm(Phi - adjoint(Chi) @ Chi)) if Chi is not None else float('nan')
    min_eig = float(np.linalg.eigvalsh(Phi)[0]) if quad.inputs else 1.0
    return FrequencySample(s=s, G=G, Phi=Phi, Chi=Chi, factorization_residual=residual, min_eig_phi=min_eig)


def sweep(quad, sol, p1, omegas, threads=1):
    """
    Evaluate every grid frequency; samples where e^{i w p1} hits the
    spectrum of A_d are skipped and listed.
    """
    def attempt(omega):
        try:
            return evaluate_sample(quad, sol, p1, float(omega))
        except PoleHit:
            return None

    omegas = [float(omega) for omega in omegas]
    results = ordered_map(attempt, omegas, threads)
    samples = [sample for sample in results if sample is not None]
    skipped = [omega for omega, sample in zip(omegas, results) if sample is None]
    if skipped:
        logger.warning(f"skipped {len(skipped)} frequencies at poles on the imaginary axis")
    return SweepResult(samples=samples, skipped=skipped)


def factorization_report(result):
    """Worst ||Phi(iw) - chi(iw)* chi(iw)||_F over the samples of a sweep made with a CARE solution."""
    if not result.samples:
        return FactorizationReport(residual=float('nan'), worst_omega=float('nan'), skipped=result.skipped)
    worst = max(result.samples, key=lambda sample: sample.factorization_residual)
    return FactorizationReport(
        residual=worst.factorization_residual,
        worst_omega=worst.omega,
        skipped=result.skipped,
    )


def coercivity_report(result):
    """Smallest lambda_min(Phi(iw)) - 1 over the samples of any sweep."""
    if not result.samples:
        return CoercivityReport(margin=float('nan'), worst_omega=float('nan'), skipped=result.skipped)
    worst = min(result.samples, key=lambda sample: sample.min_eig_phi)
    return CoercivityReport(margin=worst.min_eig_phi - 1, worst_omega=worst.omega, skipped=result.skipped)


def factorization_residual(quad, sol, p1, omegas, threads=1):
    """max over the grid of ||Phi(iw) - chi(iw)* chi(iw)||_F."""
    if sol.residual > 1e-10:
        logger.warning(f"CARE residual {sol.residual:.3e} is above 1e-10; factorization check is not meaningful")
    return factorization_report(sweep(quad, sol, p1, omegas, threads))


def coercivity_margin(quad, p1, omegas, threads=1):
    """min over the grid of lambda_min(Phi(iw)) - 1, never below zero up to rounding."""
    return coercivity_report(sweep(quad, None, p1, omegas, threads))


def omega_limit_check(quad, sol):
    """
    Omega* Omega = P differs from I + D_d* D_d by B_d* Pi B_d, so the
    weight of the Riccati equation is not (I + D* D)^{-1}.
    """
    naive = np.eye(quad.inputs) + adjoint(quad.D_d) @ quad.D_d
    omega = adjoint(sol.Omega) @ sol.Omega
    return OmegaGap(omega=omega, naive=naive, gap=float(np.linalg.norm(sol.P - naive)))


def hinf_proxy(quad, sol):
    """
    chi has poles in the open right half-plane iff A_d has an eigenvalue
    outside the unit disc (|e^{s p1}| > 1 there); chi^{-1} likewise with A_Pi.
    The boundary case r = 1 is reported as unbounded.
    """
    r_open = numerics.spectral_radius(quad.A_d)
    r_closed = numerics.spectral_radius(sol.A_Pi)
    bound = 1 - TOLERANCES.stability_margin
    return HInfProxy(r_open=r_open, r_closed=r_closed, chi_bounded=r_open < bound, chi_inv_bounded=r_closed < bound)


def feedthrough_gap(quad, p1, s_list):
    """||G(s) - D_d||_F along the real axis; tends to zero for this regular system."""
    return [float(np.linalg.norm(transfer(quad, p1, float(s)) - quad.D_d)) for s in s_list]
