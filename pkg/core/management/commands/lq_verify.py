"""
Numerically verify a CARE solution: the three operator-level Riccati
residuals on seeded polynomial test functions, the spectral factorization on
the imaginary axis, the Popov coercivity margin, the gap between Omega* Omega
and I + D* D, and the Yosida-extension probe of B*.

Usage:
    python manage.py lq_verify system.json
    python manage.py lq_verify system.json --trials 500 --seed 7 --degree 10
    python manage.py lq_verify system.json --trials 0
"""
import numpy as np

from core import frequency, pde, reports, riccati, verify
from core.exceptions import NoConvergence
from core.management.base import LQCommand

YOSIDA_SCALES = (10.0, 100.0, 1000.0)


class Command(LQCommand):
    help = 'Verify the Riccati identities and the spectral factorization of a system'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_solver_arguments(parser)
        parser.add_argument('--trials', type=int, default=100, help='Number of seeded test-function pairs')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the test-function generator')
        parser.add_argument(
            '--degree',
            type=int,
            default=verify.DEFAULT_DEGREE,
            help='Polynomial degree of the test functions',
        )

    def run(self, config, **options):
        quad, profile = config.quadruple, config.profile
        p1 = profile.p1
        care = riccati.solve_care(quad, tol=options['tol'], max_iter=options['max_iter'])

        report = {'care_residual': care.residual, 'trials': max(options['trials'], 0)}
        if options['trials'] > 0:
            batch = verify.batch_residuals(
                quad, care, options['trials'], options['seed'], options['degree'], self.threads,
            )
            report.update(
                node_residual=batch.node_max,
                weiss_weiss_residual=batch.weiss_weiss_max,
                naive_residual=batch.naive_max,
            )

        omegas = frequency.default_omega_grid(p1)
        if care.residual > 1e-10:
            self.status(f'CARE residual {care.residual:.3e} is above 1e-10; factorization check is not meaningful', 'WARNING')
        samples = frequency.sweep(quad, care, p1, omegas, self.threads)
        factorization = frequency.factorization_report(samples)
        coercivity = frequency.coercivity_report(samples)
        gap = frequency.omega_limit_check(quad, care)
        report.update(
            factorization_residual=factorization.residual,
            factorization_worst_omega=factorization.worst_omega,
            coercivity_margin=coercivity.margin,
            coercivity_worst_omega=coercivity.worst_omega,
            pole_skipped=len(factorization.skipped),
            omega_gap=gap.gap,
        )

        try:
            naive = riccati.solve_naive_care(quad, tol=options['tol'], max_iter=options['max_iter'])
            report.update(naive_Pi=naive.Pi, naive_Pi_gap=float(np.linalg.norm(naive.Pi - care.Pi)))
        except NoConvergence as exc:
            self.status(f'naive Riccati equation: {exc}', 'WARNING')
            report.update(naive_Pi=None, naive_Pi_gap=None)

        probe = pde.yosida_probe(profile, quad, config.z0, [scale / p1 for scale in YOSIDA_SCALES])
        report['yosida'] = {
            'target': probe.target,
            'rows': [
                {'s': s, 'value': value, 'error': error}
                for s, value, error in zip(probe.s_values, probe.values, probe.errors)
            ],
        }

        reports.write_json(self.stdout, report)
        self.status(f"Verified {report['trials']} test pairs and {len(omegas)} frequencies")
