"""
Solve the control and filter Riccati equations of a system and report the
optimal feedback with its stability and uniqueness certificates.

Usage:
    python manage.py lq_solve system.json
    python manage.py lq_solve system.json --tol 1e-14 --max-iter 500000
    python manage.py lq_solve system.json --require-stable
"""
from django.core.management.base import CommandError

from core import reports, riccati
from core.exceptions import NoConvergence
from core.management.base import LQCommand


def synthesis_report(care, fare, uniqueness, stability):
    report = {
        'Pi': care.Pi,
        'P': care.P,
        'V': care.V,
        'F_d': care.F_d,
        'Omega': care.Omega,
        'A_Pi': care.A_Pi,
        'r_open': stability.r_open,
        'r_closed': stability.r_closed,
        'stable': stability.stable,
        'care_iterations': care.iterations,
        'care_residual': care.residual,
        'unique': uniqueness.unique,
        'uniqueness_reasons': uniqueness.reasons,
        'fare': None,
    }
    if fare is not None:
        report['fare'] = {
            'PiTilde': fare.PiTilde,
            'iterations': fare.iterations,
            'residual': fare.residual,
        }
    return report


class Command(LQCommand):
    help = 'Solve the CARE/FARE pair and report the optimal state feedback'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_solver_arguments(parser)
        parser.add_argument(
            '--require-stable',
            action='store_true',
            help='Exit with code 3 when the optimal closed loop is not stable',
        )

    def run(self, config, **options):
        quad = config.quadruple
        tol, max_iter = options['tol'], options['max_iter']

        care = riccati.solve_care(quad, tol=tol, max_iter=max_iter)
        try:
            fare = riccati.solve_fare(quad, tol=tol, max_iter=max_iter)
        except NoConvergence as exc:
            self.status(f'FARE: {exc}', 'WARNING')
            fare = None

        stability = riccati.stability_certificate(quad, care)
        uniqueness = riccati.uniqueness_certificate(quad, care, fare)
        reports.write_json(self.stdout, synthesis_report(care, fare, uniqueness, stability))

        if not uniqueness.unique:
            self.status('Pi is not certified as the optimal cost: ' + '; '.join(uniqueness.reasons), 'WARNING')
        if options['require_stable'] and not stability.stable:
            raise CommandError(
                f'UnstableMatrix: optimal closed loop spectral radius {stability.r_closed:.12g}',
                returncode=3,
            )
        self.status(f'CARE converged in {care.iterations} iterations (residual {care.residual:.3e})')
