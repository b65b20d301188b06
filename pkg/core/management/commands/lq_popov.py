"""
Sweep the imaginary axis and write the transfer function, the smallest
eigenvalue of the Popov function and the spectral-factorization residual to
CSV, one row per frequency.

Usage:
    python manage.py lq_popov system.json --out popov.csv
    python manage.py lq_popov system.json --omega-min -10 --omega-max 10 --points 2001 --out popov.csv
"""
import numpy as np
from django.core.management.base import CommandError

from core import frequency, reports, riccati
from core.management.base import LQCommand


class Command(LQCommand):
    help = 'Write a Popov-function sweep along the imaginary axis as CSV'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_solver_arguments(parser)
        parser.add_argument('--omega-min', type=float, default=None, help='Lowest frequency (default -50/p(1))')
        parser.add_argument('--omega-max', type=float, default=None, help='Highest frequency (default 50/p(1))')
        parser.add_argument('--points', type=int, default=frequency.DEFAULT_OMEGA_POINTS, help='Number of frequencies')
        parser.add_argument('--out', required=True, help='CSV output path')

    def run(self, config, **options):
        quad, p1 = config.quadruple, config.profile.p1
        if options['points'] < 1:
            raise CommandError('--points must be at least 1', returncode=1)
        span = frequency.DEFAULT_OMEGA_SPAN / p1
        omega_min = -span if options['omega_min'] is None else options['omega_min']
        omega_max = span if options['omega_max'] is None else options['omega_max']
        omegas = np.linspace(omega_min, omega_max, options['points'])

        care = riccati.solve_care(quad, tol=options['tol'], max_iter=options['max_iter'])
        sweep = frequency.sweep(quad, care, p1, omegas, self.threads)
        by_omega = {sample.omega: sample for sample in sweep.samples}

        entries = reports.matrix_columns('G', quad.outputs, quad.inputs)
        header = ['omega']
        for name in entries:
            header += [f're_{name}', f'im_{name}']
        header += ['min_eig_phi', 'factorization_residual', 'pole_skipped']

        rows = []
        for omega in omegas:
            omega = float(omega)
            sample = by_omega.get(omega)
            if sample is None:
                rows.append([omega] + [float('nan')] * (2 * len(entries) + 2) + [True])
                continue
            values = sample.G.reshape(-1)
            row = [omega]
            for value in values:
                row += [float(value.real), float(value.imag)]
            rows.append(row + [sample.min_eig_phi, sample.factorization_residual, False])

        try:
            reports.write_csv(options['out'], header, rows)
        except OSError as exc:
            raise CommandError(f'cannot write {options["out"]}: {exc}', returncode=1) from exc
        self.status(f'Wrote {len(rows)} frequencies to {options["out"]} ({len(sweep.skipped)} at poles)')
