"""
Simulate the closed loop u = F w(1, t) exactly along characteristics and
report the measured, tail, predicted and optimal costs.

Usage:
    python manage.py lq_simulate system.json --out trace.csv
    python manage.py lq_simulate system.json --gain zero --periods 40
    python manage.py lq_simulate system.json --gain "[[0.25]]" --no-tail
"""
import json

import numpy as np
from django.core.exceptions import ValidationError
from django.core.management.base import CommandError

from core import numerics, pde, reports, riccati
from core.exceptions import NoConvergence
from core.forms import parse_matrix
from core.management.base import LQCommand


class Command(LQCommand):
    help = 'Simulate the closed-loop boundary trace and compare measured and predicted costs'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_solver_arguments(parser)
        parser.add_argument('--periods', type=int, default=20, help='Number of delay periods p(1) to simulate')
        parser.add_argument('--points-per-period', type=int, default=200, help='Trace samples per period')
        parser.add_argument(
            '--gain',
            default='optimal',
            help='"optimal", "zero", or a JSON matrix (inputs x n) for a custom feedback',
        )
        parser.add_argument('--out', default=None, help='CSV path for the trace (t, w1, u, y)')
        parser.add_argument(
            '--no-tail',
            action='store_true',
            help='Do not require a finite tail cost (allows unstable loops)',
        )

    def parse_gain(self, value, quad, care):
        if value == 'optimal':
            return care.F_d
        if value == 'zero':
            return np.zeros((quad.inputs, quad.n))
        try:
            return parse_matrix(json.loads(value), quad.inputs, quad.n, 'gain')
        except (json.JSONDecodeError, ValidationError) as exc:
            raise CommandError(f'invalid --gain {value!r}: {exc}', returncode=1) from exc

    def run(self, config, **options):
        quad, profile, z0 = config.quadruple, config.profile, config.z0
        periods, points_per_period = options['periods'], options['points_per_period']
        if periods < 0 or points_per_period < 1:
            raise CommandError('--periods must be >= 0 and --points-per-period >= 1', returncode=1)

        try:
            care = riccati.solve_care(quad, tol=options['tol'], max_iter=options['max_iter'])
        except NoConvergence as exc:
            if options['gain'] == 'optimal':
                raise
            self.status(f'Riccati equation: {exc}; optimal cost not reported', 'WARNING')
            care = None
        F = self.parse_gain(options['gain'], quad, care)
        result = pde.simulate_closed_loop(
            profile, quad, F, z0, periods, points_per_period, require_tail=not options['no_tail'],
        )
        optimal_cost, certified = None, None
        if care is not None:
            uniqueness = riccati.uniqueness_certificate(quad, care, self.solve_filter(quad, options))
            optimal = pde.optimal_cost(profile, care, z0, uniqueness)
            optimal_cost, certified = optimal.value, optimal.certified

        if options['out']:
            self.write_trace(options['out'], quad, result, profile, z0, points_per_period, config.Q1)

        reports.write_json(self.stdout, {
            'measured_cost': result.measured_cost,
            'tail_cost': result.tail_cost,
            'predicted_cost': result.predicted_cost,
            'optimal_cost': optimal_cost,
            'optimal_cost_certified': certified,
            'period_costs': result.period_costs,
            'stable': result.stable,
            'gain': result.gain_used,
        })
        self.status(f'Simulated {periods} periods at {points_per_period} points per period')

    def solve_filter(self, quad, options):
        try:
            return riccati.solve_fare(quad, tol=options['tol'], max_iter=options['max_iter'])
        except NoConvergence:
            return None

    def write_trace(self, path, quad, result, profile, z0, points_per_period, Q1=None):
        """u and y do not depend on coordinates; w1 is mapped back to the original z(1)."""
        if result.period_costs:
            times, samples = result.trace.times, result.trace.samples
        else:
            # no period simulated: emit the initial period itself
            samples = pde.initial_trace(profile, z0, points_per_period)
            times = result.trace.dt * np.arange(samples.shape[0])
        F = result.gain_used
        inputs, outputs = samples @ F.T, samples @ (quad.C_d + quad.D_d @ F).T
        if Q1 is not None and samples.size:
            samples = numerics.solve_linear(Q1, samples.T).T

        header = ['t'] + reports.vector_columns('w1', quad.n)
        header += reports.vector_columns('u', quad.inputs) + reports.vector_columns('y', quad.outputs)
        rows = [
            [float(t)] + [_real(v) for v in np.concatenate([w, u, y])]
            for t, w, u, y in zip(times, samples, inputs, outputs)
        ]
        try:
            reports.write_csv(path, header, rows)
        except OSError as exc:
            raise CommandError(f'cannot write {path}: {exc}', returncode=1) from exc


def _real(value):
    if np.iscomplexobj(value) and value.imag != 0:
        return complex(value)
    return float(np.real(value))
