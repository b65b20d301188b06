import csv
import json
import math
import os
import tempfile
from io import StringIO

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from .systems import EXAMPLE_CONFIG, F_D_EXACT, PI_EXACT, write_config

SMALL = dict(EXAMPLE_CONFIG, grid_points=201)


def run(name, *args, **options):
    out, err = StringIO(), StringIO()
    call_command(name, *args, stdout=out, stderr=err, **options)
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def config(self, data=SMALL):
        return write_config(self, data)

    def output_path(self, suffix='.csv'):
        handle, path = tempfile.mkstemp(suffix=suffix)
        os.close(handle)
        self.addCleanup(os.remove, path)
        return path

    def read_csv(self, path):
        with open(path, encoding='utf-8', newline='') as handle:
            return list(csv.reader(handle))


class ReduceCommandTests(CommandTestCase):
    def test_worked_example(self):
        report = json.loads(run('lq_reduce', self.config()))
        self.assertAlmostEqual(report.pop('p1'), 1.0, places=14)
        self.assertEqual(report, {'A_d': [[-0.5]], 'B_d': [[1.0]], 'C_d': [[-0.5]], 'D_d': [[1.0]]})

    def test_zero_M_changes_nothing(self):
        with_M = run('lq_reduce', self.config(dict(SMALL, M={'type': 'constant', 'value': [0.0]})))
        self.assertEqual(with_M, run('lq_reduce', self.config()))

    def test_singular_K_exits_with_validation_code(self):
        with self.assertRaises(CommandError) as ctx:
            run('lq_reduce', self.config(dict(SMALL, K=[0.0])))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('SingularK', str(ctx.exception))


class SolveCommandTests(CommandTestCase):
    def test_worked_example(self):
        report = json.loads(run('lq_solve', self.config()))
        self.assertAlmostEqual(report['Pi'][0][0], PI_EXACT, delta=1e-10)
        self.assertAlmostEqual(report['F_d'][0][0], F_D_EXACT, delta=1e-10)
        self.assertTrue(report['unique'])
        self.assertAlmostEqual(report['r_open'], 0.5)

    def test_zero_output(self):
        report = json.loads(run('lq_solve', self.config(dict(SMALL, K_y=[0.0], L_y=[0.0]))))
        self.assertEqual(report['Pi'], [[0.0]])
        self.assertEqual(report['F_d'], [[0.0]])

    def test_divergence_exits_with_convergence_code(self):
        data = {
            'lambda0': {'type': 'constant', 'value': 1.0},
            'grid_points': 11,
            'quadruple': {'A_d': [[2.0]], 'B_d': [[0.0]], 'C_d': [[1.0]], 'D_d': [[0.0]]},
        }
        with self.assertRaises(CommandError) as ctx:
            run('lq_solve', self.config(data))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_reduced_output_round_trips(self):
        reduced = json.loads(run('lq_reduce', self.config()))
        data = {
            'lambda0': SMALL['lambda0'],
            'grid_points': SMALL['grid_points'],
            'quadruple': {key: reduced[key] for key in ('A_d', 'B_d', 'C_d', 'D_d')},
        }
        self.assertEqual(run('lq_solve', self.config(data)), run('lq_solve', self.config()))


class VerifyCommandTests(CommandTestCase):
    def test_worked_example(self):
        report = json.loads(run('lq_verify', self.config(), trials=100, seed=3))
        self.assertLessEqual(report['node_residual'], 1e-10)
        self.assertLessEqual(report['weiss_weiss_residual'], 1e-10)
        self.assertAlmostEqual(report['naive_residual'], 0.009986, places=5)
        self.assertLessEqual(report['factorization_residual'], 1e-10)
        self.assertGreaterEqual(report['coercivity_margin'], -1e-12)
        self.assertAlmostEqual(report['omega_gap'], PI_EXACT, delta=1e-10)
        for row, s in zip(report['yosida']['rows'], (10.0, 100.0, 1000.0)):
            self.assertAlmostEqual(row['s'], s, places=10)

    def test_no_trials_runs_frequency_checks_only(self):
        report = json.loads(run('lq_verify', self.config(), trials=0))
        self.assertNotIn('node_residual', report)
        self.assertIn('factorization_residual', report)

    @override_settings(HYPERLQ_THREADS=3)
    def test_fixed_seed_is_reproducible(self):
        path = self.config()
        self.assertEqual(run('lq_verify', path, trials=20, seed=11), run('lq_verify', path, trials=20, seed=11))


class PopovCommandTests(CommandTestCase):
    def test_single_frequency(self):
        path = self.output_path()
        run('lq_popov', self.config(), omega_min=0.0, omega_max=0.0, points=1, out=path)
        rows = self.read_csv(path)
        self.assertEqual(rows[0], [
            'omega', 're_G_1_1', 'im_G_1_1', 'min_eig_phi', 'factorization_residual', 'pole_skipped',
        ])
        self.assertEqual(len(rows), 2)
        self.assertAlmostEqual(float(rows[1][3]), 13 / 9, places=12)

    def test_residual_column(self):
        path = self.output_path()
        run('lq_popov', self.config(), points=101, out=path)
        rows = self.read_csv(path)[1:]
        self.assertEqual(len(rows), 101)
        self.assertTrue(all(float(row[4]) <= 1e-10 for row in rows))

    def test_unwritable_path(self):
        with self.assertRaises(CommandError) as ctx:
            run('lq_popov', self.config(), points=3, out='/nonexistent/dir/popov.csv')
        self.assertEqual(ctx.exception.returncode, 1)


class SimulateCommandTests(CommandTestCase):
    def test_optimal_gain(self):
        report = json.loads(run('lq_simulate', self.config(), periods=40, points_per_period=512))
        for key in ('predicted_cost', 'optimal_cost'):
            self.assertAlmostEqual(report[key], PI_EXACT, delta=1e-5)
        self.assertAlmostEqual(report['measured_cost'] + report['tail_cost'], PI_EXACT, delta=1e-5)

    def test_zero_gain(self):
        report = json.loads(run('lq_simulate', self.config(), gain='zero', periods=5))
        self.assertAlmostEqual(report['predicted_cost'], 1 / 3, places=10)

    def test_trace_csv(self):
        path = self.output_path()
        run('lq_simulate', self.config(), periods=2, points_per_period=10, out=path)
        rows = self.read_csv(path)
        self.assertEqual(rows[0], ['t', 'w1_1', 'u_1', 'y_1'])
        self.assertEqual(len(rows), 1 + 21)
        self.assertAlmostEqual(float(rows[1][2]), F_D_EXACT, delta=1e-10)

    def test_zero_periods_writes_initial_period(self):
        path = self.output_path()
        run('lq_simulate', self.config(), periods=0, points_per_period=10, out=path)
        self.assertEqual(len(self.read_csv(path)), 1 + 10)

    def test_unstable_gain_with_tail(self):
        with self.assertRaises(CommandError) as ctx:
            run('lq_simulate', self.config(), gain='[[2.0]]', periods=2)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_unstable_gain_without_tail(self):
        report = json.loads(run('lq_simulate', self.config(), gain='[[2.0]]', periods=2, no_tail=True))
        self.assertIsNone(report['tail_cost'])
        self.assertFalse(report['stable'])

    def test_malformed_gain(self):
        with self.assertRaises(CommandError) as ctx:
            run('lq_simulate', self.config(), gain='[[1.0, 2.0]]')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_zero_gain_with_zero_order_term(self):
        c = 0.5
        report = json.loads(run(
            'lq_simulate', self.config(dict(SMALL, M={'type': 'constant', 'value': [c]})), gain='zero', periods=5,
        ))
        expected = 0.25 * (math.exp(2 * c) - 1) / (2 * c) / (1 - 0.25 * math.exp(2 * c))
        self.assertAlmostEqual(report['predicted_cost'], expected, delta=1e-6)
        self.assertAlmostEqual(report['measured_cost'] + report['tail_cost'], expected, delta=1e-5)

    def test_trace_csv_is_in_original_coordinates(self):
        c = 0.5
        path = self.output_path()
        data = dict(SMALL, M={'type': 'constant', 'value': [c]})
        run('lq_simulate', self.config(data), gain='zero', periods=1, points_per_period=10, out=path)
        rows = self.read_csv(path)[1:-1]
        # unit speed, u = 0: z(1, t) = e^{c t} and y(t) = z(0, t) = -z(1, t) / 2 on the first period
        self.assertEqual(len(rows), 10)
        for row in rows:
            t = float(row[0])
            self.assertAlmostEqual(float(row[1]), math.exp(c * t), delta=1e-7)
            self.assertAlmostEqual(float(row[3]), -0.5 * math.exp(c * t), delta=1e-7)

    def test_divergent_riccati_equation_with_zero_gain(self):
        data = {
            'lambda0': {'type': 'constant', 'value': 1.0},
            'grid_points': 11,
            'quadruple': {'A_d': [[2.0]], 'B_d': [[0.0]], 'C_d': [[1.0]], 'D_d': [[0.0]]},
        }
        path = self.config(data)
        report = json.loads(run('lq_simulate', path, gain='zero', periods=2, no_tail=True))
        self.assertIsNone(report['optimal_cost'])
        self.assertIsNone(report['optimal_cost_certified'])
        self.assertFalse(report['stable'])
        with self.assertRaises(CommandError) as ctx:
            run('lq_simulate', path, periods=2, no_tail=True)
        self.assertEqual(ctx.exception.returncode, 2)
