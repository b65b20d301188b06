import math

import numpy as np
from django.test import SimpleTestCase

from core import model
from core.exceptions import (
    DimensionMismatch, NonPositiveSpeed, OutOfDomain, SingularK, ZeroOrderTermPresent,
)

from .systems import example_system


class SpatialProfileTests(SimpleTestCase):
    def test_constant_speed_travel_time(self):
        profile = model.constant_profile(2.0, 101)
        self.assertAlmostEqual(profile.p1, 0.5, places=14)
        self.assertAlmostEqual(model.travel_time(profile, 0.4), 0.2, places=14)
        self.assertEqual(profile.epsilon, 2.0)

    def test_affine_speed_travel_time(self):
        profile = model.affine_profile(1.0, 1.0)
        self.assertAlmostEqual(profile.p1, math.log(2), delta=1e-7)
        self.assertAlmostEqual(model.travel_time(profile, 0.5), math.log(1.5), delta=1e-7)

    def test_inverse_travel_time(self):
        profile = model.affine_profile(1.0, 1.0)
        for zeta in (0.0, 0.3, 0.77, 1.0):
            tau = model.travel_time(profile, zeta)
            self.assertAlmostEqual(model.travel_time_inverse(profile, tau), zeta, delta=1e-10)

    def test_travel_time_is_increasing(self):
        profile = model.sampled_profile(np.linspace(0.0, 1.0, 51), 1.5 + np.sin(np.linspace(0.0, 6.0, 51)))
        times = model.travel_time(profile, np.linspace(0.0, 1.0, 400))
        self.assertTrue(np.all(np.diff(times) > 0))

    def test_travel_time_outside_domain(self):
        profile = model.constant_profile(1.0, 11)
        with self.assertRaises(OutOfDomain):
            model.travel_time(profile, 1.5)
        with self.assertRaises(OutOfDomain):
            model.travel_time_inverse(profile, -0.1)

    def test_non_positive_speed_is_rejected(self):
        with self.assertRaises(NonPositiveSpeed):
            model.affine_profile(1.0, -1.0, 11)

    def test_grid_must_cover_unit_interval(self):
        with self.assertRaises(DimensionMismatch):
            model.sampled_profile([0.0, 0.5], [1.0, 1.0])


class InnerProductTests(SimpleTestCase):
    def test_weighted_inner_product_of_linear_function(self):
        profile = model.constant_profile(1.0, 201)
        f = model.StateFunction.from_callable(profile.grid, lambda zeta: [zeta])
        self.assertAlmostEqual(model.weighted_inner_product(f, f, profile).real, 1 / 3, places=12)

    def test_weight_enters_the_pairing(self):
        profile = model.affine_profile(1.0, 1.0, 201)
        one = model.StateFunction.constant(profile.grid, [1.0])
        self.assertAlmostEqual(model.weighted_inner_product(one, one, profile).real, 1.5, places=12)

    def test_weighted_norm_dominates_epsilon_times_plain_norm(self):
        profile = model.affine_profile(0.5, 2.0, 201)
        plain = model.constant_profile(1.0, 201)
        rng = np.random.default_rng(8)
        for _ in range(10):
            f = model.StateFunction(profile.grid, rng.uniform(-1, 1, (201, 3)))
            weighted = model.weighted_inner_product(f, f, profile).real
            self.assertGreaterEqual(weighted, profile.epsilon * model.weighted_inner_product(f, f, plain).real)

    def test_shapes_must_agree(self):
        profile = model.constant_profile(1.0, 11)
        f = model.StateFunction.constant(profile.grid, [1.0])
        g = model.StateFunction.constant(profile.grid, [1.0, 2.0])
        with self.assertRaises(DimensionMismatch):
            model.weighted_inner_product(f, g, profile)


class ValidateTests(SimpleTestCase):
    def test_worked_example_is_valid(self):
        report = model.validate(example_system(101))
        self.assertTrue(report.ok)
        self.assertEqual(report.epsilon, 1.0)

    def test_singular_K(self):
        system = model.BoundarySystem(
            K=[[1.0, 2.0], [2.0, 4.0]],
            L=np.eye(2),
            K_y=np.zeros((1, 2)),
            L_y=np.zeros((1, 2)),
            lambda0=model.constant_profile(1.0, 11),
            inputs=1,
        )
        with self.assertRaises(SingularK):
            model.validate(system)

    def test_output_matrix_shape(self):
        system = model.BoundarySystem(
            K=np.eye(2),
            L=np.eye(2),
            K_y=np.zeros((1, 3)),
            L_y=np.zeros((1, 2)),
            lambda0=model.constant_profile(1.0, 11),
            inputs=1,
        )
        with self.assertRaises(DimensionMismatch):
            model.validate(system)

    def test_too_many_inputs(self):
        system = model.BoundarySystem(
            K=[[-1.0]], L=[[-0.5]], K_y=[[-1.0]], L_y=[[0.0]],
            lambda0=model.constant_profile(1.0, 11), inputs=2,
        )
        with self.assertRaises(DimensionMismatch):
            model.validate(system)


class QTransformTests(SimpleTestCase):
    def constant_M(self, c, points=2001):
        return np.full((points, 1, 1), c)

    def test_constant_zero_order_term(self):
        for c in (-1.0, 0.5, 2.0):
            with self.subTest(c=c):
                _, Q1 = model.q_transform(example_system(M=self.constant_M(c)))
                self.assertAlmostEqual(Q1[0, 0], math.exp(-c), delta=1e-8)

    def test_transformed_L_is_divided_by_Q1(self):
        transformed, Q1 = model.q_transform(example_system(M=self.constant_M(0.5)))
        self.assertAlmostEqual(transformed.L[0, 0], -0.5 / Q1[0, 0], places=12)
        self.assertEqual(transformed.K[0, 0], -1.0)
        self.assertIsNone(transformed.M)

    def test_zero_M_is_identity(self):
        transformed, Q1 = model.q_transform(example_system(101, M=np.zeros((101, 1, 1))))
        np.testing.assert_array_equal(Q1, np.eye(1))
        self.assertEqual(model.reduce(transformed).A_d[0, 0], -0.5)

    def test_half_speed_zero_order_term(self):
        system = model.BoundarySystem(
            K=[[-1.0]], L=[[-0.5]], K_y=[[-1.0]], L_y=[[0.0]],
            lambda0=model.constant_profile(2.0, 201), inputs=1, M=np.ones((201, 1, 1)),
        )
        _, Q1 = model.q_transform(system)
        self.assertAlmostEqual(Q1[0, 0], math.exp(-0.5), delta=1e-8)

    def test_profile_ends_at_q1(self):
        system = example_system(201, M=self.constant_M(0.5, 201))
        Q = model.q_profile(system)
        self.assertEqual(Q.shape, (201, 1, 1))
        np.testing.assert_allclose(Q[:, 0, 0], np.exp(-0.5 * system.lambda0.grid), atol=1e-10)
        _, Q1 = model.q_transform(system, Q)
        np.testing.assert_array_equal(Q1, Q[-1])

    def test_profile_without_zero_order_term_is_identity(self):
        Q = model.q_profile(example_system(11))
        np.testing.assert_array_equal(Q, np.broadcast_to(np.eye(1), (11, 1, 1)))

    def test_transform_state(self):
        system = example_system(201, M=self.constant_M(1.0, 201))
        z0 = model.StateFunction.constant(system.lambda0.grid, [2.0])
        transformed = model.transform_state(z0, model.q_profile(system))
        np.testing.assert_allclose(transformed.values[:, 0], 2.0 * np.exp(-system.lambda0.grid), atol=1e-9)

    def test_transformed_system_reduces(self):
        transformed, _ = model.q_transform(example_system(M=self.constant_M(2.0)))
        quad = model.reduce(transformed)
        self.assertAlmostEqual(quad.A_d[0, 0], -0.5 * math.exp(2.0), delta=1e-6)


class ReduceTests(SimpleTestCase):
    def test_boundary_relation_is_recovered(self):
        rng = np.random.default_rng(31)
        for n in range(1, 5):
            inputs = int(rng.integers(1, n + 1))
            system = model.BoundarySystem(
                K=rng.uniform(-1, 1, (n, n)) + n * np.eye(n),
                L=rng.uniform(-1, 1, (n, n)),
                K_y=rng.uniform(-1, 1, (2, n)),
                L_y=rng.uniform(-1, 1, (2, n)),
                lambda0=model.constant_profile(1.0, 11),
                inputs=inputs,
            )
            quad = model.reduce(system)
            with self.subTest(n=n, inputs=inputs):
                np.testing.assert_allclose(system.K @ quad.A_d, -system.L, atol=1e-12)
                np.testing.assert_allclose(system.K @ quad.B_d, -system.input_selector(), atol=1e-12)

    def test_worked_example(self):
        quad = model.reduce(example_system(11))
        self.assertEqual(quad.A_d[0, 0], -0.5)
        self.assertEqual(quad.B_d[0, 0], 1.0)
        self.assertEqual(quad.C_d[0, 0], -0.5)
        self.assertEqual(quad.D_d[0, 0], 1.0)

    def test_two_component_system(self):
        a = 0.3
        system = model.BoundarySystem(
            K=np.eye(2),
            L=np.array([[0.0, -1.0], [-a, 0.0]]),
            K_y=np.zeros((1, 2)),
            L_y=np.array([[-a, 0.0]]),
            lambda0=model.constant_profile(1.0, 11),
            inputs=1,
        )
        quad = model.reduce(system)
        np.testing.assert_allclose(quad.A_d, [[0.0, 1.0], [a, 0.0]])
        np.testing.assert_allclose(quad.B_d, [[0.0], [-1.0]])
        np.testing.assert_allclose(quad.C_d, [[a, 0.0]])
        np.testing.assert_allclose(quad.D_d, [[0.0]])

    def test_zero_order_term_must_be_removed_first(self):
        with self.assertRaises(ZeroOrderTermPresent):
            model.reduce(example_system(11, M=np.ones((11, 1, 1))))

    def test_dual_quadruple(self):
        quad = model.DiscreteQuadruple(
            A_d=[[0.1, 0.2], [0.3, 0.4]], B_d=[[1.0], [0.0]], C_d=[[0.0, 1.0]], D_d=[[0.5]],
        )
        dual = quad.dual()
        np.testing.assert_array_equal(dual.A_d, quad.A_d.T)
        np.testing.assert_array_equal(dual.B_d, quad.C_d.T)
        self.assertEqual((dual.inputs, dual.outputs), (quad.outputs, quad.inputs))

    def test_quadruple_shapes_are_checked(self):
        with self.assertRaises(DimensionMismatch):
            model.DiscreteQuadruple(A_d=np.eye(2), B_d=np.ones((3, 1)), C_d=np.ones((1, 2)), D_d=[[0.0]])
