import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from qnet import losses
from qnet.exceptions import InvalidTarget, TargetShapeMismatch
from qnet.mesh import DESCENDING, GivensMesh, Projector, identity_mesh, init_mesh, propagate


def random_states(rng, N, M):
    X = rng.uniform(0.0, 1.0, size=(N, M))
    return X / np.linalg.norm(X, axis=0)


def scalar_central_difference(context, mesh, loss_norm, step=1e-5):
    grads = np.zeros_like(mesh.thetas)
    for p, k in mesh.gate_sequence():
        theta = mesh.thetas[p, k - 1]
        up = losses.context_loss(context, mesh.with_theta(p, k, theta + step), loss_norm)
        down = losses.context_loss(context, mesh.with_theta(p, k, theta - step), loss_norm)
        grads[p, k - 1] = (up - down) / (2 * step)
    return grads


class LossValueTestCase(SimpleTestCase):
    def test_uniform_sample_leaks_half(self):
        state = np.full(8, 1 / math.sqrt(8))
        loss = losses.compression_loss(state, identity_mesh(2, 8), Projector.top(8, 4), loss_norm=losses.SUM)
        self.assertAlmostEqual(loss, 0.5)

    def test_sample_inside_subspace_does_not_leak(self):
        state = np.array([0, 0, 0.6, 0.8])
        self.assertEqual(losses.compression_loss(state, identity_mesh(1, 4), Projector.top(4, 2)), 0.0)

    def test_explicit_target_reached(self):
        p = Projector.top(4, 2)
        target = losses.CompressionTarget.uniform(p, 1)
        state = target.b[:, 0]
        loss = losses.compression_loss(state, identity_mesh(1, 4), p, target, losses.SUM)
        self.assertAlmostEqual(loss, 0.0, places=15)

    def test_mean_normalization(self):
        state = np.full((8, 2), 1 / math.sqrt(8))
        mesh, p = identity_mesh(1, 8), Projector.top(8, 4)
        total = losses.compression_loss(state, mesh, p, loss_norm=losses.SUM)
        self.assertAlmostEqual(losses.compression_loss(state, mesh, p, loss_norm=losses.MEAN), total / 16)

    def test_exact_inverse_reconstructs(self):
        rng = np.random.default_rng(0)
        states = random_states(rng, 8, 3)
        U_C = init_mesh(4, 8, seed=1)
        loss = losses.reconstruction_loss(states, U_C, Projector.top(8, 8), U_C.inverse(), losses.SUM)
        self.assertLess(loss, 1e-20)

    def test_orthogonal_reconstruction_costs_two(self):
        loss = losses.reconstruction_loss(np.array([1.0, 0.0]), identity_mesh(1, 2), Projector.top(2, 2),
                                          GivensMesh(2, [[math.pi / 2]]), losses.SUM)
        self.assertAlmostEqual(loss, 2.0)


class CompressionTargetTestCase(SimpleTestCase):
    def setUp(self):
        self.projector = Projector.top(4, 2)

    def test_uniform_targets_are_unit_vectors(self):
        target = losses.CompressionTarget.uniform(self.projector, 3)
        assert_allclose(np.linalg.norm(target.b, axis=0), np.ones(3))
        target.validate(self.projector, 3)

    def test_shape_mismatch(self):
        target = losses.CompressionTarget.uniform(self.projector, 3)
        with self.assertRaises(TargetShapeMismatch):
            target.validate(self.projector, 2)

    def test_non_unit_target(self):
        b = np.zeros((4, 1))
        b[3] = 0.5
        with self.assertRaises(InvalidTarget):
            losses.CompressionTarget(losses.EXPLICIT, b).validate(self.projector, 1)

    def test_target_outside_retained_block(self):
        b = np.zeros((4, 1))
        b[0] = 1.0
        with self.assertRaises(InvalidTarget):
            losses.CompressionTarget(losses.EXPLICIT, b).validate(self.projector, 1)


class PartialTestCase(SimpleTestCase):
    def context(self, inputs):
        inputs = np.asarray(inputs, dtype=np.float64).reshape(len(inputs), -1)
        return losses.PipelineContext(inputs, np.ones(inputs.shape[0], dtype=bool), np.zeros_like(inputs))

    def test_forward_difference_of_rotation(self):
        partial = losses.fd_partial(GivensMesh(2, [[0.0]]), 0, 1, 1e-6, self.context([1.0, 0.0]))
        assert_allclose(partial[:, 0], [0.0, 1.0], atol=1e-5)

    def test_analytic_derivative_of_rotation(self):
        partial = losses.analytic_partial(GivensMesh(2, [[0.0]]), 0, 1, self.context([1.0, 0.0]))
        assert_allclose(partial[:, 0], [0.0, 1.0])

    def test_analytic_matches_central_difference(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            mesh = init_mesh(int(rng.integers(1, 4)), 8, seed=rng)
            context = self.context(random_states(rng, 8, 3))
            for p, k in mesh.gate_sequence():
                theta = mesh.thetas[p, k - 1]
                up = propagate(context.inputs, mesh.with_theta(p, k, theta + 1e-5))
                down = propagate(context.inputs, mesh.with_theta(p, k, theta - 1e-5))
                assert_allclose(losses.analytic_partial(mesh, p, k, context), (up - down) / 2e-5,
                                rtol=1e-6, atol=1e-8)

    def test_sweep_partials_match_analytic_partial(self):
        rng = np.random.default_rng(3)
        mesh = init_mesh(2, 6, seed=4, order=DESCENDING)
        context = self.context(random_states(rng, 6, 4))
        walker = losses.MeshSweep(mesh, context.inputs)
        for s, (p, k) in enumerate(walker.sequence):
            assert_allclose(walker.partial(s, losses.ANALYTIC), losses.analytic_partial(mesh, p, k, context),
                            atol=1e-12)
            assert_allclose(walker.partial(s, losses.CENTRAL, 1e-6), walker.partial(s, losses.ANALYTIC), atol=1e-8)
            walker.advance(s)
        assert_allclose(walker.state, propagate(context.inputs, mesh), atol=1e-12)


class GradientTestCase(SimpleTestCase):
    def test_gd_step(self):
        self.assertAlmostEqual(losses.gd_step(1.0, 0.5, 0.01), 0.995)
        self.assertEqual(losses.gd_step(1.0, 0.0, 0.01), 1.0)
        with self.assertRaises(ValueError):
            losses.gd_step(1.0, 0.5, 0.0)

    def test_single_parameter_single_sample(self):
        context = losses.PipelineContext(np.array([[1.0], [0.0]]), np.array([False, True]), np.array([[0.0], [0.5]]))
        gradient = losses.loss_gradient(context, GivensMesh(2, [[0.3]]), losses.SUM, losses.ANALYTIC)
        self.assertAlmostEqual(gradient.at(0, 1), 2 * (math.sin(0.3) - 0.5) * math.cos(0.3))

    def test_zero_residual_gives_zero_gradient(self):
        rng = np.random.default_rng(5)
        states = random_states(rng, 8, 2)
        U_C = init_mesh(3, 8, seed=6)
        context = losses.reconstruction_context(states, U_C, Projector.top(8, 8))
        gradient = losses.loss_gradient(context, U_C.inverse(), grad_mode=losses.ANALYTIC)
        assert_allclose(gradient.values, 0.0, atol=1e-12)

    def test_gradients_match_scalar_central_difference(self):
        rng = np.random.default_rng(7)
        projector = Projector.top(8, 4)
        for _ in range(50):
            states = random_states(rng, 8, 3)
            U_C = init_mesh(int(rng.integers(1, 4)), 8, seed=rng)
            U_R = init_mesh(int(rng.integers(1, 4)), 8, seed=rng, order=DESCENDING)
            for context, mesh in (
                (losses.compression_context(states, projector, losses.CompressionTarget()), U_C),
                (losses.reconstruction_context(states, U_C, projector), U_R),
            ):
                analytic = losses.loss_gradient(context, mesh, losses.MEAN, losses.ANALYTIC).values
                assert_allclose(analytic, scalar_central_difference(context, mesh, losses.MEAN),
                                rtol=1e-5, atol=1e-8)
                central = losses.loss_gradient(context, mesh, losses.MEAN, losses.CENTRAL, 1e-6).values
                assert_allclose(central, analytic, rtol=1e-5, atol=1e-8)

    def test_sweep_without_eta_leaves_mesh(self):
        rng = np.random.default_rng(8)
        mesh = init_mesh(2, 4, seed=9)
        context = losses.compression_context(random_states(rng, 4, 2), Projector.top(4, 2), losses.CompressionTarget())
        swept, _ = losses.sweep(mesh, context)
        assert_allclose(swept.thetas, mesh.thetas)

    def test_literal_sweep_updates_gate_by_gate(self):
        rng = np.random.default_rng(10)
        mesh = init_mesh(2, 6, seed=11)
        context = losses.compression_context(random_states(rng, 6, 3), Projector.top(6, 2), losses.CompressionTarget())
        expected = mesh
        for p, k in mesh.gate_sequence():
            g = losses.loss_gradient(context, expected, losses.SUM, losses.ANALYTIC).at(p, k)
            expected = expected.with_theta(p, k, expected.thetas[p, k - 1] - 0.05 * g)
        swept, _ = losses.sweep(mesh, context, losses.SUM, losses.ANALYTIC, eta=0.05)
        assert_allclose(swept.thetas, expected.thetas, atol=1e-12)

    def test_one_gate_descent_is_monotone(self):
        target = np.array([[math.cos(0.8)], [math.sin(0.8)]])
        context = losses.PipelineContext(np.array([[1.0], [0.0]]), np.array([True, True]), target)
        mesh = GivensMesh(2, [[0.0]])
        history = [losses.context_loss(context, mesh, losses.SUM)]
        for _ in range(50):
            mesh, _ = losses.sweep(mesh, context, losses.SUM, losses.FORWARD, 1e-8, eta=0.1)
            history.append(losses.context_loss(context, mesh, losses.SUM))
        self.assertTrue(all(b <= a for a, b in zip(history, history[1:])))
        self.assertAlmostEqual(mesh.thetas[0, 0], 0.8, places=3)


class LeakageBoundTestCase(SimpleTestCase):
    def test_no_mesh_beats_the_bound(self):
        rng = np.random.default_rng(12)
        states = random_states(rng, 8, 10)
        projector = Projector.top(8, 3)
        bound = losses.leakage_bound(states, 3, losses.SUM)
        for _ in range(20):
            U_C = init_mesh(int(rng.integers(1, 6)), 8, seed=rng)
            U_R = init_mesh(int(rng.integers(1, 6)), 8, seed=rng, order=DESCENDING)
            self.assertGreaterEqual(losses.compression_loss(states, U_C, projector, loss_norm=losses.SUM),
                                    bound - 1e-12)
            self.assertGreaterEqual(losses.reconstruction_loss(states, U_C, projector, U_R, losses.SUM),
                                    bound - 1e-12)

    def test_normalization(self):
        states = random_states(np.random.default_rng(13), 4, 5)
        self.assertAlmostEqual(losses.leakage_bound(states, 2, losses.MEAN),
                               losses.leakage_bound(states, 2, losses.SUM) / 20)

    def test_full_dimension_has_no_leakage(self):
        states = random_states(np.random.default_rng(14), 4, 3)
        self.assertAlmostEqual(losses.leakage_bound(states, 4), 0.0)


class ExactMinimizationTestCase(SimpleTestCase):
    def contexts(self, rng, N=6, M=4):
        states = random_states(rng, N, M)
        projector = Projector.top(N, 2)
        U_C = init_mesh(2, N, seed=rng)
        target = losses.CompressionTarget.uniform(projector, M)
        return [
            (losses.compression_context(states, projector, losses.CompressionTarget()), U_C),
            (losses.compression_context(states, projector, target), U_C),
            (losses.reconstruction_context(states, U_C, projector), init_mesh(2, N, seed=rng, order=DESCENDING)),
        ]

    def test_coefficients_reproduce_the_loss(self):
        rng = np.random.default_rng(15)
        for context, mesh in self.contexts(rng):
            walker = losses.MeshSweep(mesh, context.inputs)
            for s, (p, k) in enumerate(walker.sequence):
                coefficients = walker.coefficients(s, context)
                for theta in (-2.0, 0.1, 1.3, 4.0):
                    expected = losses.context_loss(context, walker.result().with_theta(p, k, theta), losses.SUM)
                    self.assertAlmostEqual(coefficients[0] + losses.trig_value(coefficients, theta), expected,
                                           places=10)
                walker.advance(s)

    def test_trig_minimum_beats_a_fine_grid(self):
        rng = np.random.default_rng(16)
        grid = np.linspace(0.0, 2 * math.pi, 20000)
        for _ in range(50):
            coefficients = rng.normal(size=5)
            theta = losses.trig_minimum(coefficients, float(rng.uniform(0, 2 * math.pi)))
            self.assertLessEqual(losses.trig_value(coefficients, theta),
                                 np.min(losses.trig_value(coefficients, grid)) + 1e-9)

    def test_flat_loss_keeps_the_angle(self):
        self.assertEqual(losses.trig_minimum(np.zeros(5), 1.25), 1.25)

    def test_one_gate_lands_on_target(self):
        target = np.array([[math.cos(0.8)], [math.sin(0.8)]])
        context = losses.PipelineContext(np.array([[1.0], [0.0]]), np.array([True, True]), target)
        mesh = losses.minimize_sweep(GivensMesh(2, [[0.0]]), context)
        self.assertAlmostEqual(mesh.thetas[0, 0], 0.8, places=9)

    def test_sweep_never_increases_the_loss(self):
        rng = np.random.default_rng(17)
        for context, mesh in self.contexts(rng):
            history = [losses.context_loss(context, mesh, losses.SUM)]
            for _ in range(10):
                mesh = losses.minimize_sweep(mesh, context)
                history.append(losses.context_loss(context, mesh, losses.SUM))
            self.assertTrue(all(b <= a + 1e-12 for a, b in zip(history, history[1:])))
            self.assertLess(history[-1], history[0])
