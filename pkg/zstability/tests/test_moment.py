# zstability/tests/test_moment.py

import itertools
import math

import numpy as np
import sympy
from django.test import SimpleTestCase, tag

from zstability.algebra import LinearisedFactor, Scene, act
from zstability.charge import CentralCharge, margin_of_degeneration
from zstability.exceptions import PreconditionError
from zstability.graded import GradedPoint, specialise
from zstability.harness import InstanceSpec, generate_scene
from zstability.moment import (
    FlowStatus, asymptotic_slope, compatibility_check, complex_moment, energy, flow_destabiliser,
    is_extremal, phase_deviation, solve_batch, solve_critical, subsolution_check, z_flow,
)

I = sympy.I


def single(weights, shift=0, point=None):
    weights = tuple((w,) for w in weights)
    point = point or (1,) * len(weights)
    return Scene(1, (LinearisedFactor(weights, (shift,), 'A'),), (point,))


def plane_scene():
    first = LinearisedFactor(((1, 0), (0, 1), (-1, -1)), (0, 0), 'P2')
    second = LinearisedFactor(((1, 0), (-1, 0)), (sympy.Rational(1, 2), 0), 'P1')
    return Scene(2, (first, second), ((1, 2, 0.5), (1, 1j)))


class EnergyTests(SimpleTestCase):

    def setUp(self):
        self.scene = plane_scene()
        self.charge = CentralCharge((I, 2 + 3 * I))

    def test_gradient_matches_finite_differences(self):
        sigma = np.array([0.3, -0.2])
        report = energy(self.scene, self.charge, sigma)
        step = 1e-5
        for j in range(2):
            offset = np.zeros(2)
            offset[j] = step
            slope = (energy(self.scene, self.charge, sigma + offset).value
                     - energy(self.scene, self.charge, sigma - offset).value) / (2 * step)
            self.assertAlmostEqual(report.gradient[j], slope, delta=1e-6)

    def test_hessian_is_symmetric_positive(self):
        hessian = energy(self.scene, self.charge, (0.1, 0.4)).hessian
        np.testing.assert_allclose(hessian, hessian.T)
        self.assertGreater(np.linalg.eigvalsh(hessian).min(), 0)

    def test_gradient_is_minus_residual(self):
        sigma = (0.5, -1.0)
        report = energy(self.scene, self.charge, sigma)
        moment = complex_moment(self.scene, self.charge, sigma)
        np.testing.assert_allclose(report.gradient, -moment.residual, atol=1e-12)

    def test_complex_value_projects_to_energy(self):
        charge = CentralCharge((I, 1 + 2 * I), sympy.pi / 4)
        report = energy(self.scene, charge, (0.2, 0.7))
        rotated = complex(sympy.exp(-I * sympy.pi / 4)) * report.complex_value
        self.assertAlmostEqual(rotated.real, report.value)

    def test_far_evaluation_is_finite(self):
        report = energy(self.scene, self.charge, (800.0, -650.0))
        self.assertTrue(math.isfinite(report.value))
        self.assertTrue(np.all(np.isfinite(report.hessian)))

    def test_asymptotic_slope_equals_margin(self):
        scene = single((1, 2, 3))
        charge = CentralCharge((I,))
        for lam in ((1,), (-1,), (2,)):
            self.assertAlmostEqual(asymptotic_slope(scene, charge, lam), float(margin_of_degeneration(scene, charge, lam)), places=6)


class MomentTests(SimpleTestCase):

    def test_residual_is_rotated_imaginary_part(self):
        scene = plane_scene()
        charge = CentralCharge((1 + I, 2 * I), sympy.pi / 6)
        moment = complex_moment(scene, charge, (0.4, 0.1))
        rotated = complex(sympy.exp(-I * sympy.pi / 6)) * moment.z_tilde
        np.testing.assert_allclose(rotated.imag, moment.residual, atol=1e-12)

    def test_compatibility_on_specialised_point(self):
        scene = single((1, 2, 3))
        charge = CentralCharge((1 + I,))
        limit = specialise(scene, (1,)).limit
        report = compatibility_check(limit, charge, GradedPoint(limit, (1,)))
        self.assertTrue(report.exact)
        self.assertEqual(report.deviation, 0)

    def test_phase_deviation(self):
        self.assertAlmostEqual(phase_deviation(2 + 2j, math.pi / 4), 0.0)
        self.assertAlmostEqual(phase_deviation(-2 - 2j, math.pi / 4), 0.0)
        self.assertAlmostEqual(phase_deviation(1j, 0), math.pi / 2)
        self.assertEqual(phase_deviation(0, 1.0), 0.0)

    def test_subsolution(self):
        scene = Scene(1, (
            LinearisedFactor(((1,), (0,)), (0,), 'A'), LinearisedFactor(((0,), (0,)), (0,), 'B'),
        ), ((1, 1), (1, 1)))
        self.assertTrue(subsolution_check(scene, CentralCharge((I, -I))))
        report = subsolution_check(scene, CentralCharge((-I, I)))
        self.assertFalse(report)
        self.assertEqual(report.failing(), ['A'])


class SolverTests(SimpleTestCase):

    def test_stable_point_converges(self):
        scene = single((2, 0, -1))
        charge = CentralCharge((I,))
        solution = solve_critical(scene, charge, tol=1e-10)
        self.assertTrue(solution.converged)
        self.assertLess(solution.residual_norm, 1e-10)
        critical = act(scene, solution.sigma)
        self.assertTrue(is_extremal(critical, charge, tol=1e-8))
        sigma, trace = solution
        self.assertIsNotNone(sigma)
        self.assertEqual(trace.status, FlowStatus.CONVERGED)

    def test_critical_point_phase_is_aligned(self):
        scene = plane_scene()
        charge = CentralCharge((I, 3 * I))
        solution = solve_critical(scene, charge)
        self.assertTrue(solution.converged)
        critical = act(scene, solution.sigma)
        report = compatibility_check(critical, charge, GradedPoint(critical, (0, 0)))
        self.assertLess(report.phase_deviation, 1e-6)

    def test_polystable_point_converges_modulo_stabiliser(self):
        scene = Scene(2, (LinearisedFactor(((1, 0), (-1, 0)), (0, 0)),), ((1, 3),))
        solution = solve_critical(scene, CentralCharge((I,)))
        self.assertTrue(solution.converged)
        self.assertAlmostEqual(float(solution.sigma.as_array()[1]), 0.0)

    def test_unstable_point_diverges_with_distance_floor(self):
        solution = solve_critical(single((1, 2, 3)), CentralCharge((I,)))
        self.assertEqual(solution.status, FlowStatus.DIVERGING)
        self.assertAlmostEqual(solution.trace.residual_floor, 1.0, places=4)
        sigma, _ = solution
        self.assertIsNone(sigma)

    def test_strictly_semistable_point_does_not_converge(self):
        solution = solve_critical(single((0, 1)), CentralCharge((I,)), max_iter=300)
        self.assertFalse(solution.converged)
        self.assertLess(solution.trace.residual_floor, 1e-2)

    def test_point_fixed_by_whole_torus(self):
        scene = Scene(2, (
            LinearisedFactor(((0, 0), (1, 2)), (0, 0), 'A'), LinearisedFactor(((1, 1), (0, 0)), (1, 1), 'B'),
        ), ((1, 0), (1, 0)))
        solution = solve_critical(scene, CentralCharge((I, 2 * I)))
        self.assertEqual(solution.status, FlowStatus.CONVERGED)
        self.assertEqual(solution.residual_norm, 0.0)
        np.testing.assert_allclose(solution.sigma.as_array(), [0.0, 0.0])

    def test_mixed_signs_rejected(self):
        scene = Scene(1, (
            LinearisedFactor(((1,), (0,)), (0,)), LinearisedFactor(((1,), (0,)), (0,)),
        ), ((1, 1), (1, 1)))
        with self.assertRaises(PreconditionError):
            solve_critical(scene, CentralCharge((I, -I)))

    def test_batch_keeps_order(self):
        problems = [(single((2, 0, -1)), CentralCharge((I,))), (single((1, 2, 3)), CentralCharge((I,)))]
        results = solve_batch(problems, threads=2)
        self.assertEqual([r.status for r in results], [FlowStatus.CONVERGED, FlowStatus.DIVERGING])


class FlowTests(SimpleTestCase):

    def test_flow_decreases_energy_and_residual(self):
        trace = z_flow(plane_scene(), CentralCharge((I, 2 * I)), t_end=200.0)
        self.assertEqual(trace.status, FlowStatus.CONVERGED)
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(trace.energies, trace.energies[1:])))
        self.assertEqual(len(trace.energy_changes), len(trace.energies) - 1)
        self.assertTrue(all(change < 0 for change in trace.energy_changes))
        self.assertTrue(all(b <= a + 1e-8 for a, b in zip(trace.residual_norms, trace.residual_norms[1:])))

    def test_polystable_flow_from_origin_converges(self):
        scene = Scene(2, (LinearisedFactor(((1, 0), (-1, 0)), (0, 0)),), ((1, 3),))
        trace = z_flow(scene, CentralCharge((I,)), sigma0=(0, 0), t_end=100.0)
        self.assertEqual(trace.status, FlowStatus.CONVERGED)
        self.assertLess(trace.residual_norms[-1], 1e-8)

    def test_flow_limit_matches_solver(self):
        scene, charge = single((2, 0, -1)), CentralCharge((I,))
        trace = z_flow(scene, charge, t_end=200.0)
        solution = solve_critical(scene, charge)
        np.testing.assert_allclose(trace.final_sigma.as_array(), solution.sigma.as_array(), atol=1e-6)

    def test_unstable_flow_direction(self):
        trace = z_flow(single((1, 2, 3)), CentralCharge((I,)), t_end=200.0)
        self.assertNotEqual(trace.status, FlowStatus.CONVERGED)
        direction = flow_destabiliser(trace)
        self.assertAlmostEqual(float(direction.as_array()[0]), 1.0)
        self.assertAlmostEqual(trace.residual_floor, 1.0, places=3)

    def test_generated_flows_are_monotone(self):
        spec = InstanceSpec(seed=21, count=20)
        for index in range(spec.count):
            scene, charge = generate_scene(spec, index)
            trace = z_flow(scene, charge, t_end=2.0)
            with self.subTest(index=index):
                self.assertTrue(all(change < 0 for change in trace.energy_changes))
                self.assertTrue(all(
                    b <= a + 1e-8 for a, b in zip(trace.residual_norms, trace.residual_norms[1:])
                ))


@tag('slow')
class SeededCompatibilityTests(SimpleTestCase):

    def test_graded_points_of_hundred_scenes(self):
        rng = np.random.default_rng(13)
        for index in range(100):
            rank = int(rng.integers(1, 4))
            factors, point, coefficients = [], [], []
            for k in range(int(rng.integers(1, 4))):
                size = int(rng.integers(2, 6))
                weights = rng.integers(-3, 4, size=(size, rank)).tolist()
                shift = [sympy.Rational(int(v), 2) for v in rng.integers(-4, 5, size=rank)]
                factors.append(LinearisedFactor(weights, shift, f'F{k}'))
                point.append(tuple(complex(c) for c in rng.normal(size=size) + 1j * rng.normal(size=size)))
                coefficients.append(sympy.Rational(int(rng.integers(-3, 4)), 2) + I * int(rng.integers(1, 4)))
            scene = Scene(rank, tuple(factors), tuple(point))
            charge = CentralCharge(tuple(coefficients))
            for lam in itertools.product((-1, 0, 1), repeat=rank):
                limit = specialise(scene, lam).limit
                report = compatibility_check(limit, charge, GradedPoint(limit, lam))
                with self.subTest(index=index, lam=lam):
                    self.assertTrue(report.exact)
                    self.assertEqual(report.deviation, 0)
