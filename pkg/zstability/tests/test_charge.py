# zstability/tests/test_charge.py

import math

import numpy as np
import sympy
from django.test import SimpleTestCase

from zstability.algebra import LinearisedFactor, RootDatumLite, Scene
from zstability.charge import (
    CentralCharge, TabulatedCharge, direct_sum_charge, filtration_margin, hm_weight, k_charge,
    lattice_margins, margin_of_degeneration, phase_of, slope_charge, stability_margin_real,
    validate_tabulated, z_of_degeneration, z_on_stabiliser,
)
from zstability.exceptions import DimensionMismatch, InvalidGradedPoint, PhaseDomainError, PreconditionError
from zstability.graded import specialise
from zstability.harness import InstanceSpec, generate_scene

I = sympy.I


def line_scene(shift=0):
    return Scene(1, (LinearisedFactor(((2,), (0,), (-1,)), (shift,), 'A'),), ((1, 1, 1),))


class CentralChargeTests(SimpleTestCase):

    def test_real_parts_at_zero_phase(self):
        charge = CentralCharge((I, 2 + 3 * I))
        self.assertEqual(charge.r_values, (1, 3))
        self.assertEqual(charge.s_values, (0, 2))
        self.assertTrue(charge.is_exact)

    def test_irrational_rotation_falls_back_to_floats(self):
        charge = CentralCharge((I,), sympy.pi / 4)
        self.assertFalse(charge.is_exact)
        self.assertAlmostEqual(charge.r_values[0], math.sqrt(2) / 2)

    def test_rejects_zero_and_out_of_range_phase(self):
        with self.assertRaises(PreconditionError):
            CentralCharge((0, 0))
        with self.assertRaises(PreconditionError):
            CentralCharge((I,), sympy.pi)

    def test_rotation_keeps_r(self):
        charge = CentralCharge((I, 1 + 2 * I))
        rotated = charge.rotated(sympy.pi / 3)
        np.testing.assert_allclose(rotated.r_array, charge.r_array, atol=1e-12)

    def test_composed_rotation_stays_usable(self):
        charge = CentralCharge((-1 + I,), sympy.pi / 4)
        rotated = charge.rotated(sympy.pi / 6)
        self.assertEqual(rotated.phase, 5 * sympy.pi / 12)
        self.assertAlmostEqual(float(rotated.r_values[0]), math.sqrt(2))
        self.assertAlmostEqual(float(rotated.s_values[0]), 0.0)
        np.testing.assert_allclose(rotated.r_array, charge.r_array, atol=1e-12)

    def test_rotation_wraps_phase(self):
        charge = CentralCharge((1 + I,), 5 * sympy.pi / 6)
        rotated = charge.rotated(sympy.pi / 3)
        self.assertEqual(rotated.phase, -5 * sympy.pi / 6)
        np.testing.assert_allclose(rotated.r_array, charge.r_array, atol=1e-12)

    def test_generated_charges_rotate(self):
        spec = InstanceSpec(seed=4, count=100)
        for index in range(spec.count):
            _, charge = generate_scene(spec, index)
            for theta in (sympy.pi / 6, -sympy.pi / 3):
                rotated = charge.rotated(theta)
                with self.subTest(index=index, theta=str(theta)):
                    np.testing.assert_allclose(rotated.r_array, charge.r_array, atol=1e-12)
                    np.testing.assert_allclose(rotated.s_array, charge.s_array, atol=1e-12)

    def test_linear_combinations(self):
        start = CentralCharge((I, 0))
        end = CentralCharge((I, 2 * I))
        self.assertEqual(start.interpolate(end, sympy.Rational(1, 2)).coefficients, (I, I))
        self.assertEqual((start + end).coefficients, (2 * I, 2 * I))
        self.assertEqual((2 * end).coefficients, (2 * I, 4 * I))

    def test_sum_with_other_phase_warns(self):
        with self.assertLogs('zstability.charge', 'WARNING'):
            CentralCharge((I,)) + CentralCharge((I,), sympy.pi / 4)

    def test_factor_count_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            CentralCharge((I, I)).check_factors(line_scene())


class DegenerationTests(SimpleTestCase):

    def test_hilbert_mumford_weights(self):
        scene = line_scene()
        self.assertEqual(hm_weight(scene, 0, (1,)), 1)
        self.assertEqual(hm_weight(scene, 0, (-1,)), 2)

    def test_z_and_margin(self):
        scene = line_scene()
        charge = CentralCharge((1 + 2 * I,))
        self.assertEqual(z_of_degeneration(scene, charge, (1,)), 1 + 2 * I)
        self.assertEqual(margin_of_degeneration(scene, charge, (1,)), 2)
        self.assertAlmostEqual(stability_margin_real(scene, charge, (1.0,)), 2.0)

    def test_margin_is_positively_homogeneous(self):
        scene = line_scene(sympy.Rational(1, 3))
        charge = CentralCharge((I,))
        for lam in ((1,), (-1,)):
            self.assertEqual(margin_of_degeneration(scene, charge, (3 * lam[0],)),
                             3 * margin_of_degeneration(scene, charge, lam))

    def test_lattice_margins_exact(self):
        scene = line_scene(sympy.Rational(1, 2))
        charge = CentralCharge((I / 3,))
        margins = lattice_margins(scene, charge, [[1], [-1], [2]])
        self.assertTrue(margins.exact)
        np.testing.assert_allclose(margins.as_floats(), [0.5, 0.5, 1.0])

    def test_lattice_margins_float(self):
        scene = line_scene()
        charge = CentralCharge((I,), sympy.pi / 4)
        margins = lattice_margins(scene, charge, [[1]])
        self.assertFalse(margins.exact)
        self.assertAlmostEqual(margins.as_floats()[0], math.sqrt(2) / 2)

    def test_z_on_stabiliser(self):
        factor = LinearisedFactor(((1, 0), (1, 1)), (sympy.Rational(1, 2), 0))
        scene = Scene(2, (factor,), ((1, 1),))
        charge = CentralCharge((I,))
        self.assertEqual(z_on_stabiliser(scene, charge, (1, 0)), -I / 2)
        with self.assertRaises(InvalidGradedPoint):
            z_on_stabiliser(scene, charge, (0, 1))



def graded_pair(rng):
    """Ponto graduado (x, zeta) obtido por especialização e um cocaractere lam sorteado."""
    rank = int(rng.integers(1, 4))
    factors, point, coefficients = [], [], []
    for k in range(int(rng.integers(1, 4))):
        size = int(rng.integers(2, 6))
        weights = rng.integers(-3, 4, size=(size, rank)).tolist()
        shift = [sympy.Rational(int(v), 2) for v in rng.integers(-4, 5, size=rank)]
        factors.append(LinearisedFactor(weights, shift, f'F{k}'))
        point.append(tuple(complex(c) for c in rng.normal(size=size) + 1j * rng.normal(size=size)))
        coefficients.append(sympy.Rational(int(rng.integers(-4, 5)), 2) + I * sympy.Rational(int(rng.integers(1, 5)), 2))
    scene = Scene(rank, tuple(factors), tuple(point))
    zeta = tuple(int(v) for v in rng.integers(-2, 3, size=rank))
    lam = tuple(int(v) for v in rng.integers(-2, 3, size=rank))
    return specialise(scene, zeta).limit, zeta, lam, CentralCharge(tuple(coefficients))


class CompositeIdentityTests(SimpleTestCase):

    def test_thousand_graded_pairs(self):
        rng = np.random.default_rng(31)
        for index in range(1000):
            x, zeta, lam, charge = graded_pair(rng)
            y = specialise(x, lam).limit
            composite = tuple(a + b for a, b in zip(zeta, lam))
            left = z_on_stabiliser(x, charge, zeta) + z_of_degeneration(x, charge, lam)
            right = z_on_stabiliser(y, charge, composite)
            with self.subTest(index=index):
                self.assertEqual(sympy.expand(left - right), 0)

class ExampleChargeTests(SimpleTestCase):

    def test_phase_of(self):
        self.assertAlmostEqual(phase_of(1j), math.pi / 2)
        self.assertAlmostEqual(phase_of(-1 + 1j), 3 * math.pi / 4)
        for value in (0, -1, 1 - 1j):
            with self.subTest(value=value), self.assertRaises(PhaseDomainError):
                phase_of(value)

    def test_slope_and_filtrations(self):
        self.assertEqual(slope_charge(2, 3), 2 - 3 * I)
        with self.assertRaises(PreconditionError):
            slope_charge(-1, 0)
        values = [slope_charge(1, 1), slope_charge(1, -1)]
        self.assertEqual(direct_sum_charge(values, [1, 0]), 1 - I)
        self.assertEqual(filtration_margin(values, [1, 0]), -1)
        self.assertEqual(filtration_margin(values, [0, 1]), 1)

    def test_k_charge(self):
        result = k_charge(1, 2, 3, 4)
        self.assertEqual(result.df_margin, 2)
        self.assertTrue(result.semistable)
        self.assertGreater(result.phase, math.pi / 2)
        self.assertFalse(k_charge(1, 0, 1, 1).semistable)
        with self.assertRaises(PreconditionError):
            k_charge(0, 1, 1, 1)


class TabulatedChargeTests(SimpleTestCase):

    def setUp(self):
        self.datum = RootDatumLite.gl(2)

    def test_character_is_reconstructed(self):
        table = TabulatedCharge.from_function(lambda lam: (2 + I) * (lam[0] + lam[1]), self.datum, 1)
        report = validate_tabulated(table)
        self.assertTrue(report.passed)
        self.assertTrue(report.exact)
        self.assertEqual(report.character, (2 + I, 2 + I))
        self.assertEqual(report.residual, 0)

    def test_weyl_violation(self):
        report = validate_tabulated(TabulatedCharge.from_function(lambda lam: lam[0], self.datum, 1))
        self.assertFalse(report.passed)
        self.assertTrue(report.weyl_violations)
        self.assertFalse(report.additivity_violations)

    def test_additivity_violation(self):
        report = validate_tabulated(TabulatedCharge.from_function(lambda lam: lam[0] ** 2 + lam[1] ** 2, self.datum, 1))
        self.assertTrue(report.additivity_violations)
        self.assertIsNone(report.character)

    def test_zero_violation(self):
        report = validate_tabulated(TabulatedCharge({(0, 0): 1, (1, 0): 1, (0, 1): 1}, self.datum, 1))
        self.assertTrue(report.zero_violation)

    def test_empty_table(self):
        with self.assertRaises(PreconditionError):
            TabulatedCharge({}, self.datum, 1)
