# zstability/tests/test_harness.py

import math
from pathlib import Path

import sympy
from django.test import SimpleTestCase, tag

from zstability.algebra import LinearisedFactor, Scene
from zstability.charge import CentralCharge
from zstability.exceptions import PreconditionError
from zstability.harness import (
    InstanceSpec, charge_sweep, check_instance, generate_scene, kempf_ness_verify, margin_continuity,
    shrink_disagreement,
)
from zstability.stability import VerdictClass, classify
from zstability.utils import load_scenario

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'
I = sympy.I


def single(weights, shift=0):
    return Scene(1, (LinearisedFactor(tuple((w,) for w in weights), (shift,), 'A'),), ((1,) * len(weights),))


class GeneratorTests(SimpleTestCase):

    def setUp(self):
        self.spec = InstanceSpec(seed=11, count=20)

    def test_same_seed_same_instance(self):
        first, second = generate_scene(self.spec, 5), generate_scene(self.spec, 5)
        self.assertEqual(first, second)
        self.assertNotEqual(generate_scene(self.spec, 6), first)

    def test_instances_respect_ranges(self):
        for index in range(self.spec.count):
            scene, charge = generate_scene(self.spec, index)
            with self.subTest(index=index):
                self.assertTrue(1 <= scene.rank <= 3)
                self.assertTrue(1 <= len(scene.factors) <= 3)
                self.assertTrue(all(2 <= len(f.weights) <= 5 for f in scene.factors))
                self.assertTrue(all(float(r) >= 0.25 - 1e-12 for r in charge.r_values))

    def test_index_out_of_range(self):
        with self.assertRaises(PreconditionError):
            generate_scene(self.spec, 20)

    def test_invalid_spec(self):
        with self.assertRaises(PreconditionError):
            InstanceSpec(rank_range=(3, 1))
        with self.assertRaises(PreconditionError):
            InstanceSpec(coords_range=(1, 4))


class CheckInstanceTests(SimpleTestCase):

    def test_stable(self):
        row = check_instance(single((2, 0, -1)), CentralCharge((I,)))
        self.assertEqual(row['verdict'], 'Stable')
        self.assertEqual(row['solver_status'], 'Converged')
        self.assertTrue(row['agreement'])

    def test_unstable(self):
        row = check_instance(single((1, 2, 3)), CentralCharge((I,)))
        self.assertEqual(row['solver_status'], 'Diverging')
        self.assertAlmostEqual(row['distance'], 1.0)
        self.assertTrue(row['agreement'])

    def test_strictly_semistable(self):
        row = check_instance(single((0, 1)), CentralCharge((I,)))
        self.assertEqual(row['verdict'], 'StrictlySemistable')
        self.assertEqual(row['limit_status'], 'Converged')
        self.assertTrue(row['agreement'])

    def test_verification_rows_follow_index_order(self):
        report = kempf_ness_verify(InstanceSpec(seed=3, count=6), threads=2)
        self.assertEqual([row['index'] for row in report.rows], list(range(6)))
        self.assertEqual(report.summary['instances'], 6)
        self.assertEqual(report.to_dict()['version'], 1)
        self.assertEqual(len(report.failures), report.summary['disagreements'])
        self.assertTrue(report.ok)



@tag('slow')
class AcceptanceRunTests(SimpleTestCase):

    def test_two_hundred_instances_agree(self):
        report = kempf_ness_verify(InstanceSpec(seed=0, count=200), shrink=False)
        errors = [row for row in report.rows if row['verdict'] == 'Error']
        self.assertEqual(errors, [])
        self.assertEqual(report.summary['agreements'], 200)
        self.assertIn('StrictlySemistable', report.summary['verdicts'])

class ShrinkTests(SimpleTestCase):

    def test_drops_factors_and_coordinates(self):
        scene = Scene(1, (
            LinearisedFactor(((1,), (2,), (3,)), (0,), 'A'), LinearisedFactor(((0,), (1,)), (0,), 'B'),
        ), ((1, 1, 1), (1, 1)))
        charge = CentralCharge((I, I))
        small, reduced = shrink_disagreement(
            scene, charge, lambda s, c: classify(s, c).cls == VerdictClass.UNSTABLE,
        )
        self.assertEqual(len(small.factors), 1)
        self.assertEqual(len(small.factors[0].weights), 2)
        self.assertEqual(len(reduced.coefficients), 1)
        self.assertEqual(classify(small, reduced).cls, VerdictClass.UNSTABLE)


class SweepTests(SimpleTestCase):

    def test_walls(self):
        scenario = load_scenario(FIXTURES / 'sweep.json')
        start, end = scenario.charge('inicio'), scenario.charge('fim')
        direction = CentralCharge((0, 2 * I))
        report = charge_sweep(scenario.scene, start, direction, 4)
        self.assertEqual(
            [p['verdict'] for p in report.points],
            ['Unstable', 'Unstable', 'StrictlySemistable', 'Stable', 'Stable'],
        )
        self.assertEqual([(w['from_t'], w['to_t']) for w in report.walls], [('1/4', '1/2'), ('1/2', '3/4')])
        self.assertFalse(any(p['flagged'] for p in report.points))
        self.assertEqual(end.coefficients, (I, 2 * I))

    def test_steps_must_be_positive(self):
        with self.assertRaises(PreconditionError):
            charge_sweep(single((0, 1)), CentralCharge((I,)), CentralCharge((I,)), 0)


class ContinuityTests(SimpleTestCase):

    def test_rational_approximants_converge(self):
        factor = LinearisedFactor(((1, 0), (0, 1), (-1, -1)), (0, 0))
        scene = Scene(2, (factor,), ((1, 1, 1),))
        report = margin_continuity(scene, CentralCharge((I,)), (1.0, math.sqrt(2)))
        self.assertTrue(report.rows)
        self.assertTrue(report.converging)
        self.assertLess(report.rows[-1]['gap'], 1e-2)
