# zstability/tests/test_graded.py

import numpy as np
from django.test import SimpleTestCase

from zstability.algebra import LinearisedFactor, RootDatumLite, Scene, act
from zstability.exceptions import InvalidGradedPoint, PreconditionError
from zstability.graded import (
    GradedPoint, charges_dimension_BG, equivariant_specialise, fixes_point, grad_components_BG,
    levi_blocks, specialise,
)


class SpecialiseTests(SimpleTestCase):

    def setUp(self):
        self.scene = Scene(1, (LinearisedFactor(((2,), (0,), (-1,)), (0,), 'A'),), ((1, 1, 1),))

    def test_keeps_minimal_coordinates(self):
        result = specialise(self.scene, (1,))
        self.assertEqual(result.supports, ((2,),))
        self.assertEqual(result.levels, (-1,))
        self.assertEqual(result.limit.point[0][:2], (0j, 0j))

    def test_opposite_direction(self):
        self.assertEqual(specialise(self.scene, (-1,)).supports, ((0,),))

    def test_limit_is_fixed(self):
        limit = specialise(self.scene, (1,)).limit
        self.assertTrue(fixes_point(limit, (1,)))
        self.assertTrue(GradedPoint(limit, (1,)).is_valid())

    def test_invalid_graded_point(self):
        with self.assertRaises(InvalidGradedPoint):
            GradedPoint(self.scene, (1,)).validate()

    def test_equivariant_specialise(self):
        graded = equivariant_specialise(GradedPoint(self.scene, (0,)), (1,))
        self.assertEqual(tuple(graded.lam), (1,))
        graded.validate()

    def test_specialisation_commutes_with_action(self):
        factor = LinearisedFactor(((0, 0), (0, 1), (1, 0), (0, 2)), (0, 0), 'B')
        scene = Scene(2, (factor,), ((1, 2j, 0.5, -1),))
        sigma, theta, lam = (0.3, -0.7), (1.1, 0.2), (1, 0)
        first = specialise(act(scene, sigma, theta), lam).limit
        second = act(specialise(scene, lam).limit, sigma, theta)
        self.assertEqual(first.supports, second.supports)
        left = np.array(first.point[0])
        np.testing.assert_allclose(left / np.linalg.norm(left), np.array(second.point[0]), atol=1e-12)


class GradBGTests(SimpleTestCase):

    def test_levi_blocks(self):
        self.assertEqual(levi_blocks((1, 1, 0)), ((0, 1), (2,)))

    def test_gl2_components(self):
        components = grad_components_BG(RootDatumLite.gl(2), 1)
        self.assertEqual(len(components), 6)
        self.assertEqual(sum(c.orbit_size for c in components), 9)
        representatives = [tuple(c.representative) for c in components]
        self.assertIn((1, 0), representatives)
        self.assertNotIn((0, 1), representatives)

    def test_torus_components_are_points(self):
        components = grad_components_BG(RootDatumLite.torus(2), 1)
        self.assertEqual(len(components), 9)
        self.assertTrue(all(c.orbit_size == 1 for c in components))

    def test_bound_must_be_positive(self):
        with self.assertRaises(PreconditionError):
            grad_components_BG(RootDatumLite.gl(2), 0)

    def test_charges_dimension(self):
        cases = [('gl:2', 1), ('gl:3', 1), ('sl:2', 0), ('sl:3', 0), ('torus:3', 3)]
        for spec, expected in cases:
            datum = RootDatumLite.from_spec(spec)
            with self.subTest(group=spec):
                self.assertEqual(charges_dimension_BG(datum, 'equations'), expected)
                self.assertEqual(charges_dimension_BG(datum, 'reynolds'), expected)

    def test_unknown_method(self):
        with self.assertRaises(ValueError):
            charges_dimension_BG(RootDatumLite.gl(2), 'other')
