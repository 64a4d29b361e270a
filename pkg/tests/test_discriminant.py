import unittest
from collections import Counter
from dataclasses import replace

from hypothesis import given, settings, strategies as st

from builders.elliptic import build_A
from builders.local_models import (
    ConifoldParams,
    affine_Ak_B,
    generalized_conifold_B,
    generalized_conifold_smoothing,
    orbifolded_conifold_B,
)
from geometry.polygons import catalog_entry, f3_star
from tropical.complex import VertexFan
from tropical.discriminant import discriminant_graph, find_junctions, invariant_lines, is_simple_positive
from tropical.isomorphism import isomorphic
from tropical.legendre import LegendreError, legendre_dual
from tropical.monodromy import MonodromyError
from tropical.polarization import polarize
from tropical.refinement import separate_points, split_singular_edge
from tropical.validation import validate


def _without_pl(c):
    return c.with_changes(fans=tuple(VertexFan(f.vertex, f.charts, None) for f in c.fans))


class TestDiscriminantGraph(unittest.TestCase):
    def test_conifold_junctions(self):
        g = discriminant_graph(generalized_conifold_B(ConifoldParams(1, 1)))
        self.assertEqual(g.junction_types(), Counter({"fourvalent-generalized": 1}))
        self.assertEqual(len(g.four_valent()), 1)
        o = discriminant_graph(orbifolded_conifold_B(ConifoldParams(1, 1)))
        self.assertEqual(o.junction_types(), Counter({"fourvalent-orbifolded": 1}))

    @given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=3))
    @settings(max_examples=6, deadline=None)
    def test_conifold_degree_grows_with_kl(self, k, l):
        junction = find_junctions(generalized_conifold_B(ConifoldParams(k, l)))[0]
        self.assertEqual(junction.valency, 4)
        self.assertEqual(junction.sign, -1)
        self.assertIsNotNone(junction.degree)

    def test_summary(self):
        summary = discriminant_graph(generalized_conifold_B(ConifoldParams(2, 1))).summary()
        self.assertEqual(summary['dimension'], 3)
        self.assertEqual(summary['loci'], 4)
        self.assertEqual(summary['four_valent'], 1)
        self.assertEqual(summary['components'], 1)

    def test_relabelled_multiplicity_is_caught(self):
        c = affine_Ak_B(2)
        broken = c.with_changes(loci=(replace(c.loci[0], multiplicity=1),) + c.loci[1:])
        with self.assertRaises(MonodromyError):
            discriminant_graph(broken)

    def test_planar_multiplicities(self):
        self.assertEqual(discriminant_graph(build_A(catalog_entry("p2")).base).multiplicities(), [1, 1, 1, 3, 3, 3])


class TestSimplicity(unittest.TestCase):
    def test_multiplicity_above_one_is_not_simple(self):
        report = is_simple_positive(affine_Ak_B(2))
        self.assertFalse(report.ok)
        self.assertFalse(report.to_dict()['simple_positive'])
        self.assertTrue(is_simple_positive(affine_Ak_B(1)))

    def test_four_valent_is_not_simple(self):
        self.assertFalse(is_simple_positive(generalized_conifold_B(ConifoldParams(1, 1))).ok)
        self.assertTrue(is_simple_positive(generalized_conifold_smoothing(ConifoldParams(1, 1))).ok)


class TestLegendre(unittest.TestCase):
    def test_involution_on_conifolds(self):
        for k, l in ((1, 1), (2, 1), (1, 3)):
            with self.subTest(kl=(k, l)):
                c = generalized_conifold_B(ConifoldParams(k, l))
                self.assertTrue(isomorphic(legendre_dual(legendre_dual(c)), c))

    def test_dual_name(self):
        c = generalized_conifold_B(ConifoldParams(1, 1))
        dual = legendre_dual(c)
        self.assertEqual(dual.name, f"LD({c.name})")
        self.assertEqual(legendre_dual(dual).name, c.name)

    def test_needs_pl(self):
        with self.assertRaises(LegendreError):
            legendre_dual(_without_pl(affine_Ak_B(1)))
        with self.assertRaises(LegendreError):
            legendre_dual(build_A(f3_star()).base)

    def test_not_isomorphic_across_parameters(self):
        self.assertFalse(isomorphic(generalized_conifold_B(ConifoldParams(1, 1)),
                                    generalized_conifold_B(ConifoldParams(2, 1))))


class TestPolarization(unittest.TestCase):
    def test_polarize_recovers_pl(self):
        c = polarize(_without_pl(build_A(catalog_entry("p2")).base))
        self.assertTrue(validate(c).ok)
        self.assertIsNotNone(c.fan_map["o"].pl)
        legendre_dual(c)

    def test_polarize_conifold_smoothing(self):
        c = polarize(_without_pl(generalized_conifold_smoothing(ConifoldParams(2, 1))))
        self.assertTrue(validate(c).ok)


class TestRefinement(unittest.TestCase):
    def test_separate_all_points(self):
        c = separate_points(build_A(catalog_entry("p2")).base)
        self.assertTrue(validate(c).ok)
        self.assertTrue(all(abs(locus.multiplicity) == 1 for locus in c.loci))
        self.assertEqual(sum(locus.multiplicity for locus in c.loci), 12)

    def test_separated_points_stay_on_one_line(self):
        c = separate_points(build_A(catalog_entry("p2")).base)
        inner = {i for i, locus in enumerate(c.loci) if locus.tag == "inner"}
        sizes = sorted(len(set(group) & inner) for group in invariant_lines(c) if set(group) & inner)
        self.assertEqual(sizes, [3, 3, 3])

    def test_no_point_on_edge(self):
        c = affine_Ak_B(2)
        with self.assertRaises(MonodromyError):
            split_singular_edge(c, ("nowhere", "else"))

    def test_nothing_to_split(self):
        c = affine_Ak_B(1)
        self.assertIs(separate_points(c), c)


if __name__ == '__main__':
    unittest.main()
