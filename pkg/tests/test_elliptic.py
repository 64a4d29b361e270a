import unittest

from hypothesis import given, settings, strategies as st

from builders.elliptic import (
    BuilderError,
    build,
    build_A,
    build_Aprime,
    dual_star,
    resolve_inner,
    resolve_outer,
    smooth,
    smooth_inner,
    smooth_outer,
    verify_mirror_pair,
)
from geometry.polygons import StarConfiguration, catalog_entry, f3_star, f4_star, reflexive_catalog
from tropical.complex import euler_characteristic
from tropical.discriminant import invariant_lines, is_simple_positive
from tropical.monodromy import edge_multiplicity_from_monodromy, monodromy
from tropical.validation import validate

CATALOG = reflexive_catalog()


class TestBuildA(unittest.TestCase):
    def test_p2(self):
        e = build_A(catalog_entry("p2"))
        self.assertTrue(validate(e.base).ok)
        self.assertEqual(e.inner_multiplicities, [3, 3, 3])
        self.assertEqual(e.outer_multiplicities, [1, 1, 1])
        self.assertEqual(e.total_multiplicity, 12)
        self.assertEqual(e.boundary_length, 3)
        self.assertEqual(len(e.base.cells), 6)
        self.assertEqual(euler_characteristic(e.base), 1)

    def test_monodromy_matches_labels(self):
        c = build_A(catalog_entry("p2")).base
        for locus in c.loci:
            self.assertEqual(edge_multiplicity_from_monodromy(monodromy(c, locus.loop)), locus.multiplicity)

    def test_example_polygon(self):
        e = build_A(catalog_entry("schoen_example_p1"))
        self.assertEqual(e.inner_multiplicities, [1, 1, 2, 2])
        self.assertEqual(e.outer_multiplicities, [1, 1, 2, 2])
        self.assertEqual(len(e.ak_singularities()), 4)

    def test_pl_only_on_convex_stars(self):
        c = build_A(catalog_entry("p1xp1")).base
        self.assertIsNotNone(c.fan_map["o"].pl)
        c = build_A(f3_star()).base
        self.assertTrue(all(fan.pl is None for fan in c.fans))

    def test_f3_star_has_negative_point(self):
        e = build_A(f3_star())
        self.assertTrue(validate(e.base).ok)
        self.assertEqual(e.inner_multiplicities, [-1, 2, 2, 5])
        self.assertEqual(e.outer_multiplicities, [1, 1, 1, 1])
        self.assertEqual(e.total_multiplicity, 12)

    def test_f4_star(self):
        for builder in (build_A, build_Aprime):
            e = builder(f4_star())
            self.assertEqual(e.total_multiplicity, 12)
            self.assertIn(-2, e.inner_multiplicities + e.outer_multiplicities)

    def test_sheared_f3_star(self):
        star = StarConfiguration.from_vectors([(1, 0), (1, 1), (2, 3), (-1, -1)])
        self.assertEqual(sorted(star.orders), [-1, 2, 2, 5])
        self.assertEqual(build_A(star).total_multiplicity, 12)
        self.assertEqual(build_Aprime(star).total_multiplicity, 12)

    def test_invalid_star(self):
        with self.assertRaises(BuilderError):
            build_A([(1, 0), (0, 1)])
        with self.assertRaises(BuilderError):
            build([(1, 0), (0, 1), (-1, -1)], "B")


class TestBuildAprime(unittest.TestCase):
    def test_p2(self):
        e = build_Aprime(catalog_entry("p2"))
        self.assertTrue(validate(e.base).ok)
        self.assertEqual(e.inner_multiplicities, [1, 1, 1])
        self.assertEqual(e.outer_multiplicities, [3, 3, 3])
        self.assertEqual(e.total_multiplicity, 12)
        self.assertEqual(e.boundary_length, 3)
        self.assertIn("P", e.base.cell_map)

    def test_non_convex_keeps_triangles(self):
        e = build_Aprime(f3_star())
        self.assertTrue(validate(e.base).ok)
        self.assertNotIn("P", e.base.cell_map)
        self.assertEqual(e.inner_multiplicities, [1, 1, 1, 1])
        self.assertEqual(e.outer_multiplicities, [-1, 2, 2, 5])


class TestCatalogSurfaces(unittest.TestCase):
    @given(st.integers(min_value=0, max_value=15))
    @settings(max_examples=16, deadline=None)
    def test_twelve_and_boundary(self, index):
        P = CATALOG[index]
        a, aprime = build_A(P), build_Aprime(P)
        for e in (a, aprime):
            self.assertEqual(e.total_multiplicity, 12)
            self.assertEqual(e.boundary_length, P.boundary_count)
            self.assertEqual(e.boundary_length, sum(P.edge_lengths))
        self.assertEqual(a.inner_multiplicities, sorted(P.vertex_orders))
        self.assertEqual(a.outer_multiplicities, sorted(P.edge_lengths))
        self.assertEqual(aprime.inner_multiplicities, sorted(P.edge_lengths))
        self.assertEqual(aprime.outer_multiplicities, sorted(P.vertex_orders))

    def test_dual_star(self):
        star = dual_star(catalog_entry("p2"))
        self.assertEqual(sorted(star.orders), [1, 1, 1])
        with self.assertRaises(BuilderError):
            dual_star(f3_star())


class TestMirrorPairs(unittest.TestCase):
    def test_p2(self):
        report = verify_mirror_pair(catalog_entry("p2"))
        self.assertTrue(report.ok, report.to_dict())

    def test_every_catalog_polygon(self):
        for P in CATALOG:
            with self.subTest(polygon=P.name):
                self.assertTrue(verify_mirror_pair(P).ok)

    def test_self_dual_polygons(self):
        self_dual = [P for P in CATALOG if P.is_self_dual()]
        self.assertEqual(len(self_dual), 4)
        for P in self_dual:
            self.assertTrue(verify_mirror_pair(P, P).ok)

    def test_mismatched_pair_fails(self):
        P = catalog_entry("p2")
        report = verify_mirror_pair(P, P)
        self.assertFalse(report.ok)
        self.assertFalse(report.legendre_match)
        self.assertFalse(report.to_dict()['ok'])


class TestSmoothingAndResolution(unittest.TestCase):
    def test_smooth_inner_keeps_points_on_their_lines(self):
        e = smooth_inner(build_A(catalog_entry("p2")))
        self.assertTrue(validate(e.base).ok)
        self.assertEqual(e.inner_multiplicities, [1] * 9)
        self.assertEqual(e.total_multiplicity, 12)
        inner = {i for i, locus in enumerate(e.base.loci) if locus.tag == "inner"}
        sizes = sorted(len(group) for group in invariant_lines(e.base) if set(group) & inner)
        self.assertEqual(sizes, [3, 3, 3])

    def test_smooth_outer(self):
        e = smooth_outer(build_Aprime(catalog_entry("p2")))
        self.assertEqual(e.outer_multiplicities, [1] * 9)
        self.assertEqual(e.inner_multiplicities, [1, 1, 1])
        self.assertEqual(e.stage, "smoothed-outer")

    def test_smoothing_both_kinds_is_simple(self):
        e = smooth_outer(smooth_inner(build_A(catalog_entry("schoen_example_p1"))))
        self.assertTrue(is_simple_positive(e.base).ok)
        self.assertEqual(e.total_multiplicity, 12)
        self.assertEqual(e.history, ("smooth-inner", "smooth-outer"))

    def test_smoothing_chosen_points(self):
        e = build_A(catalog_entry("schoen_example_p1"))
        index = next(i for i, locus in enumerate(e.inner_points) if locus.multiplicity == 2)
        smoothed = smooth_inner(e, [index])
        self.assertEqual(smoothed.inner_multiplicities, [1, 1, 1, 1, 2])
        with self.assertRaises(BuilderError):
            smooth_inner(e, [7])

    def test_resolve_inner_separates_lines(self):
        e = resolve_inner(build_A(catalog_entry("p2")))
        self.assertTrue(validate(e.base).ok)
        self.assertEqual(e.inner_multiplicities, [1] * 9)
        self.assertEqual(e.total_multiplicity, 12)
        inner = {i for i, locus in enumerate(e.base.loci) if locus.tag == "inner"}
        for group in invariant_lines(e.base):
            self.assertLessEqual(len(set(group) & inner), 1)

    def test_resolve_outer(self):
        e = resolve_outer(build_Aprime(catalog_entry("p2")))
        self.assertEqual(e.outer_multiplicities, [1] * 9)
        self.assertEqual(e.total_multiplicity, 12)

    def test_non_convex_rejected(self):
        with self.assertRaises(BuilderError):
            smooth_inner(build_A(f3_star()))
        with self.assertRaises(BuilderError):
            resolve_outer(build_A(f3_star()))

    def test_unknown_kind_or_index(self):
        e = build_A(catalog_entry("p2"))
        with self.assertRaises(BuilderError):
            smooth(e, "middle")
        with self.assertRaises(BuilderError):
            smooth_inner(e, [-1])


if __name__ == '__main__':
    unittest.main()
