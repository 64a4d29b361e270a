import unittest
from collections import Counter

from hypothesis import given, settings, strategies as st

from builders.local_models import BuilderError
from builders.schoen import (
    as_polygon,
    build,
    build_G,
    build_O,
    classify_points,
    indexing_report,
    resolve_G,
    resolve_O,
    smooth_G,
    smooth_G_intermediate,
    smooth_O,
    verify_pair,
)
from geometry.polygons import catalog_entry, reflexive_catalog
from tropical.complex import euler_characteristic
from tropical.discriminant import discriminant_graph, is_simple_positive
from tropical.isomorphism import isomorphic
from tropical.legendre import legendre_dual
from tropical.monodromy import edge_multiplicity_from_monodromy, monodromy
from tropical.validation import validate

CATALOG = reflexive_catalog()
EXAMPLE = ("schoen_example_p1", "schoen_example_p2")


class TestBuildO(unittest.TestCase):
    @given(st.integers(min_value=0, max_value=15), st.integers(min_value=0, max_value=15))
    @settings(max_examples=12, deadline=None)
    def test_closed_sphere_with_m1_m2_points(self, i, j):
        P1, P2 = CATALOG[i], CATALOG[j]
        o = build_O(P1, P2)
        self.assertTrue(validate(o.base).ok)
        self.assertTrue(o.base.is_closed())
        self.assertEqual(euler_characteristic(o.base), 0)
        self.assertEqual(len(discriminant_graph(o.base).four_valent()), P1.m * P2.m)

    def test_multiplicities_match_monodromy(self):
        c = build_O("p2", "p1xp1").base
        for locus in c.loci:
            self.assertEqual(edge_multiplicity_from_monodromy(monodromy(c, locus.loop)), locus.multiplicity)

    def test_p2_pair(self):
        points = classify_points(build_O("p2", "p2"))
        self.assertEqual(len(points), 9)
        self.assertTrue(all(p.kl == (3, 3) for p in points))
        self.assertTrue(all(p.flavor == "orbifolded" for p in points))
        self.assertFalse(any(p.ordinary for p in points))

    def test_dual_p2_pair_is_ordinary(self):
        points = classify_points(build_O("p2dual", "p2dual"))
        self.assertEqual(len(points), 9)
        self.assertTrue(all(p.kl == (1, 1) and p.ordinary for p in points))

    def test_example_pair(self):
        o = build_O(*EXAMPLE)
        points = o.four_valent_points()
        self.assertEqual(len(points), 12)
        self.assertEqual(sum(1 for p in points if not p.ordinary), 6)
        self.assertEqual(o.summary()['ordinary'], 6)

    def test_kl_follows_vertex_orders(self):
        P1, P2 = catalog_entry(EXAMPLE[0]), catalog_entry(EXAMPLE[1])
        expected = Counter((a, b) for a in P1.vertex_orders for b in P2.vertex_orders)
        self.assertEqual(Counter(p.kl for p in classify_points(build_O(P1, P2))), expected)

    def test_circles(self):
        o = build_O("p2", "p1xp1")
        tags = Counter(circle['tag'] for circle in o.circle_components())
        self.assertEqual(tags, Counter({"inner-1": 3, "inner-2": 4}))
        self.assertEqual(o.crossing_counts()['observed'], 12)

    def test_not_reflexive(self):
        with self.assertRaises(BuilderError):
            build_O([(2, 0), (0, 2), (-2, -2)], "p2")
        with self.assertRaises(BuilderError):
            as_polygon("no-such-polygon")


class TestBuildG(unittest.TestCase):
    @given(st.integers(min_value=0, max_value=15), st.integers(min_value=0, max_value=15))
    @settings(max_examples=8, deadline=None)
    def test_closed_with_generalized_points(self, i, j):
        Q1, Q2 = CATALOG[i], CATALOG[j]
        g = build_G(Q1, Q2)
        self.assertTrue(validate(g.base).ok)
        self.assertTrue(g.base.is_closed())
        self.assertEqual(euler_characteristic(g.base), 0)
        points = classify_points(g)
        self.assertEqual(len(points), Q1.m * Q2.m)
        self.assertTrue(all(p.flavor == "generalized" for p in points))

    def test_mirror_kl_multisets(self):
        for P1, P2 in (("p2", "p2"), EXAMPLE, ("p1xp1", "p2dual")):
            with self.subTest(pair=(P1, P2)):
                P1, P2 = catalog_entry(P1), catalog_entry(P2)
                o_points = classify_points(build_O(P1, P2))
                g_points = classify_points(build_G(P1.dual(), P2.dual()))
                self.assertEqual(Counter(p.kl for p in o_points), Counter(p.kl for p in g_points))

    def test_legendre_dual_of_O(self):
        P1, P2 = catalog_entry("p2"), catalog_entry("p2dual")
        dual = discriminant_graph(legendre_dual(build_O(P1, P2).base))
        mirror = discriminant_graph(build_G(P1.dual(), P2.dual()).base)
        self.assertEqual(dual.junction_types(), Counter({"fourvalent-generalized": 9}))
        self.assertEqual(dual.junction_types(), mirror.junction_types())
        self.assertEqual(sorted(map(abs, dual.multiplicities())), sorted(map(abs, mirror.multiplicities())))
        self.assertEqual(dual.summary()['circles'], mirror.summary()['circles'])


class TestSmoothings(unittest.TestCase):
    def test_unsmoothed_complexes_are_not_simple(self):
        self.assertFalse(is_simple_positive(build_O("p2", "p2").base).ok)
        self.assertFalse(is_simple_positive(build_G("p2", "p2").base).ok)

    def test_smooth_O_is_simple(self):
        for pair in (("p2", "p2dual"), EXAMPLE):
            with self.subTest(pair=pair):
                o = smooth_O(*pair)
                self.assertTrue(validate(o.base).ok)
                self.assertTrue(is_simple_positive(o.base).ok)
                self.assertEqual(euler_characteristic(o.base), 0)
                self.assertEqual(o.stage, "smoothed")

    def test_intermediate_has_18_nodes(self):
        P1, P2 = catalog_entry(EXAMPLE[0]), catalog_entry(EXAMPLE[1])
        Q1, Q2 = P1.dual(), P2.dual()
        g = smooth_G_intermediate(Q1, Q2)
        points = classify_points(g)
        self.assertEqual(len(points), Q1.boundary_count * Q2.boundary_count)
        self.assertEqual(len(points), 18)
        self.assertTrue(all(p.kl == (1, 1) and p.flavor == "generalized" for p in points))

    def test_smooth_G_is_simple(self):
        g = smooth_G("p2", "p2dual")
        self.assertTrue(validate(g.base).ok)
        self.assertTrue(is_simple_positive(g.base).ok)
        self.assertEqual(discriminant_graph(g.base).four_valent(), [])

    def test_resolve_O_is_simple(self):
        o = resolve_O(*EXAMPLE)
        self.assertTrue(validate(o.base).ok)
        self.assertTrue(is_simple_positive(o.base).ok)
        self.assertEqual(o.stage, "resolved")

    def test_resolve_G_is_dual_of_smooth_O(self):
        g = resolve_G("p2dual", "p2")
        self.assertTrue(is_simple_positive(g.base).ok)
        smoothed = smooth_O(catalog_entry("p2dual").dual(), catalog_entry("p2").dual())
        self.assertTrue(isomorphic(legendre_dual(g.base), smoothed.base))

    def test_dispatch(self):
        self.assertEqual(build("p2", "p2dual", "G").variant, "G")
        with self.assertRaises(BuilderError):
            build("p2", "p2", "X")
        with self.assertRaises(BuilderError):
            build("p2", "p2", "O", "flatten")


class TestVerifyPair(unittest.TestCase):
    def test_example_pair(self):
        report = verify_pair(*EXAMPLE)
        self.assertTrue(report.ok, report.to_dict())
        self.assertEqual(report.four_valent, 12)
        self.assertEqual(report.ordinary, 6)
        self.assertTrue(report.mirror_kl_match)

    @given(st.integers(min_value=0, max_value=15), st.integers(min_value=0, max_value=15))
    @settings(max_examples=6, deadline=None)
    def test_catalog_pairs(self, i, j):
        report = verify_pair(CATALOG[i], CATALOG[j], mirror=False)
        self.assertTrue(report.ok, report.to_dict())
        self.assertIsNone(report.mirror_kl_match)

    def test_indexing_follows_elliptic_surfaces(self):
        report = indexing_report(*EXAMPLE)
        self.assertTrue(report['matches_elliptic'])
        self.assertEqual(report['observed']['inner-1'], sorted(catalog_entry(EXAMPLE[0]).edge_lengths))
        self.assertFalse(report['matches_stated'])


if __name__ == '__main__':
    unittest.main()
