import random
import unittest
from collections import Counter

from hypothesis import given, settings, strategies as st

from geometry.lattice import LatticePolytope, mat_vec, random_unimodular_matrix
from geometry.polygons import (
    PolygonError,
    ReflexivePolygon,
    StarConfiguration,
    catalog_entry,
    dual_polygon,
    edge_lengths,
    f3_star,
    f4_star,
    is_reflexive,
    polygon_from_json,
    polygon_normal_form,
    polygon_to_json,
    reflexive_catalog,
    toric_oracle,
    twelve_sum,
    vertex_orders,
)

P2 = [(1, 0), (0, 1), (-1, -1)]
P2_DUAL = [(-1, -1), (2, -1), (-1, 2)]
DIAMOND = [(1, 0), (0, 1), (-1, 0), (0, -1)]
SQUARE = [(1, 1), (-1, 1), (-1, -1), (1, -1)]


class TestStarConfiguration(unittest.TestCase):
    def test_twelve_sum(self):
        self.assertEqual(twelve_sum(StarConfiguration.from_vectors(P2)), 12)
        self.assertEqual(twelve_sum(StarConfiguration.from_vectors(DIAMOND)), 12)
        star = f3_star()
        self.assertEqual(star.twice_area(), 4)
        self.assertEqual(sum(star.orders), 8)
        self.assertIn(-1, star.orders)
        self.assertEqual(twelve_sum(star), 12)

    def test_toric_oracle(self):
        self.assertEqual(toric_oracle(StarConfiguration.from_vectors(P2)), 12)
        self.assertEqual(toric_oracle(StarConfiguration.from_vectors(DIAMOND)), 12)
        self.assertEqual(toric_oracle(f3_star()), 12)
        self.assertEqual(toric_oracle(f4_star()), 12)

    def test_refinement_of_fat_cones(self):
        # The cone between (1,0) and (1,3) has determinant 3 but no interior lattice points.
        star = StarConfiguration.from_vectors([(1, 0), (1, 3), (0, 1), (-1, -1)])
        self.assertEqual(twelve_sum(star), 12)
        self.assertEqual(toric_oracle(star), 12)

    def test_invalid_stars(self):
        with self.assertRaises(PolygonError):
            StarConfiguration.from_vectors([(1, 0), (0, 1)])
        with self.assertRaises(PolygonError):
            StarConfiguration.from_vectors([(2, 0), (0, 1), (-1, -1)])
        with self.assertRaises(PolygonError):
            StarConfiguration.from_vectors([(1, 0), (-1, -1), (0, 1)])
        with self.assertRaises(PolygonError):
            StarConfiguration.from_vectors([(1, 0), (2, 3), (-1, 0), (0, -1)])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_oracles_agree_on_transformed_catalog_stars(self, seed):
        rng = random.Random(seed)
        polygon = catalog_entry(rng.randrange(16))
        matrix = random_unimodular_matrix(rng, 2, steps=4)
        image = [tuple(mat_vec(matrix, v)) for v in polygon.vertices]
        star = StarConfiguration.from_vectors(LatticePolytope.from_points(image).vertices)
        self.assertEqual(twelve_sum(star), 12)
        self.assertEqual(toric_oracle(star), 12)


class TestReflexivePolygons(unittest.TestCase):
    def test_is_reflexive(self):
        self.assertTrue(is_reflexive(P2))
        self.assertFalse(is_reflexive([(0, 0), (1, 0), (0, 1)]))
        self.assertFalse(is_reflexive([(2, 0), (0, 2), (-2, -2)]))
        with self.assertRaises(PolygonError):
            is_reflexive([(1, 0), (0, 1), (0, 0), (-1, -1)])

    def test_translated_input(self):
        shifted = ReflexivePolygon([(2, 1), (1, 2), (0, 0)])
        self.assertEqual(polygon_normal_form(shifted), polygon_normal_form(ReflexivePolygon(P2)))

    def test_dual_polygon(self):
        self.assertEqual(dual_polygon(P2).polygon, LatticePolytope.from_points(P2_DUAL))
        self.assertEqual(dual_polygon(DIAMOND).polygon, LatticePolytope.from_points(SQUARE))
        p = ReflexivePolygon(P2)
        self.assertEqual(p.dual().dual(), p)

    def test_orders_and_lengths(self):
        self.assertEqual(vertex_orders(P2), [3, 3, 3])
        self.assertEqual(edge_lengths(P2), [1, 1, 1])
        self.assertEqual(vertex_orders(P2_DUAL), [1, 1, 1])
        self.assertEqual(edge_lengths(P2_DUAL), [3, 3, 3])
        self.assertEqual(vertex_orders(DIAMOND), [2, 2, 2, 2])
        self.assertEqual(edge_lengths(DIAMOND), [1, 1, 1, 1])

    def test_boundary_points(self):
        p = ReflexivePolygon(P2_DUAL)
        self.assertEqual(len(p.boundary_points()), 9)
        self.assertEqual(p.boundary_count, 9)

    def test_json(self):
        p = ReflexivePolygon(DIAMOND, name="diamond")
        again = polygon_from_json(polygon_to_json(p))
        self.assertEqual(again, p)
        self.assertEqual(again.name, "diamond")
        with self.assertRaises(PolygonError):
            polygon_from_json('{"vertices": [[1, 0], ')


class TestCatalog(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.catalog = reflexive_catalog()

    def test_sixteen_classes(self):
        self.assertEqual(len(self.catalog), 16)
        self.assertEqual(len({p.normal_form for p in self.catalog}), 16)

    def test_boundary_distribution(self):
        counts = Counter(p.boundary_count for p in self.catalog)
        self.assertEqual(counts, Counter({3: 1, 4: 3, 5: 2, 6: 4, 7: 2, 8: 3, 9: 1}))

    def test_self_dual_entries(self):
        self_dual = [p for p in self.catalog if p.is_self_dual()]
        self.assertEqual(len(self_dual), 4)
        self.assertTrue(all(p.boundary_count == 6 for p in self_dual))

    def test_every_entry(self):
        forms = {p.normal_form for p in self.catalog}
        for p in self.catalog:
            with self.subTest(polygon=p.name):
                self.assertTrue(is_reflexive(p.polygon))
                self.assertEqual(twelve_sum(p.star()), 12)
                self.assertEqual(toric_oracle(p.star()), 12)
                self.assertEqual(sum(p.edge_lengths), p.boundary_count)
                self.assertEqual(p.dual().dual().normal_form, p.normal_form)
                self.assertIn(p.dual().normal_form, forms)
                self.assertEqual(sorted(p.dual().vertex_orders), sorted(p.edge_lengths))
                self.assertEqual(p.boundary_count + p.dual().boundary_count, 12)

    def test_lookup(self):
        self.assertEqual(catalog_entry("p2").normal_form, ReflexivePolygon(P2).normal_form)
        self.assertEqual(catalog_entry("p2dual").boundary_count, 9)
        self.assertEqual(catalog_entry("p1xp1").boundary_count, 4)
        self.assertEqual(catalog_entry(0).name, "b3a")
        self.assertEqual(catalog_entry("0"), catalog_entry(0))
        example = catalog_entry("schoen_example_p1")
        self.assertEqual((example.m, example.boundary_count), (4, 6))
        self.assertEqual(sorted(example.vertex_orders), [1, 1, 2, 2])
        self.assertEqual(sorted(example.edge_lengths), [1, 1, 2, 2])
        with self.assertRaises(PolygonError):
            catalog_entry(16)
        with self.assertRaises(PolygonError):
            catalog_entry("nope")

    def test_deterministic(self):
        self.assertEqual([p.normal_form for p in reflexive_catalog()], [p.normal_form for p in self.catalog])


if __name__ == '__main__':
    unittest.main()
