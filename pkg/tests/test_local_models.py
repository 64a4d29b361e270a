import unittest
from collections import Counter

from hypothesis import given, settings, strategies as st

from builders.local_models import (
    BuilderError,
    ConifoldParams,
    ResolutionChoice,
    affine_Ak_B,
    affine_Ak_Bdual,
    affine_Ak_dual_resolution,
    affine_Ak_dual_smoothing,
    affine_Ak_resolution,
    affine_Ak_resolution_loop,
    affine_Ak_smoothing,
    affine_Ak_smoothing_loop,
    generalized_conifold_B,
    generalized_conifold_resolution,
    generalized_conifold_smoothing,
    gorenstein_vertex,
    orb_trivalent_negative,
    orb_trivalent_positive,
    orbifolded_conifold_B,
    orbifolded_conifold_resolution,
    orbifolded_conifold_smoothing,
)
from geometry.lattice import as_matrix, mat_inverse
from tropical.constructions import product_with_interval
from tropical.discriminant import discriminant_graph, find_junctions, invariant_lines, is_simple_positive
from tropical.isomorphism import isomorphic
from tropical.legendre import legendre_dual
from tropical.monodromy import ChamberPath, edge_multiplicity_from_monodromy, is_shear, monodromy
from tropical.validation import validate

STANDARD = [(0, 0), (1, 0), (0, 1)]


class TestAffineAk(unittest.TestCase):
    @given(st.integers(min_value=1, max_value=4))
    @settings(max_examples=4, deadline=None)
    def test_golden_monodromy(self, k):
        c = affine_Ak_B(k)
        self.assertTrue(validate(c).ok)
        self.assertEqual(len(c.loci), 1)
        self.assertEqual(c.loci[0].multiplicity, k)
        self.assertEqual(monodromy(c, c.loci[0].loop).linear, as_matrix([[1, 0], [k, 1]]))
        dual = affine_Ak_Bdual(k)
        self.assertTrue(validate(dual).ok)
        self.assertEqual(dual.loci[0].multiplicity, k)
        self.assertEqual(monodromy(dual, dual.loci[0].loop).linear, as_matrix([[1, -k], [0, 1]]))

    def test_k3_matrix(self):
        c = affine_Ak_B(3)
        self.assertEqual(monodromy(c, c.loci[0].loop).linear, as_matrix([[1, 0], [3, 1]]))

    def test_k1_is_simple(self):
        self.assertTrue(is_simple_positive(affine_Ak_B(1)).ok)
        self.assertFalse(is_simple_positive(affine_Ak_B(2)).ok)

    def test_invalid_k(self):
        for builder in (affine_Ak_B, affine_Ak_Bdual, affine_Ak_smoothing, affine_Ak_resolution):
            with self.assertRaises(BuilderError):
                builder(0)

    def test_legendre_pair(self):
        for k in (1, 2, 3):
            self.assertTrue(isomorphic(legendre_dual(affine_Ak_Bdual(k)), affine_Ak_B(k)))
            self.assertEqual(len(legendre_dual(affine_Ak_B(k)).cells), 2)

    def test_smoothing_keeps_one_invariant_line(self):
        for k in (2, 3):
            c = affine_Ak_smoothing(k)
            self.assertTrue(validate(c).ok)
            self.assertEqual(sorted(abs(l.multiplicity) for l in c.loci), [1] * k)
            self.assertEqual(len(invariant_lines(c)), 1)
            self.assertTrue(is_simple_positive(c).ok)

    def test_smoothing_loop_recovers_the_original_monodromy(self):
        for k in (1, 2, 3):
            c = affine_Ak_smoothing(k)
            m = monodromy(c, affine_Ak_smoothing_loop(k))
            self.assertEqual(m.linear, as_matrix([[1, 0], [k, 1]]))

    def test_resolution_uses_parallel_lines(self):
        for k in (2, 3):
            c = affine_Ak_resolution(k)
            self.assertTrue(validate(c).ok)
            self.assertEqual(sorted(abs(l.multiplicity) for l in c.loci), [1] * k)
            self.assertEqual(len(invariant_lines(c)), k)
            m = monodromy(c, affine_Ak_resolution_loop(k))
            self.assertTrue(is_shear(m))
            self.assertEqual(abs(edge_multiplicity_from_monodromy(m)), k)

    def test_dual_models(self):
        strip = affine_Ak_dual_smoothing(3)
        self.assertEqual(len(strip.loci), 3)
        self.assertEqual(len(invariant_lines(strip)), 1)
        resolved = affine_Ak_dual_resolution(3)
        self.assertEqual(len(resolved.loci), 3)
        self.assertEqual(resolved.metadata['dual_name'], "affine-A2-smoothing")

    def test_product_with_interval_is_simple_positive(self):
        self.assertTrue(is_simple_positive(product_with_interval(affine_Ak_smoothing(2))).ok)


class TestConifolds(unittest.TestCase):
    def test_params(self):
        with self.assertRaises(BuilderError):
            ConifoldParams(0, 1)
        with self.assertRaises(BuilderError):
            ConifoldParams(2, -1)

    def test_golden_monodromies(self):
        c = generalized_conifold_B(ConifoldParams(2, 3))
        self.assertTrue(validate(c).ok)
        around_horizontal = monodromy(c, ChamberPath(("plus", "minus"), ("c", "a"), "c"))
        self.assertEqual(around_horizontal.linear, as_matrix([[1, 0, 0], [0, 1, 0], [0, 2, 1]]))
        around_vertical = monodromy(c, ChamberPath(("plus", "minus"), ("a", "b"), "a"))
        self.assertEqual(around_vertical.linear, as_matrix([[1, -3, 0], [0, 1, 0], [0, 0, 1]]))

    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=4))
    @settings(max_examples=16, deadline=None)
    def test_four_valent_junction(self, k, l):
        c = generalized_conifold_B(ConifoldParams(k, l))
        self.assertEqual(sorted(abs(x.multiplicity) for x in c.loci), sorted([k, k, l, l]))
        junctions = find_junctions(c)
        self.assertEqual(len(junctions), 1)
        self.assertEqual(junctions[0].local_type, "fourvalent-generalized")
        self.assertEqual(junctions[0].degree, 2 * k * l)
        self.assertEqual(is_simple_positive(c).ok, False)

    def test_orbifolded_is_the_dual(self):
        p = ConifoldParams(2, 1)
        o = orbifolded_conifold_B(p)
        self.assertTrue(validate(o).ok)
        self.assertEqual(len(o.cells), 4)
        junctions = find_junctions(o)
        self.assertEqual([j.local_type for j in junctions], ["fourvalent-orbifolded"])
        self.assertEqual(junctions[0].degree, 4)
        self.assertTrue(isomorphic(legendre_dual(o), generalized_conifold_B(p)))

    def test_orbifolded_monodromy_is_dual_to_generalized(self):
        # legs turn by the inverse transpose of the generalized conifold's shears
        for k, l in ((1, 1), (2, 3)):
            o = orbifolded_conifold_B(ConifoldParams(k, l))
            around_horizontal = as_matrix([[1, 0, 0], [0, 1, -k], [0, 0, 1]])
            around_vertical = as_matrix([[1, 0, 0], [l, 1, 0], [0, 0, 1]])
            families = Counter()
            for locus in o.loci:
                m = monodromy(o, locus.loop).linear
                if m in (around_horizontal, mat_inverse(around_horizontal)):
                    families['horizontal'] += 1
                elif m in (around_vertical, mat_inverse(around_vertical)):
                    families['vertical'] += 1
                else:
                    self.fail(f"({k}, {l}): unexpected leg monodromy {m}")
            self.assertEqual(families, Counter(horizontal=2, vertical=2))

    def test_conifold_case(self):
        c = generalized_conifold_B(ConifoldParams(1, 1))
        self.assertEqual([x.multiplicity for x in c.loci], [1, 1, 1, 1])
        self.assertEqual(find_junctions(c)[0].degree, 2)

    def test_smoothing_is_simple_positive(self):
        p = ConifoldParams(2, 2)
        c = generalized_conifold_smoothing(p)
        self.assertTrue(validate(c).ok)
        self.assertTrue(is_simple_positive(c).ok)
        summary = discriminant_graph(c).summary()
        self.assertEqual(summary['junctions'], {"trivalent-": 8})
        self.assertEqual(summary['four_valent'], 0)

    def test_smoothing_for_another_triangulation(self):
        p = ConifoldParams(1, 2)
        triangulations = ResolutionChoice.all_triangulations(1, 2)
        choice = ResolutionChoice.from_triangles(1, 2, triangulations[-1])
        c = generalized_conifold_smoothing(p, choice)
        self.assertTrue(is_simple_positive(c).ok)
        self.assertEqual(len(find_junctions(c)), 4)

    def test_resolution_lines(self):
        c = generalized_conifold_resolution(ConifoldParams(2, 2))
        self.assertTrue(validate(c).ok)
        self.assertTrue(is_simple_positive(c).ok)
        summary = discriminant_graph(c).summary()
        self.assertEqual(summary['segments'], 4)
        self.assertEqual(summary['junctions'], {})

    def test_resolution_ordering_changes_the_planes(self):
        p = ConifoldParams(1, 1)
        first = generalized_conifold_resolution(p)
        choice = ResolutionChoice.from_triangles(1, 1, ResolutionChoice.default(1, 1).triangles, 'vh')
        second = generalized_conifold_resolution(p, choice)
        self.assertEqual(second.metadata['ordering'], 'vh')
        self.assertEqual(len(first.loci), len(second.loci))

    def test_orbifolded_smoothing_and_resolution(self):
        p = ConifoldParams(1, 2)
        for c in (orbifolded_conifold_smoothing(p), orbifolded_conifold_resolution(p)):
            self.assertTrue(validate(c).ok)
            self.assertTrue(is_simple_positive(c).ok)
        types = Counter(j.local_type for j in find_junctions(orbifolded_conifold_resolution(p)))
        self.assertEqual(types, Counter({"trivalent+": 4}))


class TestResolutionChoice(unittest.TestCase):
    def test_triangulation_counts(self):
        self.assertEqual(len(ResolutionChoice.all_triangulations(1, 1)), 2)
        self.assertEqual(len(ResolutionChoice.all_triangulations(1, 2)), 6)
        self.assertEqual(len(ResolutionChoice.all_triangulations(1, 3)), 20)
        self.assertEqual(len(ResolutionChoice.all_triangulations(2, 2)), 64)

    def test_every_triangulation_is_accepted(self):
        for triangles in ResolutionChoice.all_triangulations(2, 1):
            choice = ResolutionChoice.from_triangles(2, 1, triangles)
            self.assertEqual(len(choice.triangles), 4)

    def test_default(self):
        choice = ResolutionChoice.default(2, 3)
        self.assertEqual(len(choice.triangles), 12)
        self.assertEqual(choice.ordering, "hhvvv")

    def test_rejects_bad_choices(self):
        with self.assertRaises(BuilderError):
            ResolutionChoice.from_triangles(1, 1, [[(0, 0), (1, 0), (1, 1)]])
        with self.assertRaises(BuilderError):
            ResolutionChoice.from_triangles(1, 2, [[(0, 0), (2, 0), (0, 1)], [(2, 0), (2, 1), (0, 1)]])
        with self.assertRaises(BuilderError):
            ResolutionChoice.from_triangles(1, 1, ResolutionChoice.default(1, 1).triangles, 'hh')
        with self.assertRaises(BuilderError):
            generalized_conifold_smoothing(ConifoldParams(2, 2), ResolutionChoice.default(1, 1))


class TestGorensteinVertices(unittest.TestCase):
    def test_standard_triangle(self):
        negative = orb_trivalent_negative(STANDARD)
        self.assertTrue(validate(negative).ok)
        junction, = find_junctions(negative)
        self.assertEqual((junction.local_type, junction.degree), ("trivalent-", 1))
        positive = orb_trivalent_positive(STANDARD)
        junction, = find_junctions(positive)
        self.assertEqual((junction.local_type, junction.degree), ("trivalent+", 1))

    def test_leg_multiplicities_are_edge_lengths(self):
        c = orb_trivalent_negative([(0, 0), (2, 0), (0, 2)])
        self.assertEqual(sorted(abs(x.multiplicity) for x in c.loci), [2, 2, 2])
        self.assertEqual(find_junctions(c)[0].degree, 8)
        c = orb_trivalent_negative([(0, 0), (3, 0), (0, 1)])
        self.assertEqual(sorted(abs(x.multiplicity) for x in c.loci), [1, 1, 3])

    def test_legendre_pair(self):
        triangle = [(0, 0), (2, 0), (0, 1)]
        self.assertTrue(isomorphic(legendre_dual(orb_trivalent_positive(triangle)),
                                   orb_trivalent_negative(triangle)))

    def test_polygons(self):
        square = gorenstein_vertex([(0, 0), (1, 0), (1, 1), (0, 1)], -1)
        self.assertEqual([j.local_type for j in find_junctions(square)], ["fourvalent-generalized"])
        self.assertEqual(find_junctions(square)[0].degree, 2)
        pentagon = gorenstein_vertex([(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)], -1)
        junction, = find_junctions(pentagon)
        self.assertEqual(junction.local_type, "gorenstein-")
        self.assertEqual(junction.valency, 5)
        self.assertEqual(junction.degree, 5)
        positive = gorenstein_vertex([(0, 0), (1, 0), (2, 1), (1, 2), (0, 1)], 1)
        self.assertEqual(find_junctions(positive)[0].local_type, "gorenstein+")

    def test_rectangle_matches_the_generalized_conifold_legs(self):
        c = gorenstein_vertex([(0, 0), (3, 0), (3, 2), (0, 2)])
        conifold = generalized_conifold_B(ConifoldParams(2, 3))
        self.assertEqual(sorted(abs(x.multiplicity) for x in c.loci),
                         sorted(abs(x.multiplicity) for x in conifold.loci))
        self.assertEqual(find_junctions(c)[0].degree, find_junctions(conifold)[0].degree)

    def test_invalid_polygons(self):
        with self.assertRaises(BuilderError):
            gorenstein_vertex([(0, 0), (2, 0), (0, 2), (1, 1)])
        with self.assertRaises(BuilderError):
            gorenstein_vertex([(0, 0), (1, 1), (2, 2)])
        with self.assertRaises(BuilderError):
            gorenstein_vertex(STANDARD, 0)
        with self.assertRaises(BuilderError):
            orb_trivalent_negative([(0, 0), (1, 1), (2, 2)])


if __name__ == '__main__':
    unittest.main()
