import random
import unittest

from hypothesis import given, settings, assume, strategies as st

from geometry.lattice import (
    LatticeError,
    LatticePolytope,
    LatticeVector,
    UnimodularMap,
    affine_length,
    det2,
    identity_matrix,
    interior_point_count,
    is_standard_triangle,
    mat_det,
    mat_inverse,
    primitive,
    random_unimodular_matrix,
    turning_number,
    vec,
)

small = st.integers(min_value=-20, max_value=20)
points = st.tuples(small, small)
nonzero = points.filter(lambda p: p != (0, 0))


class TestVectors(unittest.TestCase):
    def test_primitive(self):
        self.assertEqual(primitive(vec(4, -6)), vec(2, -3))
        self.assertEqual(primitive(vec(0, 1)), vec(0, 1))
        with self.assertRaises(LatticeError):
            primitive(vec(0, 0))

    def test_det2(self):
        self.assertEqual(det2(vec(1, 0), vec(0, 1)), 1)
        self.assertEqual(det2(vec(2, 1), vec(-1, 1)), 3)
        self.assertEqual(det2(vec(1, 1), vec(2, 2)), 0)
        with self.assertRaises(LatticeError):
            det2(vec(1, 0, 0), vec(0, 1))

    def test_affine_length(self):
        self.assertEqual(affine_length(vec(0, 0), vec(4, 6)), 2)
        self.assertEqual(affine_length(vec(0, 0), vec(0, 1)), 1)
        with self.assertRaises(LatticeError):
            affine_length(vec(1, 1), vec(1, 1))

    def test_rejects_bad_coordinates(self):
        with self.assertRaises(LatticeError):
            LatticeVector((1, 2, 3, 4))
        with self.assertRaises(LatticeError):
            LatticeVector((0.5, 1))

    @given(nonzero)
    def test_primitive_is_idempotent(self, p):
        once = primitive(LatticeVector(p))
        self.assertEqual(primitive(once), once)

    @given(points, points, points, small)
    def test_det2_antisymmetric_and_bilinear(self, u, v, w, c):
        u, v, w = LatticeVector(u), LatticeVector(v), LatticeVector(w)
        self.assertEqual(det2(u, v), -det2(v, u))
        self.assertEqual(det2(u + w, v), det2(u, v) + det2(w, v))
        self.assertEqual(det2(u * c, v), c * det2(u, v))

    @given(points, nonzero, st.integers(min_value=0, max_value=10_000))
    def test_affine_length_is_unimodular_invariant(self, a, step, seed):
        m = UnimodularMap(random_unimodular_matrix(random.Random(seed), 2), LatticeVector((3, -1)))
        a = LatticeVector(a)
        b = a + LatticeVector(step)
        self.assertEqual(affine_length(m.apply(a), m.apply(b)), affine_length(a, b))


class TestTriangles(unittest.TestCase):
    def test_interior_point_count(self):
        self.assertEqual(interior_point_count([(0, 0), (1, 0), (0, 1)]), 0)
        self.assertEqual(interior_point_count([(0, 0), (2, 1), (1, 2)]), 1)
        self.assertEqual(interior_point_count([(0, 0), (1, 0), (0, 3)]), 0)
        with self.assertRaises(LatticeError):
            interior_point_count([(0, 0), (1, 1), (2, 2)])

    def test_is_standard_triangle(self):
        self.assertTrue(is_standard_triangle([(0, 0), (1, 0), (0, 1)]))
        self.assertFalse(is_standard_triangle([(0, 0), (2, 0), (0, 1)]))
        self.assertTrue(is_standard_triangle([(0, 0), (1, 1), (-1, 0)]))

    @settings(max_examples=1000, deadline=None)
    @given(points, points, points)
    def test_pick_matches_enumeration(self, a, b, c):
        assume(det2((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])) != 0)
        triangle = LatticePolytope.from_points([a, b, c])
        self.assertEqual(interior_point_count([a, b, c]), len(triangle.lattice_points(strict=True)))


class TestUnimodularMap(unittest.TestCase):
    def test_rejects_non_unimodular(self):
        with self.assertRaises(LatticeError):
            UnimodularMap(((2, 0), (0, 1)), vec(0, 0))

    def test_inverse(self):
        self.assertEqual(mat_inverse(((2, 1), (1, 1))), ((1, -1), (-1, 2)))
        m = UnimodularMap(((1, 2, 0), (0, 1, 0), (0, 3, 1)), vec(1, -2, 5))
        self.assertEqual(m @ m.inverse(), UnimodularMap.identity(3))
        self.assertEqual(m.inverse().apply(m.apply(vec(4, 4, -7))), vec(4, 4, -7))

    @given(st.integers(min_value=0, max_value=10_000))
    def test_composition_is_associative(self, seed):
        rng = random.Random(seed)
        a, b, c = (UnimodularMap(random_unimodular_matrix(rng, 3), vec(rng.randint(-3, 3), 0, 1)) for _ in range(3))
        self.assertEqual((a @ b) @ c, a @ (b @ c))
        self.assertIn(mat_det((a @ b).linear), (1, -1))

    def test_identity_matrix(self):
        self.assertEqual(mat_det(identity_matrix(3)), 1)


class TestPolytopes(unittest.TestCase):
    def test_counterclockwise_required(self):
        with self.assertRaises(LatticeError):
            LatticePolytope([vec(0, 0), vec(0, 1), vec(1, 0)])
        square = LatticePolytope([vec(0, 0), vec(1, 0), vec(1, 1), vec(0, 1)])
        self.assertEqual(square.twice_area(), 2)
        self.assertEqual(square.boundary_point_count(), 4)

    def test_non_extreme_vertex_rejected(self):
        with self.assertRaises(LatticeError):
            LatticePolytope([vec(0, 0), vec(1, 0), vec(2, 0), vec(0, 1)])

    def test_cube_face_lattice(self):
        cube = LatticePolytope.from_points([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)])
        self.assertEqual(len(cube.faces[0]), 8)
        self.assertEqual(len(cube.faces[1]), 12)
        self.assertEqual(len(cube.faces[2]), 6)
        self.assertEqual(len(cube.lattice_points()), 8)
        self.assertTrue(cube.contains((0, 0, 0)))
        self.assertFalse(cube.contains((0, 0, 0), strict=True))

    def test_prism_faces(self):
        prism = LatticePolytope.from_points([(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 1), (2, 0, 1), (0, 2, 1)])
        self.assertEqual(len(prism.facets), 5)
        self.assertEqual(len(prism.edges), 9)


class TestTurningNumber(unittest.TestCase):
    def test_orientation(self):
        loop = [(1, 0), (0, 1), (-1, -1)]
        self.assertEqual(turning_number(loop), 1)
        self.assertEqual(turning_number(loop[::-1]), -1)
        self.assertEqual(turning_number(loop * 2), 2)

    def test_segment_through_origin(self):
        with self.assertRaises(LatticeError):
            turning_number([(1, 0), (-1, 0), (0, 1)])


if __name__ == '__main__':
    unittest.main()
