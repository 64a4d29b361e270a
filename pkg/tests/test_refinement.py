import unittest

from builders.local_models import affine_Ak_B
from tropical.isomorphism import isomorphic
from tropical.refinement import RefinementError, cut_cell, merge_cells, normalize
from tropical.validation import ComplexBuilder, validate

OCTAHEDRON = {"x+": (1, 0, 0), "x-": (-1, 0, 0), "y+": (0, 1, 0), "y-": (0, -1, 0),
              "z+": (0, 0, 1), "z-": (0, 0, -1)}


def octahedron():
    builder = ComplexBuilder(3, name="octahedron")
    builder.add_cell("O", OCTAHEDRON)
    return builder.build()


def cube():
    builder = ComplexBuilder(3, name="cube")
    builder.add_cell("C", {f"v{x}{y}{z}": (x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)})
    return builder.build()


class TestCut(unittest.TestCase):
    def test_diagonal_cut(self):
        c = affine_Ak_B(2)
        cut = cut_cell(c, "R", ("o", "e1"))
        self.assertEqual(len(cut.cells), 3)
        self.assertEqual({cell.name for cell in cut.cells}, {"R+", "R-", "T"})
        # the new wall is flat, which strict convexity forbids
        self.assertIn("pl-not-convex", validate(cut).codes())

    def test_locus_follows_its_face(self):
        cut = cut_cell(affine_Ak_B(2), "R", ("o", "e1"))
        locus = cut.loci[0]
        self.assertEqual(set(locus.loop.cells), {"R+", "T"})
        self.assertEqual(locus.cell, locus.loop.cells[0])
        self.assertEqual(locus.multiplicity, affine_Ak_B(2).loci[0].multiplicity)

    def test_cut_along_an_edge(self):
        with self.assertRaises(RefinementError):
            cut_cell(affine_Ak_B(2), "R", ("o", "e0"))

    def test_cut_through_a_facet(self):
        with self.assertRaises(RefinementError):
            cut_cell(octahedron(), "O", ("x+", "y+", "z+"))

    def test_cut_crossing_a_facet(self):
        with self.assertRaises(RefinementError):
            cut_cell(cube(), "C", ("v000", "v110", "v001"))

    def test_unknown_cell(self):
        with self.assertRaises(RefinementError):
            cut_cell(affine_Ak_B(2), "Q", ("o", "e1"))


class TestNormalize(unittest.TestCase):
    def test_planar_round_trip(self):
        c = affine_Ak_B(2)
        back = normalize(cut_cell(c, "R", ("o", "e1")))
        self.assertEqual(len(back.cells), 2)
        self.assertTrue(validate(back).ok, validate(back).codes())
        self.assertTrue(isomorphic(back, c))

    def test_octahedron_round_trip(self):
        c = octahedron()
        cut = cut_cell(c, "O", ("x+", "x-", "y+"))
        self.assertEqual(len(cut.cells), 2)
        self.assertTrue(all(len(cell.coords) == 5 for cell in cut.cells))
        back = normalize(cut)
        self.assertEqual(len(back.cells), 1)
        self.assertTrue(isomorphic(back, c))

    def test_locus_wall_stays(self):
        c = affine_Ak_B(3)
        self.assertEqual(len(normalize(c).cells), 2)
        with self.assertRaises(RefinementError):
            merge_cells(c, {"o", "t"})

    def test_boundary_facet(self):
        with self.assertRaises(RefinementError):
            merge_cells(affine_Ak_B(2), {"o", "e0"})


if __name__ == '__main__':
    unittest.main()
