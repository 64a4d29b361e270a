import unittest

from hypothesis import given, settings, strategies as st

from geometry.lattice import LatticeVector
from geometry.legal_loops import (
    FibrationInvariants,
    LoopValidationError,
    concatenate,
    dual_loop,
    fibration_invariants,
    folded_surface,
    generate_legal_loops,
    is_directed,
    loops_equivalent,
    reverse,
    twelve_w,
    validate_loop,
    winding_number,
)

P2 = [(1, 0), (0, 1), (-1, -1)]
F3 = [(1, 0), (0, 1), (-1, 3), (0, -1)]


def vectors(*points):
    return tuple(LatticeVector(p) for p in points)


class TestValidation(unittest.TestCase):
    def test_valid_loop(self):
        loop = validate_loop(P2)
        self.assertEqual(len(loop), 3)

    def test_repeat(self):
        with self.assertRaises(LoopValidationError) as ctx:
            validate_loop([(1, 0), (1, 0), (0, 1)])
        self.assertEqual(ctx.exception.index, 0)

    def test_fat_triangle(self):
        with self.assertRaises(LoopValidationError) as ctx:
            validate_loop([(1, 0), (2, 3), (0, 1)])
        self.assertEqual(ctx.exception.index, 0)
        self.assertIn("fat triangle", ctx.exception.reason)

    def test_boundary_points_are_not_interior(self):
        # (1,1) lies on the edge from (1,0) to (1,2), so this loop is legal.
        loop = validate_loop([(1, 0), (1, 2), (0, 1)])
        self.assertEqual(winding_number(loop), 0)
        self.assertEqual(twelve_w(loop), (0, 0, True))

    def test_non_primitive(self):
        with self.assertRaises(LoopValidationError) as ctx:
            validate_loop([(1, 0), (0, 2), (-1, -1)])
        self.assertEqual(ctx.exception.index, 1)

    def test_straight_turn(self):
        with self.assertRaises(LoopValidationError) as ctx:
            validate_loop([(1, 0), (1, 1), (1, 2), (-1, -1)])
        self.assertIn("straight turn", ctx.exception.reason)


class TestDuality(unittest.TestCase):
    def test_dual_of_p2(self):
        self.assertEqual(dual_loop(validate_loop(P2)).vectors, vectors((1, 1), (-2, 1), (1, -2)))

    def test_double_dual(self):
        loop = validate_loop(P2)
        twice = dual_loop(dual_loop(loop))
        self.assertTrue(loops_equivalent(twice, loop))
        self.assertEqual(set(twice.vectors), set(loop.vectors))

    def test_dual_of_directed_loop_need_not_be_directed(self):
        loop = validate_loop(F3)
        self.assertTrue(is_directed(loop))
        dual = dual_loop(loop)
        self.assertFalse(is_directed(dual))
        self.assertEqual(folded_surface(dual).fold_indices, frozenset({0, 1}))

    def test_loops_equivalent(self):
        loop = validate_loop(P2)
        image = validate_loop([(0, 1), (1, 0), (-1, -1)])
        self.assertTrue(loops_equivalent(loop, image))
        self.assertFalse(loops_equivalent(loop, validate_loop(F3)))


class TestTwelveW(unittest.TestCase):
    def test_winding(self):
        self.assertEqual(winding_number(validate_loop(P2)), 1)
        self.assertEqual(winding_number(validate_loop(P2 * 2)), 2)
        self.assertEqual(winding_number(validate_loop([(-1, -1), (0, 1), (1, 0)])), -1)

    def test_twelve_w(self):
        self.assertEqual(twelve_w(validate_loop(P2)), (12, 1, True))
        self.assertEqual(twelve_w(validate_loop(P2 * 2)), (24, 2, True))
        self.assertEqual(twelve_w(validate_loop(F3)), (12, 1, True))

    def test_fibration_invariants(self):
        p2 = fibration_invariants(validate_loop(P2))
        self.assertEqual((p2.k_plus, p2.k_minus, p2.euler, p2.signature), (12, 0, 12, -8))
        f3 = fibration_invariants(validate_loop(F3))
        self.assertEqual((f3.k_plus, f3.k_minus, f3.signature), (13, 1, -8))
        flat = fibration_invariants(validate_loop([(1, 0), (1, 2), (0, 1)]))
        self.assertEqual(flat.signature, 0)
        self.assertTrue(p2.signature_divisible_by_eight)
        self.assertFalse(FibrationInvariants(1, 0).signature_divisible_by_eight)
        self.assertFalse(FibrationInvariants(3, 0).signature_divisible_by_eight)

    def test_folded_surface(self):
        self.assertEqual(folded_surface(validate_loop(P2)).fold_indices, frozenset())
        self.assertEqual(folded_surface(validate_loop(F3)).fold_indices, frozenset())
        self.assertFalse(folded_surface(validate_loop(F3)).is_folded)

    def test_concatenation_adds(self):
        loop = validate_loop(P2)
        refined = validate_loop([(1, 0), (1, 1), (0, 1), (-1, -1)])
        joined = concatenate(loop, refined)
        lhs_a, w_a, _ = twelve_w(loop)
        lhs_b, w_b, _ = twelve_w(refined)
        self.assertEqual(twelve_w(joined), (lhs_a + lhs_b, w_a + w_b, True))

    def test_reverse_negates_winding(self):
        loop = validate_loop(F3)
        self.assertEqual(winding_number(reverse(loop)), -1)
        self.assertEqual(twelve_w(reverse(loop)), (-12, -1, True))

    def test_generated_loops(self):
        loops = generate_legal_loops(seed=7, count=1000)
        self.assertEqual(len(loops), 1000)
        for loop in loops:
            lhs, w, holds = twelve_w(loop)
            self.assertTrue(holds, msg=f"{[str(v) for v in loop]}: {lhs} != 12*{w}")
            invariants = fibration_invariants(loop)
            self.assertEqual(invariants.k_plus - invariants.k_minus, 12 * w)
            self.assertEqual(invariants.signature.denominator, 1)
            self.assertEqual(invariants.signature % 8, 0)
            self.assertTrue(invariants.signature_divisible_by_eight)
            if w == 0:
                self.assertEqual(invariants.signature, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=100_000))
    def test_dual_is_legal(self, seed):
        for loop in generate_legal_loops(seed=seed, count=5):
            dual = dual_loop(loop)
            self.assertEqual(validate_loop(dual.vectors), dual)
            self.assertEqual(folded_surface(loop).is_folded, not is_directed(loop))


if __name__ == '__main__':
    unittest.main()
