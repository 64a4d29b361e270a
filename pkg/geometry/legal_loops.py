import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from geometry.lattice import (
    LatticeError,
    LatticeVector,
    as_matrix,
    as_vector,
    det2,
    interior_point_count,
    is_primitive,
    mat_det,
    mat_vec,
    primitive,
    random_unimodular_matrix,
    solve_rational,
    turning_number,
)

logger = logging.getLogger(__name__)

ORIGIN = LatticeVector((0, 0))


class LoopValidationError(ValueError):
    """A legal-loop condition failed at a specific index."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"index {index}: {reason}")


@dataclass(frozen=True)
class LegalLoop:
    vectors: Tuple[LatticeVector, ...]

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    @property
    def edge_determinants(self) -> List[int]:
        m = len(self.vectors)
        return [det2(self.vectors[i], self.vectors[(i + 1) % m]) for i in range(m)]

    def to_dict(self):
        return {"vectors": [list(v) for v in self.vectors]}


@dataclass(frozen=True)
class FoldedSurfaceReport:
    fold_indices: FrozenSet[int]
    vertex_multiplicities: Tuple[int, ...]
    edge_multiplicities: Tuple[int, ...]

    @property
    def is_folded(self) -> bool:
        return bool(self.fold_indices)


@dataclass(frozen=True)
class FibrationInvariants:
    k_plus: int
    k_minus: int
    euler: int = field(init=False)
    signature: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'euler', self.k_plus + self.k_minus)
        object.__setattr__(self, 'signature', Fraction(-2, 3) * (self.k_plus - self.k_minus))

    @property
    def signature_divisible_by_eight(self) -> bool:
        """True when the signature is an integer multiple of 8, as it must be once 12 divides k_plus - k_minus."""
        return self.signature.denominator == 1 and self.signature.numerator % 8 == 0


def validate_loop(seq: Iterable[Sequence[int]]) -> LegalLoop:
    """Check the legal-loop conditions in order and return the loop.

    Raises:
        LoopValidationError: naming the first violated condition and its index.
    """
    vectors = tuple(as_vector(v) for v in seq)
    m = len(vectors)
    if m < 3:
        raise LoopValidationError(0, f"a legal loop needs at least 3 vectors, got {m}")
    for i, v in enumerate(vectors):
        if v.dim != 2 or v.is_zero() or not is_primitive(v):
            raise LoopValidationError(i, f"vector {v} is not primitive")
    for i in range(m):
        a, b = vectors[i], vectors[(i + 1) % m]
        if a == b:
            raise LoopValidationError(i, f"repeated consecutive vector {a}")
        if det2(a, b) == 0:
            raise LoopValidationError(i, f"segment {a} -> {b} passes through the origin")
        if interior_point_count([ORIGIN, a, b]) != 0:
            raise LoopValidationError(i, f"fat triangle {{0, {a}, {b}}} contains interior lattice points")
    for i in range(m):
        incoming = vectors[i] - vectors[i - 1]
        outgoing = vectors[(i + 1) % m] - vectors[i]
        if det2(incoming, outgoing) == 0:
            raise LoopValidationError(i, f"straight turn at {vectors[i]}")
    return LegalLoop(vectors)


def _outward_normals(loop: LegalLoop) -> List[LatticeVector]:
    """Primitive outward normals of the triangles conv{0, v_i, v_{i+1}}.

    Clockwise rotation of the primitive edge direction for positively oriented
    triangles, counterclockwise for negatively oriented ones.
    """
    m = len(loop)
    normals = []
    for i in range(m):
        a, b = loop.vectors[i], loop.vectors[(i + 1) % m]
        x, y = primitive(b - a)
        clockwise = LatticeVector((y, -x))
        normals.append(clockwise if det2(a, b) > 0 else -clockwise)
    return normals


def dual_loop(loop: LegalLoop) -> LegalLoop:
    try:
        return validate_loop(_outward_normals(loop))
    except LoopValidationError as exc:
        raise AssertionError(f"dual of a legal loop failed validation: {exc}") from exc


def _crossing_winding(vectors: Sequence[LatticeVector]) -> int:
    winding = 0
    m = len(vectors)
    for i in range(m):
        a, b = vectors[i], vectors[(i + 1) % m]
        if a[1] <= 0 < b[1]:
            direction = 1
        elif b[1] <= 0 < a[1]:
            direction = -1
        else:
            continue
        x = a[0] + Fraction(b[0] - a[0]) * Fraction(-a[1], b[1] - a[1])
        if x == 0:
            raise LatticeError(f"segment {a} -> {b} passes through the origin")
        if x > 0:
            winding += direction
    return winding


def winding_number(loop: LegalLoop) -> int:
    """Winding of v_1 -> v_2 -> ... -> v_1 about the origin, counterclockwise positive.

    Counted by exact crossings of the positive x-axis and checked against the
    quarter-turn sum.
    """
    by_crossings = _crossing_winding(loop.vectors)
    by_turns = turning_number(loop.vectors)
    if by_crossings != by_turns:
        raise AssertionError(f"winding oracles disagree: crossings {by_crossings}, turns {by_turns}")
    return by_crossings


def _corner_terms(loop: LegalLoop) -> List[int]:
    normals = _outward_normals(loop)
    return [det2(normals[i - 1], normals[i]) for i in range(len(normals))]


def twelve_w(loop: LegalLoop) -> Tuple[int, int, bool]:
    lhs = sum(loop.edge_determinants) + sum(_corner_terms(loop))
    w = winding_number(loop)
    return lhs, w, lhs == 12 * w


def fibration_invariants(loop: LegalLoop) -> FibrationInvariants:
    terms = loop.edge_determinants + _corner_terms(loop)
    k_plus = sum(t for t in terms if t > 0)
    k_minus = -sum(t for t in terms if t < 0)
    return FibrationInvariants(k_plus, k_minus)


def folded_surface(loop: LegalLoop) -> FoldedSurfaceReport:
    dets = loop.edge_determinants
    folds = frozenset(i for i in range(len(dets)) if (dets[i - 1] > 0) != (dets[i] > 0))
    return FoldedSurfaceReport(folds, tuple(_corner_terms(loop)), tuple(dets))


def is_directed(loop: LegalLoop) -> bool:
    dets = loop.edge_determinants
    return all(d > 0 for d in dets) or all(d < 0 for d in dets)


def concatenate(first: LegalLoop, second: LegalLoop) -> LegalLoop:
    return validate_loop(first.vectors + second.vectors)


def reverse(loop: LegalLoop) -> LegalLoop:
    return LegalLoop(tuple(reversed(loop.vectors)))


def loops_equivalent(first: LegalLoop, second: LegalLoop) -> bool:
    """True iff some cyclic shift of second is the image of first under GL(2,Z)."""
    if len(first) != len(second):
        return False
    a = first.vectors
    m = len(a)
    j = next(j for j in range(1, m) if det2(a[0], a[j]) != 0)
    for shift in range(m):
        b = second.vectors[shift:] + second.vectors[:shift]
        # Solve M·a0 = b0 and M·aj = bj row by row.
        source = [[a[0][0], a[0][1]], [a[j][0], a[j][1]]]
        rows = []
        for r in range(2):
            row = solve_rational(source, [b[0][r], b[j][r]])
            if row is None or any(x.denominator != 1 for x in row):
                break
            rows.append([int(x) for x in row])
        if len(rows) != 2:
            continue
        matrix = as_matrix(rows)
        if mat_det(matrix) not in (1, -1):
            continue
        if all(LatticeVector(mat_vec(matrix, a[i])) == b[i] for i in range(m)):
            return True
    return False


P2_LOOP = ((1, 0), (0, 1), (-1, -1))


def _mutate(loop: LegalLoop, rng: random.Random) -> Optional[LegalLoop]:
    vectors = list(loop.vectors)
    move = rng.random()
    try:
        if move < 0.4:
            i = rng.randrange(len(vectors))
            vectors.insert(i + 1, primitive(vectors[i] + vectors[(i + 1) % len(vectors)]))
        elif move < 0.55 and len(vectors) > 3:
            del vectors[rng.randrange(len(vectors))]
        elif move < 0.75:
            matrix = random_unimodular_matrix(rng, 2, steps=3)
            vectors = [LatticeVector(mat_vec(matrix, v)) for v in vectors]
        elif move < 0.9:
            vectors = _outward_normals(loop)
        else:
            vectors.reverse()
        return validate_loop(vectors)
    except (LoopValidationError, LatticeError):
        return None


def generate_legal_loops(seed: int, count: int, max_length: int = 12, max_coordinate: int = 6) -> List[LegalLoop]:
    """Random walk over legality-preserving moves starting at the P2 loop; every candidate is re-validated.

    The walk restarts from the P2 loop whenever a loop grows past max_length vectors or max_coordinate.
    """
    rng = random.Random(seed)
    loops = []
    current = validate_loop(P2_LOOP)
    while len(loops) < count:
        candidate = _mutate(current, rng)
        if candidate is None:
            continue
        if len(candidate) > max_length or max(abs(c) for v in candidate for c in v) > max_coordinate:
            current = validate_loop(P2_LOOP)
            continue
        current = candidate
        loops.append(candidate)
    logger.debug("generated %d legal loops from seed %d", count, seed)
    return loops
