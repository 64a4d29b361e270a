import itertools
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
Matrix = Tuple[Tuple[int, ...], ...]
Point = Tuple[Number, ...]


class LatticeError(ValueError):
    """Raised for degenerate, non-integral or dimension-mismatched lattice input."""


def gcd_all(values: Iterable[int]) -> int:
    return reduce(gcd, (abs(int(v)) for v in values), 0)


@dataclass(frozen=True, order=True)
class LatticeVector:
    """An exact integer vector of dimension 2 or 3."""
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) not in (2, 3):
            raise LatticeError(f"lattice vectors have dimension 2 or 3, got {len(coords)}")
        for c in coords:
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
                raise LatticeError(f"non-integer coordinate {c!r}")
        object.__setattr__(self, 'coords', tuple(int(c) for c in coords))

    @classmethod
    def from_rational(cls, coords: Sequence[Number]) -> 'LatticeVector':
        values = []
        for c in coords:
            value = Fraction(c)
            if value.denominator != 1:
                raise LatticeError(f"coordinate {value} is not integral")
            values.append(int(value))
        return cls(tuple(values))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, index):
        return self.coords[index]

    def _check_dim(self, other: 'LatticeVector'):
        if len(other) != self.dim:
            raise LatticeError(f"dimension mismatch: {self.dim} vs {len(other)}")

    def __add__(self, other):
        self._check_dim(other)
        return LatticeVector(tuple(a + b for a, b in zip(self.coords, other)))

    def __sub__(self, other):
        self._check_dim(other)
        return LatticeVector(tuple(a - b for a, b in zip(self.coords, other)))

    def __neg__(self):
        return LatticeVector(tuple(-a for a in self.coords))

    def __mul__(self, scalar: int):
        if isinstance(scalar, bool) or not isinstance(scalar, (int, np.integer)):
            return NotImplemented
        return LatticeVector(tuple(int(scalar) * a for a in self.coords))

    __rmul__ = __mul__

    def dot(self, other: Sequence[Number]) -> Number:
        self._check_dim(other)
        return sum(a * b for a, b in zip(self.coords, other))

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def vec(*coords: int) -> LatticeVector:
    return LatticeVector(tuple(coords))


def as_vector(value: Union[LatticeVector, Sequence[int]]) -> LatticeVector:
    return value if isinstance(value, LatticeVector) else LatticeVector(tuple(value))


def primitive(v: LatticeVector) -> LatticeVector:
    """Return v divided by the gcd of its coordinates.

    Raises:
        LatticeError: if v is the zero vector.
    """
    v = as_vector(v)
    g = gcd_all(v)
    if g == 0:
        raise LatticeError("no primitive direction for the zero vector")
    return LatticeVector(tuple(c // g for c in v))


def is_primitive(v: LatticeVector) -> bool:
    return gcd_all(v) == 1


def det2(u: Sequence[Number], v: Sequence[Number]) -> Number:
    if len(u) != 2 or len(v) != 2:
        raise LatticeError(f"det2 needs two 2D vectors, got dimensions {len(u)} and {len(v)}")
    return u[0] * v[1] - u[1] * v[0]


def cross3(u: Sequence[Number], v: Sequence[Number]) -> Tuple[Number, ...]:
    if len(u) != 3 or len(v) != 3:
        raise LatticeError("cross product needs two 3D vectors")
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def dot(u: Sequence[Number], v: Sequence[Number]) -> Number:
    if len(u) != len(v):
        raise LatticeError(f"dimension mismatch: {len(u)} vs {len(v)}")
    return sum(a * b for a, b in zip(u, v))


def affine_length(a: LatticeVector, b: LatticeVector) -> int:
    """Number of primitive lattice segments on [a, b]."""
    a, b = as_vector(a), as_vector(b)
    if a == b:
        raise LatticeError(f"degenerate segment at {a}")
    return gcd_all(b - a)


# ------------------------------------------------------------
# Exact integer / rational matrices
# ------------------------------------------------------------

def as_matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def from_columns(columns: Sequence[Sequence[int]]) -> Matrix:
    n = len(columns)
    if any(len(c) != n for c in columns):
        raise LatticeError("from_columns needs n columns of length n")
    return tuple(tuple(int(columns[j][i]) for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def column(a: Matrix, j: int) -> LatticeVector:
    return LatticeVector(tuple(row[j] for row in a))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    product = np.array(a, dtype=object).dot(np.array(b, dtype=object))
    return as_matrix(product.tolist())


def mat_vec(a: Matrix, v: Sequence[Number]) -> Tuple[Number, ...]:
    if len(a[0]) != len(v):
        raise LatticeError(f"matrix of width {len(a[0])} applied to vector of length {len(v)}")
    return tuple(np.array(a, dtype=object).dot(np.array(list(v), dtype=object)).tolist())


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _eliminate(rows: Sequence[Sequence[Number]]) -> Tuple[List[List[Fraction]], int, Fraction]:
    """Row-reduce a copy of rows. Returns (echelon rows, rank, determinant factor)."""
    m = [[Fraction(x) for x in row] for row in rows]
    n_rows = len(m)
    n_cols = len(m[0]) if m else 0
    rank = 0
    det = Fraction(1)
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            det = Fraction(0)
            continue
        if pivot != rank:
            m[rank], m[pivot] = m[pivot], m[rank]
            det = -det
        det *= m[rank][col]
        for r in range(rank + 1, n_rows):
            factor = m[r][col] / m[rank][col]
            if factor:
                for c in range(col, n_cols):
                    m[r][c] -= factor * m[rank][c]
        rank += 1
    return m, rank, det


def mat_det(a: Matrix) -> int:
    if any(len(row) != len(a) for row in a):
        raise LatticeError("determinant of a non-square matrix")
    _, rank, det = _eliminate(a)
    if rank < len(a):
        return 0
    return int(det)


def rank(rows: Sequence[Sequence[Number]]) -> int:
    if not rows:
        return 0
    return _eliminate(rows)[1]


def solve_rational(a: Sequence[Sequence[Number]], b: Sequence[Number]) -> Optional[Tuple[Fraction, ...]]:
    """Solve the square system a·x = b exactly; None when a is singular."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        lead = m[col][col]
        m[col] = [x / lead for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return tuple(row[n] for row in m)


def mat_inverse(a: Matrix) -> Matrix:
    """Inverse of an integral matrix with determinant ±1."""
    n = len(a)
    d = mat_det(a)
    if d not in (1, -1):
        raise LatticeError(f"matrix with determinant {d} has no integral inverse")
    columns = []
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        columns.append(solve_rational(a, e))
    return tuple(tuple(int(columns[j][i]) for j in range(n)) for i in range(n))


def random_unimodular_matrix(rng: random.Random, n: int, steps: int = 6) -> Matrix:
    """Product of random elementary shears and sign flips."""
    m = identity_matrix(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        elementary = [list(row) for row in identity_matrix(n)]
        if rng.random() < 0.2:
            elementary[i][i] = -1
        else:
            elementary[i][j] = rng.choice((-2, -1, 1, 2))
        m = mat_mul(as_matrix(elementary), m)
    return m


@dataclass(frozen=True)
class UnimodularMap:
    """An element of GL(n,Z) ⋉ Z^n acting by x ↦ linear·x + translation."""
    linear: Matrix
    translation: LatticeVector

    def __post_init__(self):
        linear = as_matrix(self.linear)
        n = len(linear)
        if any(len(row) != n for row in linear):
            raise LatticeError("linear part must be square")
        translation = as_vector(self.translation)
        if translation.dim != n:
            raise LatticeError(f"translation of dimension {translation.dim} for a {n}x{n} linear part")
        d = mat_det(linear)
        if d not in (1, -1):
            raise LatticeError(f"linear part has determinant {d}, not ±1")
        object.__setattr__(self, 'linear', linear)
        object.__setattr__(self, 'translation', translation)

    @classmethod
    def identity(cls, n: int) -> 'UnimodularMap':
        return cls(identity_matrix(n), LatticeVector((0,) * n))

    @classmethod
    def linear_map(cls, matrix: Matrix) -> 'UnimodularMap':
        return cls(matrix, LatticeVector((0,) * len(matrix)))

    @property
    def dim(self) -> int:
        return len(self.linear)

    @property
    def det(self) -> int:
        return mat_det(self.linear)

    def apply_linear(self, v: LatticeVector) -> LatticeVector:
        return LatticeVector(mat_vec(self.linear, as_vector(v)))

    def apply(self, v: LatticeVector) -> LatticeVector:
        return self.apply_linear(v) + self.translation

    def apply_point(self, p: Sequence[Number]) -> Point:
        image = mat_vec(self.linear, p)
        return tuple(x + t for x, t in zip(image, self.translation))

    def compose(self, other: 'UnimodularMap') -> 'UnimodularMap':
        """self ∘ other."""
        return UnimodularMap(mat_mul(self.linear, other.linear), self.apply(other.translation))

    __matmul__ = compose

    def inverse(self) -> 'UnimodularMap':
        inv = mat_inverse(self.linear)
        return UnimodularMap(inv, -LatticeVector(mat_vec(inv, self.translation)))


# ------------------------------------------------------------
# Convex hulls and polytopes
# ------------------------------------------------------------

def convex_hull_2d(points: Iterable[Sequence[Number]]) -> List[Tuple[Number, ...]]:
    """Counterclockwise hull vertices (collinear points dropped), starting at the lexicographic minimum."""
    pts = sorted(set(tuple(p) for p in points))
    if len(pts) <= 2:
        return pts

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Tuple[Number, ...]] = []
    for p in pts:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Tuple[Number, ...]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _primitive_covector(normal: Sequence[Number]) -> Tuple[int, ...]:
    """Scale a rational normal to a primitive integral one with the same direction."""
    fractions = [Fraction(x) for x in normal]
    denominator = reduce(lambda acc, f: acc * f.denominator // gcd(acc, f.denominator), fractions, 1)
    integral = [int(f * denominator) for f in fractions]
    g = gcd_all(integral)
    return tuple(x // g for x in integral)


@dataclass(frozen=True)
class Facet:
    """Supporting inequality normal·x ≤ offset, tight exactly on vertex_indices."""
    normal: Tuple[int, ...]
    offset: Number
    vertex_indices: FrozenSet[int]


def _facets_3d(points: Sequence[Tuple[Number, ...]]) -> List[Facet]:
    facets: Dict[Tuple[Tuple[int, ...], Number], Facet] = {}
    for i, j, k in itertools.combinations(range(len(points)), 3):
        a, b, c = points[i], points[j], points[k]
        n = cross3([b[t] - a[t] for t in range(3)], [c[t] - a[t] for t in range(3)])
        if not any(n):
            continue
        values = [dot(n, [p[t] - a[t] for t in range(3)]) for p in points]
        if all(v <= 0 for v in values):
            pass
        elif all(v >= 0 for v in values):
            n = tuple(-x for x in n)
        else:
            continue
        normal = _primitive_covector(n)
        offset = dot(normal, a)
        if (normal, offset) in facets:
            continue
        tight = frozenset(idx for idx, p in enumerate(points) if dot(normal, p) == offset)
        facets[(normal, offset)] = Facet(normal, offset, tight)
    return list(facets.values())


def convex_hull_vertices(points: Iterable[Sequence[Number]]) -> List[Tuple[Number, ...]]:
    """Extreme points of a full-dimensional point set in dimension 2 or 3."""
    pts = sorted(set(tuple(p) for p in points))
    if not pts:
        return []
    dim = len(pts[0])
    if dim == 2:
        return convex_hull_2d(pts)
    if rank([[p[t] - pts[0][t] for t in range(dim)] for p in pts[1:]] or [[0] * dim]) < dim:
        raise LatticeError("point set is not full-dimensional")
    facets = _facets_3d(pts)
    extreme = []
    for idx, p in enumerate(pts):
        normals = [f.normal for f in facets if idx in f.vertex_indices]
        if normals and rank(normals) == dim:
            extreme.append(p)
    return extreme


class LatticePolytope:
    """A full-dimensional lattice polytope in dimension 2 or 3.

    2D vertices are kept in the given counterclockwise order; 3D vertices in the given order.
    """

    def __init__(self, vertices: Sequence[Union[LatticeVector, Sequence[int]]]):
        verts = tuple(as_vector(v) for v in vertices)
        if not verts:
            raise LatticeError("polytope without vertices")
        dim = verts[0].dim
        if any(v.dim != dim for v in verts):
            raise LatticeError("polytope vertices of mixed dimension")
        if len(set(verts)) != len(verts):
            raise LatticeError("repeated polytope vertex")
        if rank([tuple(v - verts[0]) for v in verts[1:]] or [(0,) * dim]) < dim:
            raise LatticeError(f"degenerate polytope {[str(v) for v in verts]}")
        hull = convex_hull_vertices(tuple(v) for v in verts)
        if set(hull) != set(tuple(v) for v in verts):
            raise LatticeError("polytope vertex list contains non-extreme points")
        if dim == 2:
            start = hull.index(tuple(verts[0]))
            ccw = hull[start:] + hull[:start]
            if [tuple(v) for v in verts] != ccw:
                raise LatticeError("2D polytope vertices must be listed counterclockwise")
        self.vertices: Tuple[LatticeVector, ...] = verts
        self.dim = dim

    @classmethod
    def from_points(cls, points: Iterable[Union[LatticeVector, Sequence[int]]]) -> 'LatticePolytope':
        hull = convex_hull_vertices(tuple(as_vector(p)) for p in points)
        return cls([LatticeVector(tuple(p)) for p in hull])

    def __eq__(self, other):
        return isinstance(other, LatticePolytope) and set(self.vertices) == set(other.vertices)

    def __hash__(self):
        return hash(frozenset(self.vertices))

    def __repr__(self):
        return "LatticePolytope([" + ", ".join(str(v) for v in self.vertices) + "])"

    @cached_property
    def facets(self) -> Tuple[Facet, ...]:
        pts = [tuple(v) for v in self.vertices]
        if self.dim == 2:
            result = []
            n = len(pts)
            for i in range(n):
                a, b = pts[i], pts[(i + 1) % n]
                normal = _primitive_covector((b[1] - a[1], a[0] - b[0]))
                result.append(Facet(normal, dot(normal, a), frozenset({i, (i + 1) % n})))
            return tuple(result)
        return tuple(_facets_3d(pts))

    @cached_property
    def faces(self) -> Dict[int, FrozenSet[FrozenSet[int]]]:
        """Face lattice without the empty face, keyed by dimension; faces are vertex index sets."""
        facet_sets = [f.vertex_indices for f in self.facets]
        found: Set[FrozenSet[int]] = set(facet_sets)
        queue = list(facet_sets)
        while queue:
            face = queue.pop()
            for other in facet_sets:
                meet = face & other
                if meet and meet not in found:
                    found.add(meet)
                    queue.append(meet)
        found.add(frozenset(range(len(self.vertices))))
        by_dim: Dict[int, Set[FrozenSet[int]]] = {d: set() for d in range(self.dim + 1)}
        for face in found:
            by_dim[self.face_dimension(face)].add(face)
        return {d: frozenset(fs) for d, fs in by_dim.items()}

    def face_dimension(self, indices: Iterable[int]) -> int:
        idx = sorted(indices)
        base = self.vertices[idx[0]]
        return rank([tuple(self.vertices[i] - base) for i in idx[1:]] or [(0,) * self.dim])

    @property
    def edges(self) -> FrozenSet[FrozenSet[int]]:
        return self.faces[1]

    def contains(self, point: Sequence[Number], strict: bool = False) -> bool:
        for f in self.facets:
            value = dot(f.normal, point)
            if value > f.offset or (strict and value == f.offset):
                return False
        return True

    def twice_area(self) -> int:
        if self.dim != 2:
            raise LatticeError("area is defined for 2D polytopes only")
        n = len(self.vertices)
        return sum(det2(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    def lattice_points(self, strict: bool = False) -> List[LatticeVector]:
        lows = [min(v[t] for v in self.vertices) for t in range(self.dim)]
        highs = [max(v[t] for v in self.vertices) for t in range(self.dim)]
        ranges = [range(lo, hi + 1) for lo, hi in zip(lows, highs)]
        return [LatticeVector(p) for p in itertools.product(*ranges) if self.contains(p, strict=strict)]

    def boundary_point_count(self) -> int:
        if self.dim != 2:
            raise LatticeError("boundary lattice count is defined for 2D polytopes only")
        n = len(self.vertices)
        return sum(affine_length(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n))

    def translate(self, offset: LatticeVector) -> 'LatticePolytope':
        return LatticePolytope([v + offset for v in self.vertices])

    def image(self, m: UnimodularMap) -> 'LatticePolytope':
        return LatticePolytope.from_points(m.apply(v) for v in self.vertices)


# ------------------------------------------------------------
# Triangles
# ------------------------------------------------------------

def _triangle(t: Union[LatticePolytope, Sequence[Sequence[int]]]) -> Tuple[LatticeVector, LatticeVector, LatticeVector]:
    verts = t.vertices if isinstance(t, LatticePolytope) else tuple(as_vector(v) for v in t)
    if len(verts) != 3 or any(v.dim != 2 for v in verts):
        raise LatticeError("expected a 2D lattice triangle")
    a, b, c = verts
    if det2(b - a, c - a) == 0:
        raise LatticeError(f"degenerate triangle {a}, {b}, {c}")
    return a, b, c


def interior_point_count(t: Union[LatticePolytope, Sequence[Sequence[int]]]) -> int:
    """Interior lattice points of a triangle, by Pick's identity cross-checked against enumeration."""
    a, b, c = _triangle(t)
    twice_area = abs(det2(b - a, c - a))
    boundary = affine_length(a, b) + affine_length(b, c) + affine_length(c, a)
    by_pick = (twice_area - boundary + 2) // 2

    xs = [a[0], b[0], c[0]]
    ys = [a[1], b[1], c[1]]
    by_enumeration = 0
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            s1 = det2(b - a, (x - a[0], y - a[1]))
            s2 = det2(c - b, (x - b[0], y - b[1]))
            s3 = det2(a - c, (x - c[0], y - c[1]))
            if (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0):
                by_enumeration += 1
    if by_pick != by_enumeration:
        raise LatticeError(f"Pick count {by_pick} disagrees with enumeration {by_enumeration}")
    return by_pick


def is_standard_triangle(t: Union[LatticePolytope, Sequence[Sequence[int]]]) -> bool:
    a, b, c = _triangle(t)
    return abs(det2(b - a, c - a)) == 1


@dataclass(frozen=True)
class Fan:
    """Primitive rays and full-dimensional maximal cones given by ray indices."""
    rays: Tuple[LatticeVector, ...]
    cones: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rays = tuple(as_vector(r) for r in self.rays)
        for r in rays:
            if not is_primitive(r):
                raise LatticeError(f"fan ray {r} is not primitive")
        dim = rays[0].dim if rays else 0
        for cone in self.cones:
            if rank([tuple(rays[i]) for i in cone]) != dim:
                raise LatticeError(f"cone {cone} is not full-dimensional")
            if dim == 2 and (len(cone) != 2 or det2(rays[cone[0]], rays[cone[1]]) == 0):
                raise LatticeError(f"2D cone {cone} must have two independent rays")
        object.__setattr__(self, 'rays', rays)


def _quadrant(p: Sequence[Number]) -> int:
    x, y = p
    if x == 0 and y == 0:
        raise LatticeError("the origin has no quadrant")
    if x > 0 and y >= 0:
        return 0
    if x <= 0 and y > 0:
        return 1
    if x < 0 and y <= 0:
        return 2
    return 3


def turning_number(points: Sequence[Sequence[Number]]) -> int:
    """Winding of the closed polyline through points around the origin, by signed quarter turns.

    Each segment subtends less than half a turn, so the quadrant change decides the
    quarter count except for opposite quadrants, where the sign of det2 decides.
    """
    quarters = 0
    n = len(points)
    for i in range(n):
        a, b = points[i], points[(i + 1) % n]
        d = det2(a, b)
        if d == 0 and dot(a, b) <= 0:
            raise LatticeError(f"segment {tuple(a)} -> {tuple(b)} passes through the origin")
        step = (_quadrant(b) - _quadrant(a)) % 4
        if step == 3:
            step = -1
        elif step == 2:
            step = 2 if d > 0 else -2
        quarters += step
    if quarters % 4:
        raise LatticeError(f"quarter-turn count {quarters} is not a whole number of turns")
    return quarters // 4
