import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from geometry.lattice import (
    LatticeError,
    LatticePolytope,
    LatticeVector,
    as_vector,
    affine_length,
    convex_hull_2d,
    det2,
    interior_point_count,
    is_primitive,
    primitive,
    turning_number,
)

logger = logging.getLogger(__name__)

ORIGIN = LatticeVector((0, 0))
CATALOG_BOX = 3


class PolygonError(ValueError):
    """Raised for invalid star configurations and non-reflexive or non-convex polygons."""


def _edge_tangents(vectors: Sequence[LatticeVector]) -> List[LatticeVector]:
    m = len(vectors)
    return [primitive(vectors[(i + 1) % m] - vectors[i]) for i in range(m)]


def _corner_orders(vectors: Sequence[LatticeVector]) -> List[int]:
    tangents = _edge_tangents(vectors)
    m = len(vectors)
    return [det2(tangents[i - 1], tangents[i]) for i in range(m)]


@dataclass(frozen=True)
class StarConfiguration:
    """Primitive vectors v_1..v_m, counterclockwise, whose origin triangles tile the plane once."""
    vectors: Tuple[LatticeVector, ...]

    def __post_init__(self):
        vectors = tuple(as_vector(v) for v in self.vectors)
        m = len(vectors)
        if m < 3:
            raise PolygonError(f"a star configuration needs at least 3 vectors, got {m}")
        for i, v in enumerate(vectors):
            if v.dim != 2:
                raise PolygonError(f"vector {i} is not planar: {v}")
            if v.is_zero() or not is_primitive(v):
                raise PolygonError(f"vector {i} = {v} is not primitive")
        for i in range(m):
            a, b = vectors[i], vectors[(i + 1) % m]
            if a == b:
                raise PolygonError(f"vectors {i} and {(i + 1) % m} coincide")
            if det2(a, b) <= 0:
                raise PolygonError(f"cone {i} spanned by {a}, {b} does not turn counterclockwise")
            if interior_point_count([ORIGIN, a, b]) != 0:
                raise PolygonError(f"triangle {{0, {a}, {b}}} has interior lattice points")
        if turning_number(vectors) != 1:
            raise PolygonError("the cones do not cover the plane exactly once")
        object.__setattr__(self, 'vectors', vectors)

    @classmethod
    def from_vectors(cls, vectors: Iterable[Sequence[int]]) -> 'StarConfiguration':
        return cls(tuple(as_vector(v) for v in vectors))

    @classmethod
    def from_polygon(cls, polygon: 'ReflexivePolygon') -> 'StarConfiguration':
        return cls(polygon.vertices)

    def __len__(self):
        return len(self.vectors)

    @property
    def orders(self) -> List[int]:
        """det2 of the primitive tangents before and after each vector; negative at non-convex corners."""
        return _corner_orders(self.vectors)

    @property
    def edge_lengths(self) -> List[int]:
        m = len(self.vectors)
        return [affine_length(self.vectors[i], self.vectors[(i + 1) % m]) for i in range(m)]

    def twice_area(self) -> int:
        m = len(self.vectors)
        return sum(det2(self.vectors[i], self.vectors[(i + 1) % m]) for i in range(m))

    def is_convex(self) -> bool:
        return all(order > 0 for order in self.orders)


def twelve_sum(s: StarConfiguration) -> int:
    """2·Area of the star polygon plus the sum of its corner orders."""
    if not isinstance(s, StarConfiguration):
        s = StarConfiguration.from_vectors(s)
    total = s.twice_area() + sum(s.orders)
    logger.debug("twelve_sum %s: area term %d, order term %d", [str(v) for v in s.vectors], s.twice_area(), sum(s.orders))
    return total


def _unimodular_refinement(vectors: Sequence[LatticeVector]) -> List[LatticeVector]:
    rays = list(vectors)
    i = 0
    while i < len(rays):
        a, b = rays[i], rays[(i + 1) % len(rays)]
        d = det2(a, b)
        if d > 1:
            # Every lattice point of the fat cone's triangle other than 0, a, b lies on [a, b].
            # The first one, w, has det2(a, w) = 1 and det2(w, b) = d - 1, so d drops each time.
            step = b - a
            w = LatticeVector(tuple(x + y // d for x, y in zip(a, step)))
            rays.insert(i + 1, w)
            continue
        i += 1
    return rays


def toric_oracle(s: StarConfiguration) -> int:
    """3m' + Σ D_i² of the smooth complete fan obtained by refining the star's fan."""
    if not isinstance(s, StarConfiguration):
        s = StarConfiguration.from_vectors(s)
    rays = _unimodular_refinement(s.vectors)
    n = len(rays)
    total = 3 * n
    for i in range(n):
        previous, current, following = rays[i - 1], rays[i], rays[(i + 1) % n]
        c = det2(previous, following)
        if previous + following != current * c:
            raise PolygonError(f"refined fan is not smooth at ray {current}")
        total -= c
    logger.debug("toric_oracle refined %d rays to %d", len(s), n)
    return total


# ------------------------------------------------------------
# Reflexive polygons
# ------------------------------------------------------------

def _as_polygon(value: Union[LatticePolytope, 'ReflexivePolygon', Iterable[Sequence[int]]]) -> LatticePolytope:
    if isinstance(value, ReflexivePolygon):
        return value.polygon
    if isinstance(value, LatticePolytope):
        if value.dim != 2:
            raise PolygonError("expected a 2D polygon")
        return value
    points = [tuple(as_vector(p)) for p in value]
    hull = convex_hull_2d(points)
    if len(hull) < 3:
        raise PolygonError("degenerate polygon")
    if set(hull) != set(points) or len(points) != len(set(points)):
        raise PolygonError(f"non-convex polygon input {points}")
    return LatticePolytope([LatticeVector(p) for p in hull])


class ReflexivePolygon:
    """A convex lattice polygon whose only interior lattice point is the origin.

    Input with its interior point elsewhere is translated so that the point sits at 0.
    """

    def __init__(self, polygon: Union[LatticePolytope, Iterable[Sequence[int]]], name: Optional[str] = None):
        polygon = _as_polygon(polygon)
        interior = polygon.lattice_points(strict=True)
        if len(interior) != 1:
            raise PolygonError(f"{polygon!r} has {len(interior)} interior lattice points, not 1")
        if interior[0] != ORIGIN:
            polygon = polygon.translate(-interior[0])
        for facet in polygon.facets:
            if facet.offset != 1:
                raise PolygonError(f"facet {facet.normal}·x <= {facet.offset} is not at lattice distance 1")
        self.polygon = polygon
        self.name = name

    def __eq__(self, other):
        return isinstance(other, ReflexivePolygon) and self.polygon == other.polygon

    def __hash__(self):
        return hash(self.polygon)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<ReflexivePolygon{label} {[str(v) for v in self.vertices]}>"

    @property
    def vertices(self) -> Tuple[LatticeVector, ...]:
        return self.polygon.vertices

    @property
    def m(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> List[Tuple[LatticeVector, LatticeVector]]:
        return [(self.vertices[k], self.vertices[(k + 1) % self.m]) for k in range(self.m)]

    @property
    def edge_lengths(self) -> List[int]:
        return [affine_length(a, b) for a, b in self.edges]

    @property
    def vertex_orders(self) -> List[int]:
        return _corner_orders(self.vertices)

    @property
    def boundary_count(self) -> int:
        return self.polygon.boundary_point_count()

    def boundary_points(self) -> List[LatticeVector]:
        """Boundary lattice points, counterclockwise from the first vertex."""
        points = []
        for (a, b), length in zip(self.edges, self.edge_lengths):
            step = primitive(b - a)
            points.extend(a + step * t for t in range(length))
        return points

    def star(self) -> StarConfiguration:
        return StarConfiguration(self.vertices)

    def dual(self) -> 'ReflexivePolygon':
        """{u : <u, v> >= -1 for all v in P}; its vertices are the negated facet normals."""
        return ReflexivePolygon(LatticePolytope.from_points(-LatticeVector(f.normal) for f in self.polygon.facets))

    @property
    def normal_form(self) -> Tuple[Tuple[int, int], ...]:
        return polygon_normal_form(self.polygon)

    def is_self_dual(self) -> bool:
        return self.normal_form == self.dual().normal_form

    def to_dict(self) -> Dict:
        data = {"vertices": [list(v) for v in self.vertices]}
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> 'ReflexivePolygon':
        if "vertices" not in data:
            raise PolygonError("polygon JSON needs a 'vertices' list")
        return cls([tuple(v) for v in data["vertices"]], name=data.get("name"))


def is_reflexive(polygon: Union[LatticePolytope, Iterable[Sequence[int]]]) -> bool:
    """True iff the polygon has exactly one interior lattice point and an integral dual.

    Raises:
        PolygonError: for non-convex vertex lists.
    """
    polygon = _as_polygon(polygon)
    try:
        ReflexivePolygon(polygon)
    except PolygonError as exc:
        logger.debug("not reflexive: %s", exc)
        return False
    return True


def dual_polygon(polygon: Union[ReflexivePolygon, LatticePolytope, Iterable[Sequence[int]]]) -> ReflexivePolygon:
    if not isinstance(polygon, ReflexivePolygon):
        polygon = ReflexivePolygon(polygon)
    return polygon.dual()


def vertex_orders(polygon: Union[ReflexivePolygon, LatticePolytope, Iterable[Sequence[int]]]) -> List[int]:
    if not isinstance(polygon, ReflexivePolygon):
        polygon = ReflexivePolygon(polygon)
    return polygon.vertex_orders


def edge_lengths(polygon: Union[ReflexivePolygon, LatticePolytope, Iterable[Sequence[int]]]) -> List[int]:
    polygon = _as_polygon(polygon)
    n = len(polygon.vertices)
    return [affine_length(polygon.vertices[k], polygon.vertices[(k + 1) % n]) for k in range(n)]


# ------------------------------------------------------------
# GL(2,Z) normal form and the catalog
# ------------------------------------------------------------

def _extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _extended_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _hermite_columns(columns: Sequence[LatticeVector]) -> Tuple[Tuple[int, int], ...]:
    """Row Hermite normal form of the 2 x m matrix with the given columns under GL(2,Z) on the left."""
    top = [c[0] for c in columns]
    bottom = [c[1] for c in columns]
    first = next(j for j in range(len(columns)) if top[j] or bottom[j])
    a, b = top[first], bottom[first]
    g, x, y = _extended_gcd(a, b)
    top, bottom = ([x * p + y * q for p, q in zip(top, bottom)],
                   [(-b // g) * p + (a // g) * q for p, q in zip(top, bottom)])
    second = next(j for j in range(first + 1, len(columns)) if bottom[j])
    if bottom[second] < 0:
        bottom = [-q for q in bottom]
    shift = top[second] // bottom[second]
    top = [p - shift * q for p, q in zip(top, bottom)]
    return tuple(zip(top, bottom))


def polygon_normal_form(polygon: Union[LatticePolytope, ReflexivePolygon]) -> Tuple[Tuple[int, int], ...]:
    """Lexicographically least Hermite form over all cyclic rotations and both orientations.

    Two polygons about the origin share a normal form iff some element of GL(2,Z) maps one onto the other.
    """
    vertices = list(_as_polygon(polygon).vertices)
    candidates = []
    for order in (vertices, vertices[::-1]):
        for shift in range(len(order)):
            candidates.append(_hermite_columns(order[shift:] + order[:shift]))
    return min(candidates)


def _unique_interior_origin(polygon: LatticePolytope) -> bool:
    return polygon.lattice_points(strict=True) == [ORIGIN]


def _catalog_neighbours(polygon: LatticePolytope, box: Sequence[Tuple[int, int]]) -> Iterable[LatticePolytope]:
    own = set(tuple(p) for p in polygon.lattice_points())
    for p in box:
        if p in own:
            continue
        candidate = LatticePolytope.from_points(list(polygon.vertices) + [LatticeVector(p)])
        if _unique_interior_origin(candidate):
            yield candidate
    for vertex in polygon.vertices:
        remaining = [LatticeVector(q) for q in own if q != tuple(vertex)]
        try:
            candidate = LatticePolytope.from_points(remaining)
        except LatticeError:
            continue
        if candidate.contains(ORIGIN, strict=True) and _unique_interior_origin(candidate):
            yield candidate


@lru_cache(maxsize=1)
def _catalog_entries() -> Tuple['ReflexivePolygon', ...]:
    """Reflexive classes reached from the P2 triangle by adding or removing one point at a time.

    In the plane a lattice polygon is reflexive exactly when the origin is its only interior
    point, so every move keeps that condition. Every such polygon is a lattice subpolygon of
    one of the three maximal classes: conv{(-1,-1),(2,-1),(-1,2)}, [-1,1]^2 and
    conv{(-1,-1),(3,-1),(-1,1)}. All three lie in the box [-CATALOG_BOX, CATALOG_BOX]^2, so the
    search over that box sees a representative of each class. The 16 results are checked
    for reflexivity once more.
    """
    box = list(itertools.product(range(-CATALOG_BOX, CATALOG_BOX + 1), repeat=2))
    start = LatticePolytope([LatticeVector((1, 0)), LatticeVector((0, 1)), LatticeVector((-1, -1))])
    classes: Dict[Tuple[Tuple[int, int], ...], LatticePolytope] = {polygon_normal_form(start): start}
    queue = deque([start])
    while queue:
        polygon = queue.popleft()
        for neighbour in _catalog_neighbours(polygon, box):
            key = polygon_normal_form(neighbour)
            if key not in classes:
                classes[key] = neighbour
                queue.append(neighbour)

    entries = []
    for key in classes:
        representative = LatticePolytope.from_points(LatticeVector(c) for c in key)
        entries.append(ReflexivePolygon(representative))
    entries.sort(key=lambda p: (p.boundary_count, p.m, p.normal_form))

    named = []
    suffix: Dict[int, int] = {}
    for entry in entries:
        count = suffix.get(entry.boundary_count, 0)
        suffix[entry.boundary_count] = count + 1
        named.append(ReflexivePolygon(entry.polygon, name=f"b{entry.boundary_count}{chr(ord('a') + count)}"))
    for entry in named:
        if not is_reflexive(entry.polygon):
            raise PolygonError(f"catalog entry {entry.name} failed the reflexivity check")
    logger.info("reflexive catalog: %d classes", len(named))
    return tuple(named)


def reflexive_catalog() -> List[ReflexivePolygon]:
    """The 16 reflexive polygons up to GL(2,Z), ordered by boundary count, vertex count and normal form."""
    return list(_catalog_entries())


def _alias_targets() -> Dict[str, Tuple[Tuple[int, int], ...]]:
    p2 = ReflexivePolygon([(1, 0), (0, 1), (-1, -1)])
    p1xp1 = ReflexivePolygon([(1, 0), (0, 1), (-1, 0), (0, -1)])
    example = ReflexivePolygon([(-1, -1), (1, -1), (1, 0), (-1, 1)])
    return {
        "p2": p2.normal_form,
        "p2dual": p2.dual().normal_form,
        "p1xp1": p1xp1.normal_form,
        "schoen_example_p1": example.normal_form,
        "schoen_example_p2": p2.dual().normal_form,
    }


def catalog_names() -> List[str]:
    return [entry.name for entry in _catalog_entries()] + sorted(_alias_targets())


def catalog_entry(key: Union[int, str]) -> ReflexivePolygon:
    """Catalog polygon by index 0-15, by name (b3a, b4a, ...), or by alias (p2, p2dual, p1xp1, ...)."""
    entries = _catalog_entries()
    if isinstance(key, str) and key.lstrip('-').isdigit():
        key = int(key)
    if isinstance(key, int):
        if not 0 <= key < len(entries):
            raise PolygonError(f"catalog index {key} out of range 0..{len(entries) - 1}")
        return entries[key]
    aliases = _alias_targets()
    if key in aliases:
        return next(entry for entry in entries if entry.normal_form == aliases[key])
    for entry in entries:
        if entry.name == key:
            return entry
    raise PolygonError(f"unknown catalog polygon '{key}'")


def catalog_index(polygon: ReflexivePolygon) -> int:
    form = polygon.normal_form
    return next(i for i, entry in enumerate(_catalog_entries()) if entry.normal_form == form)


# Fan polytopes of the Hirzebruch surfaces F3 and F4: non-convex stars.
def f3_star() -> StarConfiguration:
    return StarConfiguration.from_vectors([(1, 0), (0, 1), (-1, 3), (0, -1)])


def f4_star() -> StarConfiguration:
    return StarConfiguration.from_vectors([(1, 0), (0, 1), (-1, 4), (0, -1)])


def polygon_to_json(polygon: ReflexivePolygon) -> str:
    return json.dumps(polygon.to_dict(), sort_keys=True)


def polygon_from_json(text: str) -> ReflexivePolygon:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolygonError(f"invalid polygon JSON at offset {exc.pos}: {exc.msg}") from exc
    return ReflexivePolygon.from_dict(data)
