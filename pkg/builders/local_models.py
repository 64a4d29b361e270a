"""Local tropical models and their smoothings and resolutions.

Covers affine A_{k-1} singularities, generalized and orbifolded conifolds,
orbifolded trivalent vertices and Gorenstein vertices over a lattice polygon.
Every builder goes through ComplexBuilder: cells, vertex charts, PL values and
the carriers of the discriminant are stated here, while gluings, loops and
multiplicities are derived from the charts.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from geometry.lattice import LatticeVector, convex_hull_2d, det2, dot, mat_vec
from tropical.complex import TropicalComplex
from tropical.legendre import legendre_dual
from tropical.monodromy import ChamberPath
from tropical.polarization import polarize
from tropical.refinement import separate_points
from tropical.validation import ComplexBuilder

logger = logging.getLogger(__name__)

Point2 = Tuple[int, int]
Triangle = Tuple[Point2, Point2, Point2]


class BuilderError(ValueError):
    """Raised for invalid model parameters, degenerate polygons and bad resolution choices."""


@dataclass(frozen=True)
class ConifoldParams:
    k: int
    l: int

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise BuilderError(f"conifold parameters must be positive, got k={self.k}, l={self.l}")


def _check_k(k: int):
    if k < 1:
        raise BuilderError(f"k must be at least 1, got {k}")


def set_gradients(builder: ComplexBuilder, vertex: str, gradients: Dict[str, Sequence[int]]):
    """PL values at vertex given by one integral gradient per cell, in fan coordinates."""
    values: Dict[LatticeVector, int] = {}
    for cell, gradient in gradients.items():
        chart = builder.chart(cell, vertex)
        for direction in builder.cells[cell].edge_directions(vertex).values():
            ray = LatticeVector(mat_vec(chart, direction))
            values[ray] = dot(gradient, ray)
    builder.set_pl(vertex, values)


def _renamed(c: TropicalComplex, name: str, **metadata) -> TropicalComplex:
    data = dict(c.metadata)
    data.update(metadata)
    return c.with_changes(name=name, metadata=data)


# ------------------------------------------------------------
# Affine A_{k-1} singularities
# ------------------------------------------------------------

def affine_Ak_B(k: int) -> TropicalComplex:
    """A k-tall rectangle and the triangle conv{(0,0), (0,k), (-1,k)} glued along x = 0.

    The triangle's chart at the origin straightens the corner, so the point on the
    shared edge has monodromy [[1, 0], [k, 1]]. φ is x on the rectangle side.

    Raises:
        BuilderError: if k < 1.
    """
    _check_k(k)
    builder = ComplexBuilder(2, name=f"affine-A{k - 1}")
    builder.metadata.update({'model': 'affine-Ak', 'k': k})
    builder.add_cell("R", {"o": (0, 0), "e0": (1, 0), "e1": (1, k), "t": (0, k)})
    builder.add_cell("T", {"o": (0, 0), "t": (0, k), "w": (-1, k)})
    builder.set_chart("T", "o", [[1, 0], [k, 1]])
    for cell in ("R", "T"):
        builder.set_chart(cell, "t", [[-1, 0], [0, -1]])
    set_gradients(builder, "o", {"R": (1, 0), "T": (0, 0)})
    set_gradients(builder, "t", {"R": (0, 0), "T": (1, 0)})
    builder.add_locus({"o", "t"})
    return builder.build()


def affine_Ak_Bdual(k: int) -> TropicalComplex:
    """Two unit squares glued along [0, 1] x {0} with the lower one sheared by k at the origin.

    Raises:
        BuilderError: if k < 1.
    """
    _check_k(k)
    builder = ComplexBuilder(2, name=f"affine-A{k - 1}-dual")
    builder.metadata.update({'model': 'affine-Ak-dual', 'k': k})
    builder.add_cell("U", {"o": (0, 0), "x": (1, 0), "u1": (1, 1), "u0": (0, 1)})
    builder.add_cell("D", {"o": (0, 0), "d0": (0, -1), "d1": (1, -1), "x": (1, 0)})
    builder.set_chart("D", "o", [[1, k], [0, 1]])
    for v in ("o", "x"):
        set_gradients(builder, v, {"U": (0, k), "D": (0, 0)})
    builder.add_locus({"o", "x"})
    return builder.build()


def affine_Ak_smoothing(k: int) -> TropicalComplex:
    """The A_{k-1} point separated into k simple points on its invariant line."""
    _check_k(k)
    c = polarize(separate_points(affine_Ak_B(k)))
    return _renamed(c, f"affine-A{k - 1}-smoothing", model='affine-Ak-smoothing')


def affine_Ak_dual_smoothing(k: int) -> TropicalComplex:
    """The dual model split into a horizontal strip of k simple points."""
    _check_k(k)
    c = polarize(separate_points(affine_Ak_Bdual(k)))
    return _renamed(c, f"affine-A{k - 1}-dual-smoothing", model='affine-Ak-dual-smoothing')


def affine_Ak_resolution(k: int) -> TropicalComplex:
    """k simple points on k parallel invariant lines: the Legendre dual of the dual smoothing."""
    c = legendre_dual(affine_Ak_dual_smoothing(k))
    return _renamed(c, f"affine-A{k - 1}-resolution", model='affine-Ak-resolution',
                    dual_name=f"affine-A{k - 1}-dual-smoothing")


def affine_Ak_dual_resolution(k: int) -> TropicalComplex:
    c = legendre_dual(affine_Ak_smoothing(k))
    return _renamed(c, f"affine-A{k - 1}-dual-resolution", model='affine-Ak-dual-resolution',
                    dual_name=f"affine-A{k - 1}-smoothing")


def _split_chain(p: str, q: str, length: int) -> List[str]:
    return [p] + [f"{p}~{q}:{t}" for t in range(1, length)] + [q]


def _piece_with(c: TropicalComplex, cell: str, vertices: Iterable[str]) -> str:
    """The unique piece of a subdivided cell containing all of vertices."""
    vertices = list(vertices)
    found = [piece.name for piece in c.cells
             if (piece.name == cell or piece.name.startswith(cell + "."))
             and all(v in piece.coords for v in vertices)]
    if len(found) != 1:
        raise BuilderError(f"expected one piece of {cell} through {vertices}, found {found}")
    return found[0]


def affine_Ak_smoothing_loop(k: int) -> ChamberPath:
    """A chamber path in affine_Ak_smoothing(k) enclosing all k simple points."""
    _check_k(k)
    original = affine_Ak_B(k).loci[0].loop
    if k == 1:
        return original
    sigma, tau = original.cells
    p, q = original.vertices
    c = affine_Ak_smoothing(k)
    chain = _split_chain(p, q, k)
    sigma_p, tau_p = _piece_with(c, sigma, chain[:2]), _piece_with(c, tau, chain[:2])
    sigma_q, tau_q = _piece_with(c, sigma, chain[-2:]), _piece_with(c, tau, chain[-2:])
    apex_tau = next(v for v in c.cell_map[tau_p].coords if v not in chain)
    apex_sigma = next(v for v in c.cell_map[sigma_p].coords if v not in chain)
    return ChamberPath((sigma_p, tau_p, tau_q, sigma_q), (p, apex_tau, q, apex_sigma), p)


def affine_Ak_resolution_loop(k: int) -> ChamberPath:
    """A chamber path in affine_Ak_resolution(k) enclosing all k simple points.

    The dual cells of the subdivided edge's lattice points form a column; the path
    climbs it through the upper pieces and returns through the lower ones.
    """
    _check_k(k)
    original = affine_Ak_Bdual(k).loci[0].loop
    down, up = original.cells
    p, q = original.vertices
    smoothing = affine_Ak_dual_smoothing(k)
    chain = _split_chain(p, q, k)
    ups = [_piece_with(smoothing, up, chain[t:t + 2]) for t in range(k)]
    downs = [_piece_with(smoothing, down, chain[t:t + 2]) for t in range(k)]
    cells = tuple(chain) + tuple(reversed(chain[1:-1]))
    vertices = tuple(ups) + tuple(reversed(downs))
    return ChamberPath(cells, vertices, ups[0])


# ------------------------------------------------------------
# Resolution choices for the conifold models
# ------------------------------------------------------------

def _boundary_edge(a: Point2, b: Point2, k: int, l: int) -> bool:
    return (a[0] == b[0] and a[0] in (0, l)) or (a[1] == b[1] and a[1] in (0, k))


def _overlap(first: Sequence[Point2], second: Sequence[Point2]) -> bool:
    """Whether two convex polygons share interior points (separating axis test)."""
    for polygon in (first, second):
        n = len(polygon)
        for i in range(n):
            a, b = polygon[i], polygon[(i + 1) % n]
            normal = (a[1] - b[1], b[0] - a[0])
            one = [dot(normal, p) for p in first]
            two = [dot(normal, p) for p in second]
            if max(one) <= min(two) or max(two) <= min(one):
                return False
    return True


def _normal_triangles(triangles: Iterable[Iterable[Sequence[int]]]) -> Tuple[Triangle, ...]:
    return tuple(sorted(tuple(sorted((int(p[0]), int(p[1])) for p in t)) for t in triangles))


@dataclass(frozen=True)
class ResolutionChoice:
    """A triangulation of [0, l] x [0, k] into standard triangles and an order of line types.

    Points are (x, z) with x in [0, l] and z in [0, k]. The ordering lists, bottom
    to top, whether each resolved line is horizontal ('h', k of them) or
    vertical ('v', l of them).
    """
    k: int
    l: int
    triangles: Tuple[Triangle, ...]
    ordering: str

    def __post_init__(self):
        if self.k < 1 or self.l < 1:
            raise BuilderError(f"choice for a {self.l} x {self.k} rectangle")
        if sorted(self.ordering) != sorted('h' * self.k + 'v' * self.l):
            raise BuilderError(f"ordering {self.ordering!r} needs {self.k} 'h' and {self.l} 'v'")
        triangles = _normal_triangles(self.triangles)
        _check_triangulation(triangles, self.k, self.l)
        object.__setattr__(self, 'triangles', triangles)

    @classmethod
    def default(cls, k: int, l: int) -> 'ResolutionChoice':
        """Every unit square cut along its diagonal (j, i)-(j+1, i+1); horizontal lines first."""
        triangles = []
        for j in range(l):
            for i in range(k):
                triangles.append(((j, i), (j + 1, i), (j + 1, i + 1)))
                triangles.append(((j, i), (j + 1, i + 1), (j, i + 1)))
        return cls(k, l, tuple(triangles), 'h' * k + 'v' * l)

    @classmethod
    def from_triangles(cls, k: int, l: int, triangles: Iterable[Iterable[Sequence[int]]],
                       ordering: Optional[str] = None) -> 'ResolutionChoice':
        return cls(k, l, _normal_triangles(triangles), ordering or 'h' * k + 'v' * l)

    @staticmethod
    def all_triangulations(k: int, l: int) -> List[Tuple[Triangle, ...]]:
        """Every triangulation of the rectangle into standard triangles, each found once."""
        points = [(x, z) for x in range(l + 1) for z in range(k + 1)]
        corners = [(0, 0), (l, 0), (l, k), (0, k)]
        open_edges = set()
        for a, b in zip(corners, corners[1:] + corners[:1]):
            steps = max(abs(b[0] - a[0]), abs(b[1] - a[1]))
            dx, dz = (b[0] - a[0]) // steps, (b[1] - a[1]) // steps
            for t in range(steps):
                open_edges.add(((a[0] + t * dx, a[1] + t * dz), (a[0] + (t + 1) * dx, a[1] + (t + 1) * dz)))
        found: List[Tuple[Triangle, ...]] = []

        def extend(edges, placed):
            if not edges:
                found.append(_normal_triangles(placed))
                return
            a, b = min(edges)
            for c in points:
                if det2((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])) != 1:
                    continue
                triangle = (a, b, c)
                if any(_overlap(triangle, other) for other in placed):
                    continue
                remaining = set(edges)
                for x, y in ((a, b), (b, c), (c, a)):
                    if (x, y) in remaining:
                        remaining.discard((x, y))
                    else:
                        remaining.add((y, x))
                extend(remaining, placed + [triangle])

        extend(open_edges, [])
        logger.debug("%d standard triangulations of the %d x %d rectangle", len(found), l, k)
        return sorted(found)


def _check_triangulation(triangles: Sequence[Triangle], k: int, l: int):
    """Raises BuilderError unless the triangles tile [0, l] x [0, k] by standard triangles."""
    edges: Dict[Tuple[Point2, Point2], int] = {}
    total = 0
    for t in triangles:
        if len(set(t)) != 3 or any(not (0 <= x <= l and 0 <= z <= k) for x, z in t):
            raise BuilderError(f"non-standard triangulation: {t} is not a triangle in the rectangle")
        a, b, c = t
        area = abs(det2((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])))
        if area != 1:
            raise BuilderError(f"non-standard triangulation: {t} has twice-area {area}")
        total += area
        for x, y in ((a, b), (b, c), (a, c)):
            key = tuple(sorted((x, y)))
            edges[key] = edges.get(key, 0) + 1
    if total != 2 * k * l:
        raise BuilderError(f"non-standard triangulation: twice-area {total}, expected {2 * k * l}")
    for (x, y), count in edges.items():
        expected = 1 if _boundary_edge(x, y, k, l) else 2
        if count != expected:
            raise BuilderError(f"non-standard triangulation: edge {x}-{y} is used {count} times")


def _choice_for(p: ConifoldParams, choice: Optional[ResolutionChoice]) -> ResolutionChoice:
    choice = choice or ResolutionChoice.default(p.k, p.l)
    if (choice.k, choice.l) != (p.k, p.l):
        raise BuilderError(f"choice for ({choice.k}, {choice.l}) used with parameters ({p.k}, {p.l})")
    return choice


# ------------------------------------------------------------
# Generalized and orbifolded conifolds
# ------------------------------------------------------------

def generalized_conifold_B(p: ConifoldParams) -> TropicalComplex:
    """Two triangular prisms over the rectangle [0, l] x {0} x [0, k].

    "plus" is conv{(0,0),(l,0),(0,1)} x [0, k] in the (x, y) plane and "minus" is
    [0, l] x conv{(0,0),(0,k),(-1,k)} in the (y, z) plane. The discriminant is the
    cross of two segments through the middle of the rectangle, meeting at a
    four-valent point.
    """
    k, l = p.k, p.l
    builder = ComplexBuilder(3, name=f"generalized-conifold-{k}-{l}")
    builder.metadata.update({'model': 'generalized-conifold', 'k': k, 'l': l})
    square = {"a": (0, 0, 0), "b": (l, 0, 0), "c": (0, 0, k), "d": (l, 0, k)}
    builder.add_cell("plus", {**square, "e": (0, 1, 0), "f": (0, 1, k)})
    builder.add_cell("minus", {**square, "g": (0, -1, k), "h": (l, -1, k)})
    for v in ("b", "d"):
        builder.set_chart("plus", v, [[1, l, 0], [0, 1, 0], [0, 0, 1]])
    for v in ("a", "b"):
        builder.set_chart("minus", v, [[1, 0, 0], [0, 1, 0], [0, k, 1]])
    for v in square:
        set_gradients(builder, v, {"plus": (0, 1, 0), "minus": (0, 0, 0)})
    for edge in ({"a", "c"}, {"b", "d"}, {"a", "b"}, {"c", "d"}):
        builder.add_locus(set(square), edge)
    return builder.build()


def orbifolded_conifold_B(p: ConifoldParams) -> TropicalComplex:
    c = legendre_dual(generalized_conifold_B(p))
    return _renamed(c, f"orbifolded-conifold-{p.k}-{p.l}", model='orbifolded-conifold')


def generalized_conifold_smoothing(p: ConifoldParams, choice: Optional[ResolutionChoice] = None
                                   ) -> TropicalComplex:
    """Each triangle t of the choice gives prisms t x [0, 1] and t x [-1, 0].

    A middle vertex (j, 0, i) straightens the upper prisms by x -> x + j*y and the
    lower ones by z -> z + (k - i)*y. The discriminant is the dual graph of the
    triangulation with a negative trivalent vertex in every triangle.

    Raises:
        BuilderError: if choice does not triangulate the k x l rectangle.
    """
    choice = _choice_for(p, choice)
    k, l = p.k, p.l
    builder = ComplexBuilder(3, name=f"generalized-conifold-{k}-{l}-smoothing")
    builder.metadata.update({'model': 'generalized-conifold-smoothing', 'k': k, 'l': l})
    for n, triangle in enumerate(choice.triangles):
        upper: Dict[str, Tuple[int, int, int]] = {}
        lower: Dict[str, Tuple[int, int, int]] = {}
        for x, z in triangle:
            upper[f"m{x},{z}"] = lower[f"m{x},{z}"] = (x, 0, z)
            upper[f"u{x},{z}"] = (x, 1, z)
            lower[f"d{x},{z}"] = (x, -1, z)
        builder.add_cell(f"plus{n}", upper)
        builder.add_cell(f"minus{n}", lower)
        for x, z in triangle:
            builder.set_chart(f"plus{n}", f"m{x},{z}", [[1, x, 0], [0, 1, 0], [0, 0, 1]])
            builder.set_chart(f"minus{n}", f"m{x},{z}", [[1, 0, 0], [0, 1, 0], [0, k - z, 1]])
        face = {f"m{x},{z}" for x, z in triangle}
        for i in range(3):
            a, b = triangle[i], triangle[(i + 1) % 3]
            builder.add_locus(face, {f"m{a[0]},{a[1]}", f"m{b[0]},{b[1]}"})
    return polarize(builder.build())


def generalized_conifold_resolution(p: ConifoldParams, choice: Optional[ResolutionChoice] = None
                                    ) -> TropicalComplex:
    """A column of k + l + 1 unit cubes with one simple line in each interior face.

    Face s, between cubes s - 1 and s, holds a vertical line (monodromy e_2 -> e_2 + e_1)
    or a horizontal one (e_2 -> e_2 + e_3) according to the choice's ordering.
    """
    ordering = _choice_for(p, choice).ordering
    k, l = p.k, p.l
    builder = ComplexBuilder(3, name=f"generalized-conifold-{k}-{l}-resolution")
    builder.metadata.update({'model': 'generalized-conifold-resolution', 'k': k, 'l': l,
                             'ordering': ordering})

    def vid(x: int, y: int, z: int) -> str:
        return f"{x},{y},{z}"

    for s in range(k + l + 1):
        bottom = s - k
        builder.add_cell(f"C{s}", {vid(x, y, z): (x, y, z)
                                   for x in (0, 1) for y in (bottom, bottom + 1) for z in (0, 1)})
    for s, kind in enumerate(ordering, start=1):
        y = s - k
        below, above = f"C{s - 1}", f"C{s}"
        face = {vid(x, y, z) for x in (0, 1) for z in (0, 1)}
        if kind == 'v':
            for z in (0, 1):
                builder.set_chart(below, vid(1, y, z), [[1, 1, 0], [0, 1, 0], [0, 0, 1]])
            edges = [{vid(0, y, z), vid(1, y, z)} for z in (0, 1)]
        else:
            for x in (0, 1):
                builder.set_chart(below, vid(x, y, 1), [[1, 0, 0], [0, 1, 0], [0, 1, 1]])
            edges = [{vid(x, y, 0), vid(x, y, 1)} for x in (0, 1)]
        for v in face:
            set_gradients(builder, v, {below: (0, 0, 0), above: (0, 1, 0)})
        for edge in edges:
            builder.add_locus(face, edge)
    return builder.build()


def orbifolded_conifold_smoothing(p: ConifoldParams, choice: Optional[ResolutionChoice] = None
                                  ) -> TropicalComplex:
    c = legendre_dual(generalized_conifold_resolution(p, choice))
    return _renamed(c, f"orbifolded-conifold-{p.k}-{p.l}-smoothing", model='orbifolded-conifold-smoothing')


def orbifolded_conifold_resolution(p: ConifoldParams, choice: Optional[ResolutionChoice] = None
                                   ) -> TropicalComplex:
    c = legendre_dual(generalized_conifold_smoothing(p, choice))
    return _renamed(c, f"orbifolded-conifold-{p.k}-{p.l}-resolution", model='orbifolded-conifold-resolution')


# ------------------------------------------------------------
# Gorenstein vertices
# ------------------------------------------------------------

def _convex_vertices(points: Iterable[Sequence[int]]) -> List[Point2]:
    given = [(int(p[0]), int(p[1])) for p in points]
    hull = [tuple(v) for v in convex_hull_2d(given)]
    if len(hull) < 3:
        raise BuilderError(f"polygon {given} needs at least 3 non-collinear vertices")
    if len(set(given)) != len(given) or set(hull) != set(given):
        raise BuilderError(f"polygon {given} is not convex with the given points as its vertices")
    return hull


def gorenstein_vertex(P: Iterable[Sequence[int]], sign: int = -1) -> TropicalComplex:
    """The Gorenstein vertex over a convex lattice polygon P.

    The negative vertex is the prism P x [0, 1] glued to the pyramid over P x {0}
    with apex (v_0, -1); the pyramid's chart at v_i is the shear sending the apex
    direction to -e_3. Its legs run from the middle of P to its edges, each with
    multiplicity the edge's affine length. The positive vertex is the Legendre dual.

    Raises:
        BuilderError: if P is not convex with at least 3 vertices, or sign is not ±1.
    """
    if sign not in (1, -1):
        raise BuilderError(f"sign must be 1 or -1, got {sign}")
    hull = _convex_vertices(P)
    m = len(hull)
    builder = ComplexBuilder(3, name=f"gorenstein-{m}-negative")
    builder.metadata.update({'model': 'gorenstein', 'polygon': [list(v) for v in hull]})
    base = hull[0]
    prism = {}
    for i, (x, y) in enumerate(hull):
        prism[f"b{i}"] = (x, y, 0)
        prism[f"t{i}"] = (x, y, 1)
    pyramid = {f"b{i}": (x, y, 0) for i, (x, y) in enumerate(hull)}
    pyramid["a"] = (base[0], base[1], -1)
    builder.add_cell("prism", prism)
    builder.add_cell("pyramid", pyramid)
    for i, (x, y) in enumerate(hull):
        dx, dy = base[0] - x, base[1] - y
        builder.set_chart("pyramid", f"b{i}", [[1, 0, dx], [0, 1, dy], [0, 0, 1]])
        set_gradients(builder, f"b{i}", {"prism": (0, 0, 1), "pyramid": (0, 0, 0)})
    face = {f"b{i}" for i in range(m)}
    for i in range(m):
        builder.add_locus(face, {f"b{(i - 1) % m}", f"b{i}"})
    negative = builder.build()
    if sign < 0:
        return negative
    return _renamed(legendre_dual(negative), f"gorenstein-{m}-positive")


def _triangle(T: Iterable[Sequence[int]]) -> List[Point2]:
    points = [(int(p[0]), int(p[1])) for p in T]
    if len(points) != 3:
        raise BuilderError(f"a triangle needs 3 vertices, got {len(points)}")
    a, b, c = points
    if det2((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])) == 0:
        raise BuilderError(f"triangle {points} is degenerate")
    return points


def orb_trivalent_negative(T: Iterable[Sequence[int]]) -> TropicalComplex:
    """The negative orbifolded trivalent vertex: legs of the edges' affine lengths."""
    c = gorenstein_vertex(_triangle(T), -1)
    return _renamed(c, "orbifolded-trivalent-negative", model='orbifolded-trivalent')


def orb_trivalent_positive(T: Iterable[Sequence[int]]) -> TropicalComplex:
    c = gorenstein_vertex(_triangle(T), 1)
    return _renamed(c, "orbifolded-trivalent-positive", model='orbifolded-trivalent')
