"""Global Schoen orbi-conifolds over a pair of reflexive polygons.

O(P1, P2) glues the prisms P1 x [0, l2_j] and P2 x [0, l1_i] to a torus of cubes
C_ij; its four-valent points sit on the vertical cube edges and are orbifolded
conifold points with (k, l) = (order_i(P1), order_j(P2)). G(Q1, Q2) glues two solid
tori, the cones over Q1 and Q2 times a circle, along their boundary torus; its
four-valent points are generalized conifold points in the torus rectangles.

Discriminant tags: "inner-1" / "inner-2" for the circles coming from the inner
points of the two elliptic surfaces, "outer-1" / "outer-2" for the crossing legs
and "outer" for the diagonal legs created when a torus rectangle is cut in two.

Vertex ids: "a{i}|t{j}" and "s{i}|b{j}" for O, "p{k}|{j}" on the torus of G,
"{x}|t{j}" / "{y}|s{k}" for disc vertices times a circle point and
"g{k}|{j}|{h}" for the layered grid of the smoothed O.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from geometry.lattice import LatticeVector, Matrix, as_matrix, from_columns, identity_matrix, mat_mul
from geometry.polygons import PolygonError, ReflexivePolygon, StarConfiguration, catalog_entry, catalog_index
from tropical.complex import TropicalComplex, euler_characteristic, face_label
from tropical.constructions import _block
from tropical.discriminant import Junction, discriminant_graph
from tropical.legendre import legendre_dual
from tropical.monodromy import MonodromyError
from tropical.polarization import polarize
from tropical.refinement import separate_points
from tropical.validation import ComplexBuilder, validate
from builders.elliptic import _Frames, build_Aprime
from builders.local_models import BuilderError, ConifoldParams, generalized_conifold_B, orbifolded_conifold_B

logger = logging.getLogger(__name__)

VARIANTS = ("O", "G")
STAGES = ("built", "intermediate", "smoothed", "resolved")
FLAVORS = {"fourvalent-orbifolded": "orbifolded", "fourvalent-generalized": "generalized"}

# Fan coordinates of the second solid torus seen from the first one along the
# boundary torus: e1 -> -e3, e2 -> -e2, e3 -> -e1.
_SWAP = as_matrix([[0, 0, -1], [0, -1, 0], [-1, 0, 0]])

PolygonLike = Union[ReflexivePolygon, int, str, Iterable[Sequence[int]]]


def as_polygon(P: PolygonLike) -> ReflexivePolygon:
    """A reflexive polygon from a polygon, a catalog index or name, or a vertex list.

    Raises:
        BuilderError: if the input is unknown or not reflexive.
    """
    if isinstance(P, ReflexivePolygon):
        return P
    try:
        if isinstance(P, (int, str)):
            return catalog_entry(P)
        return ReflexivePolygon([tuple(v) for v in P])
    except (PolygonError, KeyError, IndexError) as exc:
        raise BuilderError(f"not a reflexive polygon: {exc}") from exc


def _label(P: ReflexivePolygon) -> Union[int, List[List[int]]]:
    try:
        return catalog_index(P)
    except StopIteration:
        return [list(v) for v in P.vertices]


# ------------------------------------------------------------
# Complexes and their four-valent points
# ------------------------------------------------------------

@dataclass(frozen=True)
class FourValentPoint:
    node: Tuple[str, ...]
    kl: Tuple[int, int]
    flavor: str
    degree: Optional[int]

    @property
    def ordinary(self) -> bool:
        return self.kl == (1, 1)

    def to_dict(self) -> Dict:
        return {'node': list(self.node), 'kl': list(self.kl), 'flavor': self.flavor,
                'degree': self.degree, 'ordinary': self.ordinary}


@dataclass(frozen=True)
class OrbiConifoldComplex:
    """A built, smoothed or resolved Schoen complex with the polygon pair it came from."""
    base: TropicalComplex
    variant: str
    polygons: Tuple[ReflexivePolygon, ReflexivePolygon]
    stage: str = "built"
    history: Tuple[str, ...] = field(default_factory=tuple)

    def four_valent_points(self) -> List[FourValentPoint]:
        return classify_points(self)

    def circle_components(self) -> List[Dict]:
        """Closed chains of legs, each with its tag and the multiplicity it carries."""
        graph = discriminant_graph(self.base)
        found = []
        for segment in graph.segments():
            if not segment['circle']:
                continue
            loci = segment['loci']
            first = self.base.loci[loci[0]]
            found.append({'tag': first.tag, 'multiplicity': abs(first.multiplicity), 'loci': loci})
        return found

    def crossing_counts(self) -> Dict[str, int]:
        """Observed four-valent points next to the two counts the pair predicts.

        vertex_product is m1*m2 for the polygons themselves and dual_product the same
        for the dual polygons, whose triangles index the crossings of G.
        """
        P1, P2 = self.polygons
        observed = len(discriminant_graph(self.base).four_valent())
        return {'observed': observed, 'vertex_product': P1.m * P2.m,
                'dual_product': P1.dual().m * P2.dual().m}

    def summary(self) -> Dict:
        graph = discriminant_graph(self.base)
        P1, P2 = self.polygons
        data = {
            'name': self.base.name,
            'variant': self.variant,
            'stage': self.stage,
            'P1': _label(P1),
            'P2': _label(P2),
            'cells': len(self.base.cells),
            'vertices': len(self.base.vertices),
            'euler_characteristic': euler_characteristic(self.base),
            'closed': self.base.is_closed(),
            'discriminant': graph.summary(),
            'history': list(self.history),
        }
        if self.stage in ("built", "intermediate"):
            points = classify_points(self)
            data['points'] = [p.to_dict() for p in points]
            data['ordinary'] = sum(1 for p in points if p.ordinary)
        return data


@lru_cache(maxsize=None)
def _model_junction(flavor: str, k: int, l: int) -> Junction:
    builder = generalized_conifold_B if flavor == "generalized" else orbifolded_conifold_B
    return discriminant_graph(builder(ConifoldParams(k, l))).four_valent()[0]


def _direction_key(v: LatticeVector) -> Tuple[int, ...]:
    coords = tuple(v.coords)
    first = next(x for x in coords if x)
    return coords if first > 0 else tuple(-x for x in coords)


def _leg_pairs(c: TropicalComplex, junction: Junction) -> List[List[int]]:
    """The legs of a four-valent point split into its two straight segments."""
    if len(junction.leg_vectors) == 4:
        groups: Dict[Tuple[int, ...], List[int]] = {}
        for leg, vector in zip(junction.legs, junction.leg_vectors):
            groups.setdefault(_direction_key(vector), []).append(leg)
    else:
        groups = {}
        for leg in junction.legs:
            groups.setdefault((c.loci[leg].tag,), []).append(leg)
    pairs = sorted(groups.values(), key=lambda legs: (min(c.loci[i].tag for i in legs), min(legs)))
    if len(pairs) != 2 or any(len(legs) != 2 for legs in pairs):
        raise BuilderError(f"four-valent point at {face_label(junction.node)} is not two crossing segments")
    return pairs


def classify_points(c: Union[OrbiConifoldComplex, TropicalComplex]) -> List[FourValentPoint]:
    """Match every four-valent point against the conifold local model with the same (k, l).

    k is read from the segment whose legs carry the smaller tag, l from the other.

    Raises:
        BuilderError: if a point is not a crossing of two segments of constant
            multiplicity, or its type or degree matches no local model.
    """
    base = c.base if isinstance(c, OrbiConifoldComplex) else c
    points = []
    for junction in discriminant_graph(base).four_valent():
        flavor = FLAVORS.get(junction.local_type)
        if flavor is None:
            raise BuilderError(f"four-valent point at {face_label(junction.node)} is {junction.local_type}")
        kl = []
        for legs in _leg_pairs(base, junction):
            values = {abs(base.loci[i].multiplicity) for i in legs}
            if len(values) != 1:
                raise BuilderError(f"segment through {face_label(junction.node)} changes multiplicity")
            kl.append(values.pop())
        model = _model_junction(flavor, kl[0], kl[1])
        if (model.local_type, model.degree) != (junction.local_type, junction.degree):
            raise BuilderError(
                f"four-valent point at {face_label(junction.node)} of degree {junction.degree} "
                f"matches no {flavor} conifold with (k, l) = ({kl[0]}, {kl[1]})")
        points.append(FourValentPoint(tuple(sorted(junction.node)), (kl[0], kl[1]), flavor, junction.degree))
    return points


# ------------------------------------------------------------
# O(P1, P2)
# ------------------------------------------------------------

def build_O(P1: PolygonLike, P2: PolygonLike) -> OrbiConifoldComplex:
    """Prisms over P1 and P2 glued to a torus of m1 x m2 cubes.

    Cube C_ij has the corners a_i|t_j .. a_{i+1}|t_{j+1} at height 0 and
    s_i|b_j .. s_{i+1}|b_{j+1} at height 1, with sides l1_i and l2_j.

    Raises:
        BuilderError: if either polygon is not reflexive.
    """
    P1, P2 = as_polygon(P1), as_polygon(P2)
    f1, f2 = _Frames(P1.star()), _Frames(P2.star())
    m1, m2 = f1.m, f2.m

    def a(i: int, j: int) -> str:
        return f"a{i % m1}|t{j % m2}"

    def s(i: int, j: int) -> str:
        return f"s{i % m1}|b{j % m2}"

    builder = ComplexBuilder(3, name=f"O-{m1}x{m2}")
    builder.metadata.update({'model': 'schoen-O', 'P1': P1.to_dict(), 'P2': P2.to_dict()})
    for j in range(m2):
        height = f2.lengths[j]
        coords = {}
        for i in range(m1):
            x, y = f1.vec(i)
            coords[a(i, j)] = (x, y, 0)
            coords[a(i, j + 1)] = (x, y, height)
        builder.add_cell(f"P1|t{j}", coords)
    for i in range(m1):
        height = f1.lengths[i]
        coords = {}
        for j in range(m2):
            x, y = f2.vec(j)
            coords[s(i, j)] = (x, y, 0)
            coords[s(i + 1, j)] = (x, y, height)
        builder.add_cell(f"P2|s{i}", coords)
    for i in range(m1):
        for j in range(m2):
            l1, l2 = f1.lengths[i], f2.lengths[j]
            cube = f"C{i}|{j}"
            builder.add_cell(cube, {
                a(i, j): (0, 0, 0), a(i + 1, j): (l1, 0, 0), a(i, j + 1): (0, l2, 0), a(i + 1, j + 1): (l1, l2, 0),
                s(i, j): (0, 0, 1), s(i + 1, j): (l1, 0, 1), s(i, j + 1): (0, l2, 1), s(i + 1, j + 1): (l1, l2, 1),
            })
            u1, u2 = f1.ahead(i), f2.ahead(j)
            for di in (0, 1):
                v = f1.vec(i + di)
                chart = from_columns([(u1[0], u1[1], 0), (0, 0, 1), (v[0], v[1], 0)])
                for dj in (0, 1):
                    builder.set_chart(cube, a(i + di, j + dj), chart)
            for dj in (0, 1):
                w = f2.vec(j + dj)
                chart = from_columns([(0, 0, 1), (u2[0], u2[1], 0), (-w[0], -w[1], 0)])
                for di in (0, 1):
                    builder.set_chart(cube, s(i + di, j + dj), chart)
    for i in range(m1):
        back, ahead, v = f1.back(i), f1.ahead(i), f1.vec(i)
        for j in range(m2):
            builder.set_pl(a(i, j), {(back[0], back[1], 0): 0, (ahead[0], ahead[1], 0): 0, (v[0], v[1], 0): 1,
                                     (0, 0, 1): f2.orders[j], (0, 0, -1): 0})
    for j in range(m2):
        back, ahead, w = f2.back(j), f2.ahead(j), f2.vec(j)
        for i in range(m1):
            builder.set_pl(s(i, j), {(back[0], back[1], 0): 0, (ahead[0], ahead[1], 0): 0, (w[0], w[1], 0): 1,
                                     (0, 0, 1): f1.orders[i], (0, 0, -1): 0})
    for i in range(m1):
        for j in range(m2):
            bottom = {a(i, j), a(i + 1, j), a(i, j + 1), a(i + 1, j + 1)}
            builder.add_locus(bottom, {a(i, j), a(i + 1, j)}, tag="inner-1")
            builder.add_locus(bottom, {a(i, j + 1), a(i + 1, j + 1)}, tag="inner-1")
            top = {s(i, j), s(i + 1, j), s(i, j + 1), s(i + 1, j + 1)}
            builder.add_locus(top, {s(i, j), s(i, j + 1)}, tag="inner-2")
            builder.add_locus(top, {s(i + 1, j), s(i + 1, j + 1)}, tag="inner-2")
            side = {a(i, j), a(i, j + 1), s(i, j), s(i, j + 1)}
            builder.add_locus(side, {a(i, j), s(i, j)}, tag="outer-1")
            builder.add_locus(side, {a(i, j + 1), s(i, j + 1)}, tag="outer-1")
            front = {a(i, j), a(i + 1, j), s(i, j), s(i + 1, j)}
            builder.add_locus(front, {a(i, j), s(i, j)}, tag="outer-2")
            builder.add_locus(front, {a(i + 1, j), s(i + 1, j)}, tag="outer-2")
    c = builder.build()
    logger.debug("built %s with %d cells", c.name, len(c.cells))
    return OrbiConifoldComplex(c, "O", (P1, P2))


# ------------------------------------------------------------
# Solid tori over cone discs
# ------------------------------------------------------------

def _cone_disc(star: StarConfiguration, center: str, name: str) -> TropicalComplex:
    """The triangles {center, v_i, v_{i+1}} with a point on every spoke of non-zero order."""
    f = _Frames(star)
    builder = ComplexBuilder(2, name=name)
    for i in range(f.m):
        builder.add_cell(f"T{i}", {center: (0, 0), f"v{i}": tuple(f.vec(i)), f"v{(i + 1) % f.m}": tuple(f.vec(i + 1))})
    for i in range(f.m):
        builder.set_chart(f"T{(i - 1) % f.m}", f"v{i}", f.back_chart(i))
        builder.set_chart(f"T{i}", f"v{i}", f.ahead_chart(i, i))
    for i in range(f.m):
        if f.orders[i]:
            builder.add_locus({center, f"v{i}"}, tag="inner")
    return builder.build()


class _Disc:
    """A cone disc with its boundary cycle v0 .. v_{n-1} and the lengths of the boundary edges."""

    def __init__(self, c: TropicalComplex, size: int):
        self.c = c
        self.size = size
        self.boundary = [f"v{k}" for k in range(size)]
        self.index = {v: k for k, v in enumerate(self.boundary)}
        self.lengths = []
        for k in range(size):
            edge = frozenset((self.boundary[k], self.boundary[(k + 1) % size]))
            owner = c.facet_cells[edge][0]
            self.lengths.append(c.cell_map[owner].edge_length(edge))

    def ordered(self, vertices: Iterable[str]) -> List[str]:
        """Interior vertices by name, then boundary ones in cyclic order."""
        inner = sorted(v for v in vertices if v not in self.index)
        outer = [v for v in vertices if v in self.index]
        if len(outer) == 2 and (self.index[outer[0]] + 1) % self.size != self.index[outer[1]]:
            outer.reverse()
        return inner + outer


def _disc(Q: ReflexivePolygon, center: str, refined: bool = False) -> _Disc:
    if not refined:
        return _Disc(_cone_disc(Q.star(), center, f"cone-{center}"), Q.m)
    points = Q.boundary_points()
    c = _cone_disc(StarConfiguration(tuple(points)), center, f"cone-{center}")
    return _Disc(separate_points(c), len(points))


def _staircase(x: str, y: str, z: str, lower: Callable[[str], str], upper: Callable[[str], str]
               ) -> List[Tuple[str, ...]]:
    return [(lower(x), lower(y), lower(z), upper(z)),
            (lower(x), lower(y), upper(y), upper(z)),
            (lower(x), upper(x), upper(y), upper(z))]


def _solid_tori(d1: _Disc, d2: _Disc, name: str, triangulate: bool = False) -> ComplexBuilder:
    """d1 x S^1 and d2 x S^1 glued along the torus of boundary edges.

    The circle of the first solid torus is subdivided by the boundary of d2 and vice
    versa, so every torus rectangle has sides l1_k and l2_j. With triangulate set,
    every prism is cut into three tetrahedra and every torus rectangle into two
    triangles along the diagonal p(k, j) - p(k+1, j+1).
    """
    m1, m2 = d1.size, d2.size

    def p(k: int, j: int) -> str:
        return f"p{k % m1}|{j % m2}"

    def first(x: str, j: int) -> str:
        return p(d1.index[x], j) if x in d1.index else f"{x}|t{j % m2}"

    def second(y: str, k: int) -> str:
        return p(k, d2.index[y]) if y in d2.index else f"{y}|s{k % m1}"

    builder = ComplexBuilder(3, name=name)
    for disc, other, lift, prefix, swap in ((d1, d2, first, "t", False), (d2, d1, second, "s", True)):
        side = "T1" if prefix == "t" else "T2"
        for cell in disc.c.cells:
            for n in range(other.size):
                height = other.lengths[n]
                coords, charts = {}, {}
                for x, point in cell.coords.items():
                    chart = _block(disc.c.chart(cell.name, x))
                    if swap and x in disc.index:
                        chart = mat_mul(_SWAP, chart)
                    coords[lift(x, n)] = (point[0], point[1], 0)
                    coords[lift(x, n + 1)] = (point[0], point[1], height)
                    charts[lift(x, n)] = charts[lift(x, n + 1)] = chart
                prism = f"{side}:{cell.name}|{prefix}{n}"
                if triangulate:
                    x, y, z = disc.ordered(cell.vertices)
                    pieces = _staircase(x, y, z, lambda v, n=n: lift(v, n), lambda v, n=n: lift(v, n + 1))
                    named = [(f"{prism}.{t}", piece) for t, piece in enumerate(pieces)]
                else:
                    named = [(prism, tuple(coords))]
                for piece_name, piece in named:
                    builder.add_cell(piece_name, {v: coords[v] for v in piece})
                    for v in piece:
                        builder.set_chart(piece_name, v, charts[v])
        tag = "inner-1" if prefix == "t" else "inner-2"
        for locus in disc.c.loci:
            lo, hi = disc.ordered(locus.face)
            for n in range(other.size):
                a0, a1, b0, b1 = lift(lo, n), lift(lo, n + 1), lift(hi, n), lift(hi, n + 1)
                if triangulate:
                    builder.add_locus({a0, b0, b1}, {a0, b0}, tag=tag)
                    builder.add_locus({a0, b0, b1}, {a0, b1}, tag=tag)
                    builder.add_locus({a0, a1, b1}, {a0, b1}, tag=tag)
                    builder.add_locus({a0, a1, b1}, {a1, b1}, tag=tag)
                else:
                    builder.add_locus({a0, a1, b0, b1}, {a0, b0}, tag=tag)
                    builder.add_locus({a0, a1, b0, b1}, {a1, b1}, tag=tag)
    for k in range(m1):
        for j in range(m2):
            p00, p10, p01, p11 = p(k, j), p(k + 1, j), p(k, j + 1), p(k + 1, j + 1)
            if triangulate:
                lower, upper = {p00, p10, p11}, {p00, p01, p11}
                builder.add_locus(lower, {p00, p10}, tag="outer-1")
                builder.add_locus(lower, {p10, p11}, tag="outer-2")
                builder.add_locus(lower, {p00, p11}, tag="outer")
                builder.add_locus(upper, {p01, p11}, tag="outer-1")
                builder.add_locus(upper, {p00, p01}, tag="outer-2")
                builder.add_locus(upper, {p00, p11}, tag="outer")
            else:
                rectangle = {p00, p10, p01, p11}
                builder.add_locus(rectangle, {p00, p10}, tag="outer-1")
                builder.add_locus(rectangle, {p01, p11}, tag="outer-1")
                builder.add_locus(rectangle, {p00, p01}, tag="outer-2")
                builder.add_locus(rectangle, {p10, p11}, tag="outer-2")
    return builder


def build_G(Q1: PolygonLike, Q2: PolygonLike) -> OrbiConifoldComplex:
    """The solid tori over the cones on Q1 and Q2, glued along their boundary torus.

    Raises:
        BuilderError: if either polygon is not reflexive.
    """
    Q1, Q2 = as_polygon(Q1), as_polygon(Q2)
    d1, d2 = _disc(Q1, "o1"), _disc(Q2, "o2")
    builder = _solid_tori(d1, d2, f"G-{Q1.m}x{Q2.m}")
    builder.metadata.update({'model': 'schoen-G', 'Q1': Q1.to_dict(), 'Q2': Q2.to_dict()})
    orders1, orders2 = Q1.vertex_orders, Q2.vertex_orders
    for k in range(Q1.m):
        for j in range(Q2.m):
            builder.set_pl(f"p{k}|{j}", {(1, 0, 0): orders1[k], (-1, 0, 0): 0, (0, 1, 0): 1, (0, -1, 0): 0,
                                         (0, 0, 1): 0, (0, 0, -1): orders2[j]})
    for j in range(Q2.m):
        values = {(v[0], v[1], 0): 1 for v in Q1.vertices}
        values.update({(0, 0, 1): 0, (0, 0, -1): orders2[j]})
        builder.set_pl(f"o1|t{j}", values)
    for k in range(Q1.m):
        values = {(w[0], w[1], 0): 1 for w in Q2.vertices}
        values.update({(0, 0, 1): 0, (0, 0, -1): orders1[k]})
        builder.set_pl(f"o2|s{k}", values)
    c = builder.build()
    logger.debug("built %s with %d cells", c.name, len(c.cells))
    return OrbiConifoldComplex(c, "G", (Q1, Q2))


# ------------------------------------------------------------
# Smoothings and resolutions
# ------------------------------------------------------------

def smooth_O(P1: PolygonLike, P2: PolygonLike) -> OrbiConifoldComplex:
    """K1 + K2 layers of unit cubes over the boundary lattice points of P1 and P2.

    Layer h of the column (k, j) is sheared so that the s-face at q_k carries a
    simple point in the first order_k(P1) layers and the t-face at r_j one in the
    last order_j(P2) layers; K_r is the largest vertex order of P_r.
    """
    P1, P2 = as_polygon(P1), as_polygon(P2)
    f1 = _Frames(StarConfiguration(tuple(P1.boundary_points())))
    f2 = _Frames(StarConfiguration(tuple(P2.boundary_points())))
    L1, L2 = f1.m, f2.m
    K = max(P1.vertex_orders) + max(P2.vertex_orders)

    def g(k: int, j: int, h: int) -> str:
        return f"g{k % L1}|{j % L2}|{h}"

    def frame(k: int, j: int, h: int) -> Matrix:
        if h == 0:
            u, q = f1.ahead(k), f1.vec(k)
            return from_columns([(u[0], u[1], 0), (0, 0, 1), (q[0], q[1], 0)])
        if h == K:
            u, r = f2.ahead(j), f2.vec(j)
            return from_columns([(0, 0, 1), (u[0], u[1], 0), (-r[0], -r[1], 0)])
        return identity_matrix(3)

    def chart(k: int, j: int, h: int, behind_s: bool, behind_t: bool) -> Matrix:
        m = frame(k, j, h)
        if behind_s:
            shift = max(f1.orders[k % L1] - h, 0)
            m = mat_mul(m, as_matrix([[1, 0, 0], [0, 1, 0], [shift, 0, 1]]))
        if behind_t:
            shift = max(f2.orders[j % L2] - (K - h), 0)
            m = mat_mul(m, as_matrix([[1, 0, 0], [0, 1, 0], [0, -shift, 1]]))
        return m

    builder = ComplexBuilder(3, name=f"O-{P1.m}x{P2.m}-smoothing")
    builder.metadata.update({'model': 'schoen-O-smoothing', 'P1': P1.to_dict(), 'P2': P2.to_dict(), 'layers': K})
    for k in range(L1):
        q, q_next = f1.vec(k), f1.vec(k + 1)
        for j in range(L2):
            builder.add_cell(f"T1|{k}|t{j}", {
                f"o1|t{j}": (0, 0, 0), f"o1|t{(j + 1) % L2}": (0, 0, 1),
                g(k, j, 0): (q[0], q[1], 0), g(k + 1, j, 0): (q_next[0], q_next[1], 0),
                g(k, j + 1, 0): (q[0], q[1], 1), g(k + 1, j + 1, 0): (q_next[0], q_next[1], 1)})
    for j in range(L2):
        r, r_next = f2.vec(j), f2.vec(j + 1)
        for k in range(L1):
            builder.add_cell(f"T2|{j}|s{k}", {
                f"o2|s{k}": (0, 0, 0), f"o2|s{(k + 1) % L1}": (0, 0, 1),
                g(k, j, K): (r[0], r[1], 0), g(k, j + 1, K): (r_next[0], r_next[1], 0),
                g(k + 1, j, K): (r[0], r[1], 1), g(k + 1, j + 1, K): (r_next[0], r_next[1], 1)})
    for k in range(L1):
        for j in range(L2):
            for h in range(K):
                cube = f"C{k}|{j}|{h}"
                corners = {(a, b, c): g(k + a, j + b, h + c) for a in (0, 1) for b in (0, 1) for c in (0, 1)}
                builder.add_cell(cube, {v: offset for offset, v in corners.items()})
                for (a, b, c), v in corners.items():
                    builder.set_chart(cube, v, chart(k + a, j + b, h + c, a == 1, b == 1))
    for k in range(L1):
        for j in range(L2):
            bottom = {g(k, j, 0), g(k + 1, j, 0), g(k, j + 1, 0), g(k + 1, j + 1, 0)}
            builder.add_locus(bottom, {g(k, j, 0), g(k + 1, j, 0)}, tag="inner-1")
            builder.add_locus(bottom, {g(k, j + 1, 0), g(k + 1, j + 1, 0)}, tag="inner-1")
            top = {g(k, j, K), g(k + 1, j, K), g(k, j + 1, K), g(k + 1, j + 1, K)}
            builder.add_locus(top, {g(k, j, K), g(k, j + 1, K)}, tag="inner-2")
            builder.add_locus(top, {g(k + 1, j, K), g(k + 1, j + 1, K)}, tag="inner-2")
            for h in range(f1.orders[k]):
                face = {g(k, j, h), g(k, j + 1, h), g(k, j, h + 1), g(k, j + 1, h + 1)}
                builder.add_locus(face, {g(k, j, h), g(k, j, h + 1)}, tag="outer-1")
                builder.add_locus(face, {g(k, j + 1, h), g(k, j + 1, h + 1)}, tag="outer-1")
            for h in range(K - f2.orders[j], K):
                face = {g(k, j, h), g(k + 1, j, h), g(k, j, h + 1), g(k + 1, j, h + 1)}
                builder.add_locus(face, {g(k, j, h), g(k, j, h + 1)}, tag="outer-2")
                builder.add_locus(face, {g(k + 1, j, h), g(k + 1, j, h + 1)}, tag="outer-2")
    c = polarize(builder.build())
    logger.info("smoothed O over %d x %d boundary points in %d layers", L1, L2, K)
    return OrbiConifoldComplex(c, "O", (P1, P2), "smoothed", ("smooth",))


def smooth_G_intermediate(Q1: PolygonLike, Q2: PolygonLike) -> OrbiConifoldComplex:
    """G over the refined cone discs with every spoke point separated.

    Every torus rectangle is a unit square holding a negative conifold node, so
    there are |dQ1| * |dQ2| of them.
    """
    Q1, Q2 = as_polygon(Q1), as_polygon(Q2)
    d1, d2 = _disc(Q1, "o1", refined=True), _disc(Q2, "o2", refined=True)
    builder = _solid_tori(d1, d2, f"G-{Q1.m}x{Q2.m}-intermediate")
    builder.metadata.update({'model': 'schoen-G-intermediate', 'Q1': Q1.to_dict(), 'Q2': Q2.to_dict()})
    return OrbiConifoldComplex(builder.build(), "G", (Q1, Q2), "intermediate", ("separate",))


def smooth_G(Q1: PolygonLike, Q2: PolygonLike) -> OrbiConifoldComplex:
    """The intermediate complex with every torus rectangle cut along its diagonal."""
    Q1, Q2 = as_polygon(Q1), as_polygon(Q2)
    d1, d2 = _disc(Q1, "o1", refined=True), _disc(Q2, "o2", refined=True)
    builder = _solid_tori(d1, d2, f"G-{Q1.m}x{Q2.m}-smoothing", triangulate=True)
    builder.metadata.update({'model': 'schoen-G-smoothing', 'Q1': Q1.to_dict(), 'Q2': Q2.to_dict()})
    c = polarize(builder.build())
    logger.info("smoothed G over %d x %d boundary points", d1.size, d2.size)
    return OrbiConifoldComplex(c, "G", (Q1, Q2), "smoothed", ("separate", "smooth"))


def resolve_O(P1: PolygonLike, P2: PolygonLike) -> OrbiConifoldComplex:
    """The Legendre dual of the smoothing of G over the dual polygons."""
    P1, P2 = as_polygon(P1), as_polygon(P2)
    mirror = smooth_G(P1.dual(), P2.dual())
    c = legendre_dual(mirror.base).with_changes(name=f"O-{P1.m}x{P2.m}-resolution")
    return OrbiConifoldComplex(c, "O", (P1, P2), "resolved", ("resolve",))


def resolve_G(Q1: PolygonLike, Q2: PolygonLike) -> OrbiConifoldComplex:
    """The Legendre dual of the smoothing of O over the dual polygons."""
    Q1, Q2 = as_polygon(Q1), as_polygon(Q2)
    mirror = smooth_O(Q1.dual(), Q2.dual())
    c = legendre_dual(mirror.base).with_changes(name=f"G-{Q1.m}x{Q2.m}-resolution")
    return OrbiConifoldComplex(c, "G", (Q1, Q2), "resolved", ("resolve",))


BUILDERS = {"O": build_O, "G": build_G}
SMOOTHINGS = {"O": smooth_O, "G": smooth_G}
RESOLUTIONS = {"O": resolve_O, "G": resolve_G}


def build(P1: PolygonLike, P2: PolygonLike, variant: str, operation: Optional[str] = None
          ) -> OrbiConifoldComplex:
    """Dispatch on variant and on operation, one of None, "smooth" or "resolve"."""
    if variant not in VARIANTS:
        raise BuilderError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    table = {None: BUILDERS, "smooth": SMOOTHINGS, "resolve": RESOLUTIONS}.get(operation)
    if table is None:
        raise BuilderError(f"unknown operation {operation!r}, expected smooth or resolve")
    return table[variant](P1, P2)


# ------------------------------------------------------------
# Pair verification
# ------------------------------------------------------------

def _discriminant_signature(c: TropicalComplex) -> Dict:
    data = discriminant_graph(c).summary()
    data['multiplicities'] = sorted(abs(m) for m in data['multiplicities'])
    data.pop('dimension')
    return data


def indexing_report(P1: PolygonLike, P2: PolygonLike, o: Optional[OrbiConifoldComplex] = None) -> Dict:
    """Circle multiplicities of O next to the two indexings they could follow.

    "stated" assigns the edge lengths of P2 to the first family of circles and those
    of P1 to the second; "elliptic" takes the inner multiplicities of the surfaces
    A' over P1 and P2 in that order.
    """
    P1, P2 = as_polygon(P1), as_polygon(P2)
    o = build_O(P1, P2) if o is None else o
    observed: Dict[str, List[int]] = {"inner-1": [], "inner-2": []}
    for circle in o.circle_components():
        if circle['tag'] in observed:
            observed[circle['tag']].append(circle['multiplicity'])
    observed = {tag: sorted(values) for tag, values in observed.items()}
    stated = {"inner-1": sorted(P2.edge_lengths), "inner-2": sorted(P1.edge_lengths)}
    elliptic = {"inner-1": build_Aprime(P1).inner_multiplicities, "inner-2": build_Aprime(P2).inner_multiplicities}
    return {'observed': observed, 'stated': stated, 'elliptic': elliptic,
            'matches_stated': observed == stated, 'matches_elliptic': observed == elliptic}


@dataclass(frozen=True)
class SchoenPairReport:
    """The sweep record of one ordered polygon pair."""
    P1: Union[int, List[List[int]]]
    P2: Union[int, List[List[int]]]
    valid: bool
    euler_characteristic: int
    closed: bool
    four_valent: int
    expected_four_valent: int
    monodromy_consistent: bool
    points: List[Dict] = field(default_factory=list)
    ordinary: int = 0
    mirror_kl_match: Optional[bool] = None
    legendre_match: Optional[bool] = None
    indexing: Dict = field(default_factory=dict)
    problems: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.valid and self.closed and self.euler_characteristic == 0 and self.monodromy_consistent
                and self.four_valent == self.expected_four_valent and not self.problems
                and self.mirror_kl_match is not False and self.legendre_match is not False)

    def to_dict(self) -> Dict:
        return {'P1': self.P1, 'P2': self.P2, 'ok': self.ok, 'valid': self.valid,
                'euler_characteristic': self.euler_characteristic, 'closed': self.closed,
                'four_valent': self.four_valent, 'expected_four_valent': self.expected_four_valent,
                'monodromy_consistent': self.monodromy_consistent, 'points': self.points,
                'ordinary': self.ordinary, 'mirror_kl_match': self.mirror_kl_match,
                'legendre_match': self.legendre_match, 'indexing': self.indexing, 'problems': self.problems}


def verify_pair(P1: PolygonLike, P2: PolygonLike, mirror: bool = True) -> SchoenPairReport:
    """Build O over the pair and check it; with mirror set, compare it with G over the dual pair."""
    P1, P2 = as_polygon(P1), as_polygon(P2)
    problems: List[str] = []
    o = build_O(P1, P2)
    try:
        graph = discriminant_graph(o.base)
        consistent = True
        four_valent = len(graph.four_valent())
    except MonodromyError as exc:
        problems.append(str(exc))
        consistent, four_valent = False, 0
    points: List[FourValentPoint] = []
    if consistent:
        try:
            points = classify_points(o)
        except BuilderError as exc:
            problems.append(str(exc))
    kl_match = legendre_match = None
    if mirror and consistent:
        g = build_G(P1.dual(), P2.dual())
        try:
            g_points = classify_points(g)
            kl_match = Counter(p.kl for p in points) == Counter(p.kl for p in g_points)
            kl_match = kl_match and all(p.flavor == "generalized" for p in g_points)
        except BuilderError as exc:
            problems.append(str(exc))
            kl_match = False
        legendre_match = _discriminant_signature(legendre_dual(o.base)) == _discriminant_signature(g.base)
    report = SchoenPairReport(
        P1=_label(P1),
        P2=_label(P2),
        valid=validate(o.base).ok,
        euler_characteristic=euler_characteristic(o.base),
        closed=o.base.is_closed(),
        four_valent=four_valent,
        expected_four_valent=P1.m * P2.m,
        monodromy_consistent=consistent,
        points=[p.to_dict() for p in points],
        ordinary=sum(1 for p in points if p.ordinary),
        mirror_kl_match=kl_match,
        legendre_match=legendre_match,
        indexing=indexing_report(P1, P2, o),
        problems=problems,
    )
    logger.info("schoen pair %s / %s: %s", report.P1, report.P2, "ok" if report.ok else "failed")
    return report
