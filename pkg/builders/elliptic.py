"""Affine rational elliptic surfaces over a star configuration.

𝒜 is made of the triangles {0, v_i, v_{i+1}} and parallelograms Q_i with corners
0, v_i, v_{i-1}, v_{i-1} - v_i; 𝒜′ replaces the triangles by the polygon P itself.
Each surface is a disc whose boundary is the chain of parallelogram sides
{v_{i-1}, v_i}. Singular points are tagged "inner" or "outer".

Vertex ids: "o" for the origin of 𝒜, "v{i}" for the class of v_i and "w{i}" for the
boundary corner shared by Q_i and Q_{i+1}.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from geometry.lattice import LatticeVector, Matrix, as_matrix, from_columns, mat_inverse, mat_mul, primitive
from geometry.polygons import PolygonError, ReflexivePolygon, StarConfiguration
from tropical.complex import DiscriminantLocus, TropicalComplex
from tropical.constructions import interior
from tropical.isomorphism import isomorphic
from tropical.legendre import legendre_dual
from tropical.polarization import polarize
from tropical.refinement import separate_points
from tropical.validation import ComplexBuilder
from builders.local_models import BuilderError, set_gradients

logger = logging.getLogger(__name__)

VARIANTS = ("A", "Aprime")
KINDS = ("inner", "outer")

_FLIP = as_matrix([[-1, 0], [0, 1]])

StarLike = Union[StarConfiguration, ReflexivePolygon, Iterable[Sequence[int]]]


@dataclass(frozen=True)
class EllipticSurfaceComplex:
    """A built, smoothed or resolved elliptic surface together with the star it came from.

    stage is "built", or "smoothed-<kind>" / "resolved-<kind>" after an operation.
    """
    base: TropicalComplex
    variant: str
    star: StarConfiguration
    stage: str = "built"
    history: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def inner_points(self) -> List[DiscriminantLocus]:
        return [locus for locus in self.base.loci if locus.tag == "inner"]

    @property
    def outer_points(self) -> List[DiscriminantLocus]:
        return [locus for locus in self.base.loci if locus.tag == "outer"]

    @property
    def inner_multiplicities(self) -> List[int]:
        return sorted(locus.multiplicity for locus in self.inner_points)

    @property
    def outer_multiplicities(self) -> List[int]:
        return sorted(locus.multiplicity for locus in self.outer_points)

    @property
    def total_multiplicity(self) -> int:
        """Signed count of singular points; 12 at every stage."""
        return sum(locus.multiplicity for locus in self.base.loci)

    @property
    def boundary_length(self) -> int:
        """Affine length of the boundary circle."""
        total = 0
        for facet in self.base.boundary_facets:
            owner = self.base.facet_cells[facet][0]
            total += self.base.cell_map[owner].edge_length(facet)
        return total

    def ak_singularities(self) -> List[Dict]:
        """A_k groups of the symplectic surface: one per non-standard corner or triangle, k = area - 1.

        Derived from the star only; corners of negative order are reported with their
        signed order and no k.
        """
        found = []
        for i, order in enumerate(self.star.orders):
            if order > 1:
                found.append({'kind': 'corner', 'index': i, 'area': order, 'k': order - 1})
            elif order < 0:
                found.append({'kind': 'corner', 'index': i, 'area': order, 'k': None})
        for i, length in enumerate(self.star.edge_lengths):
            if length > 1:
                found.append({'kind': 'simplex', 'index': i, 'area': length, 'k': length - 1})
        return found

    def summary(self) -> Dict:
        return {
            'name': self.base.name,
            'variant': self.variant,
            'stage': self.stage,
            'star': [list(v) for v in self.star.vectors],
            'inner': self.inner_multiplicities,
            'outer': self.outer_multiplicities,
            'total': self.total_multiplicity,
            'boundary_length': self.boundary_length,
            'history': list(self.history),
        }


def as_star(s: StarLike) -> StarConfiguration:
    if isinstance(s, StarConfiguration):
        return s
    if isinstance(s, ReflexivePolygon):
        return s.star()
    try:
        return StarConfiguration.from_vectors(s)
    except PolygonError as exc:
        raise BuilderError(f"invalid star configuration: {exc}") from exc


def dual_star(s: StarLike) -> StarConfiguration:
    """The star of the dual polygon; only convex stars have one."""
    star = as_star(s)
    if not star.is_convex():
        raise BuilderError("only a convex star configuration has a dual polygon")
    try:
        return ReflexivePolygon(star.vectors).dual().star()
    except PolygonError as exc:
        raise BuilderError(f"star is not reflexive: {exc}") from exc


class _Frames:
    """Primitive edge tangents at each v_i and the column matrices built from them."""

    def __init__(self, star: StarConfiguration):
        self.v = star.vectors
        self.m = len(star.vectors)
        self.orders = star.orders
        self.lengths = star.edge_lengths

    def vec(self, i: int) -> LatticeVector:
        return self.v[i % self.m]

    def back(self, i: int) -> LatticeVector:
        """Primitive direction from v_i to v_{i-1}."""
        return primitive(self.vec(i - 1) - self.vec(i))

    def ahead(self, i: int) -> LatticeVector:
        """Primitive direction from v_i to v_{i+1}."""
        return primitive(self.vec(i + 1) - self.vec(i))

    def back_chart(self, i: int) -> Matrix:
        """Sends the back tangent at v_i to e_1 and v_i to e_2."""
        return mat_inverse(from_columns([self.back(i), self.vec(i)]))

    def ahead_chart(self, i: int, j: int) -> Matrix:
        """Sends the ahead tangent at v_i to -e_1 and v_j to e_2."""
        return mat_mul(_FLIP, mat_inverse(from_columns([self.ahead(i), self.vec(j)])))

    def transfer(self, i: int) -> Matrix:
        """Fixes the ahead tangent at v_i and sends v_{i+1} to v_i."""
        return mat_mul(from_columns([self.ahead(i), self.vec(i)]),
                       mat_inverse(from_columns([self.ahead(i), self.vec(i + 1)])))


def _add_parallelograms(builder: ComplexBuilder, f: _Frames):
    for i in range(f.m):
        v, previous = f.vec(i), f.vec(i - 1)
        builder.add_cell(f"Q{i}", {
            f"v{i}": (0, 0),
            f"w{i}": tuple(v),
            f"w{(i - 1) % f.m}": tuple(previous),
            f"v{(i - 1) % f.m}": tuple(previous - v),
        })


def _boundary_charts(builder: ComplexBuilder, f: _Frames):
    for i in range(f.m):
        after = (i + 1) % f.m
        builder.set_chart(f"Q{i}", f"w{i}", f.back_chart(i))
        builder.set_chart(f"Q{after}", f"w{i}", f.ahead_chart(i, i + 1))


def _boundary_pl(builder: ComplexBuilder, f: _Frames):
    for i in range(f.m):
        order = f.orders[i]
        set_gradients(builder, f"w{i}", {f"Q{i}": (order, 0), f"Q{(i + 1) % f.m}": (0, 0)})


def build_A(s: StarLike) -> EllipticSurfaceComplex:
    """The surface 𝒜: inner points on {0, v_i} of multiplicity the corner order, outer
    points on {v_i, v_{i+1}} of multiplicity the edge length.

    φ is attached when the star is convex.

    Raises:
        BuilderError: if s is not a valid star configuration.
    """
    star = as_star(s)
    f = _Frames(star)
    builder = ComplexBuilder(2, name=f"A-{f.m}")
    builder.metadata.update({'model': 'elliptic-A', 'star': [list(v) for v in star.vectors]})
    for i in range(f.m):
        builder.add_cell(f"T{i}", {"o": (0, 0), f"v{i}": tuple(f.vec(i)), f"v{(i + 1) % f.m}": tuple(f.vec(i + 1))})
    _add_parallelograms(builder, f)
    for i in range(f.m):
        before, after = (i - 1) % f.m, (i + 1) % f.m
        builder.set_chart(f"T{before}", f"v{i}", f.back_chart(i))
        builder.set_chart(f"Q{i}", f"v{i}", f.back_chart(i))
        builder.set_chart(f"T{i}", f"v{i}", f.ahead_chart(i, i))
        builder.set_chart(f"Q{after}", f"v{i}", f.ahead_chart(i, i + 1))
    _boundary_charts(builder, f)
    for i in range(f.m):
        if f.orders[i]:
            builder.add_locus({"o", f"v{i}"}, tag="inner")
        builder.add_locus({f"v{i}", f"v{(i + 1) % f.m}"}, tag="outer")
    if star.is_convex():
        builder.set_pl("o", {v: 1 for v in f.v})
        for i in range(f.m):
            order = f.orders[i]
            set_gradients(builder, f"v{i}", {
                f"Q{i}": (order, 1), f"Q{(i + 1) % f.m}": (0, 1),
                f"T{(i - 1) % f.m}": (order, 0), f"T{i}": (0, 0)})
        _boundary_pl(builder, f)
    c = builder.build()
    logger.debug("built %s from a %d-vector star", c.name, f.m)
    return EllipticSurfaceComplex(c, "A", star)


def build_Aprime(s: StarLike) -> EllipticSurfaceComplex:
    """The surface 𝒜′: inner points on the edges of P of multiplicity the edge length,
    outer points on {v_i, w_i} of multiplicity the corner order.

    A non-convex star keeps the star triangles in place of P, with trivial gluings
    across the spokes.

    Raises:
        BuilderError: if s is not a valid star configuration.
    """
    star = as_star(s)
    f = _Frames(star)
    convex = star.is_convex()
    builder = ComplexBuilder(2, name=f"Aprime-{f.m}")
    builder.metadata.update({'model': 'elliptic-Aprime', 'star': [list(v) for v in star.vectors]})
    if convex:
        builder.add_cell("P", {f"v{i}": tuple(v) for i, v in enumerate(f.v)})
    else:
        for i in range(f.m):
            builder.add_cell(f"T{i}", {"o": (0, 0), f"v{i}": tuple(f.vec(i)),
                                       f"v{(i + 1) % f.m}": tuple(f.vec(i + 1))})
    _add_parallelograms(builder, f)
    for i in range(f.m):
        builder.set_chart(f"Q{(i + 1) % f.m}", f"v{i}", f.transfer(i))
    _boundary_charts(builder, f)
    for i in range(f.m):
        builder.add_locus({f"v{i}", f"v{(i + 1) % f.m}"}, tag="inner")
        if f.orders[i]:
            builder.add_locus({f"v{i}", f"w{i}"}, tag="outer")
    if convex:
        for i in range(f.m):
            builder.set_pl(f"v{i}", {f.back(i): 0, f.ahead(i): 0, f.vec(i): 1})
        _boundary_pl(builder, f)
    c = builder.build()
    logger.debug("built %s from a %d-vector star", c.name, f.m)
    return EllipticSurfaceComplex(c, "Aprime", star)


BUILDERS = {"A": build_A, "Aprime": build_Aprime}


def build(s: StarLike, variant: str) -> EllipticSurfaceComplex:
    if variant not in BUILDERS:
        raise BuilderError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    return BUILDERS[variant](s)


def _check_kind(kind: str):
    if kind not in KINDS:
        raise BuilderError(f"unknown kind of singular point {kind!r}, expected one of {KINDS}")


def _targets(e: EllipticSurfaceComplex, kind: str, indices: Optional[Iterable[int]]):
    points = e.inner_points if kind == "inner" else e.outer_points
    if indices is None:
        return [locus.face for locus in points]
    indices = list(indices)
    bad = [i for i in indices if not 0 <= i < len(points)]
    if bad:
        raise BuilderError(f"no {kind} singular point with index {bad[0]} (there are {len(points)})")
    return [points[i].face for i in indices]


def smooth(e: EllipticSurfaceComplex, kind: str, indices: Optional[Iterable[int]] = None
           ) -> EllipticSurfaceComplex:
    """Separate the chosen points of one kind into simple points on their invariant lines.

    indices picks points from inner_points or outer_points; all of them by default.

    Raises:
        BuilderError: for a non-convex star or an unknown kind or index.
    """
    _check_kind(kind)
    if not e.star.is_convex():
        raise BuilderError("smoothing is only defined for convex stars")
    base = polarize(separate_points(e.base, _targets(e, kind, indices)))
    base = base.with_changes(name=f"{e.base.name}-smooth-{kind}")
    logger.info("smoothed the %s points of %s", kind, e.base.name)
    return EllipticSurfaceComplex(base, e.variant, e.star, f"smoothed-{kind}", e.history + (f"smooth-{kind}",))


def resolve(e: EllipticSurfaceComplex, kind: str, indices: Optional[Iterable[int]] = None
            ) -> EllipticSurfaceComplex:
    """Resolve the chosen points of one kind: the Legendre dual of the same smoothing on the mirror.

    The mirror of 𝒜 over P is 𝒜′ over the dual polygon and vice versa; inner points
    stay inner. The result carries k simple points on k parallel invariant lines for
    every point of multiplicity k.

    Raises:
        BuilderError: for a non-convex star or an unknown kind or index.
    """
    _check_kind(kind)
    if e.stage != "built":
        raise BuilderError(f"resolution starts from a built surface, not a {e.stage} one")
    mirror_variant = "Aprime" if e.variant == "A" else "A"
    mirror = build(dual_star(e.star), mirror_variant)
    smoothed = smooth(mirror, kind, indices)
    base = legendre_dual(smoothed.base)
    base = base.with_changes(name=f"{e.base.name}-resolve-{kind}")
    logger.info("resolved the %s points of %s", kind, e.base.name)
    return EllipticSurfaceComplex(base, e.variant, e.star, f"resolved-{kind}", e.history + (f"resolve-{kind}",))


def smooth_inner(e: EllipticSurfaceComplex, indices: Optional[Iterable[int]] = None) -> EllipticSurfaceComplex:
    return smooth(e, "inner", indices)


def smooth_outer(e: EllipticSurfaceComplex, indices: Optional[Iterable[int]] = None) -> EllipticSurfaceComplex:
    return smooth(e, "outer", indices)


def resolve_inner(e: EllipticSurfaceComplex, indices: Optional[Iterable[int]] = None) -> EllipticSurfaceComplex:
    return resolve(e, "inner", indices)


def resolve_outer(e: EllipticSurfaceComplex, indices: Optional[Iterable[int]] = None) -> EllipticSurfaceComplex:
    return resolve(e, "outer", indices)


# ------------------------------------------------------------
# Mirror pairs
# ------------------------------------------------------------

@dataclass(frozen=True)
class MirrorPairReport:
    """Outcome of comparing 𝒜 over P with 𝒜′ over a partner polygon."""
    polygon: List[List[int]]
    partner: List[List[int]]
    legendre_match: bool
    inner_match: bool
    outer_match: bool
    details: Dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.legendre_match and self.inner_match and self.outer_match

    def to_dict(self) -> Dict:
        return {'polygon': self.polygon, 'partner': self.partner, 'ok': self.ok,
                'legendre_match': self.legendre_match, 'inner_match': self.inner_match,
                'outer_match': self.outer_match, 'details': self.details}


def verify_mirror_pair(P: ReflexivePolygon, partner: Optional[ReflexivePolygon] = None) -> MirrorPairReport:
    """Check that the interior of 𝒜 over P is Legendre dual to the interior of 𝒜′ over partner.

    partner defaults to the dual polygon; passing P itself is the self-duality test.
    Boundary vertices carry no φ on either side, so the comparison is made between
    interiors.
    """
    partner = P.dual() if partner is None else partner
    a = build_A(P)
    aprime = build_Aprime(partner)
    dual = interior(legendre_dual(interior(a.base)))
    legendre_match = isomorphic(dual, interior(aprime.base))
    report = MirrorPairReport(
        polygon=[list(v) for v in P.vertices],
        partner=[list(v) for v in partner.vertices],
        legendre_match=legendre_match,
        inner_match=a.inner_multiplicities == aprime.inner_multiplicities,
        outer_match=a.outer_multiplicities == aprime.outer_multiplicities,
        details={'A': a.summary(), 'Aprime': aprime.summary()},
    )
    logger.info("mirror pair %s / %s: %s", report.polygon, report.partner, "ok" if report.ok else "mismatch")
    return report
