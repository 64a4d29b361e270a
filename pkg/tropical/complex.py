"""Polyhedral complexes with integral affine gluings, vertex fans and discriminant loci.

A complex is a set of maximal lattice polytopes, each in its own coordinates, whose
vertices carry complex-wide ids. Two cells meet along a common face exactly when the
face has the same vertex ids in both. The affine structure is given at each vertex v
by one chart per incident cell: a unimodular matrix taking the cell's directions at v
to the coordinates of the fan at v.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from geometry.lattice import (
    Fan, LatticeError, LatticePolytope, LatticeVector, Matrix, Number, UnimodularMap, affine_length,
    as_vector, cross3, det2, dot, gcd_all, identity_matrix, mat_inverse, mat_mul, mat_vec,
    primitive, rank, solve_rational,
)
from tropical.monodromy import ChamberPath, MonodromyError

logger = logging.getLogger(__name__)

Face = FrozenSet[str]

LOCUS_TYPES = ("A-edge",)


def face_key(face: Iterable[str]) -> Tuple[str, ...]:
    return tuple(sorted(face))


def face_label(face: Iterable[str]) -> str:
    return "{" + ",".join(face_key(face)) + "}"


class Cell:
    """A maximal cell: a full-dimensional lattice polytope whose vertices carry ids."""

    def __init__(self, name: str, coords: Mapping[str, Sequence[int]]):
        if not coords:
            raise LatticeError(f"cell {name} has no vertices")
        self.name = str(name)
        self.coords: Dict[str, LatticeVector] = {
            str(v): as_vector(p) for v, p in sorted(coords.items(), key=lambda item: str(item[0]))}
        by_point: Dict[LatticeVector, str] = {}
        for v, p in self.coords.items():
            if p in by_point:
                raise LatticeError(f"cell {name}: vertices {by_point[p]} and {v} coincide")
            by_point[p] = v
        self.polytope = LatticePolytope.from_points(self.coords.values())
        if len(self.polytope.vertices) != len(self.coords):
            raise LatticeError(f"cell {name}: some listed points are not vertices")
        self.dim = self.polytope.dim
        self._ids = tuple(by_point[p] for p in self.polytope.vertices)

    def __repr__(self):
        return f"Cell({self.name!r}, {len(self.coords)} vertices)"

    def __eq__(self, other):
        return isinstance(other, Cell) and self.name == other.name and self.coords == other.coords

    def __hash__(self):
        return hash((self.name, tuple(self.coords.items())))

    @property
    def vertices(self) -> Tuple[str, ...]:
        """Vertex ids in polytope order (counterclockwise for polygons)."""
        return self._ids

    @cached_property
    def faces(self) -> Dict[int, FrozenSet[Face]]:
        return {d: frozenset(frozenset(self._ids[i] for i in face) for face in faces)
                for d, faces in self.polytope.faces.items()}

    @property
    def facets(self) -> FrozenSet[Face]:
        return self.faces[self.dim - 1]

    @property
    def edges(self) -> FrozenSet[Face]:
        return self.faces[1]

    def face_dim(self, face: Iterable[str]) -> Optional[int]:
        face = frozenset(face)
        for d, faces in self.faces.items():
            if face in faces:
                return d
        return None

    def has_face(self, face: Iterable[str]) -> bool:
        return self.face_dim(face) is not None

    def neighbours(self, v: str) -> List[str]:
        return sorted(w for e in self.edges if v in e for w in e if w != v)

    def edge_directions(self, v: str) -> Dict[str, LatticeVector]:
        """Primitive local directions of the edges leaving v, keyed by the far vertex."""
        return {w: primitive(self.coords[w] - self.coords[v]) for w in self.neighbours(v)}

    def barycenter(self, face: Iterable[str]) -> Tuple[Fraction, ...]:
        face = list(face)
        return tuple(Fraction(sum(self.coords[v][t] for v in face), len(face)) for t in range(self.dim))

    @cached_property
    def outward_normals(self) -> Dict[Face, Tuple[LatticeVector, Number]]:
        """Primitive outward normal and offset of every facet, keyed by its vertex ids."""
        return {frozenset(self._ids[i] for i in f.vertex_indices): (LatticeVector(f.normal), f.offset)
                for f in self.polytope.facets}

    def support(self, covector: Sequence[int]) -> int:
        return max(dot(covector, p) for p in self.coords.values())

    def edge_length(self, edge: Iterable[str]) -> int:
        a, b = face_key(edge)
        return affine_length(self.coords[a], self.coords[b])

    def lattice_point_count(self, strict: bool = False) -> int:
        return len(self.polytope.lattice_points(strict=strict))

    def to_dict(self) -> Dict:
        return {'name': self.name, 'vertices': {v: list(p) for v, p in self.coords.items()}}


@dataclass(frozen=True)
class VertexFan:
    """Charts of the incident cells at one vertex and an optional PL function on the fan.

    pl maps fan rays to integer values; keys beyond the rays of the fan are supporting
    constraints read by the Legendre transform.
    """
    vertex: str
    charts: Mapping[str, Matrix]
    pl: Optional[Mapping[LatticeVector, int]] = None

    def to_dict(self) -> Dict:
        data = {'vertex': self.vertex,
                'charts': {cell: [list(row) for row in m] for cell, m in sorted(self.charts.items())}}
        if self.pl is not None:
            data['pl'] = [[list(ray), value] for ray, value in sorted(self.pl.items())]
        return data


@dataclass(frozen=True)
class Gluing:
    """Identification of cell_a with cell_b near vertex, across their common facet."""
    cell_a: str
    cell_b: str
    facet: Face
    vertex: str
    map: UnimodularMap

    @property
    def key(self) -> Tuple[str, str, Tuple[str, ...], str]:
        return self.cell_a, self.cell_b, face_key(self.facet), self.vertex

    def reverse(self) -> 'Gluing':
        return Gluing(self.cell_b, self.cell_a, self.facet, self.vertex, self.map.inverse())

    def to_dict(self) -> Dict:
        return {'cells': [self.cell_a, self.cell_b], 'facet': list(face_key(self.facet)),
                'vertex': self.vertex, 'linear': [list(row) for row in self.map.linear],
                'translation': list(self.map.translation)}


@dataclass(frozen=True)
class DiscriminantLocus:
    """A singular piece of the affine structure.

    In dimension two it is the midpoint of the edge face. In dimension three it is
    the segment from the barycenter of the 2-face face to the midpoint of its edge
    edge. cell is the cell in which the loop starts.
    """
    cell: str
    face: Face
    multiplicity: int
    loop: ChamberPath
    edge: Optional[Face] = None
    local_type: str = "A-edge"
    tag: str = ""

    def to_dict(self) -> Dict:
        data = {'cell': self.cell, 'face': list(face_key(self.face)), 'multiplicity': self.multiplicity,
                'loop': self.loop.to_dict(), 'local_type': self.local_type, 'tag': self.tag}
        if self.edge is not None:
            data['edge'] = list(face_key(self.edge))
        return data


@dataclass(frozen=True, eq=False)
class TropicalComplex:
    dim: int
    cells: Tuple[Cell, ...]
    fans: Tuple[VertexFan, ...] = ()
    gluings: Tuple[Gluing, ...] = ()
    loci: Tuple[DiscriminantLocus, ...] = ()
    name: str = ""
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __eq__(self, other):
        return isinstance(other, TropicalComplex) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.dim, tuple(c.name for c in self.cells)))

    @cached_property
    def cell_map(self) -> Dict[str, Cell]:
        return {c.name: c for c in self.cells}

    @cached_property
    def fan_map(self) -> Dict[str, VertexFan]:
        return {f.vertex: f for f in self.fans}

    @cached_property
    def vertices(self) -> Tuple[str, ...]:
        return tuple(sorted({v for c in self.cells for v in c.coords}))

    @cached_property
    def vertex_cells(self) -> Dict[str, Tuple[str, ...]]:
        found: Dict[str, List[str]] = {}
        for c in self.cells:
            for v in c.coords:
                found.setdefault(v, []).append(c.name)
        return {v: tuple(sorted(names)) for v, names in found.items()}

    @cached_property
    def face_cells(self) -> Dict[Face, Tuple[str, ...]]:
        """Every proper face, keyed by vertex ids, with the cells containing it."""
        found: Dict[Face, List[str]] = {}
        for c in self.cells:
            for d, faces in c.faces.items():
                if d == c.dim:
                    continue
                for face in faces:
                    found.setdefault(face, []).append(c.name)
        return {f: tuple(sorted(names)) for f, names in found.items()}

    @cached_property
    def facet_cells(self) -> Dict[Face, Tuple[str, ...]]:
        found: Dict[Face, List[str]] = {}
        for c in self.cells:
            for f in c.facets:
                found.setdefault(f, []).append(c.name)
        return {f: tuple(sorted(names)) for f, names in found.items()}

    @cached_property
    def interior_facets(self) -> Tuple[Face, ...]:
        return tuple(sorted((f for f, cs in self.facet_cells.items() if len(cs) == 2), key=face_key))

    @cached_property
    def boundary_facets(self) -> Tuple[Face, ...]:
        return tuple(sorted((f for f, cs in self.facet_cells.items() if len(cs) == 1), key=face_key))

    @cached_property
    def boundary_vertices(self) -> FrozenSet[str]:
        return frozenset(v for f in self.boundary_facets for v in f)

    def is_closed(self) -> bool:
        return not self.boundary_facets and all(len(cs) == 2 for cs in self.facet_cells.values())

    def chart(self, cell: str, v: str) -> Matrix:
        fan = self.fan_map.get(v)
        if fan is None or cell not in fan.charts:
            raise MonodromyError(f"no chart for cell {cell} at vertex {v}")
        return fan.charts[cell]

    def cone_rays(self, v: str, cell: str) -> Dict[str, LatticeVector]:
        """Fan-coordinate rays of cell's cone at v, keyed by the far vertex of each edge."""
        chart = self.chart(cell, v)
        return {w: LatticeVector(mat_vec(chart, d)) for w, d in self.cell_map[cell].edge_directions(v).items()}

    def used_rays(self, v: str) -> Tuple[LatticeVector, ...]:
        rays = {r for cell in self.vertex_cells.get(v, ()) for r in self.cone_rays(v, cell).values()}
        return tuple(sorted(rays))

    def fan(self, v: str) -> Fan:
        rays = self.used_rays(v)
        index = {r: i for i, r in enumerate(rays)}
        cones = tuple(tuple(sorted(index[r] for r in self.cone_rays(v, cell).values()))
                      for cell in self.vertex_cells[v])
        return Fan(rays, cones)

    def cells_with_face(self, face: Iterable[str]) -> Tuple[str, ...]:
        face = frozenset(face)
        if face in self.face_cells:
            return self.face_cells[face]
        return tuple(c.name for c in self.cells if c.has_face(face))

    def with_changes(self, **changes) -> 'TropicalComplex':
        return replace(self, **changes)

    def to_dict(self) -> Dict:
        return {
            'dim': self.dim,
            'name': self.name,
            'metadata': dict(sorted(self.metadata.items())),
            'cells': [c.to_dict() for c in sorted(self.cells, key=lambda c: c.name)],
            'fans': [f.to_dict() for f in sorted(self.fans, key=lambda f: f.vertex)],
            'gluings': [g.to_dict() for g in sorted(self.gluings, key=lambda g: g.key)],
            'loci': [l.to_dict() for l in self.loci],
        }


# ------------------------------------------------------------
# Gluings from charts
# ------------------------------------------------------------

def derive_gluings(cells: Mapping[str, Cell], charts: Mapping[Tuple[str, str], Matrix]
                   ) -> Tuple[Tuple[Gluing, ...], List[str]]:
    """Gluings implied by the vertex charts, one per interior facet and facet vertex.

    Returns the gluings and a list of problems: facets shared by more than two cells,
    missing charts, and facets whose vertices the implied map does not match.
    """
    owners: Dict[Face, List[str]] = {}
    for cell in cells.values():
        for f in cell.facets:
            owners.setdefault(f, []).append(cell.name)
    gluings: List[Gluing] = []
    problems: List[str] = []
    for facet in sorted(owners, key=face_key):
        names = sorted(owners[facet])
        if len(names) > 2:
            problems.append(f"facet {face_label(facet)} is shared by {len(names)} cells")
            continue
        if len(names) < 2:
            continue
        a, b = (cells[n] for n in names)
        for v in face_key(facet):
            if (a.name, v) not in charts or (b.name, v) not in charts:
                problems.append(f"missing chart at {v} for the facet {face_label(facet)}")
                continue
            try:
                linear = mat_mul(mat_inverse(charts[(b.name, v)]), charts[(a.name, v)])
            except LatticeError as exc:
                problems.append(f"chart at {v}: {exc}")
                continue
            translation = b.coords[v] - LatticeVector(mat_vec(linear, a.coords[v]))
            gluing = Gluing(a.name, b.name, facet, v, UnimodularMap(linear, translation))
            bad = [w for w in facet if gluing.map.apply(a.coords[w]) != b.coords[w]]
            if bad:
                problems.append(f"gluing {a.name}->{b.name} at {v} misplaces facet vertices {sorted(bad)}")
            gluings.append(gluing)
    return tuple(gluings), problems


# ------------------------------------------------------------
# Loops around loci
# ------------------------------------------------------------

def _det3(a: Sequence[Number], b: Sequence[Number], c: Sequence[Number]) -> Number:
    return dot(a, cross3(b, c))


def _minus(a: Sequence[Number], b: Sequence[Number]) -> Tuple[Number, ...]:
    return tuple(x - y for x, y in zip(a, b))


def oriented_loop(cells: Mapping[str, Cell], face: Iterable[str], edge: Optional[Iterable[str]] = None
                  ) -> ChamberPath:
    """The positively oriented two-cell loop around a locus.

    In dimension two the locus is the midpoint of face = {p, q}; the loop starts in
    the cell lying to the left of p→q and crosses at p, then at q. In dimension three
    the locus runs from the barycenter of the 2-face to the midpoint of edge ⊂ face,
    and the loop turns positively about that direction.

    Raises:
        MonodromyError: if the face is not shared by exactly two cells.
    """
    face = frozenset(face)
    owners = sorted(name for name, cell in cells.items() if cell.has_face(face))
    if len(owners) != 2:
        raise MonodromyError(f"face {face_label(face)} lies in {len(owners)} cells, not two")
    first, second = owners
    cell = cells[first]
    if cell.face_dim(face) != cell.dim - 1:
        raise MonodromyError(f"face {face_label(face)} is not a facet of {first}")
    outside = next(v for v in cell.vertices if v not in face)
    if cell.dim == 2:
        p, q = face_key(face)
        middle = cell.barycenter(face)
        side = det2(_minus(cell.coords[outside], middle), _minus(cell.coords[p], middle))
        if side < 0:
            p, q = q, p
        return ChamberPath((first, second), (p, q), p)
    if edge is None:
        raise MonodromyError(f"a three-dimensional locus in {face_label(face)} needs an edge")
    edge = frozenset(edge)
    if not edge <= face or len(edge) != 2:
        raise MonodromyError(f"{face_label(edge)} is not an edge of {face_label(face)}")
    p, q = face_key(edge)
    center = cell.barycenter(face)
    direction = _minus(cell.barycenter(edge), center)
    side = _det3(direction, _minus(cell.coords[outside], center), _minus(cell.coords[p], center))
    if side < 0:
        p, q = q, p
    return ChamberPath((first, second), (p, q), p)


# ------------------------------------------------------------
# Multivalued PL functions
# ------------------------------------------------------------

@dataclass(frozen=True)
class PLAnalysis:
    """Gradients of φ on the cones at one vertex and its kinks across interior walls."""
    vertex: str
    gradients: Dict[str, Tuple[Fraction, ...]]
    kinks: Dict[Face, int]
    problems: Tuple[str, ...] = ()


def _independent(rays: Sequence[LatticeVector], dim: int) -> List[LatticeVector]:
    chosen: List[LatticeVector] = []
    for r in rays:
        if rank([tuple(x) for x in chosen + [r]]) > len(chosen):
            chosen.append(r)
        if len(chosen) == dim:
            break
    return chosen


def wall_normal(c: TropicalComplex, v: str, facet: Face, cell: str) -> LatticeVector:
    """Primitive covector in fan coordinates at v vanishing on the wall facet, positive on cell."""
    rays = c.cone_rays(v, cell)
    wall = _independent([rays[w] for w in sorted(rays) if w in facet], c.dim - 1)
    if len(wall) != c.dim - 1:
        raise LatticeError(f"wall {face_label(facet)} at {v} is degenerate")
    normal = LatticeVector((-wall[0][1], wall[0][0])) if c.dim == 2 else LatticeVector(cross3(*wall))
    normal = primitive(normal)
    inside = next(rays[w] for w in sorted(rays) if w not in facet)
    return normal if dot(normal, inside) > 0 else -normal


def analyse_pl(c: TropicalComplex, v: str) -> Optional[PLAnalysis]:
    """Gradients and kinks of φ at v; None when v carries no PL function."""
    fan = c.fan_map.get(v)
    if fan is None or fan.pl is None:
        return None
    problems: List[str] = []
    gradients: Dict[str, Tuple[Fraction, ...]] = {}
    for name in c.vertex_cells.get(v, ()):
        rays = list(c.cone_rays(v, name).values())
        missing = [r for r in rays if r not in fan.pl]
        if missing:
            problems.append(f"cell {name}: no value on ray {missing[0]}")
            continue
        basis = _independent(rays, c.dim)
        if len(basis) < c.dim:
            problems.append(f"cell {name}: cone is not full-dimensional")
            continue
        gradient = solve_rational([tuple(r) for r in basis], [fan.pl[r] for r in basis])
        if any(dot(gradient, r) != fan.pl[r] for r in rays):
            problems.append(f"cell {name}: values are not linear on its cone")
            continue
        if any(x.denominator != 1 for x in gradient):
            problems.append(f"cell {name}: gradient {tuple(str(x) for x in gradient)} is not integral")
        gradients[name] = gradient
    kinks: Dict[Face, int] = {}
    for facet, owners in c.facet_cells.items():
        if v not in facet or len(owners) != 2:
            continue
        a, b = owners
        if a not in gradients or b not in gradients:
            continue
        jump = tuple(x - y for x, y in zip(gradients[a], gradients[b]))
        if not any(jump):
            kinks[facet] = 0
            continue
        if any(x.denominator != 1 for x in jump):
            continue
        normal = wall_normal(c, v, facet, a)
        magnitude = gcd_all(int(x) for x in jump)
        if tuple(int(x) for x in jump) == tuple(magnitude * x for x in normal):
            kinks[facet] = magnitude
        elif tuple(int(x) for x in jump) == tuple(-magnitude * x for x in normal):
            kinks[facet] = -magnitude
        else:
            problems.append(f"gradient jump across {face_label(facet)} is not normal to the wall")
    used = set(c.used_rays(v))
    for ray, value in fan.pl.items():
        if ray in used:
            continue
        if any(dot(g, ray) > value for g in gradients.values()):
            problems.append(f"supporting value {value} on {ray} is violated")
    return PLAnalysis(v, gradients, kinks, tuple(problems))


def kink_table(c: TropicalComplex) -> Dict[str, Dict[Face, int]]:
    table = {}
    for v in c.vertices:
        analysis = analyse_pl(c, v)
        if analysis is not None:
            table[v] = analysis.kinks
    return table


# ------------------------------------------------------------
# Combinatorics
# ------------------------------------------------------------

def euler_characteristic(c: TropicalComplex) -> int:
    """Alternating count of the faces of the identified complex.

    Proper faces are identified by their vertex ids; maximal cells are counted by name.
    """
    total = len(c.cells) * (-1) ** c.dim if c.cells else 0
    seen = set()
    for cell in c.cells:
        for d, faces in cell.faces.items():
            if d == cell.dim:
                continue
            for face in faces:
                if face not in seen:
                    seen.add(face)
                    total += (-1) ** d
    return total


def default_charts(cells: Iterable[Cell]) -> Dict[Tuple[str, str], Matrix]:
    charts = {}
    for cell in cells:
        for v in cell.coords:
            charts[(cell.name, v)] = identity_matrix(cell.dim)
    return charts


def locus_endpoints(c: TropicalComplex, locus: DiscriminantLocus) -> Tuple[Tuple[Fraction, ...], ...]:
    """Carrier of the locus in the coordinates of its starting cell."""
    cell = c.cell_map[locus.cell]
    if locus.edge is None:
        return (cell.barycenter(locus.face),)
    return cell.barycenter(locus.face), cell.barycenter(locus.edge)

