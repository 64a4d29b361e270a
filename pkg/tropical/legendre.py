"""The discrete Legendre transform of a polarized complex.

Every vertex v carrying φ becomes a maximal cell: its Newton polytope
{n : n·r ≤ φ_v(r) for all keys r}, closed off by the zonotope of the recession
directions when v is a boundary vertex. The vertices of that cell are the gradients
of φ_v (named after their cells), gradients pushed along recession directions
("caps", named after the cell and the pushed covectors) and remaining corners.
Every cell σ becomes a vertex whose fan charts are the transposes of σ's charts, and
whose PL function is the support function of σ.
"""

import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from geometry.lattice import (
    LatticeError, LatticeVector, Matrix, convex_hull_vertices, cross3, dot, identity_matrix, mat_vec,
    primitive, rank, solve_rational, transpose,
)
from tropical.complex import Cell, DiscriminantLocus, TropicalComplex, analyse_pl, face_key
from tropical.validation import ComplexBuilder

logger = logging.getLogger(__name__)


class LegendreError(ValueError):
    """Raised when φ is missing, not strictly convex, or has a degenerate Newton polytope."""


class NewtonCell:
    """The dual cell of one vertex, with labelled vertices and their charts."""

    def __init__(self, vertex: str, points: Dict[str, LatticeVector], charts: Dict[str, Matrix]):
        self.vertex = vertex
        self.points = points
        self.charts = charts


def cap_label(cell: str, covectors: Sequence[Sequence[int]]) -> str:
    parts = "|".join(",".join(str(x) for x in cov) for cov in sorted(tuple(c) for c in covectors))
    return f"{cell}^{parts}"


def recession_rays(rays: Sequence[LatticeVector], dim: int) -> List[LatticeVector]:
    """Extreme rays of the cone {g : g·r ≤ 0 for all r}.

    Raises:
        LegendreError: if the cone contains a line.
    """
    if rank([tuple(r) for r in rays]) < dim:
        raise LegendreError("the Newton polytope contains a line")
    found = set()
    for subset in itertools.combinations(rays, dim - 1):
        if rank([tuple(r) for r in subset]) != dim - 1:
            continue
        if dim == 2:
            g = LatticeVector((-subset[0][1], subset[0][0]))
        else:
            g = LatticeVector(cross3(subset[0], subset[1]))
        g = primitive(g)
        for candidate in (g, -g):
            if all(dot(candidate, r) <= 0 for r in rays):
                found.add(candidate)
    return sorted(found)


def _newton_vertices(keys: Sequence[Tuple[LatticeVector, int]], dim: int) -> List[LatticeVector]:
    found = set()
    for subset in itertools.combinations(keys, dim):
        rows = [tuple(r) for r, _ in subset]
        if rank(rows) != dim:
            continue
        point = solve_rational(rows, [value for _, value in subset])
        if all(dot(point, r) <= value for r, value in keys):
            if any(x.denominator != 1 for x in point):
                raise LegendreError(f"Newton polytope vertex {tuple(str(x) for x in point)} is not integral")
            found.add(LatticeVector(tuple(int(x) for x in point)))
    return sorted(found)


def newton_cell(c: TropicalComplex, v: str) -> NewtonCell:
    fan = c.fan_map[v]
    analysis = analyse_pl(c, v)
    if analysis is None:
        raise LegendreError(f"vertex {v} carries no PL function")
    if analysis.problems:
        raise LegendreError(f"vertex {v}: {analysis.problems[0]}")
    if any(kink <= 0 for kink in analysis.kinks.values()):
        raise LegendreError(f"φ is not strictly convex at {v}")
    gradients = {cell: LatticeVector(tuple(int(x) for x in g)) for cell, g in analysis.gradients.items()}
    owner = {g: cell for cell, g in gradients.items()}
    keys = sorted(fan.pl.items())
    rays = [r for r, _ in keys]
    generators = recession_rays(rays, c.dim)
    corners = _newton_vertices(keys, c.dim)
    if not corners:
        raise LegendreError(f"the Newton polytope at {v} has no vertices")
    seeds = sorted(corners, key=lambda h: (h not in owner, h))
    candidates = []
    for size in range(len(generators) + 1):
        for subset in itertools.combinations(generators, size):
            for h in seeds:
                point = h
                for g in subset:
                    point = point + g
                candidates.append((point, h, subset))
    hull = set(convex_hull_vertices(tuple(p) for p, _, _ in candidates))
    points: Dict[str, LatticeVector] = {}
    charts: Dict[str, Matrix] = {}
    taken = set()
    corner_index = 0
    for point, h, subset in candidates:
        if tuple(point) not in hull or point in taken:
            continue
        taken.add(point)
        if h in owner:
            cell = owner[h]
            chart = transpose(c.chart(cell, v))
            if subset:
                label = cap_label(cell, [mat_vec(chart, g) for g in subset])
            else:
                label = cell
        else:
            label = f"{v}*{corner_index}"
            corner_index += 1
            chart = identity_matrix(c.dim)
        points[label] = point
        charts[label] = chart
    if rank([tuple(p - next(iter(points.values()))) for p in points.values()]) < c.dim:
        raise LegendreError(f"the Newton polytope at {v} is lower-dimensional")
    return NewtonCell(v, points, charts)


def _dual_face(c: TropicalComplex, dual: NewtonCell, face: Sequence[str]) -> frozenset:
    """Labels of the dual cell's vertices tight on the rays of face at dual.vertex."""
    v = dual.vertex
    fan = c.fan_map[v]
    owner = next(name for name in c.vertex_cells[v] if c.cell_map[name].has_face(face))
    rays = [r for w, r in c.cone_rays(v, owner).items() if w in face]
    return frozenset(label for label, p in dual.points.items()
                     if all(dot(p, r) == fan.pl[r] for r in rays))


def _dual_locus(c: TropicalComplex, locus: DiscriminantLocus, duals: Dict[str, NewtonCell]
                ) -> Optional[Tuple[frozenset, Optional[frozenset]]]:
    crossing = locus.face if locus.edge is None else locus.edge
    if any(v not in duals for v in crossing):
        return None
    p, q = face_key(crossing)
    if locus.edge is None:
        ends = [_dual_face(c, duals[p], locus.face), _dual_face(c, duals[q], locus.face)]
        if ends[0] != ends[1] or len(ends[0]) != 2:
            return None
        return ends[0], None
    edge_dual = [_dual_face(c, duals[p], locus.edge), _dual_face(c, duals[q], locus.edge)]
    face_dual = _dual_face(c, duals[p], locus.face)
    if edge_dual[0] != edge_dual[1] or len(face_dual) != 2 or not face_dual <= edge_dual[0]:
        return None
    return edge_dual[0], face_dual


def support_values(cell: Cell, rays: Sequence[LatticeVector]) -> Dict[LatticeVector, int]:
    values = {r: cell.support(r) for r in rays}
    for normal, _ in cell.outward_normals.values():
        values.setdefault(normal, cell.support(normal))
    return values


def legendre_dual(c: TropicalComplex) -> TropicalComplex:
    """The discrete Legendre transform of c.

    Raises:
        LegendreError: when no vertex carries φ, φ is not strictly convex, or a
            Newton polytope is degenerate.
    """
    duals: Dict[str, NewtonCell] = {}
    for v in c.vertices:
        fan = c.fan_map.get(v)
        if fan is None or fan.pl is None or len(c.vertex_cells[v]) < 2:
            continue
        try:
            duals[v] = newton_cell(c, v)
        except LatticeError as exc:
            raise LegendreError(f"vertex {v}: {exc}") from exc
    if not duals:
        raise LegendreError(f"{c.name or 'complex'} has no vertex carrying a PL function")
    builder = ComplexBuilder(c.dim, name=c.metadata.get('dual_name') or f"LD({c.name})")
    builder.metadata.update({k: v for k, v in c.metadata.items() if k != 'dual_name'})
    builder.metadata['dual_name'] = c.name
    cells: Dict[str, Cell] = {}
    for v, dual in duals.items():
        cells[v] = builder.add_cell(v, dual.points)
        for label, chart in dual.charts.items():
            builder.set_chart(v, label, chart)
    incidence: Dict[str, List[str]] = {}
    for v, dual in duals.items():
        for label in dual.points:
            incidence.setdefault(label, []).append(v)
    for sigma in c.cells:
        owners = incidence.get(sigma.name, [])
        if len(owners) < 2:
            continue
        rays = set()
        for v in owners:
            chart = duals[v].charts[sigma.name]
            for direction in cells[v].edge_directions(sigma.name).values():
                rays.add(LatticeVector(mat_vec(chart, direction)))
        builder.set_pl(sigma.name, support_values(sigma, sorted(rays)))
    dropped = 0
    for locus in c.loci:
        carrier = _dual_locus(c, locus, duals)
        if carrier is None:
            dropped += 1
            continue
        face, edge = carrier
        builder.add_locus(face, edge, tag=locus.tag)
    logger.debug("Legendre dual of %s: %d cells, %d loci dropped", c.name, len(duals), dropped)
    return builder.build()
