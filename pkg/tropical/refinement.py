"""Refinements of complexes that leave the affine structure alone.

A planar singular point of multiplicity k is separated into k simple points: the
edge {p, q} carrying it is subdivided at its lattice points and both adjacent cells
are cut into triangles over the subdivided edge. The gluing across the t-th sub-edge
interpolates between the gluings at p and at q by t powers of the simple shear
fixing the edge, so the first k sub-edges each carry a simple point and all of them
lie on the edge's invariant line.

Cutting a cell through some of its vertices, or joining two cells across a wall
with no locus, no monodromy and no kink, changes the decomposition only. normalize
joins cells until no such wall is left.
"""

import logging
from dataclasses import replace
from fractions import Fraction
from math import ceil
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from geometry.lattice import (
    LatticeError, LatticeVector, Matrix, UnimodularMap, affine_length, cross3, dot, identity_matrix,
    mat_inverse, mat_mul, mat_sub, mat_vec, primitive,
)
from tropical.complex import (
    Cell, Face, TropicalComplex, VertexFan, analyse_pl, derive_gluings, face_key, face_label,
)
from tropical.constructions import scaled
from tropical.monodromy import ChamberPath, MonodromyError, shear_matrix
from tropical.validation import ComplexBuilder

logger = logging.getLogger(__name__)


class RefinementError(ValueError):
    """Raised when a cut or a join would change more than the decomposition."""


def _power(m: Matrix, n: int) -> Matrix:
    result = identity_matrix(len(m))
    base = m if n >= 0 else mat_inverse(m)
    for _ in range(abs(n)):
        result = mat_mul(base, result)
    return result


class _Workspace:
    """Mutable cells, charts and loci of a planar complex under refinement."""

    def __init__(self, c: TropicalComplex):
        self.name = c.name
        self.metadata = dict(c.metadata)
        self.cells: Dict[str, Dict[str, LatticeVector]] = {cell.name: dict(cell.coords) for cell in c.cells}
        self.order: Dict[str, Tuple[str, ...]] = {cell.name: cell.vertices for cell in c.cells}
        self.charts: Dict[Tuple[str, str], Matrix] = {
            (cell, fan.vertex): m for fan in c.fans for cell, m in fan.charts.items()}
        self.loci: List[Tuple[Face, str]] = [(locus.face, locus.tag) for locus in c.loci]
        self.loops = {locus.face: locus.loop for locus in c.loci}

    def owners(self, face: Face) -> List[str]:
        found = []
        for name, order in self.order.items():
            n = len(order)
            for i in range(n):
                if frozenset((order[i], order[(i + 1) % n])) == face:
                    found.append(name)
        return sorted(found)

    def chart(self, cell: str, v: str) -> Matrix:
        return self.charts.get((cell, v), identity_matrix(2))

    def replace_cell(self, name: str, pieces: List[Tuple[str, Tuple[str, ...], Dict[str, LatticeVector]]],
                     new_charts: Dict[str, Matrix]):
        """Swap cell name for pieces; old vertices keep name's charts, new ones get new_charts."""
        old = self.cells.pop(name)
        self.order.pop(name)
        old_charts = {v: self.charts.pop((name, v)) for v in list(old) if (name, v) in self.charts}
        for piece, order, coords in pieces:
            self.cells[piece] = coords
            self.order[piece] = order
            for v in coords:
                if v in old_charts:
                    self.charts[(piece, v)] = old_charts[v]
                elif v in new_charts:
                    self.charts[(piece, v)] = new_charts[v]

    def build(self) -> TropicalComplex:
        builder = ComplexBuilder(2, name=self.name)
        builder.metadata.update(self.metadata)
        for name, coords in self.cells.items():
            builder.add_cell(name, coords)
        for (cell, v), m in self.charts.items():
            builder.set_chart(cell, v, m)
        for face, tag in self.loci:
            builder.add_locus(face, tag=tag)
        return builder.build()


def _fan_pieces(name: str, order: Tuple[str, ...], coords: Dict[str, LatticeVector], start: str, end: str,
                inner: Sequence[str], points: Sequence[LatticeVector]):
    """Cut a convex polygon into triangles over the subdivided edge start→end and the rest.

    order is counterclockwise with end following start; inner are the new vertex ids
    on the edge, points their coordinates.
    """
    n = len(order)
    i = order.index(start)
    apex = order[(i + 2) % n]
    chain = [start] + list(inner) + [end]
    positions = dict(coords)
    positions.update(zip(inner, points))
    pieces = []
    for t in range(len(chain) - 1):
        tri = (chain[t], chain[t + 1], apex)
        pieces.append((f"{name}.{t}", tri, {v: positions[v] for v in tri}))
    rest = [order[(i + 2 + s) % n] for s in range(n - 1)]
    if len(rest) >= 3:
        pieces.append((f"{name}.r", tuple(rest), {v: positions[v] for v in rest}))
    return pieces


def split_singular_edge(c: TropicalComplex, face: Iterable[str], work: Optional[_Workspace] = None
                        ) -> TropicalComplex:
    """Replace the point on face by |k| simple points on consecutive sub-edges.

    Raises:
        MonodromyError: if the edge is shorter than |k| or the gluings are not a shear along it.
    """
    own = work is None
    work = _Workspace(c) if own else work
    face = frozenset(face)
    loop = work.loops.get(face)
    if loop is None:
        raise MonodromyError(f"no singular point on {face_label(face)}")
    sigma, tau = loop.cells
    current = work.owners(face)
    if current != sorted((sigma, tau)):
        sigma, tau = current if current[0].split('.')[0] == sigma.split('.')[0] else current[::-1]
    p, q = loop.vertices
    cs, ct = work.cells[sigma], work.cells[tau]
    g_p = mat_mul(mat_inverse(work.chart(tau, p)), work.chart(sigma, p))
    g_q = mat_mul(mat_inverse(work.chart(tau, q)), work.chart(sigma, q))
    d_sigma = primitive(cs[q] - cs[p])
    d_tau = primitive(ct[q] - ct[p])
    simple = shear_matrix(d_sigma, 1)
    step = mat_sub(mat_mul(mat_inverse(g_p), g_q), identity_matrix(2))
    unit = mat_sub(simple, identity_matrix(2))
    entries = [(step[i][j], unit[i][j]) for i in range(2) for j in range(2) if unit[i][j]]
    k = entries[0][0] // entries[0][1]
    if any(s != k * u for s, u in zip((x for row in step for x in row), (x for row in unit for x in row))):
        raise MonodromyError(f"the gluings across {face_label(face)} are not a shear along the edge")
    length = affine_length(cs[p], cs[q])
    if length < abs(k):
        raise MonodromyError(f"edge {face_label(face)} has length {length} < {abs(k)}")
    inner = [f"{p}~{q}:{t}" for t in range(1, length)]
    sign = 1 if k > 0 else -1
    tau_charts = {}
    for t, v in enumerate(inner, start=1):
        g_t = mat_mul(g_p, _power(simple, sign * min(t, abs(k))))
        tau_charts[v] = mat_inverse(g_t)
    for name, coords, direction, charts in ((sigma, cs, d_sigma, {v: identity_matrix(2) for v in inner}),
                                            (tau, ct, d_tau, tau_charts)):
        order = work.order[name]
        n = len(order)
        i = order.index(p)
        start, end = (p, q) if order[(i + 1) % n] == q else (q, p)
        points = [coords[p] + direction * t for t in range(1, length)]
        ids = list(inner)
        if start == q:
            points, ids = points[::-1], ids[::-1]
        work.replace_cell(name, _fan_pieces(name, order, coords, start, end, ids, points), charts)
    chain = [p] + inner + [q]
    tag = next((t for f, t in work.loci if f == face), '')
    work.loci = [(f, t) for f, t in work.loci if f != face]
    for t in range(abs(k)):
        work.loci.append((frozenset((chain[t], chain[t + 1])), tag))
    logger.debug("split %s of multiplicity %d into %d simple points", face_label(face), k, abs(k))
    return work.build() if own else c


def separate_points(c: TropicalComplex, faces: Optional[Iterable[Iterable[str]]] = None) -> TropicalComplex:
    """Split every chosen singular point (all by default), rescaling first if an edge is too short."""
    targets = [frozenset(f) for f in faces] if faces is not None else [l.face for l in c.loci]
    chosen = [l for l in c.loci if l.face in targets and abs(l.multiplicity) > 1]
    if not chosen:
        return c
    factor = max(ceil(abs(l.multiplicity) / c.cell_map[l.cell].edge_length(l.face)) for l in chosen)
    if factor > 1:
        c = scaled(c, factor)
    work = _Workspace(c)
    for locus in chosen:
        split_singular_edge(c, locus.face, work)
    return work.build()


# ------------------------------------------------------------
# Cutting and joining cells
# ------------------------------------------------------------

def _all_charts(c: TropicalComplex) -> Dict[Tuple[str, str], Matrix]:
    return {(cell, fan.vertex): m for fan in c.fans for cell, m in fan.charts.items()}


def _reassemble(c: TropicalComplex, cells: Sequence[Cell], charts: Dict[Tuple[str, str], Matrix],
                rename: Callable[[str, Face], str], pl: Optional[Dict[str, Dict[LatticeVector, int]]] = None
                ) -> TropicalComplex:
    """c over new cells and charts; rename(old, face) is the cell now holding face in place of old.

    pl replaces the PL values at the vertices it names.
    """
    gluings, problems = derive_gluings({cell.name: cell for cell in cells}, charts)
    if problems:
        raise RefinementError("; ".join(problems))
    by_vertex: Dict[str, Dict[str, Matrix]] = {}
    for (cell, v), m in sorted(charts.items()):
        by_vertex.setdefault(v, {})[cell] = m
    pl = {**{fan.vertex: fan.pl for fan in c.fans}, **(pl or {})}
    fans = tuple(VertexFan(v, charts_at, pl.get(v)) for v, charts_at in sorted(by_vertex.items()))
    loci = []
    for locus in c.loci:
        loop = ChamberPath(tuple(rename(name, locus.face) for name in locus.loop.cells),
                           locus.loop.vertices, locus.loop.base)
        loci.append(replace(locus, cell=loop.cells[0], loop=loop))
    return c.with_changes(cells=tuple(cells), fans=fans, gluings=gluings, loci=tuple(loci))


def _fresh_name(c: TropicalComplex, base: str) -> str:
    name, n = base, 1
    while name in c.cell_map:
        n += 1
        name = f"{base}{n}"
    return name


def cut_cell(c: TropicalComplex, name: str, through: Iterable[str]) -> TropicalComplex:
    """Split cell name by the hyperplane through the given vertices.

    Both pieces keep the cell's charts and φ is unchanged, so the new wall carries
    no kink.

    Raises:
        RefinementError: if the vertices do not span a hyperplane that separates the
            other vertices of the cell without crossing one of its facets.
    """
    cell = c.cell_map.get(name)
    if cell is None:
        raise RefinementError(f"no cell {name}")
    through = face_key(through)
    if len(through) != c.dim or any(v not in cell.coords for v in through):
        raise RefinementError(f"a cut of {name} runs through {c.dim} of its vertices, got {list(through)}")
    origin = cell.coords[through[0]]
    spans = [cell.coords[v] - origin for v in through[1:]]
    normal = LatticeVector((-spans[0][1], spans[0][0])) if c.dim == 2 else LatticeVector(cross3(*spans))
    if not any(normal):
        raise RefinementError(f"vertices {list(through)} do not span a hyperplane")
    side = {v: dot(normal, p - origin) for v, p in cell.coords.items()}
    if all(s >= 0 for s in side.values()) or all(s <= 0 for s in side.values()):
        raise RefinementError(f"the hyperplane through {list(through)} does not separate {name}")
    for facet in cell.facets:
        if any(side[v] > 0 for v in facet) and any(side[v] < 0 for v in facet):
            raise RefinementError(f"the cut crosses the facet {face_label(facet)} of {name}")

    upper = Cell(_fresh_name(c, f"{name}+"), {v: p for v, p in cell.coords.items() if side[v] >= 0})
    lower = Cell(_fresh_name(c, f"{name}-"), {v: p for v, p in cell.coords.items() if side[v] <= 0})
    charts = {key: m for key, m in _all_charts(c).items() if key[0] != name}
    for piece in (upper, lower):
        for v in piece.coords:
            charts[(piece.name, v)] = c.chart(name, v)

    # φ extends linearly over the new rays inside the old cone
    pl: Dict[str, Dict[LatticeVector, int]] = {}
    for v in cell.coords:
        analysis = analyse_pl(c, v)
        if analysis is None or name not in analysis.gradients:
            continue
        gradient = analysis.gradients[name]
        values = dict(c.fan_map[v].pl)
        for piece in (upper, lower):
            if v not in piece.coords:
                continue
            for direction in piece.edge_directions(v).values():
                ray = LatticeVector(mat_vec(charts[(piece.name, v)], direction))
                value = Fraction(dot(gradient, ray))
                if value.denominator != 1:
                    raise RefinementError(f"φ is not integral on the new ray {ray} at {v}")
                values.setdefault(ray, int(value))
        pl[v] = values

    def rename(old: str, face: Face) -> str:
        if old != name:
            return old
        return upper.name if face <= set(upper.coords) else lower.name

    cells = [other for other in c.cells if other.name != name] + [upper, lower]
    logger.debug("cut %s through %s", name, list(through))
    return _reassemble(c, cells, charts, rename, pl)


def merge_cells(c: TropicalComplex, facet: Iterable[str]) -> TropicalComplex:
    """Join the two cells on either side of facet into one, named after the first.

    Raises:
        RefinementError: if a locus lies on the facet, the gluings across it differ,
            φ bends across it, or the union is not a cell with the same outer facets.
    """
    facet = frozenset(facet)
    owners = c.facet_cells.get(facet, ())
    if len(owners) != 2:
        raise RefinementError(f"{face_label(facet)} is not an interior facet")
    if any(locus.face == facet for locus in c.loci):
        raise RefinementError(f"a singular locus lies on {face_label(facet)}")
    first, second = (c.cell_map[n] for n in owners)
    if set(first.coords) & set(second.coords) != facet:
        raise RefinementError(f"{first.name} and {second.name} meet in more than {face_label(facet)}")
    try:
        maps = []
        for v in face_key(facet):
            linear = mat_mul(mat_inverse(c.chart(second.name, v)), c.chart(first.name, v))
            maps.append(UnimodularMap(linear, second.coords[v] - LatticeVector(mat_vec(linear, first.coords[v]))))
        if any(m != maps[0] for m in maps[1:]):
            raise RefinementError(f"the gluings across {face_label(facet)} differ")
        for v in face_key(facet):
            analysis = analyse_pl(c, v)
            if analysis is not None and analysis.kinks.get(facet) != 0:
                raise RefinementError(f"φ bends across {face_label(facet)} at {v}")
    except (LatticeError, MonodromyError) as exc:
        raise RefinementError(str(exc)) from exc

    back = maps[0].inverse()
    coords = dict(first.coords)
    coords.update({w: back.apply(p) for w, p in second.coords.items() if w not in facet})
    try:
        joined = Cell(first.name, coords)
    except LatticeError as exc:
        raise RefinementError(f"{first.name} and {second.name} do not join to a cell: {exc}") from exc
    if joined.facets != (first.facets | second.facets) - {facet}:
        raise RefinementError(f"{first.name} and {second.name} do not join to a convex cell")

    charts = {key: m for key, m in _all_charts(c).items() if key[0] not in owners}
    for v in first.coords:
        charts[(first.name, v)] = c.chart(first.name, v)
    for w in second.coords:
        if w not in facet:
            charts[(first.name, w)] = mat_mul(c.chart(second.name, w), maps[0].linear)
    cells = [cell for cell in c.cells if cell.name not in owners] + [joined]
    result = _reassemble(c, cells, charts, lambda old, face: first.name if old == second.name else old)
    # rays of the removed wall are no longer fan rays; their values must not act as supports
    pl = {}
    for v in facet:
        fan = result.fan_map[v]
        if fan.pl is not None:
            stale = set(c.used_rays(v)) - set(result.used_rays(v))
            pl[v] = {ray: value for ray, value in fan.pl.items() if ray not in stale}
    if pl:
        fans = tuple(VertexFan(f.vertex, f.charts, pl[f.vertex]) if f.vertex in pl else f for f in result.fans)
        result = result.with_changes(fans=fans)
    logger.debug("joined %s and %s across %s", first.name, second.name, face_label(facet))
    return result


def normalize(c: TropicalComplex) -> TropicalComplex:
    """Join cells across every wall that carries no locus, no monodromy and no kink."""
    joined = 0
    while True:
        for facet in c.interior_facets:
            try:
                c = merge_cells(c, facet)
            except RefinementError:
                continue
            joined += 1
            break
        else:
            break
    logger.debug("normalized %s: %d joins", c.name or "complex", joined)
    return c
