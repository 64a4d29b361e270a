"""Structural validation of tropical complexes, and the builder every construction goes through."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from geometry.lattice import (
    LatticeError, LatticeVector, Matrix, as_matrix, as_vector, dot, identity_matrix, mat_det,
)
from tropical.complex import (
    LOCUS_TYPES, Cell, DiscriminantLocus, Face, TropicalComplex, VertexFan, analyse_pl, derive_gluings,
    face_key, face_label, oriented_loop, wall_normal,
)
from tropical.discriminant import find_junctions
from tropical.monodromy import ChamberPath, MonodromyError, edge_multiplicity_from_monodromy, monodromy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    location: str = ""

    def __str__(self):
        where = f" [{self.location}]" if self.location else ""
        return f"{self.code}: {self.message}{where}"


class Diagnostics(list):
    """The findings of validate; empty means the complex is valid."""

    @property
    def ok(self) -> bool:
        return not self

    def codes(self) -> List[str]:
        return sorted({d.code for d in self})

    def add(self, code: str, message: str, location: str = ""):
        self.append(Diagnostic(code, message, location))


class ComplexValidationError(ValueError):
    """Raised by ensure_valid; carries every diagnostic found."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = Diagnostics(diagnostics)
        shown = "; ".join(str(d) for d in self.diagnostics[:5])
        more = f" (+{len(self.diagnostics) - 5} more)" if len(self.diagnostics) > 5 else ""
        super().__init__(f"invalid complex: {shown}{more}")


def _check_cells(c: TropicalComplex, found: Diagnostics):
    names = [cell.name for cell in c.cells]
    for name in sorted({n for n in names if names.count(n) > 1}):
        found.add("cell-duplicate", f"cell name {name} is used twice", name)
    for cell in c.cells:
        if cell.dim != c.dim:
            found.add("cell-dimension", f"cell has dimension {cell.dim} in a {c.dim}-dimensional complex", cell.name)
    for facet, owners in c.facet_cells.items():
        if len(owners) > 2:
            found.add("face-multiplicity", f"facet is shared by {len(owners)} cells", face_label(facet))


def _check_charts(c: TropicalComplex, found: Diagnostics):
    for v in c.vertices:
        fan = c.fan_map.get(v)
        expected = set(c.vertex_cells[v])
        charts = dict(fan.charts) if fan is not None else {}
        for cell in sorted(expected - set(charts)):
            found.add("chart-missing", f"no chart for cell {cell}", v)
        for cell in sorted(set(charts) - expected):
            found.add("chart-extra", f"chart for cell {cell}, which does not contain the vertex", v)
        for cell in sorted(expected & set(charts)):
            det = mat_det(charts[cell])
            if det not in ((1,) if c.dim == 2 else (1, -1)):
                found.add("chart-det", f"chart of {cell} has determinant {det}", v)
    for fan in c.fans:
        if fan.vertex not in c.vertex_cells:
            found.add("fan-orphan", "fan at a vertex of no cell", fan.vertex)


def _charts_by_key(c: TropicalComplex) -> Dict[Tuple[str, str], Matrix]:
    return {(cell, fan.vertex): m for fan in c.fans for cell, m in fan.charts.items()}


def _check_gluings(c: TropicalComplex, found: Diagnostics):
    derived, problems = derive_gluings(c.cell_map, _charts_by_key(c))
    for problem in problems:
        found.add("gluing-geometry", problem)
    expected = {g.key: g for g in derived}
    stored = {}
    for g in c.gluings:
        if g.key in stored:
            found.add("gluing-duplicate", "gluing listed twice", str(g.key))
        stored[g.key] = g
    for key in sorted(set(expected) - set(stored)):
        found.add("gluing-missing", f"no gluing across {face_label(key[2])} at {key[3]}", f"{key[0]}|{key[1]}")
    for key in sorted(set(stored) - set(expected)):
        found.add("gluing-extra", f"gluing across {face_label(key[2])} at {key[3]} is not a shared facet",
                  f"{key[0]}|{key[1]}")
    for key in sorted(set(stored) & set(expected)):
        g = stored[key]
        a, b = c.cell_map[g.cell_a], c.cell_map[g.cell_b]
        if g.map != expected[key].map:
            moved = [w for w in face_key(g.facet) if g.map.apply(a.coords[w]) != b.coords[w]]
            detail = f"misplaces facet vertices {moved}" if moved else "disagrees with the vertex charts"
            found.add("gluing-mismatch", f"gluing across {face_label(g.facet)} at {g.vertex} {detail}",
                      f"{g.cell_a}|{g.cell_b}")


def _check_walls(c: TropicalComplex, found: Diagnostics):
    for facet in c.interior_facets:
        a, b = c.facet_cells[facet]
        for v in face_key(facet):
            try:
                normal = wall_normal(c, v, facet, a)
                inside_b = next(r for w, r in sorted(c.cone_rays(v, b).items()) if w not in facet)
            except (LatticeError, MonodromyError) as exc:
                found.add("fan-overlap", str(exc), v)
                continue
            if dot(normal, inside_b) >= 0:
                found.add("fan-overlap", f"cells {a} and {b} lie on the same side of {face_label(facet)}", v)


def _check_pl(c: TropicalComplex, found: Diagnostics):
    by_facet: Dict[Face, Dict[str, int]] = {}
    for v in c.vertices:
        try:
            analysis = analyse_pl(c, v)
        except (LatticeError, MonodromyError) as exc:
            found.add("pl-inconsistent", str(exc), v)
            continue
        if analysis is None:
            continue
        for problem in analysis.problems:
            code = "pl-nonintegral" if "integral" in problem else (
                "pl-support" if "supporting" in problem else "pl-inconsistent")
            found.add(code, problem, v)
        for facet, kink in analysis.kinks.items():
            if kink <= 0:
                found.add("pl-not-convex", f"kink {kink} across {face_label(facet)}", v)
            by_facet.setdefault(facet, {})[v] = kink
    for facet, kinks in sorted(by_facet.items(), key=lambda item: face_key(item[0])):
        if len(set(kinks.values())) > 1:
            found.add("kink-mismatch", f"kinks {dict(sorted(kinks.items()))} differ along the wall",
                      face_label(facet))


def _check_loci(c: TropicalComplex, found: Diagnostics):
    seen = set()
    for index, locus in enumerate(c.loci):
        where = f"locus {index}"
        key = (face_key(locus.face), face_key(locus.edge) if locus.edge is not None else None)
        if key in seen:
            found.add("locus-duplicate", "two loci on the same carrier", where)
        seen.add(key)
        owners = c.cells_with_face(locus.face)
        if len(owners) != 2 or any(c.cell_map[o].face_dim(locus.face) != c.dim - 1 for o in owners):
            found.add("locus-face", f"{face_label(locus.face)} is not an interior facet", where)
            continue
        if c.dim == 3:
            if locus.edge is None or len(locus.edge) != 2 or not locus.edge <= locus.face \
                    or c.cell_map[owners[0]].face_dim(locus.edge) != 1:
                found.add("locus-face", "a three-dimensional locus needs an edge of its face", where)
                continue
        elif locus.edge is not None:
            found.add("locus-face", "planar loci are edge midpoints and carry no extra edge", where)
        crossing = locus.edge if c.dim == 3 else locus.face
        loop = locus.loop
        if len(loop) != 2 or set(loop.cells) != set(owners) or set(loop.vertices) != set(crossing) \
                or locus.cell != loop.cells[0]:
            found.add("locus-loop", "the loop does not encircle the locus", where)
            continue
        try:
            recomputed = edge_multiplicity_from_monodromy(monodromy(c, loop))
        except (MonodromyError, LatticeError) as exc:
            found.add("multiplicity", str(exc), where)
            continue
        if recomputed == 0:
            found.add("multiplicity", "the monodromy around the locus is trivial", where)
        elif recomputed != locus.multiplicity:
            found.add("multiplicity", f"labelled {locus.multiplicity}, monodromy gives {recomputed}", where)
        if locus.local_type not in LOCUS_TYPES:
            found.add("local-type", f"unknown locus type {locus.local_type!r}", where)


def _check_junctions(c: TropicalComplex, found: Diagnostics):
    for junction in find_junctions(c):
        where = face_label(junction.node)
        if junction.local_type == "degenerate":
            found.add("junction-type", "; ".join(junction.problems) or "unclassifiable junction", where)
        elif junction.degree is None:
            found.add("junction-unbalanced", "; ".join(junction.problems), where)


def validate(c: TropicalComplex) -> Diagnostics:
    """Check every structural invariant of c; never raises for a bad complex."""
    found = Diagnostics()
    _check_cells(c, found)
    if found:
        return found
    _check_charts(c, found)
    if any(d.code.startswith("chart") for d in found):
        return found
    _check_gluings(c, found)
    _check_walls(c, found)
    _check_pl(c, found)
    _check_loci(c, found)
    if c.metadata.get('closed') and not c.is_closed():
        found.add("not-closed", f"{len(c.boundary_facets)} facets are unglued")
    if c.dim == 3 and not any(d.code.startswith("locus") or d.code == "multiplicity" for d in found):
        _check_junctions(c, found)
    logger.info("validated %s: %s", c.name or "complex", "ok" if found.ok else ", ".join(found.codes()))
    return found


def ensure_valid(c: TropicalComplex) -> TropicalComplex:
    found = validate(c)
    if found:
        raise ComplexValidationError(found)
    return c


# ------------------------------------------------------------
# Building complexes
# ------------------------------------------------------------

@dataclass
class _PendingLocus:
    face: Face
    edge: Optional[Face]
    tag: str
    loop: Optional[ChamberPath]


class ComplexBuilder:
    """Collect cells, charts, PL values and loci, then derive gluings and loops.

    Charts default to the identity. Loci get the positively oriented loop and the
    multiplicity read from its monodromy.
    """

    def __init__(self, dim: int, name: str = ""):
        self.dim = dim
        self.name = name
        self.metadata: Dict[str, object] = {}
        self._cells: Dict[str, Cell] = {}
        self._charts: Dict[Tuple[str, str], Matrix] = {}
        self._pl: Dict[str, Dict[LatticeVector, int]] = {}
        self._loci: List[_PendingLocus] = []

    @property
    def cells(self) -> Mapping[str, Cell]:
        return self._cells

    def add_cell(self, name: str, coords: Mapping[str, Sequence[int]]) -> Cell:
        if name in self._cells:
            raise ComplexValidationError([Diagnostic("cell-duplicate", "cell added twice", name)])
        cell = Cell(name, coords)
        if cell.dim != self.dim:
            raise ComplexValidationError([Diagnostic("cell-dimension", f"cell of dimension {cell.dim}", name)])
        self._cells[name] = cell
        return cell

    def set_chart(self, cell: str, vertex: str, matrix: Sequence[Sequence[int]]):
        self._charts[(cell, vertex)] = as_matrix(matrix)

    def chart(self, cell: str, vertex: str) -> Matrix:
        return self._charts.get((cell, vertex), identity_matrix(self.dim))

    def set_pl(self, vertex: str, values: Mapping[Sequence[int], int]):
        self._pl[vertex] = {as_vector(r): int(value) for r, value in values.items()}

    def add_locus(self, face: Iterable[str], edge: Optional[Iterable[str]] = None, tag: str = "",
                  loop: Optional[ChamberPath] = None):
        self._loci.append(_PendingLocus(frozenset(face), frozenset(edge) if edge is not None else None,
                                        tag, loop))

    def build(self, check: bool = True) -> TropicalComplex:
        """Assemble the complex.

        Raises:
            ComplexValidationError: if check is set and the result is invalid, or a
                requested locus has trivial or non-shear monodromy.
        """
        charts = dict(self._charts)
        vertex_cells: Dict[str, List[str]] = {}
        for cell in self._cells.values():
            for v in cell.coords:
                charts.setdefault((cell.name, v), identity_matrix(self.dim))
                vertex_cells.setdefault(v, []).append(cell.name)
        stray = [key for key in charts if key[0] not in self._cells or key[1] not in self._cells[key[0]].coords]
        if stray:
            raise ComplexValidationError([Diagnostic("chart-extra", f"chart for {k[0]} at {k[1]}") for k in stray])
        gluings, _ = derive_gluings(self._cells, charts)
        fans = tuple(
            VertexFan(v, {cell: charts[(cell, v)] for cell in sorted(names)}, self._pl.get(v))
            for v, names in sorted(vertex_cells.items()))
        skeleton = TropicalComplex(self.dim, tuple(self._cells.values()), fans, gluings, (), self.name,
                                   dict(self.metadata))
        loci = []
        problems = []
        for pending in sorted(self._loci, key=lambda p: (face_key(p.face), face_key(p.edge or ()))):
            try:
                loop = pending.loop or oriented_loop(self._cells, pending.face, pending.edge)
                multiplicity = edge_multiplicity_from_monodromy(monodromy(skeleton, loop))
            except (MonodromyError, LatticeError) as exc:
                problems.append(Diagnostic("multiplicity", str(exc), face_label(pending.face)))
                continue
            if multiplicity == 0:
                problems.append(Diagnostic("multiplicity", "trivial monodromy around a requested locus",
                                           face_label(pending.face)))
                continue
            loci.append(DiscriminantLocus(loop.cells[0], pending.face, multiplicity, loop, pending.edge,
                                          tag=pending.tag))
        if problems:
            raise ComplexValidationError(problems)
        complex_ = skeleton.with_changes(loci=tuple(loci))
        logger.debug("built %s: %d cells, %d loci", self.name or "complex", len(self._cells), len(loci))
        return ensure_valid(complex_) if check else complex_
