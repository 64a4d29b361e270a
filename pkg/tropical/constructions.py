"""Derived complexes: interiors, products with an interval, doubles and rescalings."""

import logging
from typing import Dict

from geometry.lattice import LatticeVector, Matrix, as_matrix
from tropical.complex import Cell, TropicalComplex, VertexFan, face_key
from tropical.validation import ComplexBuilder

logger = logging.getLogger(__name__)


def interior(c: TropicalComplex) -> TropicalComplex:
    """c without PL data at vertices on the boundary, whose fans are incomplete."""
    boundary = c.boundary_vertices
    fans = tuple(VertexFan(f.vertex, f.charts, None) if f.vertex in boundary else f for f in c.fans)
    return c.with_changes(fans=fans)


def _block(chart: Matrix) -> Matrix:
    return as_matrix([list(row) + [0] for row in chart] + [[0] * len(chart) + [1]])


def product_with_interval(c: TropicalComplex) -> TropicalComplex:
    """The planar complex c times [0, 1].

    Vertex v becomes v@0 and v@1, charts are extended by the identity on the new axis,
    and each singular point becomes a segment made of two half-legs.
    """
    if c.dim != 2:
        raise ValueError(f"product with an interval needs a planar complex, got dimension {c.dim}")
    builder = ComplexBuilder(3, name=f"{c.name}xI")
    builder.metadata.update(c.metadata)
    for cell in c.cells:
        coords = {}
        for v, p in cell.coords.items():
            coords[f"{v}@0"] = (p[0], p[1], 0)
            coords[f"{v}@1"] = (p[0], p[1], 1)
        builder.add_cell(cell.name, coords)
    for fan in c.fans:
        for name, chart in fan.charts.items():
            for h in (0, 1):
                builder.set_chart(name, f"{fan.vertex}@{h}", _block(chart))
        if fan.pl is not None:
            values: Dict[LatticeVector, int] = {
                LatticeVector((r[0], r[1], 0)): value for r, value in fan.pl.items()}
            values[LatticeVector((0, 0, 1))] = 1
            values[LatticeVector((0, 0, -1))] = 0
            for h in (0, 1):
                builder.set_pl(f"{fan.vertex}@{h}", values)
    for locus in c.loci:
        p, q = face_key(locus.face)
        face = {f"{p}@0", f"{q}@0", f"{p}@1", f"{q}@1"}
        for h in (0, 1):
            builder.add_locus(face, edge={f"{p}@{h}", f"{q}@{h}"}, tag=locus.tag)
    return builder.build()


def boundary_double(c: TropicalComplex) -> TropicalComplex:
    """Two copies of c glued along the boundary, as a bare cell complex.

    Used for Euler characteristics; faces are identified by vertex ids, so the copy
    shares exactly the boundary vertices.
    """
    boundary = c.boundary_vertices
    copies = []
    for cell in c.cells:
        coords = {(v if v in boundary else f"{v}'"): p for v, p in cell.coords.items()}
        copies.append(Cell(f"{cell.name}'", coords))
    return TropicalComplex(c.dim, tuple(c.cells) + tuple(copies), name=f"double({c.name})")


def scaled(c: TropicalComplex, factor: int) -> TropicalComplex:
    """Every cell dilated by factor; charts, PL values and loci carry over."""
    if factor < 1:
        raise ValueError(f"scale factor must be positive, got {factor}")
    if factor == 1:
        return c
    builder = ComplexBuilder(c.dim, name=c.name)
    builder.metadata.update(c.metadata)
    builder.metadata['scale'] = int(c.metadata.get('scale', 1)) * factor
    for cell in c.cells:
        builder.add_cell(cell.name, {v: p * factor for v, p in cell.coords.items()})
    for fan in c.fans:
        for name, chart in fan.charts.items():
            builder.set_chart(name, fan.vertex, chart)
        if fan.pl is not None:
            builder.set_pl(fan.vertex, fan.pl)
    for locus in c.loci:
        builder.add_locus(locus.face, locus.edge, tag=locus.tag)
    logger.debug("scaled %s by %d", c.name, factor)
    return builder.build()
