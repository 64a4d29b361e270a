"""Schematic SVG figures of tropical complexes.

Planar complexes are unfolded cell by cell: a spanning tree of the cell adjacency
is walked and each new cell is placed by the similarity that lays its shared edge
onto the already placed copy, on the far side. Monodromy means the unfolding does
not close up around a singular point, so the picture is combinatorial, not a
metric embedding. Singular points are marked at the middle of their edges and
labelled with their multiplicity.

Three-dimensional complexes are drawn through their discriminant graph: junctions
and free ends laid out by networkx, legs labelled with multiplicities.
"""
import logging
from collections import deque
from typing import Dict, List, Optional, Tuple

import drawsvg as draw
import networkx as nx
import numpy as np

from tropical.complex import TropicalComplex, face_key
from tropical.discriminant import discriminant_graph

logger = logging.getLogger(__name__)

WIDTH_PX = 800
HEIGHT_PX = 600
MARGIN = 50

CELL_FILL = '#eef3fb'
CELL_STROKE = '#33415c'
POINT_COLORS = {1: '#c0392b', -1: '#2874a6'}
JUNCTION_COLORS = {
    'trivalent-': '#2874a6',
    'trivalent+': '#c0392b',
    'fourvalent-generalized': '#7d3c98',
    'fourvalent-orbifolded': '#d35400',
}

Placement = Dict[str, complex]


def _sx_sy_builder(xs, ys, width_px, height_px, margin):
    xs = np.array(xs, dtype=float)
    ys = np.array(ys, dtype=float)
    xmin, xmax = xs.min(), xs.max()
    ymin, ymax = ys.min(), ys.max()
    if xmax == xmin:
        xmax += 1.0
        xmin -= 1.0
    if ymax == ymin:
        ymax += 1.0
        ymin -= 1.0
    scale = min((width_px - 2 * margin) / (xmax - xmin), (height_px - 2 * margin) / (ymax - ymin))

    def sx(x):
        return margin + (x - xmin) * scale

    # SVG y grows downwards
    def sy(y):
        return height_px - margin - (y - ymin) * scale

    return sx, sy


def _as_complex(p) -> complex:
    return complex(float(p[0]), float(p[1]))


def _shared_edge(c: TropicalComplex, first: str, second: str) -> Optional[Tuple[str, str]]:
    a, b = c.cell_map[first], c.cell_map[second]
    common = a.edges & b.edges
    if not common:
        return None
    return face_key(sorted(common, key=face_key)[0])


def _place(c: TropicalComplex, placed: Placement, name: str, edge: Tuple[str, str], inside: complex) -> Placement:
    """Similarity sending the edge of cell name onto its placed copy, cell on the side away from inside."""
    cell = c.cell_map[name]
    u, v = edge
    pu, pv = placed[u], placed[v]
    lu, lv = _as_complex(cell.coords[u]), _as_complex(cell.coords[v])
    ratio = (pv - pu) / (lv - lu)
    local = {w: _as_complex(p) for w, p in cell.coords.items()}
    image = {w: pu + (z - lu) * ratio for w, z in local.items()}
    centre = sum(image.values()) / len(image)
    side = ((pv - pu).conjugate() * (centre - pu)).imag
    other = ((pv - pu).conjugate() * (inside - pu)).imag
    if side * other > 0:
        ratio = (pv - pu) / (lv - lu).conjugate()
        image = {w: pu + (z - lu).conjugate() * ratio for w, z in local.items()}
    return image


def unfold(c: TropicalComplex) -> Dict[str, Placement]:
    """Planar positions of every cell's vertices, cell by cell along a spanning tree."""
    if c.dim != 2:
        raise ValueError(f"only planar complexes unfold, {c.name} has dimension {c.dim}")
    names = sorted(cell.name for cell in c.cells)
    placements: Dict[str, Placement] = {}
    offset = 0.0
    for root in names:
        if root in placements:
            continue
        cell = c.cell_map[root]
        # separate components side by side
        placements[root] = {w: _as_complex(p) + offset for w, p in cell.coords.items()}
        queue = deque([root])
        while queue:
            current = queue.popleft()
            mine = placements[current]
            centre = sum(mine.values()) / len(mine)
            for other in names:
                if other in placements:
                    continue
                edge = _shared_edge(c, current, other)
                if edge is None:
                    continue
                placements[other] = _place(c, mine, other, edge, centre)
                queue.append(other)
        xs = [z.real for placement in placements.values() for z in placement.values()]
        offset = max(xs) + 2.0
    return placements


def render_planar(c: TropicalComplex, width_px: int = WIDTH_PX, height_px: int = HEIGHT_PX,
                  margin: int = MARGIN, show_vertex_labels: bool = True) -> draw.Drawing:
    placements = unfold(c)
    points = [z for placement in placements.values() for z in placement.values()]
    sx, sy = _sx_sy_builder([z.real for z in points], [z.imag for z in points], width_px, height_px, margin)
    d = draw.Drawing(width_px, height_px, origin=(0, 0))
    d.append(draw.Rectangle(0, 0, width_px, height_px, fill='white'))

    for name in sorted(placements):
        cell = c.cell_map[name]
        corners = [placements[name][w] for w in cell.vertices]
        coords = []
        for z in corners:
            coords.extend((sx(z.real), sy(z.imag)))
        d.append(draw.Lines(*coords, close=True, fill=CELL_FILL, stroke=CELL_STROKE, stroke_width=1.5))
        centre = sum(corners) / len(corners)
        d.append(draw.Text(name, 11, sx(centre.real), sy(centre.imag), center=True, fill='#7f8c8d'))
        if show_vertex_labels:
            for w in cell.vertices:
                z = placements[name][w]
                d.append(draw.Circle(sx(z.real), sy(z.imag), 2.5, fill=CELL_STROKE))
                d.append(draw.Text(w, 10, sx(z.real) + 5, sy(z.imag) - 5, fill=CELL_STROKE))

    for locus in c.loci:
        u, v = face_key(locus.face)
        placement = placements[locus.cell]
        z = (placement[u] + placement[v]) / 2
        color = POINT_COLORS[1 if locus.multiplicity > 0 else -1]
        d.append(draw.Circle(sx(z.real), sy(z.imag), 5, fill=color, stroke='black', stroke_width=0.5))
        d.append(draw.Text(str(locus.multiplicity), 12, sx(z.real) + 8, sy(z.imag) + 12, fill=color))
    return d


def render_discriminant(c: TropicalComplex, width_px: int = WIDTH_PX, height_px: int = HEIGHT_PX,
                        margin: int = MARGIN) -> draw.Drawing:
    dg = discriminant_graph(c)
    graph = dg.graph
    d = draw.Drawing(width_px, height_px, origin=(0, 0))
    d.append(draw.Rectangle(0, 0, width_px, height_px, fill='white'))
    if graph.number_of_nodes() == 0:
        return d
    nodes = sorted(graph.nodes)
    ordered = nx.Graph()
    ordered.add_nodes_from(nodes)
    ordered.add_edges_from(sorted(graph.edges, key=lambda e: tuple(sorted(e))))
    if ordered.number_of_nodes() > 1:
        layout = nx.spring_layout(ordered, seed=0)
    else:
        layout = {nodes[0]: np.array([0.0, 0.0])}
    sx, sy = _sx_sy_builder([layout[n][0] for n in nodes], [layout[n][1] for n in nodes],
                            width_px, height_px, margin)
    junction_types = {face_key(j.node): j.local_type for j in dg.junctions}

    for a, b in sorted(graph.edges, key=lambda e: tuple(sorted(e))):
        data = graph.edges[a, b]
        multiplicity = data['multiplicity']
        x1, y1 = sx(layout[a][0]), sy(layout[a][1])
        x2, y2 = sx(layout[b][0]), sy(layout[b][1])
        d.append(draw.Line(x1, y1, x2, y2, stroke=CELL_STROKE, stroke_width=1 + abs(multiplicity)))
        d.append(draw.Text(str(multiplicity), 11, (x1 + x2) / 2 + 4, (y1 + y2) / 2 - 4, fill=CELL_STROKE))

    for node in nodes:
        x, y = sx(layout[node][0]), sy(layout[node][1])
        kind, face = node
        local_type = junction_types.get(face)
        if local_type is None:
            d.append(draw.Circle(x, y, 2, fill='#95a5a6'))
            continue
        d.append(draw.Circle(x, y, 7, fill=JUNCTION_COLORS.get(local_type, 'black')))
        d.append(draw.Text(local_type, 10, x + 9, y - 9, fill='black'))
    return d


def render_complex(c: TropicalComplex, filename: Optional[str] = None) -> str:
    """Render a complex to SVG.

    Args:
        c: a planar or three-dimensional complex
        filename: optional path to write the SVG to

    Returns:
        SVG content as string
    """
    drawing = render_planar(c) if c.dim == 2 else render_discriminant(c)
    if filename:
        drawing.save_svg(filename)
        logger.info("wrote %s", filename)
    return drawing.as_svg()


def legend(c: TropicalComplex) -> List[str]:
    """Plain-text lines describing what the figure marks."""
    lines = [f"{c.name}: dimension {c.dim}, {len(c.cells)} cells, {len(c.loci)} singular loci"]
    if c.dim == 2:
        lines.extend(f"  point on {'-'.join(face_key(l.face))} in {l.cell}: multiplicity {l.multiplicity}"
                     for l in c.loci)
    else:
        summary = discriminant_graph(c).summary()
        lines.append(f"  junctions: {summary['junctions']}")
        lines.append(f"  segments: {summary['segments']}, circles: {summary['circles']}")
    return lines
