"""Isomorphism testing of complexes through invariant-labelled incidence graphs."""

import logging
from collections import Counter

import networkx as nx

from tropical.complex import TropicalComplex, analyse_pl
from tropical.discriminant import find_junctions

logger = logging.getLogger(__name__)


def _cell_label(cell) -> tuple:
    return ('cell', cell.dim, len(cell.coords), cell.lattice_point_count(), cell.lattice_point_count(strict=True))


def _vertex_label(c: TropicalComplex, v: str) -> tuple:
    analysis = analyse_pl(c, v)
    kinks = tuple(sorted(analysis.kinks.values())) if analysis is not None else None
    return ('vertex', len(c.vertex_cells[v]), len(c.used_rays(v)), kinks)


def complex_invariant_graph(c: TropicalComplex) -> nx.Graph:
    """Cells, vertices, loci and junctions as labelled nodes joined by incidence."""
    graph = nx.Graph()
    for cell in c.cells:
        graph.add_node(('c', cell.name), label=_cell_label(cell))
    for v in c.vertices:
        graph.add_node(('v', v), label=_vertex_label(c, v))
        for cell in c.vertex_cells[v]:
            graph.add_edge(('v', v), ('c', cell))
    for index, locus in enumerate(c.loci):
        node = ('l', index)
        crossing = locus.face if locus.edge is None else locus.edge
        graph.add_node(node, label=('locus', abs(locus.multiplicity), locus.local_type, locus.tag, len(locus.face)))
        for cell in c.cells_with_face(locus.face):
            graph.add_edge(node, ('c', cell))
        for v in crossing:
            graph.add_edge(node, ('v', v))
    if c.dim == 3:
        for index, junction in enumerate(find_junctions(c)):
            node = ('j', index)
            graph.add_node(node, label=('junction', junction.local_type, junction.valency, junction.degree))
            for leg in junction.legs:
                graph.add_edge(node, ('l', leg))
    return graph


def _labels(graph: nx.Graph) -> Counter:
    return Counter(repr(data['label']) for _, data in graph.nodes(data=True))


def isomorphic(a: TropicalComplex, b: TropicalComplex) -> bool:
    """Whether a and b agree up to relabelling of cells and vertices on every recorded invariant."""
    if a.dim != b.dim:
        return False
    ga, gb = complex_invariant_graph(a), complex_invariant_graph(b)
    if ga.number_of_nodes() != gb.number_of_nodes() or ga.number_of_edges() != gb.number_of_edges():
        logger.info("isomorphism %s vs %s: sizes differ", a.name, b.name)
        return False
    if _labels(ga) != _labels(gb):
        logger.info("isomorphism %s vs %s: invariant labels differ", a.name, b.name)
        return False
    result = nx.is_isomorphic(ga, gb, node_match=lambda x, y: x['label'] == y['label'])
    logger.info("isomorphism %s vs %s: %s", a.name, b.name, result)
    return result
