"""Discriminant graphs, junction types, simplicity checks and invariant lines."""

import functools
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from geometry.lattice import LatticeError, LatticeVector, Matrix, cross3, dot
from tropical.complex import Face, TropicalComplex, face_key, face_label
from tropical.monodromy import (
    MonodromyError, edge_multiplicity_from_monodromy, monodromy, shear_image, shear_normal, shear_part,
)

logger = logging.getLogger(__name__)

JUNCTION_NAMES = {
    (3, -1): "trivalent-",
    (3, 1): "trivalent+",
    (4, -1): "fourvalent-generalized",
    (4, 1): "fourvalent-orbifolded",
}
SIMPLE_JUNCTIONS = ("trivalent-", "trivalent+")


def junction_name(valency: int, sign: int) -> str:
    if valency >= 5:
        return "gorenstein-" if sign < 0 else "gorenstein+"
    return JUNCTION_NAMES.get((valency, sign), "degenerate")


@dataclass(frozen=True)
class Junction:
    """A vertex of valency ≥ 3 of the discriminant graph."""
    node: Face
    legs: Tuple[int, ...]
    local_type: str
    degree: Optional[int]
    leg_vectors: Tuple[LatticeVector, ...] = ()
    problems: Tuple[str, ...] = ()

    @property
    def valency(self) -> int:
        return len(self.legs)

    @property
    def sign(self) -> int:
        if self.local_type.endswith("-") or self.local_type.endswith("generalized"):
            return -1
        return 1

    def to_dict(self) -> Dict:
        return {'node': list(face_key(self.node)), 'legs': list(self.legs), 'type': self.local_type,
                'degree': self.degree, 'valency': self.valency}


# ------------------------------------------------------------
# Junction classification
# ------------------------------------------------------------

def _plane_det(a: Sequence[int], b: Sequence[int], frame: Sequence[int]) -> Fraction:
    j = next(i for i, x in enumerate(frame) if x)
    return Fraction(cross3(a, b)[j], frame[j])


def _balanced_signs(vectors: Sequence[LatticeVector]) -> Optional[Tuple[int, ...]]:
    """Signs s with s₀ = 1 and Σ sᵢuᵢ = 0, preferring no flips."""
    n = len(vectors)
    for flips in range(n):
        for chosen in itertools.combinations(range(1, n), flips):
            signs = tuple(-1 if i in chosen else 1 for i in range(n))
            total = [sum(s * v[t] for s, v in zip(signs, vectors)) for t in range(3)]
            if not any(total):
                return signs
    return None


def junction_degree(vectors: Sequence[LatticeVector], frame: Sequence[int]) -> int:
    """Twice the area of the polygon whose edges are the balanced leg vectors.

    The vectors lie in the plane annihilated by frame; areas are measured in that plane's lattice.
    """
    reference = vectors[0]

    def half(u):
        d = _plane_det(reference, u, frame)
        return 0 if d > 0 or (d == 0 and dot(reference, u) > 0) else 1

    def compare(a, b):
        ha, hb = half(a), half(b)
        if ha != hb:
            return ha - hb
        d = _plane_det(a, b, frame)
        return -1 if d > 0 else (1 if d < 0 else 0)

    ordered = sorted(vectors, key=functools.cmp_to_key(compare))
    twice_area = sum(_plane_det(ordered[i], ordered[j], frame)
                     for i in range(len(ordered)) for j in range(i + 1, len(ordered)))
    return abs(int(twice_area))


def classify_junction(shears: Sequence[Matrix]) -> Tuple[str, Optional[int], Tuple[LatticeVector, ...], List[str]]:
    """Type and degree of a junction from the shears N = M − I of its legs.

    Legs sharing a kernel normal make a negative junction whose leg vectors are the
    shear images; legs sharing an image make a positive one whose leg vectors are
    the kernel normals.
    """
    problems: List[str] = []
    if any(not any(any(row) for row in n) for n in shears):
        return "degenerate", None, (), ["a leg has trivial monodromy"]
    normals = [shear_normal(n) for n in shears]
    images = [shear_image(n) for n in shears]
    common_normal = all(m in (normals[0], -normals[0]) for m in normals)
    common_image = all(w in (images[0], -images[0]) for w in images)
    if common_normal == common_image:
        return "degenerate", None, (), ["legs share neither a kernel nor an image direction"
                                        if not common_normal else "all legs have the same shear direction"]
    if common_normal:
        sign, frame = -1, normals[0]
        j = next(i for i, x in enumerate(frame) if x)
        vectors = [LatticeVector(tuple(row[j] // frame[j] for row in n)) for n in shears]
    else:
        sign, frame = 1, images[0]
        r = next(i for i, x in enumerate(frame) if x)
        vectors = [LatticeVector(tuple(x // frame[r] for x in n[r])) for n in shears]
    local_type = junction_name(len(shears), sign)
    signs = _balanced_signs(vectors)
    if signs is None:
        problems.append("leg vectors do not balance")
        return local_type, None, tuple(vectors), problems
    vectors = [v * s for v, s in zip(vectors, signs)]
    return local_type, junction_degree(vectors, frame), tuple(vectors), problems


def _leg_shears(c: TropicalComplex, node: Face, legs: Sequence[int]) -> List[Matrix]:
    base = face_key(node)[0]
    shears = []
    for index in legs:
        locus = c.loci[index]
        n = shear_part(monodromy(c, locus.loop, base=base))
        if locus.edge == node:
            n = tuple(tuple(-x for x in row) for row in n)
        shears.append(n)
    return shears


def _locus_graph(c: TropicalComplex) -> nx.Graph:
    graph = nx.Graph()
    for index, locus in enumerate(c.loci):
        if locus.edge is None:
            graph.add_node(('point', face_key(locus.face)), face=locus.face, loci=(index,))
            continue
        head, tail = ('face', face_key(locus.face)), ('edge', face_key(locus.edge))
        graph.add_node(head, face=locus.face)
        graph.add_node(tail, face=locus.edge)
        graph.add_edge(head, tail, locus=index, multiplicity=locus.multiplicity, tag=locus.tag)
    return graph


def find_junctions(c: TropicalComplex, graph: Optional[nx.Graph] = None) -> Tuple[Junction, ...]:
    graph = _locus_graph(c) if graph is None else graph
    junctions = []
    for node in sorted(graph.nodes):
        if graph.degree(node) < 3:
            continue
        face = graph.nodes[node]['face']
        legs = tuple(sorted(graph.edges[node, other]['locus'] for other in graph.neighbors(node)))
        try:
            local_type, degree, vectors, problems = classify_junction(_leg_shears(c, face, legs))
        except (MonodromyError, LatticeError) as exc:
            local_type, degree, vectors, problems = "degenerate", None, (), [str(exc)]
        junctions.append(Junction(face, legs, local_type, degree, vectors, tuple(problems)))
    return tuple(junctions)


# ------------------------------------------------------------
# The discriminant graph
# ------------------------------------------------------------

class DiscriminantGraph:
    """The discriminant as a graph: half-legs are edges, face barycenters and edge midpoints are nodes."""

    def __init__(self, graph: nx.Graph, junctions: Sequence[Junction], dim: int):
        self.graph = graph
        self.junctions = tuple(junctions)
        self.dim = dim

    def multiplicities(self) -> List[int]:
        if self.dim == 2:
            return sorted(data['multiplicity'] for _, data in self.graph.nodes(data=True))
        return sorted(data['multiplicity'] for _, _, data in self.graph.edges(data=True))

    def junction_types(self) -> Counter:
        return Counter(j.local_type for j in self.junctions)

    def four_valent(self) -> List[Junction]:
        return [j for j in self.junctions if j.valency == 4]

    def segments(self) -> List[Dict]:
        """Maximal chains of half-legs between junctions or free ends; closed chains are circles."""
        graph = self.graph
        branch = {n for n in graph.nodes if graph.degree(n) != 2}
        seen = set()
        found = []
        for start in sorted(branch):
            for nxt in sorted(graph.neighbors(start)):
                edge_key = frozenset((start, nxt))
                if edge_key in seen:
                    continue
                chain, previous, current = [], start, nxt
                seen.add(edge_key)
                chain.append(graph.edges[previous, current]['locus'])
                while current not in branch:
                    following = next(n for n in graph.neighbors(current) if n != previous)
                    seen.add(frozenset((current, following)))
                    chain.append(graph.edges[current, following]['locus'])
                    previous, current = current, following
                found.append({'loci': sorted(chain), 'circle': False})
        for u, v in sorted(graph.edges, key=lambda e: tuple(sorted(e))):
            if frozenset((u, v)) in seen:
                continue
            cycle = nx.node_connected_component(graph, u)
            loci = sorted(graph.edges[a, b]['locus'] for a, b in graph.subgraph(cycle).edges)
            for a, b in graph.subgraph(cycle).edges:
                seen.add(frozenset((a, b)))
            found.append({'loci': loci, 'circle': True})
        return found

    def summary(self) -> Dict:
        segments = self.segments() if self.dim == 3 else []
        return {
            'dimension': self.dim,
            'loci': self.graph.number_of_edges() if self.dim == 3 else self.graph.number_of_nodes(),
            'multiplicities': self.multiplicities(),
            'junctions': dict(sorted(self.junction_types().items())),
            'junction_degrees': sorted(j.degree for j in self.junctions if j.degree is not None),
            'four_valent': len(self.four_valent()),
            'segments': len([s for s in segments if not s['circle']]),
            'circles': len([s for s in segments if s['circle']]),
            'components': nx.number_connected_components(self.graph) if self.graph.number_of_nodes() else 0,
        }


def discriminant_graph(c: TropicalComplex) -> DiscriminantGraph:
    """The discriminant graph with every multiplicity recomputed from monodromy.

    Raises:
        MonodromyError: when a stored multiplicity disagrees with its monodromy.
    """
    for index, locus in enumerate(c.loci):
        recomputed = edge_multiplicity_from_monodromy(monodromy(c, locus.loop))
        if recomputed != locus.multiplicity:
            raise MonodromyError(
                f"locus {index} on {face_label(locus.face)} is labelled {locus.multiplicity} "
                f"but its monodromy gives {recomputed}")
    graph = _locus_graph(c)
    for index, locus in enumerate(c.loci):
        if locus.edge is None:
            graph.nodes[('point', face_key(locus.face))]['multiplicity'] = locus.multiplicity
    junctions = find_junctions(c, graph) if c.dim == 3 else ()
    logger.debug("discriminant of %s: %d loci, %d junctions", c.name, len(c.loci), len(junctions))
    return DiscriminantGraph(graph, junctions, c.dim)


@dataclass(frozen=True)
class SimplicityReport:
    ok: bool
    violations: Tuple[str, ...]

    def __bool__(self):
        return self.ok

    def to_dict(self) -> Dict:
        return {'simple_positive': self.ok, 'violations': list(self.violations)}


def is_simple_positive(c: TropicalComplex) -> SimplicityReport:
    """Every multiplicity is ±1 and every junction is a trivalent vertex of degree one."""
    violations: List[str] = []
    for index, locus in enumerate(c.loci):
        if abs(locus.multiplicity) != 1:
            violations.append(f"locus {index} on {face_label(locus.face)} has multiplicity {locus.multiplicity}")
    if c.dim == 3:
        for junction in find_junctions(c):
            if junction.local_type not in SIMPLE_JUNCTIONS:
                violations.append(f"junction at {face_label(junction.node)} is {junction.local_type}")
            elif junction.degree != 1:
                violations.append(f"junction at {face_label(junction.node)} has degree {junction.degree}")
    report = SimplicityReport(not violations, tuple(violations))
    logger.info("simplicity of %s: %s", c.name or "complex", "ok" if report.ok else f"{len(violations)} violations")
    return report


# ------------------------------------------------------------
# Invariant lines of planar complexes
# ------------------------------------------------------------

def invariant_lines(c: TropicalComplex) -> List[List[int]]:
    """Group the singular points of a 2D complex by the straight edge chain carrying them.

    Two edges at a vertex continue each other when their fan rays there are opposite;
    the monodromy-invariant direction of a point always runs along its edge.
    """
    if c.dim != 2:
        raise MonodromyError("invariant lines are defined for planar complexes")
    parent: Dict[Face, Face] = {}

    def find(e):
        while parent.setdefault(e, e) != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for v in c.vertices:
        rays: Dict[Face, LatticeVector] = {}
        for cell in c.vertex_cells[v]:
            for w, ray in c.cone_rays(v, cell).items():
                rays.setdefault(frozenset((v, w)), ray)
        for (e1, r1), (e2, r2) in itertools.combinations(sorted(rays.items(), key=lambda item: face_key(item[0])), 2):
            if r1 == -r2:
                parent[find(e1)] = find(e2)
    groups: Dict[Face, List[int]] = {}
    for index, locus in enumerate(c.loci):
        groups.setdefault(find(locus.face), []).append(index)
    return sorted(groups.values())
