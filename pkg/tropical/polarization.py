"""Strictly convex multivalued PL functions found by linear programming.

At every vertex with at least two cells the unknowns are one gradient per cell; every
interior wall F contributes a kink κ_F ≥ 1 shared by all vertices of F, tied to the
gradients by n_σ − n_τ = κ_F·ν where ν is the wall's normal positive on σ. The
smallest total kink is found with scipy's HiGHS solver and then made exact.
"""

import logging
from fractions import Fraction
from math import lcm
from typing import Dict, List, Tuple

import numpy as np
from scipy.optimize import linprog

from geometry.lattice import LatticeVector, dot
from tropical.complex import Face, TropicalComplex, face_key, wall_normal
from tropical.validation import ComplexBuilder

logger = logging.getLogger(__name__)


class PolarizationError(ValueError):
    """Raised when no strictly convex PL function exists on the complex."""


def _walls_at(c: TropicalComplex, v: str) -> List[Face]:
    return [f for f in c.interior_facets if v in f]


def _solve_kinks(c: TropicalComplex, vertices: List[str]) -> Dict[Face, Fraction]:
    walls = list(c.interior_facets)
    wall_index = {f: i for i, f in enumerate(walls)}
    columns: Dict[Tuple[str, str], int] = {}
    for v in vertices:
        for cell in c.vertex_cells[v][1:]:
            columns[(v, cell)] = len(walls) + len(columns) * c.dim
    size = len(walls) + len(columns) * c.dim
    rows, rhs = [], []
    for f in walls:
        a, b = c.facet_cells[f]
        for v in face_key(f):
            normal = wall_normal(c, v, f, a)
            for t in range(c.dim):
                row = np.zeros(size)
                if (v, a) in columns:
                    row[columns[(v, a)] + t] += 1
                if (v, b) in columns:
                    row[columns[(v, b)] + t] -= 1
                row[wall_index[f]] -= normal[t]
                rows.append(row)
                rhs.append(0.0)
    objective = np.zeros(size)
    objective[:len(walls)] = 1
    bounds = [(1, None)] * len(walls) + [(None, None)] * (size - len(walls))
    result = linprog(objective, A_eq=np.array(rows) if rows else None, b_eq=np.array(rhs) if rows else None,
                     bounds=bounds, method='highs')
    if not result.success:
        raise PolarizationError(f"no strictly convex PL function on {c.name or 'complex'}: {result.message}")
    return {f: Fraction(float(result.x[i])).limit_denominator(1000) for f, i in wall_index.items()}


def _propagate(c: TropicalComplex, v: str, kinks: Dict[Face, Fraction]) -> Dict[str, Tuple[Fraction, ...]]:
    """Gradients at v from the kinks, walking across walls from the first cell."""
    cells = c.vertex_cells[v]
    gradients = {cells[0]: (Fraction(0),) * c.dim}
    queue = [cells[0]]
    walls = _walls_at(c, v)
    while queue:
        here = queue.pop()
        for f in walls:
            a, b = c.facet_cells[f]
            if here not in (a, b):
                continue
            normal = wall_normal(c, v, f, a)
            step = tuple(kinks[f] * x for x in normal)
            if here == a:
                other, value = b, tuple(x - s for x, s in zip(gradients[a], step))
            else:
                other, value = a, tuple(x + s for x, s in zip(gradients[b], step))
            if other in gradients:
                if gradients[other] != value:
                    raise PolarizationError(f"kinks around {v} do not close up")
                continue
            gradients[other] = value
            queue.append(other)
    for cell in cells:
        gradients.setdefault(cell, (Fraction(0),) * c.dim)
    return gradients


def polarize(c: TropicalComplex) -> TropicalComplex:
    """c with a strictly convex integral PL function at every vertex shared by two or more cells.

    Raises:
        PolarizationError: if the kink system is infeasible or its solution cannot be made exact.
    """
    vertices = [v for v in c.vertices if len(c.vertex_cells[v]) >= 2]
    kinks = _solve_kinks(c, vertices)
    gradients = {v: _propagate(c, v, kinks) for v in vertices}
    denominators = [x.denominator for k in kinks.values() for x in (k,)]
    denominators += [x.denominator for gs in gradients.values() for g in gs.values() for x in g]
    scale = lcm(*denominators) if denominators else 1
    builder = ComplexBuilder(c.dim, name=c.name)
    builder.metadata.update(c.metadata)
    for cell in c.cells:
        builder.add_cell(cell.name, cell.coords)
    for fan in c.fans:
        for name, chart in fan.charts.items():
            builder.set_chart(name, fan.vertex, chart)
    for v in vertices:
        values: Dict[LatticeVector, int] = {}
        for cell, gradient in gradients[v].items():
            integral = tuple(int(x * scale) for x in gradient)
            for ray in c.cone_rays(v, cell).values():
                values[ray] = dot(integral, ray)
        builder.set_pl(v, values)
    for locus in c.loci:
        builder.add_locus(locus.face, locus.edge, tag=locus.tag, loop=locus.loop)
    logger.debug("polarized %s with total kink %s (scale %d)", c.name, sum(kinks.values()), scale)
    try:
        return builder.build()
    except ValueError as exc:
        raise PolarizationError(f"rounded PL function is not valid: {exc}") from exc
