"""Holonomy of the affine structure along chamber paths, and the A-type reading of it.

Charts live at vertices: a vertex fan assigns to every cell σ containing v a
unimodular matrix A_{σ,v} taking σ-local directions to fan coordinates. Crossing
from cell c to cell d through vertex v therefore changes local coordinates by
A_{d,v}⁻¹·A_{c,v}, and a closed chamber path composes these steps.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple, Union

from geometry.lattice import (
    LatticeError, LatticeVector, Matrix, UnimodularMap, as_matrix, det2, gcd_all, identity_matrix,
    mat_inverse, mat_mul, mat_sub, mat_vec, primitive, rank,
)

logger = logging.getLogger(__name__)


class MonodromyError(ValueError):
    """Raised for malformed chamber paths and for holonomy that is not an A-type shear."""


@dataclass(frozen=True)
class ChamberPath:
    """A closed path c_0 → c_1 → ... → c_{n-1} → c_0 through maximal cells.

    The step c_i → c_{i+1} passes through vertices[i], a vertex shared by both cells.
    The holonomy is expressed in the fan coordinates of c_0 at base.
    """
    cells: Tuple[str, ...]
    vertices: Tuple[str, ...]
    base: str

    def __post_init__(self):
        cells = tuple(str(c) for c in self.cells)
        vertices = tuple(str(v) for v in self.vertices)
        if not cells:
            raise MonodromyError("a chamber path needs at least one cell")
        if len(cells) != len(vertices):
            raise MonodromyError(
                f"path is not closed: {len(cells)} cells but {len(vertices)} crossing vertices")
        object.__setattr__(self, 'cells', cells)
        object.__setattr__(self, 'vertices', vertices)
        object.__setattr__(self, 'base', str(self.base))

    def __len__(self):
        return len(self.cells)

    def rebased(self, base: str) -> 'ChamberPath':
        return ChamberPath(self.cells, self.vertices, base)

    def reversed(self) -> 'ChamberPath':
        n = len(self.cells)
        cells = (self.cells[0],) + tuple(self.cells[i] for i in range(n - 1, 0, -1))
        vertices = tuple(self.vertices[i] for i in range(n - 1, -1, -1))
        return ChamberPath(cells, vertices, self.base)

    def to_dict(self) -> Dict:
        return {'cells': list(self.cells), 'vertices': list(self.vertices), 'base': self.base}

    @classmethod
    def from_dict(cls, data: Dict) -> 'ChamberPath':
        return cls(tuple(data['cells']), tuple(data['vertices']), data['base'])


def _chart(c, cell: str, vertex: str) -> Matrix:
    if cell not in c.cell_map:
        raise MonodromyError(f"path visits unknown cell {cell}")
    if vertex not in c.cell_map[cell].coords:
        raise MonodromyError(f"vertex {vertex} is not a vertex of cell {cell}")
    fan = c.fan_map.get(vertex)
    if fan is None or cell not in fan.charts:
        raise MonodromyError(f"no chart for cell {cell} at vertex {vertex}")
    return fan.charts[cell]


def local_holonomy(c, path: ChamberPath) -> Matrix:
    """The composed transition in c_0-local coordinates."""
    n = len(path.cells)
    result = identity_matrix(c.dim)
    for i in range(n):
        here, there, v = path.cells[i], path.cells[(i + 1) % n], path.vertices[i]
        step = mat_mul(mat_inverse(_chart(c, there, v)), _chart(c, here, v))
        result = mat_mul(step, result)
    return result


def monodromy(c, path: ChamberPath, base: Optional[str] = None) -> UnimodularMap:
    """Linear holonomy of the affine structure along path.

    Args:
        c: A tropical complex (anything exposing dim, cell_map and fan_map).
        path: The closed chamber path.
        base: Vertex of path.cells[0] whose fan coordinates express the result;
            defaults to path.base.

    Raises:
        MonodromyError: if the path leaves the cells it names or a chart is missing.
    """
    base = path.base if base is None else base
    frame = _chart(c, path.cells[0], base)
    local = local_holonomy(c, path)
    result = mat_mul(mat_mul(frame, local), mat_inverse(frame))
    logger.debug("holonomy along %s at %s: %s", path.cells, base, result)
    return UnimodularMap.linear_map(result)


def _linear(m: Union[UnimodularMap, Matrix, Sequence[Sequence[int]]]) -> Matrix:
    return m.linear if isinstance(m, UnimodularMap) else as_matrix(m)


def shear_part(m: Union[UnimodularMap, Matrix]) -> Matrix:
    """N = M − I, checked to be a rank ≤ 1 nilpotent.

    Raises:
        MonodromyError: "not an A-type monodromy" otherwise.
    """
    linear = _linear(m)
    n = mat_sub(linear, identity_matrix(len(linear)))
    if any(any(row) for row in n):
        square = mat_mul(n, n)
        if rank(n) > 1 or any(any(row) for row in square):
            raise MonodromyError(f"not an A-type monodromy: {linear}")
    return n


def is_identity(m: Union[UnimodularMap, Matrix]) -> bool:
    linear = _linear(m)
    return linear == identity_matrix(len(linear))


def shear_image(n: Matrix) -> LatticeVector:
    """Primitive generator of the image of a nonzero rank-one N."""
    for j in range(len(n)):
        col = tuple(row[j] for row in n)
        if any(col):
            return primitive(LatticeVector(col))
    raise MonodromyError("the zero shear has no image direction")


def shear_normal(n: Matrix) -> LatticeVector:
    """Primitive covector whose kernel is the kernel of a nonzero rank-one N."""
    for row in n:
        if any(row):
            return primitive(LatticeVector(tuple(row)))
    raise MonodromyError("the zero shear has no kernel normal")


def edge_multiplicity_from_monodromy(m: Union[UnimodularMap, Matrix]) -> int:
    """Multiplicity k of a shear monodromy; 0 for the identity.

    In dimension two the sign is fixed by writing M = I + k·w⊗(w₂, −w₁) for the
    primitive image direction w, so [[1,0],[k,1]] and [[1,−k],[0,1]] both give k.
    In dimension three the gcd of the entries of M − I is returned.

    Raises:
        MonodromyError: for monodromy that is not a shear.
    """
    n = shear_part(m)
    if not any(any(row) for row in n):
        return 0
    if len(n) != 2:
        return gcd_all(x for row in n for x in row)
    w = shear_image(n)
    trial = (1, 0) if det2(w, (1, 0)) != 0 else (0, 1)
    image = mat_vec(n, trial)
    index = 0 if w[0] != 0 else 1
    scale, remainder = divmod(image[index], w[index])
    if remainder:
        raise MonodromyError(f"shear {n} is not integral along {w}")
    k, remainder = divmod(-scale, det2(w, trial))
    if remainder:
        raise MonodromyError(f"shear {n} has no integral multiplicity")
    return k


def shear_matrix(w: Sequence[int], k: int) -> Matrix:
    """The 2D shear I + k·w⊗(w₂, −w₁) fixing the primitive direction w."""
    w = primitive(LatticeVector(tuple(w)))
    covector = (w[1], -w[0])
    return as_matrix([[int(i == j) + k * w[i] * covector[j] for j in range(2)] for i in range(2)])


def is_shear(m: Union[UnimodularMap, Matrix]) -> bool:
    try:
        shear_part(m)
    except (MonodromyError, LatticeError):
        return False
    return True
