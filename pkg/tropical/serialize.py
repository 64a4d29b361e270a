"""Versioned JSON encoding of tropical complexes."""

import json
import logging
from typing import Dict, Union

from geometry.lattice import LatticeError, LatticeVector, UnimodularMap, as_matrix
from tropical.complex import Cell, DiscriminantLocus, Gluing, TropicalComplex, VertexFan
from tropical.monodromy import ChamberPath, MonodromyError

logger = logging.getLogger(__name__)

SCHEMA = "tropical-complex"
SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """Malformed input; offset is the byte position of the problem when known."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class SchemaVersionError(SchemaError):
    pass


def to_document(c: TropicalComplex) -> Dict:
    document = {'schema': SCHEMA, 'version': SCHEMA_VERSION}
    document.update(c.to_dict())
    return document


def serialize(c: TropicalComplex) -> bytes:
    """Deterministic UTF-8 JSON for c."""
    return (json.dumps(to_document(c), sort_keys=True, indent=1, ensure_ascii=False) + "\n").encode('utf-8')


def _cell(data: Dict) -> Cell:
    return Cell(data['name'], {v: tuple(p) for v, p in data['vertices'].items()})


def _fan(data: Dict) -> VertexFan:
    pl = None
    if 'pl' in data:
        pl = {LatticeVector(tuple(ray)): int(value) for ray, value in data['pl']}
    return VertexFan(data['vertex'], {cell: as_matrix(m) for cell, m in data['charts'].items()}, pl)


def _gluing(data: Dict) -> Gluing:
    a, b = data['cells']
    return Gluing(a, b, frozenset(data['facet']), data['vertex'],
                  UnimodularMap(as_matrix(data['linear']), LatticeVector(tuple(data['translation']))))


def _locus(data: Dict) -> DiscriminantLocus:
    edge = frozenset(data['edge']) if 'edge' in data else None
    return DiscriminantLocus(data['cell'], frozenset(data['face']), int(data['multiplicity']),
                             ChamberPath.from_dict(data['loop']), edge, data.get('local_type', 'A-edge'),
                             data.get('tag', ''))


def from_document(document: Dict) -> TropicalComplex:
    if not isinstance(document, dict) or document.get('schema') != SCHEMA:
        raise SchemaError(f"not a {SCHEMA} document")
    if document.get('version') != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"schema version {document.get('version')!r} is not supported (expected {SCHEMA_VERSION})")
    try:
        return TropicalComplex(
            dim=int(document['dim']),
            cells=tuple(_cell(d) for d in document['cells']),
            fans=tuple(_fan(d) for d in document['fans']),
            gluings=tuple(_gluing(d) for d in document['gluings']),
            loci=tuple(_locus(d) for d in document['loci']),
            name=document.get('name', ''),
            metadata=document.get('metadata', {}),
        )
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}") from exc
    except (AttributeError, TypeError, ValueError, LatticeError, MonodromyError) as exc:
        raise SchemaError(f"invalid complex data: {exc}") from exc


def deserialize(data: Union[bytes, str]) -> TropicalComplex:
    """Parse a document written by serialize.

    Raises:
        SchemaError: for malformed JSON (with its byte offset) or missing fields.
        SchemaVersionError: for a document of another schema version.
    """
    raw = data.encode('utf-8') if isinstance(data, str) else data
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as exc:
        raise SchemaError("input is not UTF-8", exc.start) from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode('utf-8'))
        raise SchemaError(f"malformed JSON: {exc.msg}", offset) from exc
    complex_ = from_document(document)
    logger.debug("deserialized %s with %d cells", complex_.name, len(complex_.cells))
    return complex_


def save(c: TropicalComplex, path: str):
    with open(path, 'wb') as f:
        f.write(serialize(c))


def load(path: str) -> TropicalComplex:
    with open(path, 'rb') as f:
        return deserialize(f.read())
