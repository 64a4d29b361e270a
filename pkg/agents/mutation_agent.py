import logging
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from builders.elliptic import build_A, build_Aprime
from builders.local_models import (
    ConifoldParams,
    affine_Ak_B,
    affine_Ak_Bdual,
    generalized_conifold_B,
    generalized_conifold_smoothing,
    orb_trivalent_negative,
    orbifolded_conifold_B,
)
from builders.schoen import build_O
from geometry.lattice import LatticeVector, UnimodularMap, identity_matrix, mat_mul, random_unimodular_matrix
from geometry.polygons import catalog_entry
from tropical.complex import TropicalComplex, VertexFan
from tropical.discriminant import discriminant_graph
from tropical.isomorphism import isomorphic
from tropical.validation import validate

logger = logging.getLogger(__name__)

KINDS = ("gluing", "fan", "multiplicity")

Mutation = Tuple[TropicalComplex, str]


def default_subjects() -> List[TropicalComplex]:
    """Builder outputs the mutations are applied to."""
    return [
        affine_Ak_B(2),
        affine_Ak_Bdual(3),
        build_A(catalog_entry("p2")).base,
        build_Aprime(catalog_entry("p1xp1")).base,
        generalized_conifold_B(ConifoldParams(2, 1)),
        orbifolded_conifold_B(ConifoldParams(1, 2)),
        generalized_conifold_smoothing(ConifoldParams(1, 1)),
        orb_trivalent_negative([(0, 0), (2, 0), (0, 1)]),
        build_O("p2", "p2dual").base,
    ]


def _non_identity(rng: random.Random, n: int) -> Tuple[Tuple[int, ...], ...]:
    while True:
        m = random_unimodular_matrix(rng, n, steps=rng.randint(1, 4))
        if m != identity_matrix(n):
            return m


@dataclass
class MutationReport:
    total: int = 0
    detected: int = 0
    by_kind: Counter = field(default_factory=Counter)
    detected_by_kind: Counter = field(default_factory=Counter)
    codes: Counter = field(default_factory=Counter)
    undetected: List[Dict] = field(default_factory=list)

    @property
    def detection_rate(self) -> float:
        return self.detected / self.total if self.total else 1.0

    def to_dict(self) -> Dict:
        return {
            'total': self.total,
            'detected': self.detected,
            'detection_rate': round(self.detection_rate, 4),
            'by_kind': dict(sorted(self.by_kind.items())),
            'detected_by_kind': dict(sorted(self.detected_by_kind.items())),
            'codes': dict(sorted(self.codes.items())),
            'undetected': self.undetected,
        }


class MutationAgent:
    """Corrupts single fields of builder outputs and checks that validation notices."""

    def __init__(self, seed: int = 0, subjects: Optional[List[TropicalComplex]] = None):
        self.rng = random.Random(seed)
        self.subjects = subjects if subjects is not None else default_subjects()
        self.mutators: Dict[str, Callable[[TropicalComplex], Optional[Mutation]]] = {
            "gluing": self.mutate_gluing,
            "fan": self.mutate_fan,
            "multiplicity": self.mutate_multiplicity,
        }

    def mutate_gluing(self, c: TropicalComplex) -> Optional[Mutation]:
        if not c.gluings:
            return None
        index = self.rng.randrange(len(c.gluings))
        g = c.gluings[index]
        if self.rng.random() < 0.3:
            shift = [0] * c.dim
            shift[self.rng.randrange(c.dim)] = self.rng.choice((-1, 1))
            new_map = UnimodularMap(g.map.linear, g.map.translation + LatticeVector(tuple(shift)))
            what = f"shifted by {shift}"
        else:
            new_map = UnimodularMap(mat_mul(_non_identity(self.rng, c.dim), g.map.linear), g.map.translation)
            what = "linear part composed with a unimodular matrix"
        gluings = c.gluings[:index] + (replace(g, map=new_map),) + c.gluings[index + 1:]
        return c.with_changes(gluings=gluings), f"{c.name}: gluing {g.cell_a}|{g.cell_b} at {g.vertex} {what}"

    def mutate_fan(self, c: TropicalComplex) -> Optional[Mutation]:
        shared = [fan for fan in c.fans if len(fan.charts) >= 2]
        if not shared:
            return None
        fan = shared[self.rng.randrange(len(shared))]
        cells = sorted(fan.charts)
        charts = dict(fan.charts)
        distinct = [(a, b) for i, a in enumerate(cells) for b in cells[i + 1:] if charts[a] != charts[b]]
        if distinct and self.rng.random() < 0.25:
            a, b = distinct[self.rng.randrange(len(distinct))]
            charts[a], charts[b] = charts[b], charts[a]
            what = f"charts of {a} and {b} swapped"
        else:
            cell = self.rng.choice(cells)
            charts[cell] = mat_mul(_non_identity(self.rng, c.dim), charts[cell])
            what = f"chart of {cell} composed with a unimodular matrix"
        fans = tuple(VertexFan(f.vertex, charts, f.pl) if f.vertex == fan.vertex else f for f in c.fans)
        return c.with_changes(fans=fans), f"{c.name}: at {fan.vertex} {what}"

    def mutate_multiplicity(self, c: TropicalComplex) -> Optional[Mutation]:
        if not c.loci:
            return None
        index = self.rng.randrange(len(c.loci))
        locus = c.loci[index]
        delta = self.rng.choice((-2, -1, 1, 2))
        loci = c.loci[:index] + (replace(locus, multiplicity=locus.multiplicity + delta),) + c.loci[index + 1:]
        return (c.with_changes(loci=loci),
                f"{c.name}: locus {index} relabelled {locus.multiplicity} -> {locus.multiplicity + delta}")

    @staticmethod
    def detect(c: TropicalComplex) -> List[str]:
        """Diagnostic codes raised against c; empty when nothing notices the corruption."""
        try:
            codes = validate(c).codes()
        except (ValueError, ArithmeticError, LookupError) as exc:
            return [f"rejected:{type(exc).__name__}"]
        if codes:
            return codes
        try:
            discriminant_graph(c)
        except ValueError as exc:
            return [f"monodromy:{type(exc).__name__}"]
        return []

    def run(self, count: int = 500) -> MutationReport:
        report = MutationReport()
        while report.total < count:
            original = self.subjects[self.rng.randrange(len(self.subjects))]
            kind = self.rng.choice(KINDS)
            mutation = self.mutators[kind](original)
            if mutation is None:
                continue
            mutated, description = mutation
            report.total += 1
            report.by_kind[kind] += 1
            codes = self.detect(mutated)
            if codes:
                report.detected += 1
                report.detected_by_kind[kind] += 1
                report.codes.update(codes)
                continue
            preserved = isomorphic(mutated, original)
            logger.info("undetected mutation (%s): %s", "isomorphic" if preserved else "changed", description)
            report.undetected.append({'kind': kind, 'description': description, 'isomorphic': preserved})
        logger.info("mutations: %d of %d detected", report.detected, report.total)
        return report
