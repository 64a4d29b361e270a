import logging
import os
import random
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from builders.elliptic import build_A, build_Aprime, smooth_inner, smooth_outer, verify_mirror_pair
from builders.local_models import (
    ConifoldParams,
    affine_Ak_B,
    affine_Ak_Bdual,
    affine_Ak_dual_resolution,
    affine_Ak_dual_smoothing,
    affine_Ak_resolution,
    affine_Ak_smoothing,
    generalized_conifold_B,
    generalized_conifold_resolution,
    generalized_conifold_smoothing,
    orb_trivalent_negative,
    orb_trivalent_positive,
    orbifolded_conifold_B,
    orbifolded_conifold_resolution,
    orbifolded_conifold_smoothing,
)
from builders.schoen import (
    build_O,
    classify_points,
    resolve_G,
    resolve_O,
    smooth_G,
    smooth_G_intermediate,
    smooth_O,
    verify_pair,
)
from geometry.lattice import as_matrix, det2, identity_matrix, mat_inverse, mat_vec, transpose
from geometry.legal_loops import fibration_invariants, generate_legal_loops, twelve_w
from geometry.polygons import catalog_entry, f3_star, f4_star, reflexive_catalog, toric_oracle, twelve_sum
from tropical.complex import TropicalComplex, euler_characteristic, face_key
from tropical.constructions import boundary_double, interior
from tropical.discriminant import is_simple_positive
from tropical.isomorphism import isomorphic
from tropical.legendre import legendre_dual
from tropical.monodromy import ChamberPath, MonodromyError, edge_multiplicity_from_monodromy, monodromy
from tropical.refinement import cut_cell, normalize
from tropical.validation import validate

logger = logging.getLogger(__name__)

SUITES = ("twelve", "twelve-w", "monodromy", "orbifolded", "legendre", "elliptic", "simplicity", "schoen", "mutation")
EXAMPLE_PAIR = ("schoen_example_p1", "schoen_example_p2")


def sweep_workers() -> int:
    """Worker processes for the Schoen sweep, from TROPICAL_SWEEP_WORKERS."""
    raw = os.getenv('TROPICAL_SWEEP_WORKERS', '1')
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        raise RuntimeError(f"Invalid TROPICAL_SWEEP_WORKERS '{raw}': expected an integer >= 1!")
    return workers


@dataclass
class SuiteResult:
    """Outcome of one suite: how many checks ran and what failed."""
    suite: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    details: Dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, condition: bool, message: str):
        self.checks += 1
        if not condition:
            self.failures.append(message)

    def to_dict(self) -> Dict:
        return {'suite': self.suite, 'ok': self.ok, 'checks': self.checks, 'failures': self.failures,
                'details': self.details, 'elapsed': round(self.elapsed, 3)}

    def to_text(self) -> str:
        lines = [f"{self.suite}: {'PASS' if self.ok else 'FAIL'} ({self.checks} checks, {self.elapsed:.2f}s)"]
        lines.extend(f"  - {failure}" for failure in self.failures[:20])
        if len(self.failures) > 20:
            lines.append(f"  ... {len(self.failures) - 20} more")
        return "\n".join(lines)


def _labels_match_monodromy(c: TropicalComplex) -> List[str]:
    wrong = []
    for index, locus in enumerate(c.loci):
        try:
            recomputed = edge_multiplicity_from_monodromy(monodromy(c, locus.loop))
        except MonodromyError as exc:
            wrong.append(f"{c.name} locus {index}: {exc}")
            continue
        if recomputed != locus.multiplicity:
            wrong.append(f"{c.name} locus {index}: labelled {locus.multiplicity}, monodromy gives {recomputed}")
    return wrong


def _dual_shears_match(c: TropicalComplex, shears: Sequence) -> List[str]:
    """Every leg of c must turn by the inverse transpose of one of shears, in either direction.

    Each shear has to account for exactly two legs, as on the four-valent conifold point.
    """
    expected = [transpose(mat_inverse(m)) for m in shears]
    used = Counter()
    wrong = []
    for index, locus in enumerate(c.loci):
        m = monodromy(c, locus.loop).linear
        hits = [i for i, e in enumerate(expected) if m in (e, mat_inverse(e))]
        if not hits:
            wrong.append(f"{c.name} locus {index}: monodromy {m} is none of {expected}")
        else:
            used[hits[0]] += 1
    if not wrong and sorted(used.values()) != [2] * len(expected):
        wrong.append(f"{c.name}: legs per shear {dict(used)}")
    return wrong


def _random_triangle(rng: random.Random, box: int = 4) -> List[Tuple[int, int]]:
    while True:
        points = [(rng.randint(-box, box), rng.randint(-box, box)) for _ in range(3)]
        a, b, c = points
        if det2((b[0] - a[0], b[1] - a[1]), (c[0] - a[0], c[1] - a[1])) != 0:
            return points


def _sweep_pair(indices: Tuple[int, int]) -> Dict:
    catalog = reflexive_catalog()
    started = time.perf_counter()
    report = verify_pair(catalog[indices[0]], catalog[indices[1]], mirror=False)
    record = report.to_dict()
    record['elapsed'] = time.perf_counter() - started
    return record


class VerificationAgent:
    """Runs the acceptance suites over the builders and records what held."""

    def __init__(self, seed: int = 0, loop_count: int = 1000, triangle_count: int = 20,
                 workers: Optional[int] = None, mutation_count: int = 500):
        self.seed = seed
        self.loop_count = loop_count
        self.triangle_count = triangle_count
        self.workers = workers
        self.mutation_count = mutation_count
        self.catalog = reflexive_catalog()
        self.suites: Dict[str, Callable[[SuiteResult], None]] = {
            "twelve": self.check_twelve,
            "twelve-w": self.check_twelve_w,
            "monodromy": self.check_monodromy,
            "orbifolded": self.check_orbifolded,
            "legendre": self.check_legendre,
            "elliptic": self.check_elliptic,
            "simplicity": self.check_simplicity,
            "schoen": self.check_schoen,
            "mutation": self.check_mutation,
        }

    def run_suite(self, suite: str) -> SuiteResult:
        if suite not in self.suites:
            raise ValueError(f"unknown suite '{suite}'; choose from {', '.join(SUITES)} or all")
        result = SuiteResult(suite)
        started = time.perf_counter()
        self.suites[suite](result)
        result.elapsed = time.perf_counter() - started
        logger.info("suite %s: %d checks, %d failures", suite, result.checks, len(result.failures))
        return result

    def run(self, suites: Sequence[str]) -> List[SuiteResult]:
        names = SUITES if "all" in suites else tuple(suites)
        return [self.run_suite(name) for name in names]

    # The "12" machinery

    def check_twelve(self, result: SuiteResult):
        stars = [(P.name, P.star()) for P in self.catalog] + [("f3", f3_star()), ("f4", f4_star())]
        for name, star in stars:
            lhs, oracle = twelve_sum(star), toric_oracle(star)
            result.check(lhs == 12, f"{name}: twelve_sum gives {lhs}")
            result.check(oracle == 12, f"{name}: toric oracle gives {oracle}")
        result.details['stars'] = len(stars)

    def check_twelve_w(self, result: SuiteResult):
        loops = generate_legal_loops(self.seed, self.loop_count)
        windings = Counter()
        signatures = Counter()
        for index, loop in enumerate(loops):
            try:
                lhs, w, holds = twelve_w(loop)
            except AssertionError as exc:
                result.check(False, f"loop {index}: {exc}")
                continue
            windings[w] += 1
            result.check(holds, f"loop {index} {[list(v) for v in loop.vectors]}: {lhs} != 12·{w}")
            invariants = fibration_invariants(loop)
            result.check(invariants.signature_divisible_by_eight,
                         f"loop {index}: signature {invariants.signature} is not a multiple of 8")
            signatures[str(invariants.signature)] += 1
        result.details['loops'] = len(loops)
        result.details['windings'] = dict(sorted(windings.items()))
        result.details['signatures'] = dict(sorted(signatures.items()))

    # Local models

    def check_monodromy(self, result: SuiteResult):
        for k in range(1, 6):
            c, dual = affine_Ak_B(k), affine_Ak_Bdual(k)
            result.check(monodromy(c, c.loci[0].loop).linear == as_matrix([[1, 0], [k, 1]]),
                         f"affine A{k - 1}: monodromy is not [[1,0],[{k},1]]")
            result.check(monodromy(dual, dual.loci[0].loop).linear == as_matrix([[1, -k], [0, 1]]),
                         f"dual affine A{k - 1}: monodromy is not [[1,-{k}],[0,1]]")
        for k, l in product(range(1, 5), repeat=2):
            p = ConifoldParams(k, l)
            g = generalized_conifold_B(p)
            horizontal = monodromy(g, ChamberPath(("plus", "minus"), ("c", "a"), "c")).linear
            vertical = monodromy(g, ChamberPath(("plus", "minus"), ("a", "b"), "a")).linear
            result.check(horizontal == as_matrix([[1, 0, 0], [0, 1, 0], [0, k, 1]]),
                         f"generalized conifold {k},{l}: horizontal monodromy {horizontal}")
            result.check(vertical == as_matrix([[1, -l, 0], [0, 1, 0], [0, 0, 1]]),
                         f"generalized conifold {k},{l}: vertical monodromy {vertical}")
            o = orbifolded_conifold_B(p)
            wrong = _dual_shears_match(o, (horizontal, vertical))
            result.check(not wrong, f"orbifolded conifold {k},{l}: " + "; ".join(wrong))
            for c in (g, o):
                wrong = _labels_match_monodromy(c)
                result.check(not wrong, "; ".join(wrong))
            result.check(sorted(abs(x.multiplicity) for x in o.loci) == sorted([k, k, l, l]),
                         f"orbifolded conifold {k},{l}: leg multiplicities {[x.multiplicity for x in o.loci]}")

    def check_orbifolded(self, result: SuiteResult):
        """Legs of the orbifolded trivalent vertex over random triangles: lengths and monodromy."""
        rng = random.Random(self.seed)
        e3 = (0, 0, 1)
        for _ in range(self.triangle_count):
            T = _random_triangle(rng)
            c = orb_trivalent_negative(T)
            prism = c.cell_map["prism"]
            lengths = []
            for locus in c.loci:
                a, b = face_key(locus.edge)
                pa, pb = prism.coords[a], prism.coords[b]
                edge = (pb[0] - pa[0], pb[1] - pa[1], 0)
                lengths.append(prism.edge_length(locus.edge))
                m = monodromy(c, locus.loop).linear
                moved = tuple(x - y for x, y in zip(mat_vec(m, e3), e3))
                result.check(moved in (edge, tuple(-x for x in edge)),
                             f"triangle {T}: leg {a}-{b} moves e3 by {moved}, edge is {edge[:2]}")
                result.check([row[:2] for row in m] == [row[:2] for row in identity_matrix(3)],
                             f"triangle {T}: leg {a}-{b} does not fix the base plane")
            result.check(sorted(abs(x.multiplicity) for x in c.loci) == sorted(lengths),
                         f"triangle {T}: multiplicities {[x.multiplicity for x in c.loci]}, lengths {lengths}")
            wrong = _labels_match_monodromy(c)
            result.check(not wrong, "; ".join(wrong))
        result.details['triangles'] = self.triangle_count

    def check_legendre(self, result: SuiteResult):
        locals_ = [affine_Ak_B(k) for k in (1, 2, 3)] + [affine_Ak_Bdual(k) for k in (1, 2, 3)]
        locals_ += [generalized_conifold_B(ConifoldParams(k, l)) for k, l in ((1, 1), (2, 1), (1, 3), (2, 2))]
        locals_ += [orb_trivalent_negative([(0, 0), (2, 0), (0, 1)]), orb_trivalent_positive([(0, 0), (2, 0), (0, 1)])]
        for c in locals_:
            result.check(isomorphic(legendre_dual(legendre_dual(c)), c), f"{c.name}: double dual differs")
            if c.dim == 2:
                for cell in c.cells:
                    if len(cell.vertices) >= 4:
                        cut = cut_cell(c, cell.name, (cell.vertices[0], cell.vertices[2]))
                        result.check(isomorphic(normalize(cut), normalize(c)),
                                     f"{c.name}: cutting {cell.name} changes the normal form")
        for k, l in ((1, 1), (2, 1), (1, 3)):
            p = ConifoldParams(k, l)
            result.check(isomorphic(legendre_dual(orbifolded_conifold_B(p)), generalized_conifold_B(p)),
                         f"orbifolded conifold {k},{l} is not dual to the generalized one")
        for P in self.catalog:
            base = interior(build_A(P).base)
            twice = interior(legendre_dual(interior(legendre_dual(base))))
            result.check(isomorphic(twice, base), f"{P.name}: double dual of the elliptic interior differs")
        o = build_O(*EXAMPLE_PAIR).base
        result.check(isomorphic(legendre_dual(legendre_dual(o)), o), f"{o.name}: double dual differs")

    def check_elliptic(self, result: SuiteResult):
        for P in self.catalog:
            a, aprime = build_A(P), build_Aprime(P)
            for e in (a, aprime):
                result.check(e.total_multiplicity == 12, f"{P.name} {e.variant}: total {e.total_multiplicity}")
                result.check(e.boundary_length == P.boundary_count,
                             f"{P.name} {e.variant}: boundary length {e.boundary_length}, "
                             f"{P.boundary_count} boundary points")
            result.check(a.inner_multiplicities == sorted(P.vertex_orders), f"{P.name} A: inner {a.inner_multiplicities}")
            result.check(a.outer_multiplicities == sorted(P.edge_lengths), f"{P.name} A: outer {a.outer_multiplicities}")
            result.check(aprime.inner_multiplicities == sorted(P.edge_lengths),
                         f"{P.name} A': inner {aprime.inner_multiplicities}")
            result.check(aprime.outer_multiplicities == sorted(P.vertex_orders),
                         f"{P.name} A': outer {aprime.outer_multiplicities}")
            result.check(verify_mirror_pair(P).ok, f"{P.name}: mirror pair check failed")
            double = boundary_double(a.base)
            result.check(double.is_closed() and euler_characteristic(double) == 2,
                         f"{P.name}: doubled base is not a sphere (chi {euler_characteristic(double)})")
        self_dual = [P for P in self.catalog if P.is_self_dual()]
        result.check(len(self_dual) == 4, f"{len(self_dual)} self-dual polygons, expected 4")
        for P in self_dual:
            result.check(verify_mirror_pair(P, P).ok, f"{P.name}: self-dual mirror check failed")
        result.details['self_dual'] = [P.name for P in self_dual]

    def check_simplicity(self, result: SuiteResult):
        simple = [affine_Ak_smoothing(k) for k in range(1, 5)] + [affine_Ak_resolution(k) for k in range(1, 5)]
        simple += [affine_Ak_dual_smoothing(3), affine_Ak_dual_resolution(3)]
        for k, l in ((1, 1), (2, 1), (1, 2), (2, 2)):
            p = ConifoldParams(k, l)
            simple += [generalized_conifold_smoothing(p), generalized_conifold_resolution(p),
                       orbifolded_conifold_smoothing(p), orbifolded_conifold_resolution(p)]
        for P in self.catalog:
            simple.append(smooth_outer(smooth_inner(build_A(P))).base)
        for pair in (("p2", "p2dual"), EXAMPLE_PAIR):
            simple += [smooth_O(*pair).base, smooth_G(*pair).base, resolve_O(*pair).base, resolve_G(*pair).base]
        for c in simple:
            result.check(is_simple_positive(c).ok, f"{c.name}: smoothed or resolved but not simple and positive")
        singular = [affine_Ak_B(k) for k in range(2, 5)] + [generalized_conifold_B(ConifoldParams(2, 1))]
        singular += [build_A(P).base for P in self.catalog if max(P.vertex_orders + P.edge_lengths) > 1]
        singular.append(build_O("p2", "p2").base)
        for c in singular:
            result.check(not is_simple_positive(c).ok, f"{c.name}: unsmoothed but reported simple")
        result.details['simple'] = len(simple)
        result.details['singular'] = len(singular)

    # Schoen's threefold

    def sweep(self, pairs: Optional[Sequence[Tuple[int, int]]] = None) -> pd.DataFrame:
        """Per-pair records of the O construction over catalog pairs, one row per ordered pair."""
        pairs = list(product(range(len(self.catalog)), repeat=2)) if pairs is None else list(pairs)
        workers = self.workers if self.workers is not None else sweep_workers()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(_sweep_pair, pairs))
        else:
            records = [_sweep_pair(pair) for pair in pairs]
        return pd.DataFrame.from_records(records)

    def check_schoen(self, result: SuiteResult, pairs: Optional[Sequence[Tuple[int, int]]] = None):
        table = self.sweep(pairs)
        for record in table[~table['ok']].to_dict('records'):
            result.failures.append(f"pair {record['P1']} / {record['P2']}: {record['problems'] or 'checks failed'}")
        result.checks += len(table)
        result.details['pairs'] = len(table)
        result.details['failed_pairs'] = int((~table['ok']).sum())
        result.details['four_valent_counts'] = {int(k): int(v) for k, v in table.groupby('four_valent').size().items()}
        result.details['slowest_pair_seconds'] = round(float(table['elapsed'].max()), 3) if len(table) else 0.0
        result.details['records'] = table.drop(columns=['elapsed']).to_dict('records')

        example = verify_pair(*EXAMPLE_PAIR)
        result.check(example.ok, f"example pair: {example.problems}")
        result.check(example.four_valent == 12, f"example pair: {example.four_valent} four-valent points")
        result.check(example.four_valent - example.ordinary == 6,
                     f"example pair: {example.four_valent - example.ordinary} non-ordinary points")
        P1, P2 = catalog_entry(EXAMPLE_PAIR[0]), catalog_entry(EXAMPLE_PAIR[1])
        nodes = classify_points(smooth_G_intermediate(P1.dual(), P2.dual()))
        result.check(len(nodes) == 18, f"intermediate G smoothing has {len(nodes)} nodes")
        result.details['example'] = example.to_dict()

    def check_mutation(self, result: SuiteResult):
        from agents.mutation_agent import MutationAgent
        report = MutationAgent(seed=self.seed).run(self.mutation_count)
        result.check(report.detection_rate >= 0.95, f"only {report.detection_rate:.1%} of mutations detected")
        for record in report.undetected:
            result.check(record['isomorphic'], f"undetected mutation changes the complex: {record['description']}")
        result.details.update(report.to_dict())
