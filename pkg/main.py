import argparse
import json
import logging
import os
import sys
import time
from typing import Dict, Optional, Sequence

from dotenv import load_dotenv

from agents.verification_agent import SUITES, SuiteResult, VerificationAgent
from apis.report_storage import ReportStorage
from apis.svg_renderer import legend, render_complex
from builders import elliptic, local_models, schoen
from geometry.legal_loops import (
    LoopValidationError,
    dual_loop,
    fibration_invariants,
    folded_surface,
    twelve_w,
    validate_loop,
)
from geometry.polygons import (
    ReflexivePolygon,
    StarConfiguration,
    catalog_entry,
    catalog_index,
    f3_star,
    f4_star,
    polygon_from_json,
    reflexive_catalog,
    toric_oracle,
    twelve_sum,
)
from tropical.complex import TropicalComplex, face_label
from tropical.discriminant import discriminant_graph, is_simple_positive
from tropical.legendre import legendre_dual
from tropical.monodromy import MonodromyError, edge_multiplicity_from_monodromy, monodromy
from tropical.serialize import SCHEMA, SCHEMA_VERSION, load, save

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
STARS = {"f3": f3_star, "f4": f4_star}
RULE = "=" * 50


def _emit(args, payload: Dict, text: str):
    """Print the JSON payload (tagged with the schema version) or the readable text."""
    if args.json:
        print(json.dumps({'schema': SCHEMA, 'version': SCHEMA_VERSION, **payload}, indent=2, sort_keys=True))
    else:
        print(text)


def _read_json(value: str):
    """A JSON document from a file path, or the value itself when it is inline JSON."""
    if os.path.exists(value):
        with open(value, 'r') as f:
            return json.load(f)
    if value.lstrip().startswith(('[', '{')):
        return json.loads(value)
    raise FileNotFoundError(f"no such file: {value}")


def _star(value: str) -> StarConfiguration:
    if value in STARS:
        return STARS[value]()
    if os.path.exists(value) or value.lstrip().startswith(('[', '{')):
        data = _read_json(value)
        if isinstance(data, dict):
            data = data.get('vectors', data.get('vertices'))
        return StarConfiguration.from_vectors(data)
    return catalog_entry(value).star()


def _polygon(value: str) -> ReflexivePolygon:
    if os.path.exists(value):
        with open(value, 'r') as f:
            return polygon_from_json(f.read())
    if value.lstrip().startswith('['):
        return ReflexivePolygon(json.loads(value))
    return catalog_entry(value)


def _polygon_record(index: int, P: ReflexivePolygon) -> Dict:
    return {'index': index, 'name': P.name, 'vertices': [list(v) for v in P.vertices], 'm': P.m,
            'vertex_orders': P.vertex_orders, 'edge_lengths': P.edge_lengths,
            'boundary_points': P.boundary_count, 'dual_index': catalog_index(P.dual()),
            'self_dual': P.is_self_dual()}


# ------------------------------------------------------------
# Subcommands
# ------------------------------------------------------------

def twelve_check(args) -> int:
    """2·Area + Σ orders for a star, against the toric count."""
    star = _star(args.star)
    lhs, oracle = twelve_sum(star), toric_oracle(star)
    holds = lhs == 12 and oracle == 12
    relation = "=" if lhs == 12 else "!="
    text = f"{lhs} {relation} 12·1"
    if oracle != lhs:
        text += f" (toric count {oracle})"
    _emit(args, {'lhs': lhs, 'w': 1, 'toric_oracle': oracle, 'holds': holds,
                 'vectors': [list(v) for v in star.vectors], 'orders': star.orders}, text)
    return EXIT_OK if holds else EXIT_FAILED


def loop_check(args) -> int:
    data = _read_json(args.vectors)
    if isinstance(data, dict):
        data = data.get('vectors', [])
    try:
        loop = validate_loop(data)
    except LoopValidationError as exc:
        _emit(args, {'legal': False, 'index': exc.index, 'reason': exc.reason},
              f"illegal loop at index {exc.index}: {exc.reason}")
        return EXIT_FAILED
    lhs, w, holds = twelve_w(loop)
    invariants = fibration_invariants(loop)
    folds = folded_surface(loop)
    payload = {'legal': True, 'lhs': lhs, 'w': w, 'holds': holds,
               'k_plus': invariants.k_plus, 'k_minus': invariants.k_minus,
               'folds': sorted(folds.fold_indices)}
    text = f"{lhs} {'=' if holds else '!='} 12·{w}"
    if args.dual:
        dual = dual_loop(loop)
        payload['dual'] = [list(v) for v in dual.vectors]
        text += f"\ndual loop: {payload['dual']}"
    _emit(args, payload, text)
    return EXIT_OK if holds else EXIT_FAILED


def catalog(args) -> int:
    entries = reflexive_catalog()
    indices = range(len(entries)) if args.index is None else [catalog_index(catalog_entry(args.index))]
    records = [_polygon_record(i, entries[i]) for i in indices]
    lines = [f"{r['index']:>2} {r['name']:<5} m={r['m']} orders={r['vertex_orders']} "
             f"lengths={r['edge_lengths']} boundary={r['boundary_points']} dual={r['dual_index']}"
             + (" self-dual" if r['self_dual'] else "") for r in records]
    _emit(args, {'polygons': records}, "\n".join(lines))
    return EXIT_OK


def dual(args) -> int:
    P = _polygon(args.polygon)
    Q = P.dual()
    record = {'polygon': [list(v) for v in P.vertices], 'dual': [list(v) for v in Q.vertices],
              'dual_index': catalog_index(Q)}
    _emit(args, record, f"dual of {record['polygon']}: {record['dual']} (catalog {record['dual_index']})")
    return EXIT_OK


def _build_local(args) -> TropicalComplex:
    model, operation = args.model, args.operation
    if model in ("Ak", "Akdual"):
        table = {
            ("Ak", None): local_models.affine_Ak_B,
            ("Ak", "smooth"): local_models.affine_Ak_smoothing,
            ("Ak", "resolve"): local_models.affine_Ak_resolution,
            ("Akdual", None): local_models.affine_Ak_Bdual,
            ("Akdual", "smooth"): local_models.affine_Ak_dual_smoothing,
            ("Akdual", "resolve"): local_models.affine_Ak_dual_resolution,
        }
        return table[(model, operation)](args.k)
    if model in ("generalized-conifold", "orbifolded-conifold"):
        p = local_models.ConifoldParams(args.k, args.l)
        table = {
            ("generalized-conifold", None): local_models.generalized_conifold_B,
            ("generalized-conifold", "smooth"): local_models.generalized_conifold_smoothing,
            ("generalized-conifold", "resolve"): local_models.generalized_conifold_resolution,
            ("orbifolded-conifold", None): local_models.orbifolded_conifold_B,
            ("orbifolded-conifold", "smooth"): local_models.orbifolded_conifold_smoothing,
            ("orbifolded-conifold", "resolve"): local_models.orbifolded_conifold_resolution,
        }
        return table[(model, operation)](p)
    if operation is not None:
        raise local_models.BuilderError(f"{model} has no {operation} operation")
    if args.polygon is None:
        raise local_models.BuilderError(f"{model} needs --polygon")
    vertices = _read_json(args.polygon)
    if model == "gorenstein":
        return local_models.gorenstein_vertex(vertices, args.sign)
    if args.sign > 0:
        return local_models.orb_trivalent_positive(vertices)
    return local_models.orb_trivalent_negative(vertices)


def _build_elliptic(args) -> TropicalComplex:
    star = _star(args.polygon)
    e = elliptic.build(star, args.variant)
    for kind in args.resolve or ():
        e = elliptic.resolve(e, kind)
    for kind in args.smooth or ():
        e = elliptic.smooth(e, kind)
    return e.base


def _build_schoen(args) -> TropicalComplex:
    o = schoen.build(_polygon(args.p1), _polygon(args.p2), args.variant, args.operation)
    return o.base


def build(args) -> int:
    builders = {'local': _build_local, 'elliptic': _build_elliptic, 'schoen': _build_schoen}
    c = builders[args.family](args)
    storage = ReportStorage()
    path = args.output or os.path.join(storage.base_dir, 'build', f"{c.name}.complex.json")
    save(c, path)
    summary = discriminant_graph(c).summary()
    record = {'name': c.name, 'dimension': c.dim, 'cells': len(c.cells), 'path': path,
              'discriminant': summary, 'simple_positive': is_simple_positive(c).ok}
    storage.save_build(c.name, record, "\n".join(legend(c)))
    _emit(args, record, f"built {c.name}: {len(c.cells)} cells, {len(c.loci)} loci\nwritten to {path}")
    return EXIT_OK


def legendre(args) -> int:
    c = load(args.complex)
    d = legendre_dual(c)
    if args.output:
        save(d, args.output)
    record = {'name': d.name, 'cells': len(d.cells), 'loci': len(d.loci), 'path': args.output}
    _emit(args, record, f"{c.name} -> {d.name}: {len(d.cells)} cells, {len(d.loci)} loci"
          + (f"\nwritten to {args.output}" if args.output else ""))
    return EXIT_OK


def monodromy_check(args) -> int:
    c = load(args.complex)
    indices = range(len(c.loci)) if args.locus is None else [args.locus]
    records, consistent = [], True
    for index in indices:
        if not 0 <= index < len(c.loci):
            raise IndexError(f"{c.name} has no locus {index} (there are {len(c.loci)})")
        locus = c.loci[index]
        m = monodromy(c, locus.loop)
        try:
            recomputed = edge_multiplicity_from_monodromy(m)
        except MonodromyError:
            recomputed = None
        consistent = consistent and recomputed == locus.multiplicity
        records.append({'locus': index, 'face': face_label(locus.face), 'matrix': [list(row) for row in m.linear],
                        'label': locus.multiplicity, 'recomputed': recomputed})
    lines = [f"locus {r['locus']} on {r['face']}: {r['matrix']} label {r['label']} monodromy {r['recomputed']}"
             for r in records]
    _emit(args, {'name': c.name, 'loci': records, 'consistent': consistent}, "\n".join(lines))
    return EXIT_OK if consistent else EXIT_FAILED


def verify(args) -> int:
    suite = args.suite_name or args.suite
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite '{suite}'")
    agent = VerificationAgent(seed=args.seed, loop_count=args.loops, mutation_count=args.mutations)
    storage = ReportStorage()
    names = SUITES if suite == "all" else (suite,)
    results = []
    for name in names:
        if name == "schoen":
            result = _verify_schoen(agent, storage, args.all_pairs or suite == "all")
        else:
            result = agent.run_suite(name)
        results.append(result)
        storage.save_verification_report(name, result.to_dict(), result.to_text())

    ok = all(r.ok for r in results)
    payload = {'ok': ok, 'suites': [r.to_dict() for r in results]}
    text = "\n".join([RULE, "Verification", RULE] + [r.to_text() for r in results]
                     + [RULE, "ALL PASS" if ok else "FAILURES"])
    if suite == "all":
        storage.save_verification_report("all", payload, text)
    _emit(args, payload, text)
    return EXIT_OK if ok else EXIT_FAILED


def _verify_schoen(agent: VerificationAgent, storage: ReportStorage, all_pairs: bool):
    """The Schoen suite, over every ordered catalog pair or over the diagonal only."""
    pairs = None if all_pairs else [(i, i) for i in range(len(agent.catalog))]
    result = SuiteResult("schoen")
    started = time.perf_counter()
    agent.check_schoen(result, pairs)
    result.elapsed = time.perf_counter() - started
    for record in result.details.get('records', []):
        label = f"pair_{record['P1']}_{record['P2']}"
        storage.save_schoen_report(label, record, json.dumps(record, indent=2, sort_keys=True))
    return result


def render(args) -> int:
    c = load(args.complex)
    render_complex(c, args.output)
    _emit(args, {'name': c.name, 'path': args.output, 'legend': legend(c)},
          "\n".join(legend(c) + [f"written to {args.output}"]))
    return EXIT_OK


# ------------------------------------------------------------
# Argument parsing
# ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropical", description="Tropical manifolds: build, dualize, verify, render")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("twelve-check", parents=[common], help="the 12 property of a star configuration")
    p.add_argument("--star", required=True, help="catalog index or name, f3, f4, a JSON file or inline JSON vectors")
    p.set_defaults(handler=twelve_check)

    p = sub.add_parser("loop", parents=[common], help="validate a legal loop and check lhs = 12·w")
    p.add_argument("vectors", help="JSON file or inline JSON list of vectors")
    p.add_argument("--dual", action="store_true", help="also print the dual loop")
    p.set_defaults(handler=loop_check)

    p = sub.add_parser("catalog", parents=[common], help="the 16 reflexive polygons")
    p.add_argument("--index", help="one catalog entry by index or name")
    p.set_defaults(handler=catalog)

    p = sub.add_parser("dual", parents=[common], help="dual of a reflexive polygon")
    p.add_argument("polygon", help="catalog index or name, polygon JSON file or inline JSON vertices")
    p.set_defaults(handler=dual)

    p = sub.add_parser("build", help="build a complex and write it as JSON")
    families = p.add_subparsers(dest="family", required=True)
    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("-o", "--output", help="where to write the complex JSON")
    operation = argparse.ArgumentParser(add_help=False)
    group = operation.add_mutually_exclusive_group()
    group.add_argument("--smooth", dest="operation", action="store_const", const="smooth")
    group.add_argument("--resolve", dest="operation", action="store_const", const="resolve")

    f = families.add_parser("local", parents=[common, output, operation], help="local models")
    f.add_argument("--model", required=True, choices=(
        "Ak", "Akdual", "generalized-conifold", "orbifolded-conifold", "gorenstein", "orbifolded-trivalent"))
    f.add_argument("--k", type=int, default=1)
    f.add_argument("--l", type=int, default=1)
    f.add_argument("--polygon", help="JSON vertices for gorenstein and orbifolded-trivalent")
    f.add_argument("--sign", type=int, default=-1, choices=(-1, 1))

    f = families.add_parser("elliptic", parents=[common, output], help="elliptic surfaces over a star")
    f.add_argument("--polygon", required=True, help="catalog index or name, f3, f4, or a JSON file")
    f.add_argument("--variant", default="A", choices=elliptic.VARIANTS)
    f.add_argument("--smooth", action="append", choices=elliptic.KINDS)
    f.add_argument("--resolve", action="append", choices=elliptic.KINDS)

    f = families.add_parser("schoen", parents=[common, output, operation], help="Schoen's threefold")
    f.add_argument("--p1", required=True)
    f.add_argument("--p2", required=True)
    f.add_argument("--variant", default="O", choices=schoen.VARIANTS)
    p.set_defaults(handler=build)

    p = sub.add_parser("legendre", parents=[common], help="discrete Legendre transform of a complex")
    p.add_argument("complex")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=legendre)

    p = sub.add_parser("monodromy", parents=[common], help="monodromy around each singular locus")
    p.add_argument("complex")
    p.add_argument("--locus", type=int)
    p.set_defaults(handler=monodromy_check)

    p = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    p.add_argument("suite_name", nargs="?", help="suite to run; same as --suite")
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--all-pairs", action="store_true", help="sweep all 256 catalog pairs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loops", type=int, default=1000)
    p.add_argument("--mutations", type=int, default=500)
    p.set_defaults(handler=verify)

    p = sub.add_parser("render", parents=[common], help="SVG figure of a complex")
    p.add_argument("complex")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=render)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        logging.basicConfig(level=os.getenv('TROPICAL_LOG_LEVEL', 'WARNING').upper())
        return args.handler(args)
    except (OSError, ValueError, LookupError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
