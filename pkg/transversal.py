#!/usr/bin/env python3
"""
Transversal CLI
Critical orbit relations of rational maps and numerical transversality certificates
"""

import argparse
import logging
import os
import sys
import time
from typing import List, Optional

# Fix Windows console encoding
if sys.platform == "win32":
    os.system("chcp 65001 > nul 2>&1")
    sys.stdout.reconfigure(encoding='utf-8')

from rich.console import Console
from rich.table import Table

from modules.algebra import is_infinite
from modules.config import Settings, check_precision, configure_logging, load_config
from modules.errors import InputError, TransversalError
from modules.lattes import degeneracy_demo
from modules.mapspec import MapSpec, build_report, dumps, load_spec, parse_complex, parse_relation, parse_sigma
from modules.qdiff import infinity_moments, invariance_residual, q_relation, regular_samples
from modules.ratmap import critical_set, scan_orbit
from modules.relations import OrbitModel, build_proper, detect_relations, zeta
from modules.transversality import certify, deficit_identity_check, sigma_ranks

console = Console(force_terminal=True)
# Status and errors go to stderr, stdout carries the JSON report
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1

# Orbit points shown per critical point in --pretty tables
PRETTY_ORBIT = 8


def _fmt(z: complex) -> str:
    if is_infinite(z):
        return "∞"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def _model_for(spec: MapSpec, args, polynomial: Optional[bool] = None) -> OrbitModel:
    if spec.is_symbolic:
        return spec.model(args.horizon)
    return OrbitModel.numeric(spec.require_map(), tol=args.tol, horizon=args.horizon, polynomial=polynomial)


def cmd_analyze(spec: MapSpec, args):
    """Degree, critical set and critical orbits"""
    if spec.is_symbolic:
        model = spec.model(args.horizon)
        return {
            'nu': model.nu,
            'zeta': zeta(model),
            'statuses': model.statuses,
            'generators': [r.to_json() for r in model.generators],
        }, EXIT_OK

    f = spec.require_map()
    crit = critical_set(f)
    horizon = args.horizon or Settings.NUMERIC_HORIZON
    scans = [scan_orbit(f, c, horizon) for c in crit.locations]
    return {
        'degree': f.degree,
        'nu': crit.nu,
        'nu_finite': crit.finite().nu,
        'critical': crit,
        'signature': sorted(crit.multiplicities, reverse=True),
        'borderline': crit.borderline,
        'orbits': [scan.points for scan in scans],
        'overflow': [scan.overflow for scan in scans],
        'underflow': [scan.underflow for scan in scans],
    }, EXIT_OK


def cmd_relations(spec: MapSpec, args):
    """Detected relations and a proper collection"""
    model = _model_for(spec, args)
    collection = build_proper(model)
    return {
        'kind': model.kind,
        'nu': model.nu,
        'statuses': model.statuses,
        'detected': [r.to_json() for r in detect_relations(model)],
        'collection': collection,
    }, EXIT_OK


def cmd_certify(spec: MapSpec, args):
    """Rank certificate for the relation Jacobian; exit 1 when the rank drops"""
    f = spec.require_map()
    chart = args.chart
    if chart == 'auto':
        chart = 'poly' if f.is_polynomial else 'rat'
    crit = critical_set(f)
    if args.relation:
        relations = [parse_relation(r) for r in args.relation]
    else:
        relations = build_proper(OrbitModel.numeric(
            f, tol=args.tol, horizon=args.horizon, polynomial=chart in ('poly', 'monic'), crit=crit)).relations

    result = certify(f, relations, chart, crit, seed=args.seed)
    results = {'certificate': result}
    if args.sigma:
        (rank,) = sigma_ranks(f, relations, [parse_sigma(args.sigma)], chart, crit)
        results['sigma_rank'] = rank
        results['sigma_independent'] = rank == result.report.certified_rank
    return results, EXIT_OK if result.certified else EXIT_NEGATIVE


def cmd_pushforward(spec: MapSpec, args):
    """Invariance residual of a relation differential, or of the Lattès kernel differential"""
    f = spec.require_map()
    if not args.relation:
        if spec.lattes is None:
            raise InputError("pushforward needs --relation i,j,m,n")
        demo = degeneracy_demo(spec.lattes.a, seed=args.seed)
        return {
            'qdiff': demo.qdiff,
            'invariance_residual': demo.invariance_residual,
            'moments': demo.moments,
        }, EXIT_OK if demo.passed else EXIT_NEGATIVE

    crit = critical_set(f)
    results = []
    for text in args.relation:
        rel = parse_relation(text)
        q = q_relation(f, rel, crit)
        if q.is_zero:
            logger.info(f"{rel}: zero differential")
            results.append({'relation': rel, 'zero': True, 'invariance_residual': 0.0})
            continue
        q = q.normalized()
        samples = regular_samples(f, q, crit, count=args.samples, seed=args.seed)
        results.append({
            'relation': rel,
            'zero': False,
            'qdiff': q,
            'invariance_residual': invariance_residual(f, q, samples),
            'moments': infinity_moments(q),
        })
    return {'differentials': results}, EXIT_OK


def cmd_lattes_demo(spec: MapSpec, args):
    """Rank drop and invariant differential of a flexible Lattès map"""
    if spec.lattes is None:
        raise InputError("lattes-demo needs a lattes:a=<complex> spec or a bare parameter")
    report = degeneracy_demo(spec.lattes.a, seed=args.seed)
    return {'lattes': report}, EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_deficit_check(spec: MapSpec, args):
    """Both sides of the critical value identity for each relation"""
    f = spec.require_map()
    crit = critical_set(f)
    if args.relation:
        relations = [parse_relation(r) for r in args.relation]
    else:
        relations = build_proper(OrbitModel.numeric(f, tol=args.tol, horizon=args.horizon, crit=crit)).relations
    count = args.samples or 10
    mismatches = [
        {'relation': rel, 'mismatch': deficit_identity_check(f, rel, crit=crit, count=count, seed=args.seed)}
        for rel in relations
    ]
    ok = all(item['mismatch'] <= 1e-5 for item in mismatches)
    return {'checks': mismatches, 'tolerance': 1e-5}, EXIT_OK if ok else EXIT_NEGATIVE


COMMANDS = {
    'analyze': cmd_analyze,
    'relations': cmd_relations,
    'certify': cmd_certify,
    'pushforward': cmd_pushforward,
    'lattes-demo': cmd_lattes_demo,
    'deficit-check': cmd_deficit_check,
}


def show_pretty(command: str, report: dict):
    """Human-readable view of a report"""
    results = report['results']
    console.print(f"\n[bold cyan]{command}[/bold cyan]  {report['input']['source']}\n")

    if command == 'analyze' and 'orbits' in results:
        table = Table(title=f"Critical orbits (degree {results['degree']}, ν = {results['nu']})")
        table.add_column("c", style="cyan", width=4)
        table.add_column("μ", width=3)
        table.add_column("Orbit", style="white")
        for k, (point, path) in enumerate(zip(results['critical'], results['orbits']), 1):
            shown = ["∞" if z == 'inf' else _fmt(complex(*z)) for z in path[:PRETTY_ORBIT]]
            table.add_row(str(k), str(point['multiplicity']), " → ".join(shown) + " …")
        console.print(table)
        return

    if command == 'relations' or (command == 'analyze' and 'zeta' in results):
        collection = results.get('collection', {})
        table = Table(title=f"Relations (ν = {results['nu']}, ζ = {collection.get('zeta', results.get('zeta'))})")
        table.add_column("Relation", style="cyan")
        for rel in collection.get('relations', results.get('generators', [])):
            i, j, m, n = rel
            table.add_row(f"f^{m}(c{i}) = f^{n}(c{j})")
        console.print(table)
        for key in ('full', 'minimally_full', 'proper', 'noncyclic'):
            if key in collection:
                console.print(f"  {key}: {collection[key]}")
        return

    if command == 'certify':
        cert = results['certificate']
        jac = cert['jacobian']
        mark = "[green]✓ Certified[/green]" if cert['certified'] else "[red]✗ Not certified[/red]"
        console.print(f"{mark}  rank {jac['rank']} of {cert['n_relations']} ({jac['chart']} chart)")
        console.print(f"  singular values: {', '.join(f'{s:.3e}' for s in jac['singular_values'])}")
        if cert['kernel_vector']:
            console.print(f"  kernel residual: {cert['kernel_vector']['residual']:.2e}")
        return

    console.print_json(dumps(results))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Transversality of critical relations for rational maps')
    parser.add_argument('--config', help='Settings file (default: transversal.json)')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('spec', help='Fixture name, lattes:a=<complex>, JSON object or JSON file')
    common.add_argument('--horizon', type=int, help='Orbit length')
    common.add_argument('--tol', type=float, help='Orbit coincidence tolerance')
    common.add_argument('--seed', type=int, help='Seed for conjugating poles and sample jitter')
    common.add_argument('--samples', type=int, help='Number of sample points')
    output = common.add_mutually_exclusive_group()
    output.add_argument('--json', action='store_true', default=True, help='JSON report on stdout (default)')
    output.add_argument('--pretty', action='store_true', help='Tables instead of JSON')
    common.add_argument('--output', help='Write the JSON report to a file')
    common.add_argument('--timing', action='store_true', help='Record wall time in the report')
    common.add_argument('--chart', default='auto', help='rat | poly | monic | family:<slots> | auto')
    common.add_argument('--sigma', help='Möbius map "a,b,c,d" for the rank comparison')
    common.add_argument('--relation', action='append', help='Relation i,j,m,n (repeatable)')

    subparsers = parser.add_subparsers(dest='command', help='Commands')
    subparsers.add_parser('analyze', parents=[common], help='Critical set and critical orbits')
    subparsers.add_parser('relations', parents=[common], help='Relations and a proper collection')
    subparsers.add_parser('certify', parents=[common], help='Certify the rank of the relation Jacobian')
    subparsers.add_parser('pushforward', parents=[common], help='Push-forward invariance of relation differentials')
    subparsers.add_parser('lattes-demo', parents=[common], help='Rank drop of a flexible Lattès map')
    subparsers.add_parser('deficit-check', parents=[common], help='Critical value identity for relations')
    return parser


def _resolve_spec(command: str, text: str) -> MapSpec:
    if command == 'lattes-demo' and not text.startswith(('lattes:', '{')):
        try:
            parse_complex(text)
        except InputError:
            pass
        else:
            text = f"lattes:a={text}"
    return load_spec(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_OK

    configure_logging(args.verbose)
    check_precision()
    Settings.apply(load_config(args.config))

    started = time.perf_counter()
    try:
        spec = _resolve_spec(args.command, args.spec)
        results, code = COMMANDS[args.command](spec, args)
    except InputError as e:
        err_console.print(f"[red]✗ Error:[/red] {e}")
        return e.exit_code
    except TransversalError as e:
        err_console.print(f"[red]✗ {type(e).__name__}:[/red] {e}")
        return e.exit_code

    wall_time = time.perf_counter() - started if args.timing else None
    report = build_report(args.command, spec, results, wall_time)
    text = dumps(report)

    if args.output:
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
        err_console.print(f"[green]✓[/green] Report saved to: {args.output}")
    if args.pretty:
        show_pretty(args.command, report)
    elif not args.output:
        sys.stdout.write(text + "\n")
    return code


if __name__ == '__main__':
    sys.exit(main())
