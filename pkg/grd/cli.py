"""Command line entry points: ``grd <command> [options]``.

Every command builds one CheckReport. The exit code is 0 when every row
passes, 1 when a check failed and 2 on input errors.
"""

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Callable

from grd import growth, multipliers, rd, reduction
from grd._utils import resolve_seed, rng_for
from grd.dynamics import FullShift, af_system, bouquet, load_graph, single_loop
from grd.fell import build_bundle, check_bundle_axioms, swap_unitary
from grd.groupoid import CyclicGroup, FiniteGroupoidView, build, check_axioms
from grd.linalg import random_psd
from grd.partial_actions import (
    DegeneratePartialAction,
    ShiftPartialAction,
    build_transformation_groupoid,
    swap_action,
)
from grd.report import CheckReport, emit_report
from grd.sections import random_section


logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = 'GRD_LOG_LEVEL'
DEFAULT_LOG_LEVEL = 'WARNING'

VIEW_SYSTEMS = ('pair', 'cyclic', 'symmetric', 'integer', 'free')
DR_SYSTEMS = ('full-shift', 'af', 'bouquet', 'single-loop', 'graph')
REDUCTION_FIXTURES = ('swap', 'shift', 'degenerate')

# keys that never enter report params (they do not change results)
_RUNTIME_KEYS = {'command', 'func', 'seed', 'workers', 'log_level', 'report', 'out', 'all_rows'}


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated integers, got {text!r}')


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected comma separated numbers, got {text!r}')


def _new_report(args: argparse.Namespace, seed: int, system: str) -> CheckReport:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _RUNTIME_KEYS}
    params = {k: str(v) if isinstance(v, Path) else v for k, v in params.items()}
    return CheckReport(command=args.command, system=system, params=params, seed=seed)


def _view(args: argparse.Namespace) -> FiniteGroupoidView:
    if args.system == 'free':
        return build('free', args.rank, args.n)
    return build(args.system, args.n)


def _bundle(view: FiniteGroupoidView, args: argparse.Namespace):
    if args.bundle == 'action':
        unitaries = {}
        if args.system == 'cyclic' and args.n == 2:
            unitaries = {a.id: swap_unitary(args.dim) for a in view.arrows if not a.is_unit}
        return build_bundle(view, 'action', dim=args.dim, unitaries=unitaries)
    if args.bundle == 'twisted':
        return build_bundle(view, 'twisted')
    return build_bundle(view, 'trivial', dim=args.dim)


def _dr_system(args: argparse.Namespace):
    if args.system == 'full-shift':
        return FullShift(args.arity)
    if args.system == 'af':
        return af_system(args.truncation)
    if args.system == 'bouquet':
        return bouquet(args.arity)
    if args.system == 'single-loop':
        return single_loop()
    if args.input is None:
        raise ValueError('--input is required for --system graph')
    return load_graph(args.input)


def _growth_report(args, seed: int, table: growth.GrowthTable) -> CheckReport:
    report = _new_report(args, seed, table.system)
    result = growth.classify_growth(table)
    report.extend(result.report)
    report.params.update({f'result.{k}': v for k, v in result.to_dict().items()})
    if args.out is not None:
        emit_report(table, args.out, fmt='csv')
    print(f'{table.system}: {result.kind}' + (f' (d={result.d})' if result.d is not None else ''))
    return report


def cmd_growth(args: argparse.Namespace, seed: int) -> CheckReport:
    system = _dr_system(args)
    units = system.sample_points(args.unit_sample)
    if args.preimages:
        table = growth.preimage_table(system, units[0], args.radius)
    else:
        enumerator = growth.DRFiberEnumerator(system, kernel=args.kernel)
        table = growth.ball_counts(enumerator, units, args.radius, workers=args.workers)
    return _growth_report(args, seed, table)


def cmd_classify_graph(args: argparse.Namespace, seed: int) -> CheckReport:
    graph = load_graph(args.input)
    units = graph.sample_points(args.unit_sample)
    enumerator = growth.DRFiberEnumerator(graph)
    table = growth.ball_counts(enumerator, units, args.radius, workers=args.workers)
    return _growth_report(args, seed, table)


def cmd_rdtest(args: argparse.Namespace, seed: int) -> CheckReport:
    view = _view(args)
    bundle = _bundle(view, args)
    report = _new_report(args, seed, bundle.name)
    source = rd.random_source(bundle)
    scan = rd.rd_ratio_scan(
        bundle, source, p=args.p, count=args.samples, seed=seed, workers=args.workers
    )
    report.params['scan.ratio'] = scan.ratio
    report.params['scan.lower_bound'] = scan.lower_bound

    radius = max(growth.MIN_RADIUS, int(max(view.length(a) for a in view.arrows)))
    table = growth.ball_counts(growth.ViewFiberEnumerator(view), view.units, radius)
    result = growth.classify_growth(table)
    report.extend(result.report)
    witness = None
    if result.kind == 'exponential':
        report.note('exponential growth: no polynomial certificate')
    else:
        c, t = result.certificate
        report.extend(
            rd.poly_growth_rd_check(
                bundle, (c, t), source, count=args.samples, seed=seed, workers=args.workers
            )
        )
        witness = rd.RDWitness(math.sqrt(2**t * float(c) * rd.series_s()), t + 2)

    report.extend(rd.norm_chain_check(bundle, count=args.samples, seed=seed))
    for i in range(args.samples):
        rd.bhm_check(random_section(bundle, rng_for(seed, i, 1)), report=report)
        if witness is not None and view.full:
            f = random_section(bundle, rng_for(seed, i, 2))
            g = random_section(bundle, rng_for(seed, i, 3))
            rd.weighted_conv_check(f, g, witness, p=0, report=report, instance=f'pair{i:04d}')
        rng = rng_for(seed, i, 4)
        size = int(rng.integers(1, 5))
        mats = [random_psd(rng, args.dim + 1) for _ in range(size)]
        rd.cauchy_schwarz_check(
            mats, rng.standard_normal(size), report=report, instance=f'tuple{i:04d}'
        )
    return report


def _reduction_base(args: argparse.Namespace):
    if args.fixture == 'swap':
        system = swap_action()
        view = build_transformation_groupoid(system, [0, 1])
    elif args.fixture == 'degenerate':
        system = DegeneratePartialAction(CyclicGroup(args.n), args.points)
        view = build_transformation_groupoid(system, system.points)
    else:
        system = ShiftPartialAction(args.arity)
        view = build_transformation_groupoid(
            system, system.shift.prefix_points(args.depth), args.radius
        )
    return system, build_bundle(view, 'trivial', dim=args.dim)


def cmd_reduce_check(args: argparse.Namespace, seed: int) -> CheckReport:
    system, base = _reduction_base(args)
    lifted = reduction.lift_to_group_bundle(base, system.group)
    report = _new_report(args, seed, lifted.name)
    report.extend(
        reduction.reduction_equivalence_check(lifted, count=args.samples, ps=args.ps, seed=seed)
    )
    if not args.skip_steinberg:
        steinberg = reduction.steinberg_check(
            args.arity, radius=args.steinberg_radius, depth=args.steinberg_depth
        )
        report.extend(steinberg)
        report.params['validated_sign'] = steinberg.params['validated_sign']
    return report


def cmd_multiplier(args: argparse.Namespace, seed: int) -> CheckReport:
    if args.system == 'free':
        view = build('free', args.rank, 2 * args.n)

        def within(a):
            return view.length(a) <= args.n

    else:
        view = _view(args)
        within = None
    bundle = build_bundle(view, 'trivial', dim=1)
    if args.psi == 'equilateral':
        psi = multipliers.equilateral()
    else:
        psi = multipliers.length_psi(view.length)
    report = _new_report(args, seed, view.name)
    report.extend(multipliers.is_negative_type(psi, view, within=within, seed=seed))
    family = multipliers.schoenberg_family(psi, view, args.t_grid, within=within, seed=seed)
    report.extend(family.report)

    support = within
    for i in range(args.samples):
        h = multipliers.random_positive_definite(view, rng_for(seed, i, 0))
        f = random_section(bundle, rng_for(seed, i, 1), support)
        multipliers.apply_multiplier(h, f, report=report, instance=f'pair{i:04d}')

    f = random_section(bundle, rng_for(seed, args.samples, 1), support)
    if view.full:
        _, decay = multipliers.hap_decay_trace(f, args.t_grid)
        report.extend(decay)
    top = max(view.length(a) for a in f.support)
    keep = [a.id for a in view.arrows if view.length(a) < top] or [a.id for a in view.arrows]
    trace, local = multipliers.local_approximate(f, keep, psi, args.t_grid)
    report.extend(local)
    if args.out is not None:
        emit_report(trace, args.out, fmt='csv')
    return report


def cmd_axioms(args: argparse.Namespace, seed: int) -> CheckReport:
    view = _view(args)
    bundle = _bundle(view, args)
    report = _new_report(args, seed, bundle.name)
    report.extend(check_axioms(view))
    report.extend(check_bundle_axioms(bundle, samples=args.samples, seed=seed))
    return report


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='default: $GRD_SEED or 0')
    common.add_argument('--workers', type=int, default=1)
    common.add_argument('--log-level', default=None, help='default: $GRD_LOG_LEVEL or WARNING')
    common.add_argument('--report', type=Path, default=None, help='JSON report path')
    common.add_argument('--all-rows', action='store_true', help='list every row in the report')
    return common


def _add_view_args(parser: argparse.ArgumentParser, n: int = 3):
    parser.add_argument('--system', choices=VIEW_SYSTEMS, default='pair')
    parser.add_argument('--n', type=int, default=n, help='size, or radius for integer/free')
    parser.add_argument('--rank', type=int, default=2, help='rank of the free group')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='grd', description='Rapid decay checks on groupoids')
    sub = parser.add_subparsers(dest='command', required=True)
    common = _common()

    p = sub.add_parser('growth', parents=[common], help='ball counts and growth class')
    p.add_argument('--system', choices=DR_SYSTEMS, default='full-shift')
    p.add_argument('--arity', type=int, default=2)
    p.add_argument('--truncation', type=int, default=16, help='state bound of the af system')
    p.add_argument('--input', type=Path, default=None, help='graph JSON for --system graph')
    p.add_argument('--radius', type=int, default=6)
    p.add_argument('--unit-sample', type=int, default=3)
    p.add_argument('--kernel', action='store_true', help='count the kernel c = 0 only')
    p.add_argument('--preimages', action='store_true', help='count T^-N of the first unit')
    p.add_argument('--out', type=Path, default=None, help='growth table CSV path')
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser('classify-graph', parents=[common], help='growth class of a graph')
    p.add_argument('--input', type=Path, required=True)
    p.add_argument('--radius', type=int, default=8)
    p.add_argument('--unit-sample', type=int, default=3)
    p.add_argument('--out', type=Path, default=None, help='growth table CSV path')
    p.set_defaults(func=cmd_classify_graph)

    p = sub.add_parser('rdtest', parents=[common], help='rapid decay scan and inequalities')
    _add_view_args(p)
    p.add_argument('--bundle', choices=('trivial', 'twisted', 'action'), default='trivial')
    p.add_argument('--dim', type=int, default=1)
    p.add_argument('--p', type=int, default=2)
    p.add_argument('--samples', type=int, default=50)
    p.set_defaults(func=cmd_rdtest)

    p = sub.add_parser('reduce-check', parents=[common], help='reduction to the acting group')
    p.add_argument('--fixture', choices=REDUCTION_FIXTURES, default='swap')
    p.add_argument('--arity', type=int, default=2)
    p.add_argument('--radius', type=int, default=2)
    p.add_argument('--depth', type=int, default=2)
    p.add_argument('--n', type=int, default=3, help='group order for the degenerate fixture')
    p.add_argument('--points', type=int, default=2, help='points of the degenerate fixture')
    p.add_argument('--dim', type=int, default=1)
    p.add_argument('--samples', type=int, default=100)
    p.add_argument('--ps', type=_ints, default=[0, 1, 2, 3])
    p.add_argument('--steinberg-radius', type=int, default=reduction.STEINBERG_RADIUS)
    p.add_argument('--steinberg-depth', type=int, default=reduction.STEINBERG_DEPTH)
    p.add_argument('--skip-steinberg', action='store_true')
    p.set_defaults(func=cmd_reduce_check)

    p = sub.add_parser('multiplier', parents=[common], help='negative type and multipliers')
    _add_view_args(p, n=2)
    p.add_argument('--psi', choices=('equilateral', 'length'), default='equilateral')
    p.add_argument('--t-grid', type=_floats, default=[4.0, 2.0, 1.0, 0.5, 0.25])
    p.add_argument('--samples', type=int, default=100)
    p.add_argument('--out', type=Path, default=None, help='local approximation trace CSV path')
    p.set_defaults(func=cmd_multiplier)

    p = sub.add_parser('axioms', parents=[common], help='groupoid and Fell bundle laws')
    _add_view_args(p)
    p.add_argument('--bundle', choices=('trivial', 'twisted', 'action'), default='trivial')
    p.add_argument('--dim', type=int, default=1)
    p.add_argument('--samples', type=int, default=100)
    p.set_defaults(func=cmd_axioms)
    return parser


def _configure_logging(level: str | None):
    level = (level or os.environ.get(LOG_LEVEL_ENV) or DEFAULT_LOG_LEVEL).upper()
    if not isinstance(logging.getLevelName(level), int):
        raise ValueError(f'unknown log level {level!r}')
    logging.basicConfig(
        level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s'
    )


def run(argv: list[str] | None = None) -> int:
    """Runs one command and returns its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        _configure_logging(args.log_level)
        seed = resolve_seed(args.seed)
        for name in ('workers', 'unit_sample'):
            value = getattr(args, name, None)
            if value is not None and value < 1:
                raise ValueError(f'--{name.replace("_", "-")} must be positive, got {value}')
        command: Callable[[argparse.Namespace, int], CheckReport] = args.func
        logger.info('grd %s: seed %d', args.command, seed)
        report = command(args, seed)
        if args.report is not None:
            emit_report(report, args.report, fmt='json', all_rows=args.all_rows)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f'grd {args.command}: error: {exc}', file=sys.stderr)
        return 2

    failed = len(report.failures())
    print(f'{args.command}: {report.verdict} ({len(report.rows)} rows, {failed} failed)')
    logger.info('grd %s: %s', args.command, report.verdict)
    return 0 if report.passed else 1


def main():
    sys.exit(run())


__all__ = ['build_parser', 'main', 'run']
