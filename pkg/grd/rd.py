"""Rapid decay: ratio scans, witnesses and the inequality checks behind them.

Every check returns a CheckReport. Reduced norms on truncated views are
compressions, so they only underestimate; a row fails only when such a lower
bound already exceeds the asserted upper bound.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np
import pandas as pd

from grd._utils import parallel_map, rng_for
from grd.dynamics import FullShift, kernel_class_view
from grd.fell import ActionBundle, ConcreteBundle, TrivialBundle
from grd.groupoid import BudgetError, FiniteGroupoidView, GroupModel, LengthFn, subgroupoid
from grd.linalg import hermitian_min, hermitian_top, psd_sqrt
from grd.partial_actions import DegeneratePartialAction, build_transformation_groupoid
from grd.report import CheckReport
from grd.sections import (
    Section,
    convolve,
    indicator,
    norms,
    random_section,
    reduced_norm,
    sobolev_norm,
    sup_norm,
)


logger = logging.getLogger(__name__)

SERIES_TERMS = 10**6
TOL_CHAIN = 1e-9
TOL_THEOREM = 1e-8
TOL_EQUAL = 1e-9

SectionSource = Callable[[int, np.random.Generator], Section]


def series_s(n_terms: int = SERIES_TERMS) -> float:
    """``sum over n >= 0 of (1+n)^-4``: partial sum to ``n_terms`` plus the integral tail bound.

    Examples
    --------
    >>> round(series_s(), 6)
    1.082323
    """
    n = np.arange(n_terms + 1, dtype=float)
    partial = float(np.sum((1.0 + n)[::-1] ** -4))
    return partial + 1.0 / (3.0 * (1.0 + n_terms) ** 3)


@dataclass(frozen=True)
class RDWitness:
    """``||f||_r <= C ||f||_{2,p,L}`` on the scope it was established on."""

    C: float
    p: int
    scope: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f'witness constant must be positive, got {self.C}')
        if not isinstance(self.p, (int, np.integer)) or self.p < 0:
            raise ValueError(f'witness exponent must be a nonnegative integer, got {self.p!r}')

    def bound(self, f: Section, length: LengthFn | None = None) -> float:
        return self.C * sobolev_norm(f, self.p, length)


def random_source(bundle: ConcreteBundle, support=None) -> SectionSource:
    """Seeded complex Gaussian sections on a fixed support.

    Examples
    --------
    >>> source = random_source(build_bundle(cyclic_group(3), 'trivial'))
    >>> len(source(0, rng_for(0, 0)))
    3
    """
    return lambda index, rng: random_section(bundle, rng, support)


def ball_indicators(
    bundle: ConcreteBundle, radii: Iterable[int], length: LengthFn | None = None
) -> list[Section]:
    """Indicators of ``{gamma : L(gamma) <= r}``, one per radius."""
    length = length or bundle.view.length
    return [indicator(bundle, lambda a, r=r: length(a) <= r) for r in radii]


@dataclass
class RDScan:
    """Ratios ``||f||_r / ||f||_{2,p,L}`` over a family of sections.

    ``lower_bound`` marks ratios whose numerator is a compressed reduced norm.
    """

    ratio: float
    worst: int | None
    ratios: list[float]
    p: int
    length: str
    lower_bound: bool
    skipped: list[int] = field(default_factory=list)
    worst_section: Section | None = field(default=None, repr=False)

    def witness(self, **scope) -> RDWitness:
        return RDWitness(self.ratio, self.p, {'lower_bound': self.lower_bound, **scope})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'index': range(len(self.ratios)), 'ratio': self.ratios})


def _sections(sections: Sequence[Section] | SectionSource, count: int | None, seed: int) -> list:
    if callable(sections):
        if count is None:
            raise ValueError('count is required when sections come from a source')
        return [(i, lambda i=i: sections(i, rng_for(seed, i))) for i in range(count)]
    return [(i, lambda f=f: f) for i, f in enumerate(sections)]


def rd_ratio_scan(
    bundle: ConcreteBundle,
    sections: Sequence[Section] | SectionSource,
    p: int = 0,
    length: LengthFn | None = None,
    count: int | None = None,
    seed: int = 0,
    units: Iterable[str] | None = None,
    workers: int = 1,
) -> RDScan:
    """Largest ``||f||_r / ||f||_{2,p,L}`` over the sections.

    Sections whose Sobolev norm vanishes are skipped and listed. Random
    sources draw item i from ``rng_for(seed, i)``, so the scan does not depend
    on ``workers``.

    Examples
    --------
    >>> bundle = build_bundle(cyclic_group(2), 'trivial')
    >>> rd_ratio_scan(bundle, random_source(bundle), count=50).ratio <= 2 ** 0.5
    True
    """
    length = length or bundle.view.length
    units = list(units) if units is not None else None
    items = _sections(sections, count, seed)

    def one(item):
        index, make = item
        f = make()
        denominator = sobolev_norm(f, p, length)
        if denominator == 0.0:
            return index, None, False, f
        numerator = reduced_norm(f, units)
        return index, numerator.value / denominator, numerator.lower_bound, f

    ratios, skipped = [], []
    best, worst, worst_section, lower = 0.0, None, None, False
    for index, ratio, is_lower, f in parallel_map(one, items, workers=workers):
        if ratio is None:
            skipped.append(index)
            ratios.append(float('nan'))
            continue
        ratios.append(ratio)
        lower = lower or is_lower
        if worst is None or ratio > best:
            best, worst, worst_section = ratio, index, f
    if skipped:
        logger.info('rd_ratio_scan skipped %d zero sections', len(skipped))
    return RDScan(best, worst, ratios, p, length.name, lower, skipped, worst_section)


def _certificate(c, t) -> tuple[float, int]:
    if isinstance(t, bool) or not isinstance(t, (int, np.integer)) or t < 0:
        raise ValueError(f'growth degree must be a nonnegative integer, got {t!r}')
    if not isinstance(c, (int, float, Fraction, np.number)) or not c > 0:
        raise ValueError(f'growth constant must be positive, got {c!r}')
    return float(c), int(t)


def poly_growth_rd_check(
    bundle: ConcreteBundle,
    certificate: tuple[Any, int],
    sections: Sequence[Section] | SectionSource,
    length: LengthFn | None = None,
    count: int | None = None,
    seed: int = 0,
    tol: float = TOL_THEOREM,
    workers: int = 1,
) -> CheckReport:
    """``||f||_r <= sqrt(c1) ||f||_{2,t+2,L}`` with ``c1 = 2^t c S``.

    ``certificate`` is the pair (c, t) of a polynomial growth bound
    ``|B(n)| <= c (1+n)^t``, as returned by ``GrowthClass.certificate``.

    Raises
    ------
    ValueError
        If the certificate is not a positive constant and a nonnegative integer degree.

    Examples
    --------
    >>> bundle = build_bundle(cyclic_group(5), 'trivial')
    >>> poly_growth_rd_check(bundle, (5, 0), random_source(bundle), count=10).passed
    True
    """
    c, t = _certificate(*certificate)
    length = length or bundle.view.length
    s = series_s()
    c1 = 2**t * c * s
    k = t + 2
    report = CheckReport(
        system=bundle.name,
        seed=seed,
        params={'c': c, 't': t, 'c1': c1, 'S': s, 'k': k, 'p_convention': 'nonnegative'},
        budget=dict(bundle.view.budget),
    )

    def one(item):
        index, make = item
        f = make()
        return index, reduced_norm(f), sobolev_norm(f, k, length)

    items = _sections(sections, count, seed)
    for index, numerator, denominator in parallel_map(one, items, workers=workers):
        rhs = math.sqrt(c1) * denominator
        report.add('rd.poly_growth', f'f{index:04d}', numerator.value, rhs, tol * max(1.0, rhs))
        if numerator.lower_bound:
            report.note('reduced norms are lower bounds on a truncated view')
    return report


def bhm_check(
    f: Section, tol: float = TOL_THEOREM, report: CheckReport | None = None
) -> CheckReport:
    """``||f||_r^2 <= sup_x ||sum_{G_x} |f|| * sup_x ||sum_{G^x} |f*|||``.

    Absolute values are Hermitian square roots of ``f* f`` and ``f f*``.

    Examples
    --------
    >>> bhm_check(indicator(build_bundle(pair_groupoid(3), 'trivial'))).passed
    True
    """
    report = report if report is not None else CheckReport(system=f.bundle.name)
    bundle, view = f.bundle, f.view
    source: dict[str, np.ndarray] = {}
    target: dict[str, np.ndarray] = {}
    for gamma, a in f.items():
        inv = view.inverse(gamma)
        a_star = bundle.invol(gamma, a)
        left = psd_sqrt(bundle.mult(inv, gamma, a_star, a))
        right = psd_sqrt(bundle.mult(gamma, inv, a, a_star))
        source[gamma.src] = source[gamma.src] + left if gamma.src in source else left
        target[gamma.rng] = target[gamma.rng] + right if gamma.rng in target else right
    sup_source = max((hermitian_top(m) for m in source.values()), default=0.0)
    sup_target = max((hermitian_top(m) for m in target.values()), default=0.0)
    norm = reduced_norm(f)
    rhs = sup_source * sup_target
    report.add('bhm', f'support={len(f)}', norm.value**2, rhs, tol * max(1.0, rhs))
    if norm.lower_bound:
        report.note('bhm: reduced norm is a lower bound')
    return report


def cauchy_schwarz_check(
    matrices: Sequence[np.ndarray],
    weights: Sequence[float],
    tol: float = TOL_THEOREM,
    report: CheckReport | None = None,
    instance: str = 'tuple',
) -> CheckReport:
    """``(sum l_g^2)^1/2 (sum a_g^2)^1/2 - sum l_g a_g`` is positive semidefinite.

    ``matrices`` must be positive semidefinite and ``weights`` real.

    Raises
    ------
    ValueError
        If the lengths differ, no matrix is given or a matrix is not positive
        semidefinite.

    Examples
    --------
    >>> cauchy_schwarz_check([np.eye(2), 2 * np.eye(2)], [1.0, -1.0]).passed
    True
    """
    if len(matrices) != len(weights):
        raise ValueError(f'{len(matrices)} matrices but {len(weights)} weights')
    if not matrices:
        raise ValueError('at least one matrix is required')
    mats = [np.asarray(a, dtype=complex) for a in matrices]
    for i, a in enumerate(mats):
        if hermitian_min(a) < -tol * max(1.0, hermitian_top(a)):
            raise ValueError(f'matrix #{i} is not positive semidefinite')
    lam = np.asarray(weights, dtype=float)
    squares = sum(a @ a for a in mats)
    combination = sum(w * a for w, a in zip(lam, mats))
    gap = float(np.linalg.norm(lam)) * psd_sqrt(squares) - combination
    report = report if report is not None else CheckReport()
    scale = max(1.0, hermitian_top(squares) ** 0.5 * float(np.linalg.norm(lam)))
    report.add('cauchy_schwarz', instance, 0.0, hermitian_min(gap), tol * scale)
    return report


def weight_inequality_check(
    view: FiniteGroupoidView, length: LengthFn | None = None
) -> CheckReport:
    """``1 + L(gamma eta) <= (1 + L(gamma)) (1 + L(eta))`` on every in-view composable pair.

    Examples
    --------
    >>> weight_inequality_check(free_group_ball(2, 2)).passed
    True
    """
    length = length or view.length
    report = CheckReport(system=view.name, budget=dict(view.budget))
    by_range: dict[str, list] = {}
    for eta in view.arrows:
        by_range.setdefault(eta.rng, []).append(eta)
    for gamma in view.arrows:
        for eta in by_range.get(gamma.src, []):
            try:
                zeta = view.compose(gamma, eta)
            except BudgetError:
                continue
            report.add(
                'weight.submultiplicative',
                f'{gamma.id}*{eta.id}',
                1 + length(zeta),
                (1 + length(gamma)) * (1 + length(eta)),
            )
    return report


def weighted_conv_check(
    f: Section,
    g: Section,
    witness: RDWitness,
    p: int = 0,
    length: LengthFn | None = None,
    tol: float = TOL_THEOREM,
    report: CheckReport | None = None,
    instance: str = 'pair',
) -> CheckReport:
    """The weighted convolution estimate and its range-side mirror.

    ``||f*g||_{2,p,s} <= C ||f||_{2,p+q} ||g||_{2,p,s}`` and
    ``||f*g||_{2,p,r} <= C ||f||_{2,p,r} ||g||_{2,p+q}`` for the witness
    ``(C, q)``, plus the weight inequality on composable support pairs.

    Examples
    --------
    >>> bundle = build_bundle(cyclic_group(2), 'trivial')
    >>> f = delta(bundle, '0') + delta(bundle, '1')
    >>> weighted_conv_check(f, f, RDWitness(2**0.5, 0)).passed
    True
    """
    length = length or f.view.length
    report = report if report is not None else CheckReport(system=f.bundle.name)
    q = witness.p
    fg = convolve(f, g)
    lhs = sobolev_norm(fg, p, length, side='source')
    rhs = witness.C * sobolev_norm(f, p + q, length) * sobolev_norm(g, p, length, side='source')
    report.add('weighted_conv.source', instance, lhs, rhs, tol * max(1.0, rhs))
    lhs = sobolev_norm(fg, p, length, side='range')
    rhs = witness.C * sobolev_norm(f, p, length, side='range') * sobolev_norm(g, p + q, length)
    report.add('weighted_conv.range', instance, lhs, rhs, tol * max(1.0, rhs))

    view = f.view
    for gamma in f.support:
        for eta in g.support:
            if gamma.src != eta.rng:
                continue
            zeta = view.compose(gamma, eta)
            report.add(
                'weight.submultiplicative',
                f'{instance}:{gamma.id}*{eta.id}',
                1 + length(zeta),
                (1 + length(gamma)) * (1 + length(eta)),
            )
    return report


def restriction_check(
    bundle: ConcreteBundle,
    keep: Callable,
    count: int = 20,
    ps: Iterable[int] = (0, 1),
    seed: int = 0,
    witness: RDWitness | None = None,
    tol: float = TOL_CHAIN,
) -> CheckReport:
    """Sections on a subgroupoid H have no larger norms in H than in G.

    Asserts ``||f||_{r,H} <= ||f||_{r,G}`` and ``||f||_{2,p,L|H} <= ||f||_{2,p,L}``
    for random sections supported on H, extended by zero, and transports
    ``witness`` (if given) to H.

    Raises
    ------
    ValueError
        If the arrows selected by ``keep`` do not form a subgroupoid; the
        message names the offending pair.

    Examples
    --------
    >>> bundle = build_bundle(cyclic_group(4), 'trivial')
    >>> restriction_check(bundle, lambda a: a.id in ('0', '2'), count=5).passed
    True
    """
    sub_view = subgroupoid(bundle.view, keep, name=f'{bundle.view.name}|H')
    sub = bundle.restrict(sub_view)
    report = CheckReport(
        system=sub.name,
        seed=seed,
        budget={'H_arrows': len(sub_view), 'G_arrows': len(bundle.view)},
    )
    ps = list(ps)
    for i in range(count):
        f_h = random_section(sub, rng_for(seed, i))
        f_g = Section(bundle, {a.id: v for a, v in f_h.items()})
        inst = f'f{i:04d}'
        r_h, r_g = reduced_norm(f_h).value, reduced_norm(f_g).value
        report.add('restriction.reduced', inst, r_h, r_g, tol * max(1.0, r_g))
        for p in ps:
            s_h, s_g = sobolev_norm(f_h, p), sobolev_norm(f_g, p)
            report.add(f'restriction.sobolev.p{p}', inst, s_h, s_g, tol * max(1.0, s_g))
        if witness is not None:
            rhs = witness.bound(f_h)
            report.add('restriction.witness', inst, r_h, rhs, tol * max(1.0, rhs))
    if not bundle.view.full:
        report.note('reduced norms are lower bounds on a truncated view')
    return report


def unit_embedding_check(
    bundle: ActionBundle, count: int = 20, ps: Iterable[int] = (0, 1, 2), seed: int = 0
) -> CheckReport:
    """Scalar sections ``phi 1_A`` have the norms of ``phi`` in the group algebra.

    Raises
    ------
    TypeError
        If ``bundle`` is not an ActionBundle.

    Examples
    --------
    >>> swap = {'1': swap_unitary(2)}
    >>> bundle = build_bundle(cyclic_group(2), 'action', dim=2, unitaries=swap)
    >>> unit_embedding_check(bundle, count=5).passed
    True
    """
    if not isinstance(bundle, ActionBundle):
        raise TypeError(f'unit_embedding_check needs an ActionBundle, got {type(bundle).__name__}')
    scalar = TrivialBundle(bundle.view, 1)
    identity = np.eye(bundle.dim, dtype=complex)
    report = CheckReport(system=bundle.name, seed=seed)
    ps = list(ps)
    for i in range(count):
        phi = random_section(scalar, rng_for(seed, i))
        f = Section(bundle, {a: v[0, 0] * identity for a, v in phi.items()})
        inst = f'f{i:04d}'
        report.add_equal(
            'unit_embedding.reduced',
            inst,
            reduced_norm(f).value,
            reduced_norm(phi).value,
            TOL_EQUAL,
        )
        for p in ps:
            report.add_equal(
                f'unit_embedding.sobolev.p{p}',
                inst,
                sobolev_norm(f, p),
                sobolev_norm(phi, p),
                TOL_EQUAL,
            )
    return report


def trivial_action_check(
    view: FiniteGroupoidView,
    dim: int = 2,
    coefficients: str = 'full',
    count: int = 50,
    seed: int = 0,
    tol: float = TOL_CHAIN,
) -> CheckReport:
    """Trivial action of a finite group on ``M_dim``: the bundle scan stays below
    the group witness ``sqrt(|G|)`` (p = 0), times ``sqrt(dim)`` for full matrices.

    ``coefficients`` is ``'diagonal'`` (a commutative algebra) or ``'full'``.

    Raises
    ------
    ValueError
        For other ``coefficients``, or a view that is not a full finite group.

    Examples
    --------
    >>> trivial_action_check(cyclic_group(3), count=10).passed
    True
    """
    if coefficients not in ('diagonal', 'full'):
        raise ValueError(f"coefficients must be 'diagonal' or 'full', got {coefficients!r}")
    if not view.full or len(view.units) != 1:
        raise ValueError(f'trivial_action_check needs a full finite group view, got {view.name!r}')
    bundle = ActionBundle(view, dim, {})
    scalar = TrivialBundle(view, 1)
    group_scan = rd_ratio_scan(scalar, random_source(scalar), count=count, seed=seed)
    group_witness = math.sqrt(len(view))

    def source(index, rng):
        f = random_section(bundle, rng)
        if coefficients == 'diagonal':
            f = f.map(lambda arrow, a: np.diag(np.diag(a)))
        return f

    scan = rd_ratio_scan(bundle, source, count=count, seed=seed)
    factor = 1.0 if coefficients == 'diagonal' else math.sqrt(dim)
    report = CheckReport(
        system=bundle.name,
        seed=seed,
        params={'coefficients': coefficients, 'dim': dim, 'p': 0},
    )
    report.add('trivial_action.group', view.name, group_scan.ratio, group_witness, tol)
    report.add(f'trivial_action.{coefficients}', view.name, scan.ratio, factor * group_witness, tol)
    return report


def degenerate_action_check(
    group: GroupModel, n_points: int = 3, dim: int = 2, count: int = 20, seed: int = 0
) -> CheckReport:
    """Only the identity acts: the bundle has RD with ``C = 1, p = 0``.

    Examples
    --------
    >>> degenerate_action_check(CyclicGroup(3), count=5).passed
    True
    """
    system = DegeneratePartialAction(group, n_points)
    radius = None if group.finite else 2
    view = build_transformation_groupoid(system, range(n_points), radius=radius)
    bundle = TrivialBundle(view, dim)
    report = CheckReport(system=bundle.name, seed=seed, params={'C': 1.0, 'p': 0})
    report.add('degenerate.units_only', view.name, len(view), len(view.units))
    for i in range(count):
        f = random_section(bundle, rng_for(seed, i))
        r = reduced_norm(f).value
        report.add('degenerate.rd', f'f{i:04d}', r, sobolev_norm(f, 0), TOL_CHAIN)
        report.add_equal('degenerate.sup', f'f{i:04d}', r, sup_norm(f), TOL_CHAIN)
    return report


def kernel_indicator_ratio(d: int, n: int, p: int) -> float:
    """Closed form of the kernel-indicator ratio on the full d-shift.

    The class ``T^-n(T^n y)`` has ``d^n`` points, ``(d-1) d^(j-1)`` of which
    first meet y after j steps (length 2j), so the ratio is
    ``d^n / sqrt(1 + sum_j (d-1) d^(j-1) (1+2j)^2p)``.

    Examples
    --------
    >>> kernel_indicator_ratio(2, 2, 0)
    2.0
    """
    total = 1.0 + sum((d - 1) * d ** (j - 1) * (1 + 2 * j) ** (2 * p) for j in range(1, n + 1))
    return d**n / math.sqrt(total)


def obstruction_trend(
    d: int = 2, ns: Iterable[int] = range(2, 6), p: int = 2
) -> tuple[pd.DataFrame, CheckReport]:
    """Ratios ``||1_K||_r / ||1_K||_{2,p}`` for the kernel classes ``K`` of the full shift.

    Returns the table (n, ratio, closed_form, lower_bound) and a report
    checking every computed ratio against ``kernel_indicator_ratio``.

    Examples
    --------
    >>> frame, report = obstruction_trend(2, range(2, 4), p=0)
    >>> frame['n'].tolist(), report.passed
    ([2, 3], True)
    """
    shift = FullShift(d)
    y = shift.base_point()
    rows = []
    report = CheckReport(system=shift.name, params={'d': d, 'p': p})
    for n in ns:
        view = kernel_class_view(shift, y, n)
        f = indicator(TrivialBundle(view, 1))
        numerator = reduced_norm(f, units=[shift.encode(y)])
        ratio = numerator.value / sobolev_norm(f, p)
        closed = kernel_indicator_ratio(d, n, p)
        rows.append(
            {'n': n, 'ratio': ratio, 'closed_form': closed, 'lower_bound': numerator.lower_bound}
        )
        report.add_equal(
            'obstruction.closed_form', f'n={n:02d}', ratio, closed, TOL_EQUAL * max(1.0, closed)
        )
        logger.debug('obstruction ratio d=%d n=%d p=%d: %r', d, n, p, ratio)
    return pd.DataFrame(rows, columns=['n', 'ratio', 'closed_form', 'lower_bound']), report


def norm_chain_check(
    bundle: ConcreteBundle,
    count: int = 200,
    seed: int = 0,
    tol: float = TOL_CHAIN,
) -> CheckReport:
    """``||f||_inf <= ||f||_II <= ||f||_r <= ||f||_I`` on random sections.

    Examples
    --------
    >>> norm_chain_check(build_bundle(pair_groupoid(3), 'trivial'), count=10).passed
    True
    """
    report = CheckReport(system=bundle.name, seed=seed)
    for i in range(count):
        f = random_section(bundle, rng_for(seed, i))
        result = norms(f, reduced=True)
        inst = f'f{i:04d}'
        report.add('chain.sup_II', inst, result.sup, result.II, tol)
        report.add('chain.II_reduced', inst, result.II, result.reduced.value, tol)
        report.add('chain.reduced_I', inst, result.reduced.value, result.I, tol)
    return report


__all__ = [
    'RDScan',
    'RDWitness',
    'ball_indicators',
    'bhm_check',
    'cauchy_schwarz_check',
    'degenerate_action_check',
    'kernel_indicator_ratio',
    'norm_chain_check',
    'obstruction_trend',
    'poly_growth_rd_check',
    'random_source',
    'rd_ratio_scan',
    'restriction_check',
    'series_s',
    'trivial_action_check',
    'unit_embedding_check',
    'weight_inequality_check',
    'weighted_conv_check',
]
