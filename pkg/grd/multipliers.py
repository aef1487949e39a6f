"""Negative-type functions, Schoenberg exponentials and multipliers ``M_h``.

A scalar function on arrows is positive definite when every range-fiber Gram
matrix ``[h(g_i^-1 g_j)]`` is positive semidefinite, and of negative type when
it vanishes on units, is symmetric and every such matrix ``[psi(g_i^-1 g_j)]``
is negative semidefinite on vectors with zero sum.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterable, Sequence

import numpy as np
import pandas as pd

from grd._utils import rng_for
from grd.groupoid import Arrow, BudgetError, FiniteGroupoidView, LengthFn
from grd.linalg import hermitian_min, normalized, sum_zero_max_eigenvalue
from grd.report import CheckReport
from grd.sections import Section, i_norm, reduced_norm, sobolev_norm


logger = logging.getLogger(__name__)

TOL_KERNEL = 1e-9
FULL_FIBER_MAX = 256
MAX_TUPLE = 6
TUPLE_SAMPLES = 200
TOL_TRACE = 1e-9

TRACE_COLUMNS = ['t', 'error', 'error_I', 'restriction_error', 'bound']


@dataclass(frozen=True)
class ArrowFunction:
    """Scalar function on arrows, real for ``psi`` and complex for ``h``."""

    name: str
    func: Callable[[Arrow], complex] = field(compare=False)

    def __call__(self, arrow: Arrow) -> complex:
        return self.func(arrow)

    def sup(self, arrows: Iterable[Arrow]) -> float:
        return max((abs(self(a)) for a in arrows), default=0.0)


def zero_psi() -> ArrowFunction:
    return ArrowFunction('zero', lambda arrow: 0.0)


def equilateral() -> ArrowFunction:
    """0 on units, 1 elsewhere."""
    return ArrowFunction('equilateral', lambda arrow: 0.0 if arrow.is_unit else 1.0)


def length_psi(length: LengthFn) -> ArrowFunction:
    """The length function itself, of negative type on free groups."""
    return ArrowFunction(length.name, lambda arrow: length(arrow))


def schoenberg(psi: ArrowFunction, t: float) -> ArrowFunction:
    """``h_t = exp(-t psi)``."""
    return ArrowFunction(f'exp(-{t:g}*{psi.name})', lambda arrow: math.exp(-t * psi(arrow)))


def constant_function(value: complex = 1.0) -> ArrowFunction:
    return ArrowFunction(f'const({value})', lambda arrow: value)


def table_function(name: str, values: dict[str, complex], default: complex = 0.0) -> ArrowFunction:
    """Function given by a table of arrow ids."""
    values = dict(values)
    return ArrowFunction(name, lambda arrow: values.get(arrow.id, default))


def coefficient_function(view: FiniteGroupoidView, xi: dict[str, complex]) -> ArrowFunction:
    """Positive definite ``h(g) = sum over z in G^s(g) of conj(xi(g z)) xi(z)``.

    ``xi`` maps arrow ids to scalars. ``|h| <= 1`` whenever every range fiber
    of xi has l2 norm at most 1. Composites outside the view are dropped, so
    the function is exact on full views.
    """
    by_range: dict[str, list[Arrow]] = {}
    for z in view.arrows:
        if xi.get(z.id, 0) != 0:
            by_range.setdefault(z.rng, []).append(z)
    table: dict[str, complex] = {}
    for gamma in view.arrows:
        total = 0j
        for z in by_range.get(gamma.src, []):
            try:
                gz = view.compose(gamma, z)
            except BudgetError:
                continue
            total += np.conj(xi.get(gz.id, 0)) * xi[z.id]
        table[gamma.id] = complex(total)
    return table_function('coefficient', table)


def random_positive_definite(view: FiniteGroupoidView, rng: np.random.Generator) -> ArrowFunction:
    """Random coefficient function with ``sup |h| = 1``."""
    xi = {a.id: complex(rng.standard_normal(), rng.standard_normal()) for a in view.arrows}
    fiber_norms = {
        unit: math.sqrt(sum(abs(xi[a.id]) ** 2 for a in view.fiber(unit, 'range')))
        for unit in view.units
    }
    scale = max(fiber_norms.values())
    return coefficient_function(view, {k: v / scale for k, v in xi.items()})


def _gram(view: FiniteGroupoidView, func: ArrowFunction, arrows: Sequence[Arrow]) -> np.ndarray:
    """``[func(g_i^-1 g_j)]`` for arrows with a common range."""
    n = len(arrows)
    inverses = [view.inverse(g) for g in arrows]
    gram = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            gram[i, j] = func(view.compose(inverses[i], arrows[j]))
    return gram


def _tuples(
    view: FiniteGroupoidView,
    units: Iterable[str] | None,
    within: Callable[[Arrow], bool] | None,
    max_tuple: int,
    samples: int,
    full_fiber_max: int,
    seed: int,
):
    """Per unit: the whole range fiber when small, else random tuples of size <= max_tuple."""
    units = list(view.units) if units is None else list(units)
    for u_index, unit in enumerate(units):
        fiber = [g for g in view.fiber(unit, 'range') if within is None or within(g)]
        if len(fiber) <= full_fiber_max:
            yield unit, 'all', fiber
            continue
        rng = rng_for(seed, u_index)
        for k in range(samples):
            size = int(rng.integers(2, max_tuple + 1))
            picked = sorted(rng.choice(len(fiber), size=size, replace=False))
            yield unit, f'{k:04d}', [fiber[i] for i in picked]


def is_negative_type(
    psi: ArrowFunction,
    view: FiniteGroupoidView,
    units: Iterable[str] | None = None,
    within: Callable[[Arrow], bool] | None = None,
    max_tuple: int = MAX_TUPLE,
    samples: int = TUPLE_SAMPLES,
    full_fiber_max: int = FULL_FIBER_MAX,
    seed: int = 0,
    tol: float = TOL_KERNEL,
) -> CheckReport:
    """Checks the negative-type conditions of ``psi`` on range fibers.

    Range fibers (restricted to ``within``) with at most ``full_fiber_max``
    arrows are checked as a whole, which covers every tuple drawn from them;
    larger fibers are checked on ``samples`` random tuples of size
    ``<= max_tuple``. Gram matrices are scaled to unit max entry.

    Raises
    ------
    BudgetError
        If some product ``g_i^-1 g_j`` is not enumerated.
    """
    report = CheckReport(
        system=view.name,
        seed=seed,
        params={'psi': psi.name},
        budget={'max_tuple': max_tuple, 'samples': samples, 'full_fiber_max': full_fiber_max},
    )
    checked_units = set()
    tuples = _tuples(view, units, within, max_tuple, samples, full_fiber_max, seed)
    for unit, label, arrows in tuples:
        if unit not in checked_units:
            checked_units.add(unit)
            for g in arrows:
                if g.is_unit:
                    report.add('negative_type.unit', g.id, abs(psi(g)), 0.0, tol)
                report.add_equal('negative_type.symmetric', g.id, psi(view.inverse(g)), psi(g), tol)
        gram = normalized(_gram(view, psi, arrows))
        top = sum_zero_max_eigenvalue(gram)
        report.add('negative_type', f'{unit}:{label}', top, 0.0, tol)
    logger.debug('is_negative_type(%s on %s): %s', psi.name, view.name, report.verdict)
    return report


def positive_definite_check(
    h: ArrowFunction,
    view: FiniteGroupoidView,
    units: Iterable[str] | None = None,
    within: Callable[[Arrow], bool] | None = None,
    max_tuple: int = MAX_TUPLE,
    samples: int = TUPLE_SAMPLES,
    full_fiber_max: int = FULL_FIBER_MAX,
    seed: int = 0,
    tol: float = TOL_KERNEL,
    report: CheckReport | None = None,
    check: str = 'positive_definite',
) -> CheckReport:
    """Minimum eigenvalue of each Gram matrix ``[h(g_i^-1 g_j)]`` is ``>= -tol``."""
    report = report if report is not None else CheckReport(system=view.name, seed=seed)
    tuples = _tuples(view, units, within, max_tuple, samples, full_fiber_max, seed)
    for unit, label, arrows in tuples:
        gram = normalized(_gram(view, h, arrows))
        report.add(check, f'{unit}:{label}', 0.0, hermitian_min(gram), tol)
    return report


@dataclass
class SchoenbergFamily:
    ts: list[float]
    functions: dict[float, ArrowFunction]
    report: CheckReport

    def __getitem__(self, t: float) -> ArrowFunction:
        return self.functions[t]


def multiplier_bound(h: ArrowFunction, view: FiniteGroupoidView, p: float, length=None) -> float:
    """``B_p(h)``: max over the arrows of the view of ``|h| (1 + L)^p``."""
    length = length or view.length
    return max((abs(h(a)) * length.weight(a, p) for a in view.arrows), default=0.0)


def schoenberg_family(
    psi: ArrowFunction,
    view: FiniteGroupoidView,
    ts: Iterable[float],
    within: Callable[[Arrow], bool] | None = None,
    p: float = 1.0,
    seed: int = 0,
    tol: float = TOL_KERNEL,
) -> SchoenbergFamily:
    """``h_t = exp(-t psi)`` for the grid, with the checks that go with it.

    Every kernel ``[h_t(g_i^-1 g_j)]`` must be positive semidefinite;
    ``max |h_t - 1|`` over the view must decrease as t decreases; ``B_p(h_t)``
    must not increase with t.

    Raises
    ------
    ValueError
        If some t is not positive.
    """
    ts = sorted(float(t) for t in ts)
    if not ts or ts[0] <= 0:
        raise ValueError(f't grid must be nonempty and positive, got {ts}')
    report = CheckReport(system=view.name, seed=seed, params={'psi': psi.name, 'ts': ts, 'p': p})
    functions = {t: schoenberg(psi, t) for t in ts}
    for t in ts:
        positive_definite_check(
            functions[t], view, within=within, seed=seed, tol=tol, report=report,
            check=f'schoenberg.psd.t={t:g}',
        )
    distances = [max(abs(functions[t](a) - 1) for a in view.arrows) for t in ts]
    bounds = [multiplier_bound(functions[t], view, p) for t in ts]
    for k in range(1, len(ts)):
        inst = f't={ts[k - 1]:g}<t={ts[k]:g}'
        report.add('schoenberg.uniform', inst, distances[k - 1], distances[k], tol)
        report.add('schoenberg.B_p', inst, bounds[k], bounds[k - 1], tol)
    return SchoenbergFamily(ts, functions, report)


@dataclass
class MultiplierResult:
    section: Section
    report: CheckReport
    sup: float
    bound: float


def apply_multiplier(
    h: ArrowFunction,
    f: Section,
    p: float = 1.0,
    length: LengthFn | None = None,
    contractive: bool = True,
    tol: float = TOL_KERNEL,
    report: CheckReport | None = None,
    instance: str = 'f',
) -> MultiplierResult:
    """``(M_h f)(g) = h(g) f(g)`` with its norm checks.

    ``contractive`` asserts ``||M_h f||_r <= sup_supp |h| ||f||_r``, which
    needs h positive definite. The Schwartz bound
    ``||M_h f||_{2,p,L} <= B_p(h) ||f||`` is always asserted, with the reduced
    norm of f on full views and the II norm otherwise.
    """
    view = f.view
    length = length or view.length
    g = f.map(lambda arrow, a: h(arrow) * a)
    report = report if report is not None else CheckReport(system=f.bundle.name)
    sup = h.sup(f.support)
    bound = multiplier_bound(h, view, p, length)
    f_norm = reduced_norm(f).value if view.full else sobolev_norm(f, 0)
    if contractive and view.full:
        rhs = sup * f_norm
        lhs = reduced_norm(g).value
        report.add('multiplier.contractive', instance, lhs, rhs, tol * max(1.0, rhs))
    rhs = bound * f_norm
    lhs = sobolev_norm(g, p, length)
    report.add('multiplier.schwartz', instance, lhs, rhs, tol * max(1.0, rhs))
    return MultiplierResult(g, report, sup, bound)


def _arrow_set(view: FiniteGroupoidView, selection) -> Callable[[Arrow], bool]:
    if callable(selection):
        return selection
    ids = {a.id if isinstance(a, Arrow) else a for a in selection}
    missing = sorted(i for i in ids if i not in view)
    if missing:
        raise ValueError(f'U contains arrows outside view {view.name!r}: {missing[:5]}')
    return lambda arrow: arrow.id in ids


def local_approximate(
    f: Section,
    selection: Callable[[Arrow], bool] | Collection[str],
    psi: ArrowFunction,
    ts: Iterable[float],
    tol: float = TOL_TRACE,
) -> tuple[pd.DataFrame, CheckReport]:
    """Approximates f by sections supported in U: ``g_t = (M_{h_t} f)|_U``.

    Returns the trace (t, error, error_I, restriction_error, bound), one row per t in
    decreasing order followed by the limit row ``t = 0`` where ``h_0 = 1``.
    ``error = ||f - g_t||`` and ``restriction_error = ||M_{h_t} f - g_t||``
    use the reduced norm on full views and the I norm on truncations;
    ``bound = ||f||_I max_{supp in U} |1 - h_t| + ||f|_{not U}||_I``.

    The report asserts ``error <= bound``, a nonincreasing ``error_I`` (the I
    norm of ``f - g_t``) over the tail half of the grid, and a vanishing limit
    error when f lives in U. Psi must be nonnegative.

    Raises
    ------
    ValueError
        If U names arrows outside the view or some t is negative.
    """
    view = f.view
    keep = _arrow_set(view, selection)
    ts = sorted((float(t) for t in ts), reverse=True)
    if not ts or ts[-1] < 0:
        raise ValueError(f't grid must be nonempty and nonnegative, got {ts}')
    exact = view.full

    def norm(s: Section) -> float:
        return reduced_norm(s).value if exact else i_norm(s)

    f_norm_i = i_norm(f)
    outside = i_norm(f.restrict(lambda a: not keep(a)))
    inside_support = [a for a in f.support if keep(a)]
    rows = []
    for t in ts + [0.0]:
        h = schoenberg(psi, t)
        mh_f = f.map(lambda arrow, a: h(arrow) * a)
        g_t = mh_f.restrict(keep)
        deviation = max((abs(1 - h(a)) for a in inside_support), default=0.0)
        rows.append(
            {
                't': t,
                'error': norm(f - g_t),
                'error_I': i_norm(f - g_t),
                'restriction_error': norm(mh_f - g_t),
                'bound': f_norm_i * deviation + outside,
            }
        )
    trace = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    report = CheckReport(
        system=f.bundle.name,
        params={'psi': psi.name, 'ts': ts, 'norm': 'reduced' if exact else 'I'},
        budget=dict(view.budget),
    )
    for row in rows:
        report.add('local.bound', f't={row["t"]:g}', row['error'], row['bound'], tol)
    tail = rows[len(ts) // 2 : len(ts)]
    for a, b in zip(tail, tail[1:]):
        report.add('local.monotone', f't={a["t"]:g}>t={b["t"]:g}', b['error_I'], a['error_I'], tol)
    if exact and all(keep(a) for a in f.support):
        report.add('local.limit', 't=0', rows[-1]['error'], 0.0, tol)
    return trace, report


def hap_decay_trace(
    f: Section, ts: Iterable[float], tol: float = TOL_TRACE
) -> tuple[pd.DataFrame, CheckReport]:
    """Decay of ``||M_{h_t} f - f||_r`` for the equilateral ``h_t``.

    Off the units ``h_t = e^-t``, so the difference is ``(e^-t - 1) f_off``
    and its norm is predicted exactly as ``(1 - e^-t) ||f_off||_r``.
    """
    psi = equilateral()
    off = f.restrict(lambda a: not a.is_unit)
    off_norm = reduced_norm(off).value
    f_norm = reduced_norm(f).value
    rows = []
    report = CheckReport(system=f.bundle.name, params={'psi': psi.name})
    for t in sorted((float(t) for t in ts), reverse=True):
        h = schoenberg(psi, t)
        actual = reduced_norm(f.map(lambda arrow, a: h(arrow) * a) - f).value
        predicted = (1 - math.exp(-t)) * off_norm
        rows.append({'t': t, 'error': actual, 'predicted': predicted})
        report.add_equal('hap.decay', f't={t:g}', actual, predicted, tol * max(1.0, predicted))
        # the diagonal part is a contractive conditional expectation
        rhs = (1 - math.exp(-t)) * 2 * f_norm
        report.add('hap.bound', f't={t:g}', actual, rhs, tol * max(1.0, rhs))
    return pd.DataFrame(rows, columns=['t', 'error', 'predicted']), report


__all__ = [
    'ArrowFunction',
    'MultiplierResult',
    'SchoenbergFamily',
    'apply_multiplier',
    'coefficient_function',
    'constant_function',
    'equilateral',
    'hap_decay_trace',
    'is_negative_type',
    'length_psi',
    'local_approximate',
    'multiplier_bound',
    'positive_definite_check',
    'random_positive_definite',
    'schoenberg',
    'schoenberg_family',
    'table_function',
    'zero_psi',
]
