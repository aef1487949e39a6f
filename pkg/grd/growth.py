"""Ball counts in groupoid fibers and growth classification."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable

import numpy as np
import pandas as pd
import polars as pl

from grd._utils import parallel_map
from grd.dynamics import EvPeriodicPoint, LocalSystem, dr_fiber, preimage_levels
from grd.groupoid import FiniteGroupoidView, LengthFn
from grd.report import CheckReport


logger = logging.getLogger(__name__)

MIN_RADIUS = 4
EXP_MARGIN = 0.5
RATIO_THRESHOLD = 1.3

GROWTH_COLUMNS = ['unit_id', 'radius', 'count']


class FiberEnumerator(ABC):
    """Lists the lengths of the arrows of one source fiber up to a radius."""

    name: str

    def encode(self, unit: Hashable) -> str:
        return unit.encode() if isinstance(unit, EvPeriodicPoint) else str(unit)

    @abstractmethod
    def lengths(self, unit: Hashable, radius: int) -> list[float]: ...

    def exact_radius(self, unit: Hashable) -> int | None:
        return None


class DRFiberEnumerator(FiberEnumerator):
    """Source fibers of a Deaconu-Renault groupoid (or of its kernel ``c = 0``)."""

    def __init__(self, system: LocalSystem, kernel: bool = False):
        self.system = system
        self.kernel = kernel
        self.name = f'{"kernel" if kernel else "dr"}[{system.name}]'

    def encode(self, unit) -> str:
        return self.system.encode(unit)

    def lengths(self, unit, radius: int) -> list[float]:
        arrows = dr_fiber(self.system, unit, radius)
        return [a.length for a in arrows if not self.kernel or a.k == 0]

    def exact_radius(self, unit) -> int | None:
        return self.system.exact_radius(unit)


class ViewFiberEnumerator(FiberEnumerator):
    """Source fibers of an enumerated view; exact up to the view's radius budget."""

    def __init__(self, view: FiniteGroupoidView, length: LengthFn | None = None):
        self.view = view
        self.length = length or view.length
        self.name = view.name

    def lengths(self, unit: str, radius: int) -> list[float]:
        return [self.length(a) for a in self.view.fiber(unit, 'source') if self.length(a) <= radius]

    def exact_radius(self, unit: str) -> int | None:
        if self.view.full:
            return None
        return self.view.budget.get('radius')


@dataclass
class GrowthTable:
    """Exact ball counts per (unit, radius).

    ``frame`` has the columns ``unit_id``, ``radius``, ``count`` and ``exact``;
    ``partial`` is set when some row lies beyond the exact radius of its unit.
    """

    frame: pd.DataFrame
    system: str
    budget: dict[str, Any] = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return not bool(self.frame['exact'].all())

    @property
    def radii(self) -> list[int]:
        return sorted(int(r) for r in self.frame['radius'].unique())

    @property
    def units(self) -> list[str]:
        return sorted(self.frame['unit_id'].unique())

    def max_counts(self) -> pd.Series:
        """Max over units of the count at each radius."""
        return self.frame.groupby('radius')['count'].max().sort_index()

    def counts(self, unit_id: str) -> list[int]:
        rows = self.frame[self.frame['unit_id'] == unit_id].sort_values('radius')
        if rows.empty:
            raise ValueError(f'unit {unit_id!r} is not in the growth table')
        return [int(c) for c in rows['count']]

    def to_csv_frame(self) -> pd.DataFrame:
        return self.frame[GROWTH_COLUMNS]


def _radii(radii: int | Iterable[int]) -> list[int]:
    values = list(range(radii + 1)) if isinstance(radii, int) else sorted(set(radii))
    if not values or any(not isinstance(r, (int, np.integer)) or r < 0 for r in values):
        raise ValueError(f'radii must be nonnegative integers, got {radii!r}')
    return [int(r) for r in values]


def _table(rows: list[dict[str, Any]], system: str, budget: dict[str, Any]) -> GrowthTable:
    schema = {'unit_id': pl.String, 'radius': pl.Int64, 'count': pl.Int64, 'exact': pl.Boolean}
    df = pl.DataFrame(rows, schema=schema).sort(['unit_id', 'radius'])
    table = GrowthTable(df.to_pandas(), system, budget)
    if table.partial:
        logger.warning('growth table for %s exceeds the exact budget at some rows', system)
    return table


def ball_counts(
    enumerator: FiberEnumerator,
    units: Iterable[Hashable],
    radii: int | Iterable[int],
    workers: int = 1,
) -> GrowthTable:
    """``|B_{G_x}(n)|`` for every sampled unit x and radius n.

    Rows past a unit's exact radius are kept and marked ``exact=False``.

    Examples
    --------
    >>> shift = FullShift(2)
    >>> table = ball_counts(DRFiberEnumerator(shift), [shift.base_point()], 4)
    >>> table.counts('(0)')
    [1, 4, 10, 22, 46]
    """
    radii = _radii(radii)
    units = list(units)
    if not units:
        raise ValueError('at least one unit is required')
    top = radii[-1]

    def one(unit) -> list[dict[str, Any]]:
        lengths = np.sort(np.asarray(enumerator.lengths(unit, top), dtype=float))
        limit = enumerator.exact_radius(unit)
        unit_id = enumerator.encode(unit)
        logger.debug('ball_counts %s at %s: %d arrows', enumerator.name, unit_id, len(lengths))
        return [
            {
                'unit_id': unit_id,
                'radius': r,
                'count': int(np.searchsorted(lengths, r, side='right')),
                'exact': limit is None or r <= limit,
            }
            for r in radii
        ]

    rows = [row for chunk in parallel_map(one, units, workers=workers) for row in chunk]
    return _table(rows, enumerator.name, {'radius': top, 'units': len(units)})


def preimage_table(system: LocalSystem, point: Hashable, depth: int) -> GrowthTable:
    """``|T^-N(point)|`` for ``N = 0..depth`` in the GrowthTable layout."""
    if depth < 0:
        raise ValueError(f'depth must be nonnegative, got {depth}')
    limit = system.exact_radius(point)
    unit_id = system.encode(point)
    rows = [
        {'unit_id': unit_id, 'radius': n, 'count': len(level), 'exact': limit is None or n <= limit}
        for n, level in enumerate(preimage_levels(system, point, depth))
    ]
    return _table(rows, f'preimages[{system.name}]', {'radius': depth, 'units': 1})


@dataclass
class GrowthClass:
    """Result of ``classify_growth``.

    ``kind`` is ``'bounded'``, ``'polynomial'`` or ``'exponential'``. For the
    first two, ``count(n) <= c (1 + n)^d`` holds exactly on the table and is
    recorded row by row in ``report``; ``base`` is the fitted ratio.
    """

    kind: str
    c: Fraction | None
    d: int | None
    base: float
    report: CheckReport
    fits: dict[str, float] = field(default_factory=dict)

    @property
    def certificate(self) -> tuple[Fraction, int]:
        if self.kind == 'exponential':
            raise ValueError('exponential growth has no polynomial certificate')
        return self.c, self.d

    def to_dict(self) -> dict[str, Any]:
        return {
            'kind': self.kind,
            'c': float(self.c) if self.c is not None else None,
            'd': self.d,
            'base': self.base,
            **{f'fit.{k}': v for k, v in sorted(self.fits.items())},
        }


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least squares line; returns (slope, residual sum of squares)."""
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    return float(slope), residual


def classify_growth(
    table: GrowthTable,
    margin: float = EXP_MARGIN,
    ratio_threshold: float = RATIO_THRESHOLD,
    min_radius: int = MIN_RADIUS,
) -> GrowthClass:
    """Classifies the max-over-units counts as bounded, polynomial or exponential.

    Both fits (``log count`` against ``log(1+n)`` and against ``n``) use the
    tail half ``n = R//2 .. R`` of the radii. Exponential when the exponential
    residual is below ``margin`` times the polynomial one and
    ``count(R)/count(R-1) > ratio_threshold``; bounded when the counts are
    constant over the tail half; polynomial otherwise, with
    ``d = max(0, ceil(s - 1/2))`` for the tail slope s in log-log scale and
    ``c = max count(n)/(1+n)^d``, so the certificate is tight.

    Raises
    ------
    ValueError
        If the table does not cover ``0..R`` with ``R >= min_radius``.
    """
    counts = table.max_counts()
    radii = [int(r) for r in counts.index]
    top = radii[-1] if radii else -1
    if top < min_radius or radii != list(range(top + 1)):
        raise ValueError(f'growth table must cover radii 0..R with R >= {min_radius}, got {radii}')
    values = [int(c) for c in counts]
    if min(values) < 1:
        raise ValueError('ball counts must be positive')

    half = top // 2
    n = np.arange(half, top + 1, dtype=float)
    y = np.log(np.asarray(values[half:], dtype=float))
    poly_slope, poly_res = _fit(np.log1p(n), y)
    exp_slope, exp_res = _fit(n, y)
    ratio = values[top] / values[top - 1]
    fits = {
        'poly_slope': poly_slope,
        'poly_residual': poly_res,
        'exp_slope': exp_slope,
        'exp_residual': exp_res,
        'terminal_ratio': ratio,
    }
    report = CheckReport(system=table.system, budget=dict(table.budget))
    base = float(np.exp(exp_slope))

    if values[half] == values[top]:
        kind, d = 'bounded', 0
    elif exp_res < margin * poly_res and ratio > ratio_threshold:
        report.add('growth.terminal_ratio', table.system, ratio_threshold, ratio)
        logger.info('classify_growth(%s): exponential, base %.4f', table.system, base)
        return GrowthClass('exponential', None, None, base, report, fits)
    else:
        kind = 'polynomial'
        local = math.log(values[top] / values[half]) / math.log((1 + top) / (1 + half))
        d = max(0, math.ceil(local - 0.5))
        fits['local_slope'] = local

    c = max(Fraction(v, (1 + r) ** d) for r, v in zip(radii, values))
    for r, v in zip(radii, values):
        bound = c * (1 + r) ** d
        report.add('growth.certificate', f'n={r:03d}', v, float(bound))
    if table.partial:
        report.note('some counts lie beyond the exact radius of their unit')
    logger.info('classify_growth(%s): %s, c=%s, d=%d', table.system, kind, c, d)
    return GrowthClass(kind, c, d, base, report, fits)


def stability_check(
    enumerator: FiberEnumerator,
    small: Iterable[Hashable],
    large: Iterable[Hashable],
    radii: int | Iterable[int],
) -> CheckReport:
    """The classification is the same on a unit sample and on an enlarged one."""
    first = classify_growth(ball_counts(enumerator, small, radii))
    second = classify_growth(ball_counts(enumerator, large, radii))
    report = CheckReport(system=enumerator.name)
    report.add_flag('growth.stable_kind', enumerator.name, first.kind == second.kind)
    report.add_flag('growth.stable_degree', enumerator.name, first.d == second.d)
    return report


__all__ = [
    'DRFiberEnumerator',
    'FiberEnumerator',
    'GrowthClass',
    'GrowthTable',
    'ViewFiberEnumerator',
    'ball_counts',
    'classify_growth',
    'preimage_table',
    'stability_check',
]
