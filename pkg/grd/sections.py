"""Finitely supported sections of a concrete Fell bundle and their norms."""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from grd._utils import parallel_map
from grd.fell import ConcreteBundle
from grd.groupoid import Arrow, BudgetError, FiniteGroupoidView, LengthFn, Side
from grd.linalg import hermitian_top, spectral_norm


logger = logging.getLogger(__name__)

ArrowSelector = Callable[[Arrow], bool] | Iterable[Arrow | str]


def _selector(selection: ArrowSelector) -> Callable[[Arrow], bool]:
    if callable(selection):
        return selection
    ids = {a.id if isinstance(a, Arrow) else a for a in selection}
    return lambda arrow: arrow.id in ids


class Section:
    """Finitely supported section ``f`` of ``bundle``; absent arrows are zero.

    Parameters
    ----------
    bundle : ConcreteBundle
        The bundle the values live in.
    entries : Mapping[Arrow | str, array-like], optional
        Value per arrow (or arrow id). Shapes are validated against the bundle.
    """

    def __init__(self, bundle: ConcreteBundle, entries: Mapping[Arrow | str, Any] | None = None):
        if not isinstance(bundle, ConcreteBundle):
            raise TypeError(f'bundle must be a ConcreteBundle, got {type(bundle).__name__}')
        self.bundle = bundle
        self._entries: dict[str, np.ndarray] = {}
        for key, value in (entries or {}).items():
            arrow = self._arrow(key)
            a = bundle.element(arrow, value)
            if np.any(a != 0):
                self._entries[arrow.id] = a

    def _arrow(self, key: Arrow | str) -> Arrow:
        arrow_id = key.id if isinstance(key, Arrow) else key
        if arrow_id not in self.view:
            raise ValueError(f'arrow {arrow_id!r} is not in view {self.view.name!r}')
        return self.view.arrow(arrow_id)

    @property
    def view(self) -> FiniteGroupoidView:
        return self.bundle.view

    @property
    def support(self) -> tuple[Arrow, ...]:
        """Arrows with a nonzero value, in id order."""
        return tuple(self.view.arrow(k) for k in sorted(self._entries))

    def items(self) -> list[tuple[Arrow, np.ndarray]]:
        return [(self.view.arrow(k), self._entries[k]) for k in sorted(self._entries)]

    def __getitem__(self, key: Arrow | str) -> np.ndarray:
        arrow = self._arrow(key)
        value = self._entries.get(arrow.id)
        return value.copy() if value is not None else self.bundle.zero(arrow)

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __repr__(self) -> str:
        return f'Section({self.bundle.name}, support={len(self._entries)})'

    def _check_same_bundle(self, other: 'Section'):
        if not isinstance(other, Section):
            raise TypeError(f'expected Section, got {type(other).__name__}')
        if other.bundle is not self.bundle:
            raise ValueError(
                f'sections live over different bundles: {self.bundle.name} vs {other.bundle.name}'
            )

    def __add__(self, other: 'Section') -> 'Section':
        self._check_same_bundle(other)
        entries = dict(self._entries)
        for key, value in other._entries.items():
            entries[key] = entries[key] + value if key in entries else value
        return Section(self.bundle, entries)

    def __neg__(self) -> 'Section':
        return self * -1.0

    def __sub__(self, other: 'Section') -> 'Section':
        return self + (-other)

    def __mul__(self, scalar: complex) -> 'Section':
        if isinstance(scalar, Section):
            raise TypeError('use convolve(f, g) for the product of two sections')
        return Section(self.bundle, {k: scalar * v for k, v in self._entries.items()})

    __rmul__ = __mul__

    def map(self, func: Callable[[Arrow, np.ndarray], Any]) -> 'Section':
        """Section ``arrow -> func(arrow, f(arrow))`` on the support of f."""
        return Section(self.bundle, {a: func(a, v) for a, v in self.items()})

    def restrict(self, selection: ArrowSelector) -> 'Section':
        """``f`` times the indicator of the selected arrows."""
        keep = _selector(selection)
        return Section(self.bundle, {a: v for a, v in self.items() if keep(a)})

    def allclose(self, other: 'Section', atol: float = 1e-12) -> bool:
        self._check_same_bundle(other)
        keys = set(self._entries) | set(other._entries)
        return all(np.allclose(self[k], other[k], atol=atol, rtol=0.0) for k in keys)

    def max_difference(self, other: 'Section') -> float:
        """Largest entrywise deviation ``max |f - g|``."""
        self._check_same_bundle(other)
        keys = set(self._entries) | set(other._entries)
        return max((float(np.max(np.abs(self[k] - other[k]))) for k in keys), default=0.0)


def delta(bundle: ConcreteBundle, arrow: Arrow | str, value: Any = None) -> Section:
    """``value`` at one arrow (the rectangular identity when omitted)."""
    arrow = bundle.view.arrow(arrow) if isinstance(arrow, str) else arrow
    if value is None:
        value = np.eye(*bundle.shape(arrow), dtype=complex)
    return Section(bundle, {arrow: value})


def indicator(bundle: ConcreteBundle, arrows: ArrowSelector | None = None) -> Section:
    """Indicator section: the rectangular identity on each selected arrow."""
    keep = _selector(arrows) if arrows is not None else (lambda arrow: True)
    return Section(
        bundle,
        {a: np.eye(*bundle.shape(a), dtype=complex) for a in bundle.view.arrows if keep(a)},
    )


def random_section(
    bundle: ConcreteBundle,
    rng: np.random.Generator,
    support: ArrowSelector | None = None,
    scale: float = 1.0,
) -> Section:
    """Complex Gaussian coefficients on ``support`` (every arrow by default)."""
    keep = _selector(support) if support is not None else (lambda arrow: True)
    return Section(
        bundle,
        {a: scale * bundle.random_element(a, rng) for a in bundle.view.arrows if keep(a)},
    )


def convolve(f: Section, g: Section) -> Section:
    """``(f*g)(zeta) = sum over gamma eta = zeta of f(gamma) g(eta)``.

    Raises
    ------
    BudgetError
        If a composite of a support pair is not enumerated by the view.
    """
    f._check_same_bundle(g)
    bundle, view = f.bundle, f.view
    by_range: dict[str, list[tuple[Arrow, np.ndarray]]] = {}
    for eta, b in g.items():
        by_range.setdefault(eta.rng, []).append((eta, b))

    acc: dict[str, np.ndarray] = {}
    for gamma, a in f.items():
        for eta, b in by_range.get(gamma.src, []):
            zeta = view.compose(gamma, eta)
            value = bundle.mult(gamma, eta, a, b)
            acc[zeta.id] = acc[zeta.id] + value if zeta.id in acc else value
    return Section(bundle, acc)


def involve(f: Section) -> Section:
    """``f*(gamma^-1) = f(gamma)*``."""
    bundle, view = f.bundle, f.view
    return Section(bundle, {view.inverse(g): bundle.invol(g, a) for g, a in f.items()})


def weight(f: Section, length: LengthFn | None = None, p: float = 1.0) -> Section:
    """``f (1 + L)^p``."""
    length = length or f.view.length
    return f.map(lambda arrow, a: a * length.weight(arrow, p))


def fiber_sums(
    f: Section,
    side: Side = 'source',
    length: LengthFn | None = None,
    p: float = 0.0,
) -> dict[str, np.ndarray]:
    """Per unit x, ``T_f(x) = sum over G_x of f* f (1+L)^2p`` (source side) or
    ``S_f(x) = sum over G^x of f f* (1+L)^2p`` (range side).

    Only units met by the support appear.
    """
    bundle, view = f.bundle, f.view
    length = length or view.length
    sums: dict[str, np.ndarray] = {}
    for gamma, a in f.items():
        inv = view.inverse(gamma)
        w = length.weight(gamma, 2 * p)
        if side == 'source':
            term = bundle.mult(inv, gamma, bundle.invol(gamma, a), a)
            unit = gamma.src
        elif side == 'range':
            term = bundle.mult(gamma, inv, a, bundle.invol(gamma, a))
            unit = gamma.rng
        else:
            raise ValueError(f"side must be 'source' or 'range', got {side!r}")
        sums[unit] = sums[unit] + w * term if unit in sums else w * term
    return sums


def _side_norm(f: Section, side: Side, length: LengthFn | None, p: float, units=None) -> float:
    sums = fiber_sums(f, side, length, p)
    if units is not None:
        units = set(units)
        sums = {u: s for u, s in sums.items() if u in units}
    top = max((hermitian_top(s) for s in sums.values()), default=0.0)
    return float(np.sqrt(max(top, 0.0)))


def sobolev_norm(
    f: Section,
    p: float = 0.0,
    length: LengthFn | None = None,
    side: Side | None = None,
    units: Iterable[str] | None = None,
) -> float:
    """``||f||_{2,p,L}``: the larger of the source and range sides unless ``side`` is given.

    Examples
    --------
    >>> view = integer_ball(3)
    >>> f = delta(build_bundle(view, 'trivial'), '+00001')
    >>> sobolev_norm(f, p=3)
    8.0
    """
    if side is not None:
        return _side_norm(f, side, length, p, units)
    return max(_side_norm(f, 'source', length, p, units), _side_norm(f, 'range', length, p, units))


def sup_norm(f: Section) -> float:
    return max((f.bundle.norm(g, a) for g, a in f.items()), default=0.0)


def i_norm(f: Section) -> float:
    """``max(sup_x sum over G_x ||f||, sup_x sum over G^x ||f||)``."""
    source: dict[str, float] = {}
    target: dict[str, float] = {}
    for g, a in f.items():
        n = f.bundle.norm(g, a)
        source[g.src] = source.get(g.src, 0.0) + n
        target[g.rng] = target.get(g.rng, 0.0) + n
    return max(max(source.values(), default=0.0), max(target.values(), default=0.0))


@dataclass(frozen=True)
class ReducedNorm:
    """Reduced norm estimate.

    ``lower_bound`` is set when the regular representation was compressed
    (truncated view or a length budget); the value then underestimates
    the true reduced norm.
    """

    value: float
    method: str
    lower_bound: bool
    budget: float | None
    units: int

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict[str, Any]:
        return {
            'value': self.value,
            'method': self.method,
            'lower_bound': self.lower_bound,
            'budget': self.budget,
            'units': self.units,
        }


def regular_matrix(f: Section, unit: str, budget: float | None = None) -> tuple[np.ndarray, bool]:
    """Matrix of the left regular representation of f on the slots ``G_x``.

    Slots are the source-fiber arrows of ``unit`` (of length ``<= budget``
    when given). Returns the matrix and whether any slot or block was cut.
    """
    bundle, view = f.bundle, f.view
    length = view.length
    slots = [eta for eta in view.fiber(unit, 'source') if budget is None or length(eta) <= budget]
    cut = len(slots) < len(view.fiber(unit, 'source'))
    offsets: dict[str, int] = {}
    size = 0
    for eta in slots:
        offsets[eta.id] = size
        size += bundle.slot_dim(eta)

    by_src: dict[str, list[tuple[Arrow, np.ndarray]]] = {}
    for gamma, a in f.items():
        by_src.setdefault(gamma.src, []).append((gamma, a))

    matrix = np.zeros((size, size), dtype=complex)
    for eta in slots:
        col = offsets[eta.id]
        width = bundle.slot_dim(eta)
        for gamma, a in by_src.get(eta.rng, []):
            try:
                zeta = view.compose(gamma, eta)
            except BudgetError:
                cut = True
                continue
            if zeta.id not in offsets:
                cut = True
                continue
            row = offsets[zeta.id]
            block = bundle.regular_block(gamma, eta, zeta, a)
            matrix[row : row + block.shape[0], col : col + width] += block
    return matrix, cut


def reduced_norm(
    f: Section,
    units: Iterable[str] | None = None,
    budget: float | None = None,
    workers: int = 1,
) -> ReducedNorm:
    """``||f||_r`` as the largest regular-representation norm over ``units``.

    On a full finite view with every unit and no budget this is the exact
    reduced norm. Otherwise it is a compression of the regular representation,
    hence a lower bound, nondecreasing in ``budget`` and in the unit sample.

    Raises
    ------
    ValueError
        If a support arrow is longer than ``budget`` or a unit is unknown.
    """
    view = f.view
    if budget is not None:
        too_long = [g.id for g in f.support if view.length(g) > budget]
        if too_long:
            raise ValueError(f'budget {budget} is smaller than the support of f: {too_long[0]}')
    units = list(view.units) if units is None else list(units)
    for unit in units:
        view.unit_arrow(unit)

    def one(unit: str):
        matrix, cut = regular_matrix(f, unit, budget)
        return spectral_norm(matrix), cut

    results = parallel_map(one, units, workers=workers)
    value, method = 0.0, 'empty'
    lower = not view.full or len(units) < len(view.units)
    for norm, cut in results:
        lower = lower or cut
        if norm.value >= value:
            value, method = norm.value, norm.method
    if lower and not view.full:
        warnings.warn(
            f'reduced norm on truncated view {view.name!r} is a lower bound',
            UserWarning,
            stacklevel=2,
        )
    logger.debug('reduced_norm over %d units of %s: %r', len(units), view.name, value)
    return ReducedNorm(value, method, lower, budget, len(units))


@dataclass
class NormReport:
    """Every norm of one section.

    ``sobolev`` maps p to ``||f||_{2,p,L}``. ``T`` and ``S`` hold the source
    and range fiber sums (p = 0) per unit met by the support.
    """

    sup: float
    I: float
    II: float
    l2_s: float
    l2_r: float
    sobolev: dict[float, float]
    length: str
    T: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    S: dict[str, np.ndarray] = field(default_factory=dict, repr=False)
    reduced: ReducedNorm | None = None

    def chain_holds(self, tol: float = 1e-9) -> bool:
        """``sup <= II <= reduced <= I`` within ``tol``."""
        values = [self.sup, self.II]
        if self.reduced is not None:
            values.append(self.reduced.value)
        values.append(self.I)
        return all(a <= b + tol for a, b in zip(values, values[1:]))

    def to_dict(self) -> dict[str, Any]:
        return {
            'sup': self.sup,
            'I': self.I,
            'II': self.II,
            'l2_s': self.l2_s,
            'l2_r': self.l2_r,
            'sobolev': {str(p): v for p, v in sorted(self.sobolev.items())},
            'length': self.length,
            'reduced': self.reduced.to_dict() if self.reduced is not None else None,
        }


def norms(
    f: Section,
    length: LengthFn | None = None,
    ps: Iterable[float] = (0,),
    units: Iterable[str] | None = None,
    reduced: bool = False,
    budget: float | None = None,
) -> NormReport:
    """Computes the sup, I, II, l2 and Sobolev norms of f (and optionally the reduced norm).

    Parameters
    ----------
    f : Section
        The section.
    length : LengthFn, optional
        Length function, the view's canonical length by default.
    ps : Iterable[float]
        Exponents of the Sobolev norms.
    units : Iterable[str], optional
        Unit sample for the per-unit sums and the reduced norm (all units by default).
    reduced : bool
        Also compute the reduced norm on ``units`` with ``budget``.
    """
    length = length or f.view.length
    units = list(units) if units is not None else None
    l2_s = _side_norm(f, 'source', length, 0.0, units)
    l2_r = _side_norm(f, 'range', length, 0.0, units)
    T = fiber_sums(f, 'source')
    S = fiber_sums(f, 'range')
    if units is not None:
        T = {u: v for u, v in T.items() if u in units}
        S = {u: v for u, v in S.items() if u in units}
    return NormReport(
        sup=sup_norm(f),
        I=i_norm(f),
        II=max(l2_s, l2_r),
        l2_s=l2_s,
        l2_r=l2_r,
        sobolev={p: sobolev_norm(f, p, length, units=units) for p in ps},
        length=length.name,
        T=T,
        S=S,
        reduced=reduced_norm(f, units, budget) if reduced else None,
    )


def l2_distance_to_restriction(f: Section, selection: ArrowSelector) -> float:
    """``||f - f|_U||_{2,s}``; zero when the support of f lies in U."""
    keep = _selector(selection)
    return _side_norm(f.restrict(lambda a: not keep(a)), 'source', None, 0.0)


def is_self_adjoint(f: Section, atol: float = 1e-12) -> bool:
    return involve(f).allclose(f, atol=atol)


__all__ = [
    'NormReport',
    'ReducedNorm',
    'Section',
    'convolve',
    'delta',
    'fiber_sums',
    'i_norm',
    'indicator',
    'involve',
    'is_self_adjoint',
    'l2_distance_to_restriction',
    'norms',
    'random_section',
    'reduced_norm',
    'regular_matrix',
    'sobolev_norm',
    'sup_norm',
    'weight',
]
