import logging
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from grd import words
from grd.dynamics.points import EvPeriodicPoint
from grd.dynamics.systems import (
    Edge,
    FiniteMap,
    FullShift,
    GraphPaths,
    LocalSystem,
    af_system,
    bouquet,
    graph_from_dict,
    load_graph,
    single_loop,
)
from grd.groupoid import Arrow, FiniteGroupoidView, LengthFn


logger = logging.getLogger(__name__)


def _encode(x) -> str:
    return x.encode() if isinstance(x, EvPeriodicPoint) else str(x)


@dataclass(frozen=True)
class DRArrow:
    """Arrow ``(x, k, y)`` of a Deaconu-Renault groupoid with minimal witness.

    ``T^m(x) = T^n(y)``, ``k = m - n`` and ``m + n`` is minimal, so the
    canonical length is ``m + n``. Range is x, source is y.
    """

    x: Hashable
    k: int
    y: Hashable
    m: int = field(compare=False)
    n: int = field(compare=False)

    @property
    def length(self) -> int:
        return self.m + self.n

    @property
    def id(self) -> str:
        return dr_arrow_id(self.x, self.k, self.y)

    @property
    def is_unit(self) -> bool:
        return self.k == 0 and self.x == self.y


def dr_arrow_id(x, k: int, y) -> str:
    return f'({_encode(x)},{k},{_encode(y)})'


@dataclass(frozen=True)
class Orbit:
    image: Hashable
    levels: tuple[tuple, ...]

    @property
    def preimages(self) -> tuple:
        return self.levels[-1]


def _sorted_points(points: Iterable) -> tuple:
    return tuple(sorted(set(points), key=_encode))


def preimage_levels(system: LocalSystem, z, depth: int) -> list[tuple]:
    """``levels[m] = T^-m(z)`` for ``m = 0..depth``."""
    levels = [(z,)]
    for _ in range(depth):
        levels.append(_sorted_points(p for q in levels[-1] for p in system.preimages(q)))
    return levels


def iterate_and_preimages(system: LocalSystem, x, n: int) -> Orbit:
    """``T^n(x)`` and the preimage tree of x down to depth n.

    Examples
    --------
    >>> len(iterate_and_preimages(FullShift(2), EvPeriodicPoint.constant(0), 3).preimages)
    8
    """
    if n < 0:
        raise ValueError(f'n must be nonnegative, got {n}')
    return Orbit(system.iterate(x, n), tuple(preimage_levels(system, x, n)))


def minimal_witness(system: LocalSystem, x, y, k: int, budget: int) -> tuple[int, int] | None:
    """Smallest ``(m, n)`` with ``m - n = k``, ``T^m(x) = T^n(y)`` and ``m + n <= budget``."""
    for s in range(abs(k), budget + 1, 2):
        m, n = (s + k) // 2, (s - k) // 2
        if system.iterate(x, m) == system.iterate(y, n):
            return m, n
    return None


def dr_fiber(system: LocalSystem, y, radius: int) -> list[DRArrow]:
    """All arrows with source y and canonical length ``<= radius``.

    Enumerates ``n <= radius``, ``z = T^n(y)``, ``m <= radius - n`` and
    ``x in T^-m(z)`` in order of increasing ``m + n``, so the first witness
    found for each ``(x, m - n)`` is the minimal one.
    """
    if radius < 0:
        raise ValueError(f'radius must be nonnegative, got {radius}')
    orbit = [y]
    for _ in range(radius):
        orbit.append(system.apply(orbit[-1]))
    levels = [preimage_levels(system, orbit[n], radius - n) for n in range(radius + 1)]

    found: dict[tuple, tuple[int, int]] = {}
    for s in range(radius + 1):
        for n in range(s + 1):
            m = s - n
            for x in levels[n][m]:
                found.setdefault((x, m - n), (m, n))
    arrows = [DRArrow(x, k, y, m, n) for (x, k), (m, n) in found.items()]
    arrows.sort(key=lambda a: a.id)
    logger.debug('dr_fiber(%s, %s, R=%d): %d arrows', system.name, _encode(y), radius, len(arrows))
    return arrows


def kernel_fiber(system: LocalSystem, y, n: int) -> list[DRArrow]:
    """Arrows of the kernel ``c = 0`` with source y and length ``<= 2n``."""
    if n < 0:
        raise ValueError(f'n must be nonnegative, got {n}')
    return [a for a in dr_fiber(system, y, 2 * n) if a.k == 0]


def word_action(system: FullShift, w: words.Word, x: EvPeriodicPoint) -> EvPeriodicPoint | None:
    """Partial action of F_d on the full d-shift.

    The generator ``a_i`` prepends the symbol ``i mod d``; ``a_i^-1`` removes it
    and is defined only on the cylinder of that symbol. With ``w = u v^-1``,
    x must start with the symbols of v and the result starts with those of u.
    """
    if w.rank != system.d:
        raise ValueError(f'word rank {w.rank} does not match the shift arity {system.d}')
    split = words.uv_normal_form(w)
    if split is None:
        return None
    u, v = split
    v_symbols = [symbol_of(i, system.d) for i, _ in v.letters]
    if not x.starts_with(v_symbols):
        return None
    rest = x.shift(len(v_symbols))
    return rest.prepend([symbol_of(i, system.d) for i, _ in u.letters])


def symbol_of(generator: int, d: int) -> int:
    return generator % d


def steinberg_psi(system: FullShift, w: words.Word, x: EvPeriodicPoint) -> DRArrow | None:
    """``(w.x, |u| - |v|, x)`` for ``w = u v^-1``, or None where w.x is undefined."""
    target = word_action(system, w, x)
    if target is None:
        return None
    u, v = words.uv_normal_form(w)
    k = u.length - v.length
    m, n = minimal_witness(system, target, x, k, u.length + v.length)
    return DRArrow(target, k, x, m, n)


def dr_groupoid(system: LocalSystem, base_points: Iterable, radius: int) -> FiniteGroupoidView:
    """Truncated Deaconu-Renault groupoid around ``base_points``.

    Units are the base points and every range of an in-budget arrow out of
    them; arrows are all in-budget arrows between those units. The view is
    closed under inverse, not under composition.
    """
    base = _sorted_points(base_points)
    if not base:
        raise ValueError('at least one base point is required')
    points = set(base)
    for b in base:
        points.update(a.x for a in dr_fiber(system, b, radius))

    arrows = []
    for y in _sorted_points(points):
        for a in dr_fiber(system, y, radius):
            if a.x in points:
                arrows.append(
                    Arrow(a.id, src=_encode(a.y), rng=_encode(a.x), payload=a, is_unit=a.is_unit)
                )
    logger.info(
        'dr_groupoid(%s, R=%d): %d units, %d arrows', system.name, radius, len(points), len(arrows)
    )
    return FiniteGroupoidView(
        name=f'dr[{system.name}]',
        arrows=arrows,
        compose_key=lambda g, h: dr_arrow_id(g.payload.x, g.payload.k + h.payload.k, h.payload.y),
        inverse_key=lambda g: dr_arrow_id(g.payload.y, -g.payload.k, g.payload.x),
        length=LengthFn('dr', lambda a: a.payload.length),
        full=False,
        budget={'radius': radius, 'base_points': len(base)},
    )


def kernel_class_view(system: LocalSystem, y, n: int) -> FiniteGroupoidView:
    """Kernel arrows among the class ``T^-n(T^n(y))``, lengths ``<= 2n``.

    Within that budget the class is the whole kernel fiber of each of its
    points, so the view is a pair groupoid on the class.
    """
    if n < 0:
        raise ValueError(f'n must be nonnegative, got {n}')
    cls = preimage_levels(system, system.iterate(y, n), n)[n]
    arrows = []
    for x in cls:
        for z in cls:
            j = next(j for j in range(n + 1) if system.iterate(x, j) == system.iterate(z, j))
            a = DRArrow(x, 0, z, j, j)
            arrows.append(Arrow(a.id, src=_encode(z), rng=_encode(x), payload=a, is_unit=x == z))
    return FiniteGroupoidView(
        name=f'kernel[{system.name}]',
        arrows=arrows,
        compose_key=lambda g, h: dr_arrow_id(g.payload.x, 0, h.payload.y),
        inverse_key=lambda g: dr_arrow_id(g.payload.y, 0, g.payload.x),
        length=LengthFn('dr', lambda a: a.payload.length),
        full=False,
        budget={'radius': 2 * n},
    )


__all__ = [
    'DRArrow',
    'Edge',
    'EvPeriodicPoint',
    'FiniteMap',
    'FullShift',
    'GraphPaths',
    'LocalSystem',
    'Orbit',
    'af_system',
    'bouquet',
    'dr_arrow_id',
    'dr_fiber',
    'dr_groupoid',
    'graph_from_dict',
    'iterate_and_preimages',
    'kernel_class_view',
    'kernel_fiber',
    'load_graph',
    'minimal_witness',
    'preimage_levels',
    'single_loop',
    'steinberg_psi',
    'symbol_of',
    'word_action',
]
