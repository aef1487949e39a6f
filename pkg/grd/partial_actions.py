"""Partial actions of groups and their transformation groupoids.

A system exposes ``act(g, x)`` (None outside the domain of g) on exactly
represented points. ``build_transformation_groupoid`` enumerates the arrows
``(g, x)`` with source x, range ``g.x`` and length ``l(g)``.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

from grd import words
from grd.dynamics import EvPeriodicPoint, FullShift, word_action
from grd.groupoid import Arrow, CyclicGroup, FiniteGroupoidView, FreeGroup, GroupModel, LengthFn
from grd.report import CheckReport


logger = logging.getLogger(__name__)


class PartialActionSystem(ABC):
    group: GroupModel
    name: str

    @abstractmethod
    def act(self, g, x) -> Hashable | None: ...

    def encode(self, x) -> str:
        return x.encode() if isinstance(x, EvPeriodicPoint) else str(x)

    def domain(self, g, x) -> bool:
        return self.act(g, x) is not None


class ShiftPartialAction(PartialActionSystem):
    """F_d acting partially on the full d-shift (generators prepend symbols)."""

    def __init__(self, d: int):
        self.shift = FullShift(d)
        self.group = FreeGroup(d)
        self.name = f'F{d}-shift'

    def act(self, g: words.Word, x: EvPeriodicPoint) -> EvPeriodicPoint | None:
        return word_action(self.shift, g, x)


class FiniteGlobalAction(PartialActionSystem):
    """Global action of a finite group on points ``0..n-1`` given by ``table(g, x)``."""

    def __init__(self, group: GroupModel, n_points: int, table: Callable, name: str = 'action'):
        if not group.finite:
            raise ValueError(f'{group.name} is not finite')
        if not isinstance(n_points, int) or n_points <= 0:
            raise ValueError(f'n_points must be a positive integer, got {n_points!r}')
        self.group = group
        self.points = list(range(n_points))
        self.name = name
        self._table = {
            (group.encode(g), x): table(g, x) for g in group.elements() for x in self.points
        }
        for (g, x), y in self._table.items():
            if y not in self.points:
                raise ValueError(f'action of {g} sends {x} outside the point set: {y!r}')

    def act(self, g, x) -> int | None:
        return self._table.get((self.group.encode(g), x))


class DegeneratePartialAction(PartialActionSystem):
    """Only the identity acts: ``D_e`` is everything, ``D_g`` is empty otherwise."""

    def __init__(self, group: GroupModel, n_points: int):
        self.group = group
        self.points = list(range(n_points))
        self.name = f'degenerate({group.name})'

    def act(self, g, x) -> int | None:
        return x if g == self.group.identity else None


def swap_action() -> FiniteGlobalAction:
    """Z/2 swapping two points."""
    return FiniteGlobalAction(CyclicGroup(2), 2, lambda g, x: (x + g) % 2, name='Z/2-swap')


def act(system: PartialActionSystem, g, x):
    """``g.x`` or None outside the domain of g."""
    return system.act(g, x)


@dataclass(frozen=True)
class TransformationArrow:
    g: Hashable
    x: Hashable
    target: Hashable = field(compare=False)


def _elements(system: PartialActionSystem, radius: int | None) -> list:
    group = system.group
    if radius is None and not group.finite:
        raise ValueError(f'{group.name} is infinite: a word radius is required')
    return group.elements(radius)


def orbit_closure(system: PartialActionSystem, base_points: Iterable, radius: int | None) -> list:
    """``{g.b : b in base_points, l(g) <= radius, g.b defined}`` in canonical order."""
    elements = _elements(system, radius)
    points = {}
    for b in base_points:
        for g in elements:
            y = system.act(g, b)
            if y is not None:
                points[system.encode(y)] = y
    return [points[k] for k in sorted(points)]


def build_transformation_groupoid(
    system: PartialActionSystem,
    base_points: Iterable,
    radius: int | None = None,
) -> FiniteGroupoidView:
    """Transformation groupoid ``G x| X`` truncated to word radius R.

    Units are the orbit closure P of ``base_points`` under elements of length
    ``<= R``. Arrows are the ``(g, x)`` with x in P, ``l(g) <= R`` and ``g.x``
    defined in P; the length of ``(g, x)`` is ``l(g)``.

    Examples
    --------
    >>> view = build_transformation_groupoid(swap_action(), [0, 1])
    >>> len(view.arrows)
    4
    """
    if radius is not None and (not isinstance(radius, int) or radius < 0):
        raise ValueError(f'radius must be a nonnegative integer, got {radius!r}')
    group = system.group
    encode_g, encode_x = group.encode, system.encode
    points = orbit_closure(system, base_points, radius)
    known = {encode_x(x) for x in points}
    elements = _elements(system, radius)

    def arrow_id(g, x) -> str:
        return f'({encode_g(g)},{encode_x(x)})'

    arrows = []
    for x in points:
        for g in elements:
            y = system.act(g, x)
            if y is None or encode_x(y) not in known:
                continue
            arrows.append(
                Arrow(
                    arrow_id(g, x),
                    src=encode_x(x),
                    rng=encode_x(y),
                    payload=TransformationArrow(g, x, y),
                    is_unit=g == group.identity,
                )
            )

    def compose_key(a: Arrow, b: Arrow) -> str:
        return arrow_id(group.multiply(a.payload.g, b.payload.g), b.payload.x)

    def inverse_key(a: Arrow) -> str:
        return arrow_id(group.invert(a.payload.g), a.payload.target)

    full = group.finite and (radius is None or len(elements) == len(group.elements()))
    logger.info(
        'transformation groupoid %s: %d points, %d arrows', system.name, len(points), len(arrows)
    )
    return FiniteGroupoidView(
        name=f'{system.name}|R={radius}' if radius is not None else system.name,
        arrows=arrows,
        compose_key=compose_key,
        inverse_key=inverse_key,
        length=LengthFn(f'{group.name}.word', lambda a: group.length(a.payload.g)),
        full=full,
        budget={} if radius is None else {'radius': radius},
    )


def check_partial_action(
    system: PartialActionSystem,
    points: Iterable,
    radius: int,
) -> CheckReport:
    """Identity law and the one-sided composition law on all in-radius pairs.

    If ``b.x`` and ``a.(b.x)`` are defined then ``(ab).x`` is defined and equal.
    """
    report = CheckReport(system=system.name, budget={'radius': radius})
    group = system.group
    elements = _elements(system, radius)
    points = list(points)
    for x in points:
        report.add_flag('action.identity', system.encode(x), system.act(group.identity, x) == x)
        for b in elements:
            bx = system.act(b, x)
            if bx is None:
                continue
            for a in elements:
                abx = system.act(a, bx)
                if abx is None:
                    continue
                direct = system.act(group.multiply(a, b), x)
                instance = f'{group.encode(a)}|{group.encode(b)}|{system.encode(x)}'
                report.add_flag('action.composition', instance, direct == abx)
    return report


def check_fiber_injection(view: FiniteGroupoidView, system: PartialActionSystem) -> CheckReport:
    """Source fibers inject into the group through ``(g, x) -> g``."""
    report = CheckReport(system=view.name)
    radius = view.budget.get('radius')
    ball = len(_elements(system, radius))
    for unit in view.units:
        fiber = view.fiber(unit, 'source')
        distinct = {system.group.encode(a.payload.g) for a in fiber}
        report.add_flag('fiber.injective', unit, len(distinct) == len(fiber))
        report.add('fiber.ball_bound', unit, len(fiber), ball)
    return report


__all__ = [
    'DegeneratePartialAction',
    'FiniteGlobalAction',
    'PartialActionSystem',
    'ShiftPartialAction',
    'TransformationArrow',
    'act',
    'build_transformation_groupoid',
    'check_fiber_injection',
    'check_partial_action',
    'orbit_closure',
    'swap_action',
]
