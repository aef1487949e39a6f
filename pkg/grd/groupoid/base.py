from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Literal


Side = Literal['source', 'range']


class BudgetError(ValueError):
    """A composite needed by an operation lies outside the enumerated view."""


@dataclass(frozen=True)
class Arrow:
    """One arrow of an enumerated groupoid.

    Parameters
    ----------
    id : str
        Canonical encoding of the payload. Arrow identity is the id.
    src, rng : str
        Ids of the source and range units.
    payload : Hashable
        Construction-specific data used to compose arrows.
    is_unit : bool
        Whether the arrow is the unit arrow of ``src`` (= ``rng``).
    """

    id: str
    src: str
    rng: str
    payload: Hashable = field(compare=False)
    is_unit: bool = field(default=False, compare=False)

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class LengthFn:
    """Length function on the arrows of a view, ``eval(arrow) -> float``."""

    name: str
    func: Callable[[Arrow], float] = field(compare=False)

    def __call__(self, arrow: Arrow) -> float:
        return float(self.func(arrow))

    def weight(self, arrow: Arrow, p: float) -> float:
        return (1.0 + self(arrow)) ** p


def zero_length() -> LengthFn:
    return LengthFn('zero', lambda arrow: 0.0)


def discrete_length() -> LengthFn:
    """L = 0 on units and 1 elsewhere."""
    return LengthFn('discrete', lambda arrow: 0.0 if arrow.is_unit else 1.0)


class FiniteGroupoidView:
    """Explicitly enumerated groupoid, possibly a truncation of an infinite one.

    Composition and inversion are computed on payloads by the builder
    (``compose_key`` / ``inverse_key`` return the id of the result) and then
    looked up among the enumerated arrows. A composable pair whose composite is
    not enumerated raises ``BudgetError``.

    Parameters
    ----------
    name : str
        Descriptor used in reports.
    arrows : Iterable[Arrow]
        Arrows of the view; duplicates (same id) are dropped, the first kept.
    compose_key : Callable[[Arrow, Arrow], str]
        Id of the composite of a composable pair.
    inverse_key : Callable[[Arrow], str]
        Id of the inverse.
    length : LengthFn, optional
        Canonical length of the construction, default ``discrete_length()``.
    full : bool
        True when the view is a whole finite groupoid (closed under composition).
    budget : dict, optional
        Description of the truncation, copied into reports.
    """

    def __init__(
        self,
        name: str,
        arrows: Iterable[Arrow],
        compose_key: Callable[[Arrow, Arrow], str],
        inverse_key: Callable[[Arrow], str],
        length: LengthFn | None = None,
        full: bool = True,
        budget: dict[str, Any] | None = None,
    ):
        by_id: dict[str, Arrow] = {}
        for arrow in arrows:
            if not isinstance(arrow, Arrow):
                raise TypeError(f'expected Arrow, got {type(arrow).__name__}')
            by_id.setdefault(arrow.id, arrow)

        self.name = name
        self.full = full
        self.budget = dict(budget or {})
        self.length = length if length is not None else discrete_length()
        self._compose_key = compose_key
        self._inverse_key = inverse_key
        self._by_id = by_id
        self.arrows: tuple[Arrow, ...] = tuple(by_id[k] for k in sorted(by_id))

        unit_arrows = {a.src: a for a in self.arrows if a.is_unit}
        referenced = {a.src for a in self.arrows} | {a.rng for a in self.arrows}
        missing = sorted(referenced - set(unit_arrows))
        if missing:
            raise ValueError(f'units without a unit arrow in view {name!r}: {missing[:5]}')
        self._unit_arrows = unit_arrows
        self.units: tuple[str, ...] = tuple(sorted(unit_arrows))

        src_fibers: dict[str, list[Arrow]] = {x: [] for x in self.units}
        rng_fibers: dict[str, list[Arrow]] = {x: [] for x in self.units}
        for arrow in self.arrows:
            src_fibers[arrow.src].append(arrow)
            rng_fibers[arrow.rng].append(arrow)
        self._fibers = {
            'source': {x: tuple(v) for x, v in src_fibers.items()},
            'range': {x: tuple(v) for x, v in rng_fibers.items()},
        }

    def __repr__(self) -> str:
        kind = 'full' if self.full else 'truncated'
        return (
            f'FiniteGroupoidView({self.name!r}, {len(self.units)} units, '
            f'{len(self.arrows)} arrows, {kind})'
        )

    def __len__(self) -> int:
        return len(self.arrows)

    def __contains__(self, item: Arrow | str) -> bool:
        key = item.id if isinstance(item, Arrow) else item
        return key in self._by_id

    def arrow(self, arrow_id: str) -> Arrow:
        try:
            return self._by_id[arrow_id]
        except KeyError:
            raise KeyError(f'arrow {arrow_id!r} is not in view {self.name!r}')

    def unit_arrow(self, unit: str) -> Arrow:
        try:
            return self._unit_arrows[unit]
        except KeyError:
            raise ValueError(f'unknown unit {unit!r} in view {self.name!r}')

    def compose(self, gamma: Arrow, eta: Arrow, strict: bool = False) -> Arrow | None:
        """Composite ``gamma * eta``; None when ``src(gamma) != rng(eta)``.

        Unit factors short-circuit unless ``strict``, which looks every pair up
        in the composition table.
        """
        if gamma.src != eta.rng:
            return None
        if not strict:
            if gamma.is_unit:
                return eta
            if eta.is_unit:
                return gamma
        key = self._compose_key(gamma, eta)
        result = self._by_id.get(key)
        if result is None:
            raise BudgetError(
                f'composite of {gamma.id} and {eta.id} is outside view {self.name!r}'
            )
        return result

    def inverse(self, gamma: Arrow) -> Arrow:
        key = self._inverse_key(gamma)
        result = self._by_id.get(key)
        if result is None:
            raise BudgetError(f'inverse of {gamma.id} is outside view {self.name!r}')
        return result

    def fiber(self, unit: str, side: Side = 'source') -> tuple[Arrow, ...]:
        if side not in self._fibers:
            raise ValueError(f"side must be 'source' or 'range', got {side!r}")
        try:
            return self._fibers[side][unit]
        except KeyError:
            raise ValueError(f'unknown unit {unit!r} in view {self.name!r}')

    def restricted(
        self,
        keep: Callable[[Arrow], bool],
        name: str | None = None,
    ) -> 'FiniteGroupoidView':
        """View on the arrows satisfying ``keep``, sharing composition rules."""
        return FiniteGroupoidView(
            name=name or f'{self.name}|restricted',
            arrows=[a for a in self.arrows if keep(a)],
            compose_key=self._compose_key,
            inverse_key=self._inverse_key,
            length=self.length,
            full=self.full,
            budget=self.budget,
        )

    def with_inverse(self, inverse_key: Callable[[Arrow], str]) -> 'FiniteGroupoidView':
        """Copy with a replaced inverse table (used to inject faults)."""
        return FiniteGroupoidView(
            name=self.name,
            arrows=self.arrows,
            compose_key=self._compose_key,
            inverse_key=inverse_key,
            length=self.length,
            full=self.full,
            budget=self.budget,
        )

    def with_composition(self, compose_key: Callable[[Arrow, Arrow], str]) -> 'FiniteGroupoidView':
        """Copy with a replaced composition table (used to inject faults)."""
        return FiniteGroupoidView(
            name=self.name,
            arrows=self.arrows,
            compose_key=compose_key,
            inverse_key=self._inverse_key,
            length=self.length,
            full=self.full,
            budget=self.budget,
        )

    def with_length(self, length: LengthFn) -> 'FiniteGroupoidView':
        return FiniteGroupoidView(
            name=self.name,
            arrows=self.arrows,
            compose_key=self._compose_key,
            inverse_key=self._inverse_key,
            length=length,
            full=self.full,
            budget=self.budget,
        )

    def describe(self) -> dict[str, Any]:
        return {
            'name': self.name,
            'units': len(self.units),
            'arrows': len(self.arrows),
            'full': self.full,
            'length': self.length.name,
            **{f'budget.{k}': v for k, v in sorted(self.budget.items())},
        }
