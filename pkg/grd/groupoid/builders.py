from grd.groupoid.base import (
    Arrow,
    BudgetError,
    FiniteGroupoidView,
    LengthFn,
    discrete_length,
    zero_length,
)
from grd.groupoid.groups import (
    CyclicGroup,
    FreeGroup,
    GroupModel,
    IntegerGroup,
    SymmetricGroup,
)


GROUP_UNIT = '*'


def _check_positive(name: str, value: int):
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f'{name} must be an int, got {type(value).__name__}')
    if value <= 0:
        raise ValueError(f'{name} must be positive, got {value}')


def pair_groupoid(n: int, length: str = 'discrete') -> FiniteGroupoidView:
    """Pair groupoid on ``n`` points: arrows ``(i, j)`` with range i and source j.

    Parameters
    ----------
    n : int
        Number of points.
    length : str
        ``'discrete'`` (1 off the diagonal) or ``'zero'``.

    Examples
    --------
    >>> len(pair_groupoid(3).arrows)
    9
    """
    _check_positive('n', n)
    width = len(str(n - 1))

    def unit(i: int) -> str:
        return f'{i:0{width}d}'

    def arrow_id(i: int, j: int) -> str:
        return f'({unit(i)},{unit(j)})'

    arrows = [
        Arrow(arrow_id(i, j), src=unit(j), rng=unit(i), payload=(i, j), is_unit=i == j)
        for i in range(n)
        for j in range(n)
    ]
    lengths = {'discrete': discrete_length, 'zero': zero_length}
    if length not in lengths:
        raise ValueError(f"length must be one of {sorted(lengths)}, got {length!r}")
    return FiniteGroupoidView(
        name=f'pair({n})',
        arrows=arrows,
        compose_key=lambda g, h: arrow_id(g.payload[0], h.payload[1]),
        inverse_key=lambda g: arrow_id(g.payload[1], g.payload[0]),
        length=lengths[length](),
        full=True,
    )


def group_groupoid(group: GroupModel, radius: int | None = None) -> FiniteGroupoidView:
    """Group viewed as a groupoid with one unit, truncated to a word-length ball.

    Infinite groups need ``radius``; the result is then a truncated view.
    """
    if radius is not None and (not isinstance(radius, int) or radius < 0):
        raise ValueError(f'radius must be a nonnegative integer, got {radius!r}')
    elements = group.elements(radius)
    identity = group.identity
    arrows = [
        Arrow(group.encode(g), src=GROUP_UNIT, rng=GROUP_UNIT, payload=g, is_unit=g == identity)
        for g in elements
    ]
    full = group.finite and (radius is None or len(elements) == len(group.elements()))
    budget = {} if radius is None else {'radius': radius}
    return FiniteGroupoidView(
        name=group.name if radius is None else f'{group.name}|R={radius}',
        arrows=arrows,
        compose_key=lambda g, h: group.encode(group.multiply(g.payload, h.payload)),
        inverse_key=lambda g: group.encode(group.invert(g.payload)),
        length=LengthFn(f'{group.name}.word', lambda a: group.length(a.payload)),
        full=full,
        budget=budget,
    )


def cyclic_group(n: int) -> FiniteGroupoidView:
    _check_positive('n', n)
    return group_groupoid(CyclicGroup(n))


def integer_ball(radius: int) -> FiniteGroupoidView:
    """Truncation of Z to ``-radius..radius`` with ``l(k) = |k|``."""
    return group_groupoid(IntegerGroup(), radius=radius)


def symmetric_group(n: int) -> FiniteGroupoidView:
    _check_positive('n', n)
    return group_groupoid(SymmetricGroup(n))


def free_group_ball(rank: int, radius: int) -> FiniteGroupoidView:
    _check_positive('rank', rank)
    return group_groupoid(FreeGroup(rank), radius=radius)


def product_with_set(view: FiniteGroupoidView, n_points: int) -> FiniteGroupoidView:
    """Product of a view with the trivial groupoid on ``n_points`` points."""
    _check_positive('n_points', n_points)
    width = len(str(n_points - 1))

    def tag(value: str, k: int) -> str:
        return f'{value}|{k:0{width}d}'

    arrows = [
        Arrow(
            tag(a.id, k),
            src=tag(a.src, k),
            rng=tag(a.rng, k),
            payload=(a, k),
            is_unit=a.is_unit,
        )
        for a in view.arrows
        for k in range(n_points)
    ]

    def compose_key(g: Arrow, h: Arrow) -> str:
        inner = view.compose(g.payload[0], h.payload[0])
        return tag(inner.id, g.payload[1])

    def inverse_key(g: Arrow) -> str:
        return tag(view.inverse(g.payload[0]).id, g.payload[1])

    base_length = view.length
    return FiniteGroupoidView(
        name=f'{view.name}x{n_points}',
        arrows=arrows,
        compose_key=compose_key,
        inverse_key=inverse_key,
        length=LengthFn(base_length.name, lambda a: base_length(a.payload[0])),
        full=view.full,
        budget=view.budget,
    )


def subgroupoid(view: FiniteGroupoidView, keep, name: str | None = None) -> FiniteGroupoidView:
    """Subgroupoid of the arrows satisfying ``keep``.

    Raises
    ------
    ValueError
        If the selection misses a unit arrow, an inverse, or an in-view
        composite of two selected arrows; the message names the pair.
    """
    chosen = {a.id for a in view.arrows if keep(a)}
    for arrow_id in sorted(chosen):
        arrow = view.arrow(arrow_id)
        for unit in (arrow.src, arrow.rng):
            if view.unit_arrow(unit).id not in chosen:
                raise ValueError(f'subgroupoid misses the unit arrow of {unit} (from {arrow_id})')
        if view.inverse(arrow).id not in chosen:
            raise ValueError(f'subgroupoid is not closed under inverse at {arrow_id}')

    # composites outside the ambient view are skipped
    members = [view.arrow(i) for i in sorted(chosen)]
    by_range: dict[str, list[Arrow]] = {}
    for eta in members:
        by_range.setdefault(eta.rng, []).append(eta)
    for gamma in members:
        for eta in by_range.get(gamma.src, []):
            try:
                composite = view.compose(gamma, eta)
            except BudgetError:
                continue
            if composite.id not in chosen:
                raise ValueError(
                    f'subgroupoid is not closed: {gamma.id} * {eta.id} = {composite.id}'
                )
    return view.restricted(lambda a: a.id in chosen, name=name or f'{view.name}|sub')
