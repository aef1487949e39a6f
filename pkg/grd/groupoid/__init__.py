import logging
from typing import Any, Callable

from grd.groupoid.base import (
    Arrow,
    BudgetError,
    FiniteGroupoidView,
    LengthFn,
    Side,
    discrete_length,
    zero_length,
)
from grd.groupoid.builders import (
    GROUP_UNIT,
    cyclic_group,
    free_group_ball,
    group_groupoid,
    integer_ball,
    pair_groupoid,
    product_with_set,
    subgroupoid,
    symmetric_group,
)
from grd.groupoid.groups import CyclicGroup, FreeGroup, GroupModel, IntegerGroup, SymmetricGroup
from grd.report import CheckReport


logger = logging.getLogger(__name__)

MAX_TRIPLES = 200_000

_BUILDERS: dict[str, Callable[..., FiniteGroupoidView]] = {
    'pair': pair_groupoid,
    'cyclic': cyclic_group,
    'symmetric': symmetric_group,
    'integer': integer_ball,
    'free': free_group_ball,
}


def build(kind: str, *args, **kwargs) -> FiniteGroupoidView:
    """Builds a fixture view by name.

    Examples
    --------
    >>> build('pair', 3)
    >>> build('cyclic', 4)
    >>> build('free', 2, 3)  # ball of radius 3 in F_2
    """
    if kind == 'product':
        return product_with_set(*args, **kwargs)
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ValueError(f'unknown groupoid kind {kind!r}; choose from {sorted(_BUILDERS)}')
    return builder(*args, **kwargs)


def compose(view: FiniteGroupoidView, gamma: Arrow, eta: Arrow) -> Arrow | None:
    """``gamma * eta`` or None when not composable. Raises BudgetError off-view."""
    for arrow in (gamma, eta):
        if arrow not in view:
            raise ValueError(f'arrow {arrow.id} is not in view {view.name!r}')
    return view.compose(gamma, eta)


def fiber(view: FiniteGroupoidView, unit: str, side: Side = 'source') -> tuple[Arrow, ...]:
    return view.fiber(unit, side)


def _safe(func: Callable[[], Any]) -> tuple[Any, bool]:
    try:
        return func(), True
    except BudgetError:
        return None, False


def check_axioms(
    view: FiniteGroupoidView,
    length: LengthFn | None = None,
    max_triples: int = MAX_TRIPLES,
) -> CheckReport:
    """Verifies the groupoid laws (and the length axioms) on the enumeration.

    Associativity is checked only on triples whose partial products lie in the
    view; skipped triples and the triple cap are recorded in the budget.

    Returns
    -------
    CheckReport
        One row per checked instance; violations have negative slack.
    """
    report = CheckReport(system=view.name, budget={'full': view.full, **view.budget})

    for gamma in view.arrows:
        inv, ok = _safe(lambda: view.inverse(gamma))
        if not ok:
            report.add_flag('inverse.defined', gamma.id, False)
            continue
        endpoints = inv.src == gamma.rng and inv.rng == gamma.src
        report.add_flag('inverse.endpoints', gamma.id, endpoints)
        back, ok = _safe(lambda: view.inverse(inv))
        report.add_flag('inverse.involutive', gamma.id, ok and back == gamma)
        if inv.src != gamma.rng:
            continue
        unit, ok = _safe(lambda: view.compose(gamma, inv, strict=True))
        report.add_flag('inverse.unit', gamma.id, ok and unit == view.unit_arrow(gamma.rng))
        left_unit, right_unit = view.unit_arrow(gamma.rng), view.unit_arrow(gamma.src)
        left, ok_left = _safe(lambda: view.compose(left_unit, gamma, strict=True))
        right, ok_right = _safe(lambda: view.compose(gamma, right_unit, strict=True))
        report.add_flag('unit.left', gamma.id, ok_left and left == gamma)
        report.add_flag('unit.right', gamma.id, ok_right and right == gamma)

    by_range: dict[str, list[Arrow]] = {}
    for eta in view.arrows:
        by_range.setdefault(eta.rng, []).append(eta)

    products: dict[tuple[str, str], Arrow] = {}
    for gamma in view.arrows:
        for eta in by_range.get(gamma.src, []):
            product, ok = _safe(lambda: view.compose(gamma, eta, strict=True))
            if not ok:
                continue
            products[(gamma.id, eta.id)] = product
            report.add_flag(
                'compose.endpoints',
                f'{gamma.id}*{eta.id}',
                product.src == eta.src and product.rng == gamma.rng,
            )

    triples = skipped = 0
    for (g_id, h_id), gh in products.items():
        if triples >= max_triples:
            break
        h = view.arrow(h_id)
        for k in by_range.get(h.src, []):
            hk = products.get((h_id, k.id))
            if hk is None:
                skipped += 1
                continue
            left = products.get((gh.id, k.id))
            right = products.get((g_id, hk.id))
            if left is None or right is None:
                skipped += 1
                continue
            triples += 1
            report.add_flag('associativity', f'{g_id}*{h_id}*{k.id}', left == right)
    report.budget['triples_checked'] = triples
    report.budget['triples_skipped'] = skipped
    if triples >= max_triples:
        report.note(f'associativity capped at {max_triples} triples')

    if length is not None:
        report.budget['length'] = length.name
        for gamma in view.arrows:
            inv, ok = _safe(lambda: view.inverse(gamma))
            if ok:
                report.add_equal('length.symmetric', gamma.id, length(inv), length(gamma), 0.0)
            if gamma.is_unit:
                report.add_equal('length.unit', gamma.id, length(gamma), 0.0, 0.0)
            if length(gamma) < 0:
                report.add('length.nonnegative', gamma.id, 0.0, length(gamma))
        for (g_id, h_id), gh in products.items():
            report.add(
                'length.subadditive',
                f'{g_id}*{h_id}',
                length(gh),
                length(view.arrow(g_id)) + length(view.arrow(h_id)),
                1e-12,
            )
    logger.debug('check_axioms(%s): %s', view.name, report.verdict)
    return report


__all__ = [
    'Arrow',
    'BudgetError',
    'CyclicGroup',
    'FiniteGroupoidView',
    'FreeGroup',
    'GROUP_UNIT',
    'GroupModel',
    'IntegerGroup',
    'LengthFn',
    'SymmetricGroup',
    'build',
    'check_axioms',
    'compose',
    'cyclic_group',
    'discrete_length',
    'fiber',
    'free_group_ball',
    'group_groupoid',
    'integer_ball',
    'pair_groupoid',
    'product_with_set',
    'subgroupoid',
    'symmetric_group',
    'zero_length',
]
