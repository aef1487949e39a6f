"""Reduction of bundles over ``G x| X`` to bundles over the acting group.

A bundle E over a transformation groupoid lifts to a bundle over the group
whose fiber at g collects the fibers ``E_(g, x)`` over the sampled points x
in the domain of g. Fibers are stored as block matrices indexed by points,
with ``E_(g, x)`` in block ``(g.x, x)``; the transport ``phi_transport``
moves sections across and preserves products, adjoints, Sobolev norms and
reduced norms.
"""

import logging
import warnings
from typing import Iterable

import numpy as np

from grd import words
from grd._utils import rng_for
from grd.dynamics import (
    DRArrow,
    EvPeriodicPoint,
    FullShift,
    dr_fiber,
    dr_groupoid,
    dr_arrow_id,
    steinberg_psi,
)
from grd.fell import ConcreteBundle, build_bundle
from grd.groupoid import Arrow, FiniteGroupoidView, GroupModel, group_groupoid
from grd.partial_actions import ShiftPartialAction, build_transformation_groupoid
from grd.report import CheckReport
from grd.sections import (
    Section,
    convolve,
    involve,
    random_section,
    reduced_norm,
    sobolev_norm,
)


logger = logging.getLogger(__name__)

TOL_HOM = 1e-12
TOL_SOBOLEV = 1e-10
TOL_REDUCED = 1e-8
REDUCTION_PS = (0, 1, 2, 3)
STEINBERG_RADIUS = 4
STEINBERG_DEPTH = 6


class LiftedBundle(ConcreteBundle):
    """Bundle over a group built from a bundle over ``G x| X``.

    Parameters
    ----------
    base : ConcreteBundle
        Bundle over a transformation groupoid view (arrows carry a
        ``TransformationArrow`` payload).
    view : FiniteGroupoidView
        Group view (one unit) whose arrows index the lifted fibers.
    points : Iterable[str], optional
        Sample of base units; every arrow out of the sample must land in it.
    """

    kind = 'lifted'

    def __init__(self, base: ConcreteBundle, view: FiniteGroupoidView, points=None):
        super().__init__(view)
        if len(view.units) != 1:
            raise ValueError(f'lifted bundles need a group view, got {len(view.units)} units')
        base_view = base.view
        points = sorted(base_view.units if points is None else set(points))
        for x in points:
            base_view.unit_arrow(x)
        sample = set(points)

        self.base = base
        self.points: tuple[str, ...] = tuple(points)
        self._offsets: dict[str, int] = {}
        size = 0
        for x in self.points:
            self._offsets[x] = size
            size += base.rank(x)
        self.size = size

        self._ids = {g.payload: g.id for g in view.arrows}
        self._by_src: dict[tuple[str, str], Arrow] = {}
        self._by_rng: dict[tuple[str, str], Arrow] = {}
        self._domains: dict[str, list[str]] = {g.id: [] for g in view.arrows}
        for a in base_view.arrows:
            if a.src not in sample:
                continue
            if a.rng not in sample:
                raise ValueError(f'point {a.rng} escapes the base-point sample through {a.id}')
            g_id = self.group_id(a)
            if g_id is None:
                raise ValueError(f'{a.id} acts by an element outside {view.name!r}')
            self._by_src[(g_id, a.src)] = a
            self._by_rng[(g_id, a.rng)] = a
            self._domains[g_id].append(a.src)

    def group_id(self, a: Arrow) -> str | None:
        return self._ids.get(a.payload.g)

    @property
    def name(self) -> str:
        return f'lifted[{self.base.name}]'

    def rank(self, unit: str) -> int:
        return self.size

    def domain(self, gamma: Arrow | str) -> list[str]:
        """Sampled points x where ``gamma.x`` is defined."""
        g_id = gamma.id if isinstance(gamma, Arrow) else gamma
        return list(self._domains.get(g_id, []))

    def fiber_dim(self, gamma: Arrow | str) -> int:
        g_id = gamma.id if isinstance(gamma, Arrow) else gamma
        shapes = [self.base.shape(self._by_src[(g_id, x)]) for x in self.domain(g_id)]
        return sum(rows * cols for rows, cols in shapes)

    def base_arrow(self, gamma: Arrow, x: str) -> Arrow | None:
        """The base arrow ``(gamma, x)``, None outside the domain."""
        return self._by_src.get((gamma.id, x))

    def block(self, a: Arrow) -> tuple[slice, slice]:
        """Rows and columns of ``E_a`` inside the lifted fiber."""
        r, c = self._offsets[a.rng], self._offsets[a.src]
        rows, cols = self.base.shape(a)
        return slice(r, r + rows), slice(c, c + cols)

    def element(self, arrow: Arrow, value) -> np.ndarray:
        a = super().element(arrow, value)
        mask = np.ones(a.shape, dtype=bool)
        for x in self.domain(arrow):
            mask[self.block(self._by_src[(arrow.id, x)])] = False
        if np.any(a[mask] != 0):
            raise ValueError(f'element over {arrow.id} has entries outside its domain blocks')
        return a

    def mult(self, gamma, eta, a, b):
        self._composable(gamma, eta)
        out = np.zeros((self.size, self.size), dtype=complex)
        for x in self.domain(eta):
            second = self._by_src[(eta.id, x)]
            first = self._by_src.get((gamma.id, second.rng))
            if first is None:
                continue
            product = self.base.view.compose(first, second)
            value = self.base.mult(first, second, a[self.block(first)], b[self.block(second)])
            out[self.block(product)] += value
        return out

    def invol(self, gamma, a):
        out = np.zeros((self.size, self.size), dtype=complex)
        for x in self.domain(gamma):
            arrow = self._by_src[(gamma.id, x)]
            inverse = self.base.view.inverse(arrow)
            out[self.block(inverse)] = self.base.invol(arrow, a[self.block(arrow)])
        return out

    def norm(self, gamma, a):
        return max(
            (
                self.base.norm(arrow, a[self.block(arrow)])
                for arrow in (self._by_src[(gamma.id, x)] for x in self.domain(gamma))
            ),
            default=0.0,
        )

    def regular_block(self, gamma, eta, zeta, a):
        # component y of slot eta is the base slot (eta, x) with eta.x = y
        out = np.zeros((self.size, self.size), dtype=complex)
        for y in self.points:
            slot = self._by_rng.get((eta.id, y))
            first = self._by_src.get((gamma.id, y))
            if slot is None or first is None:
                continue
            target = self.base.view.compose(first, slot)
            block = self.base.regular_block(first, slot, target, a[self.block(first)])
            r, c = self._offsets[first.rng], self._offsets[y]
            out[r : r + block.shape[0], c : c + block.shape[1]] += block
        return out

    def slot_dim(self, eta):
        return self.size

    def random_element(self, gamma, rng):
        out = np.zeros((self.size, self.size), dtype=complex)
        for x in self.domain(gamma):
            arrow = self._by_src[(gamma.id, x)]
            out[self.block(arrow)] = self.base.random_element(arrow, rng)
        return out


def lift_to_group_bundle(
    base: ConcreteBundle,
    group: GroupModel,
    points: Iterable[str] | None = None,
) -> LiftedBundle:
    """Lifts a bundle over ``G x| X`` to the group, at the radius of the base view.

    Raises
    ------
    ValueError
        If an arrow leaves the point sample (the message names the point) or
        acts by a group element outside the ball.

    Examples
    --------
    >>> view = build_transformation_groupoid(swap_action(), [0, 1])
    >>> lifted = lift_to_group_bundle(build_bundle(view, 'trivial'), CyclicGroup(2))
    >>> [lifted.fiber_dim(g) for g in lifted.view.arrows]
    [2, 2]
    """
    radius = base.view.budget.get('radius')
    view = group_groupoid(group, radius=radius)
    lifted = LiftedBundle(base, view, points)
    logger.debug('lifted %s over %d points of rank %d', base.name, len(lifted.points), lifted.size)
    return lifted


def phi_transport(f: Section, lifted: LiftedBundle) -> Section:
    """``(Phi f)(g)`` holds ``f(g, x)`` in block ``(g.x, x)`` for every sampled x.

    Raises
    ------
    ValueError
        If f is not a section of the lifted bundle's base or leaves the sample.
    """
    if f.bundle is not lifted.base:
        raise ValueError(f'{f.bundle.name} is not the base of {lifted.name}')
    sample = set(lifted.points)
    entries: dict[str, np.ndarray] = {}
    for a, value in f.items():
        if a.src not in sample:
            raise ValueError(f'support arrow {a.id} leaves the base-point sample')
        g_id = lifted.group_id(a)
        block = entries.setdefault(g_id, np.zeros((lifted.size, lifted.size), dtype=complex))
        block[lifted.block(a)] = value
    return Section(lifted, entries)


def phi_inverse(section: Section, lifted: LiftedBundle) -> Section:
    """Inverse of ``phi_transport``."""
    if section.bundle is not lifted:
        raise ValueError(f'{section.bundle.name} is not {lifted.name}')
    entries = {}
    for g, value in section.items():
        for x in lifted.domain(g):
            a = lifted.base_arrow(g, x)
            entries[a] = value[lifted.block(a)]
    return Section(lifted.base, entries)


def _scale(*sections: Section) -> float:
    return max([1.0] + [float(np.max(np.abs(v))) for s in sections for _, v in s.items()])


def reduction_equivalence_check(
    lifted: LiftedBundle,
    sections: Iterable[tuple[Section, Section]] | None = None,
    count: int = 100,
    ps: Iterable[int] = REDUCTION_PS,
    seed: int = 0,
    support=None,
) -> CheckReport:
    """Products, adjoints, Sobolev norms and reduced norms agree across ``phi``.

    Pairs ``(f, h)`` of base sections come from ``sections`` or are drawn at
    random on ``support`` (arrows of length ``<= radius // 2`` on truncated
    views, so that products stay enumerated). On truncated views both
    reduced norms are lower bounds from the same compression and are
    compared as such.
    """
    base = lifted.base
    full = base.view.full
    ps = list(ps)
    report = CheckReport(
        system=lifted.name,
        seed=seed,
        params={'ps': ps, 'points': len(lifted.points)},
        budget=dict(base.view.budget),
    )
    if sections is None and support is None and not full:
        half = base.view.budget.get('radius', 0) // 2

        def support(a: Arrow) -> bool:
            return base.view.length(a) <= half

    if sections is None:
        sections = [
            (
                random_section(base, rng_for(seed, i, 0), support),
                random_section(base, rng_for(seed, i, 1), support),
            )
            for i in range(count)
        ]
    if not full:
        report.note('reduced norms are lower bounds on both sides')

    for i, (f, h) in enumerate(sections):
        inst = f'pair={i:03d}'
        pf, ph = phi_transport(f, lifted), phi_transport(h, lifted)
        report.add('phi.round_trip', inst, phi_inverse(pf, lifted).max_difference(f), 0.0)
        groups = {lifted.group_id(a) for a in f.support}
        report.add_flag('phi.support', inst, groups == {g.id for g in pf.support})

        scale = _scale(f, h) ** 2
        product = phi_transport(convolve(f, h), lifted)
        gap = product.max_difference(convolve(pf, ph))
        report.add('phi.multiplicative', inst, gap, 0.0, TOL_HOM * scale)
        adjoint = phi_transport(involve(f), lifted)
        report.add('phi.involution', inst, adjoint.max_difference(involve(pf)), 0.0, TOL_HOM)

        for p in ps:
            left, right = sobolev_norm(f, p), sobolev_norm(pf, p)
            report.add_equal(f'phi.sobolev.p{p}', inst, left, right, TOL_SOBOLEV * max(1.0, left))

        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            left, right = reduced_norm(f).value, reduced_norm(pf).value
        report.add_equal('phi.reduced', inst, left, right, TOL_REDUCED * max(1.0, left))
    logger.info('reduction_equivalence_check(%s): %s', lifted.name, report.verdict)
    return report


def _points(shift: FullShift, depth: int) -> list[EvPeriodicPoint]:
    found = {p for k in range(depth + 1) for p in shift.prefix_points(k)}
    return sorted(found, key=lambda p: p.encode())


def steinberg_check(
    d: int = 2,
    radius: int = STEINBERG_RADIUS,
    depth: int = STEINBERG_DEPTH,
) -> CheckReport:
    """Checks ``Psi(w, x) = (w.x, |u| - |v|, x)`` on the full shift.

    Pairs are the reduced words of length ``<= radius`` against the points
    ``w 0^inf`` with ``|w| <= depth``. Per point, Psi must be injective and
    hit exactly the Deaconu-Renault arrows of length ``<= radius``; lengths
    must be preserved; ``Psi(w'w, x) = Psi(w', w.x) Psi(w, x)`` for
    ``|w'| + |w| <= radius``; words with a subword ``a_j^-1 a_i`` act nowhere.
    Exactly one sign s must give ``c(Psi(w, x)) = phi_s(w)``; it is stored
    in ``params['validated_sign']``.
    """
    shift = FullShift(d)
    ball = words.ball(d, radius)
    points = _points(shift, depth)
    report = CheckReport(
        system=shift.name,
        params={'radius': radius, 'depth': depth},
        budget={'words': len(ball), 'points': len(points)},
    )
    cache: dict[tuple[words.Word, EvPeriodicPoint], DRArrow | None] = {}

    def psi(w: words.Word, x: EvPeriodicPoint) -> DRArrow | None:
        key = (w, x)
        if key not in cache:
            cache[key] = steinberg_psi(shift, w, x)
        return cache[key]

    mismatches = {1: 0, -1: 0}
    for x in points:
        xid = x.encode()
        images = {}
        for w in ball:
            arrow = psi(w, x)
            if words.has_forbidden_subword(w):
                report.add_flag('steinberg.forbidden', f'{w}|{xid}', arrow is None)
                continue
            if arrow is None:
                continue
            images[w] = arrow
            report.add('steinberg.length', f'{w}|{xid}', arrow.length, w.length)
            for s in mismatches:
                mismatches[s] += arrow.k != words.phi_hom(w, s)
        ids = [a.id for a in images.values()]
        report.add_flag('steinberg.injective', xid, len(set(ids)) == len(ids))
        expected = {a.id for a in dr_fiber(shift, x, radius)}
        report.add_flag('steinberg.surjective', xid, set(ids) == expected)

        for w, arrow in images.items():
            y = arrow.x
            for w2 in ball:
                if w2.length + w.length > radius:
                    continue
                second = psi(w2, y)
                if second is None:
                    continue
                direct = psi(words.multiply(w2, w), x)
                composite = dr_arrow_id(second.x, second.k + arrow.k, x)
                ok = direct is not None and direct.id == composite
                report.add_flag('steinberg.composition', f'{w2}*{w}|{xid}', ok)

    for s, bad in mismatches.items():
        report.budget[f'sign_mismatches.{s:+d}'] = bad
    valid = [s for s, bad in mismatches.items() if bad == 0]
    report.add_flag('steinberg.sign_unique', 'phi_s', len(valid) == 1)
    report.params['validated_sign'] = valid[0] if len(valid) == 1 else None
    logger.info('steinberg_check(d=%d): validated sign %s', d, report.params['validated_sign'])
    return report


def steinberg_transport_check(
    d: int = 2,
    radius: int = 2,
    depth: int = 2,
    count: int = 20,
    seed: int = 0,
    sign: int = 1,
) -> CheckReport:
    """Sections on the Deaconu-Renault side pulled back along Psi and lifted by phi.

    For scalar sections f, h on arrows of length ``<= radius // 2``: the
    pullbacks along Psi convolve like f and h; ``phi`` of the pullback holds
    ``f(Psi(w, x))`` at block ``(w.x, x)`` of w; and ``c(Psi(w, x)) = phi_s(w)``
    on every arrow of the transformation groupoid.
    """
    system = ShiftPartialAction(d)
    shift = system.shift
    tview = build_transformation_groupoid(system, shift.prefix_points(depth), radius)
    points = sorted({a.payload.x for a in tview.arrows}, key=lambda p: p.encode())
    dview = dr_groupoid(shift, points, radius)
    tbundle = build_bundle(tview, 'trivial')
    dbundle = build_bundle(dview, 'trivial')
    lifted = lift_to_group_bundle(tbundle, system.group)
    report = CheckReport(
        system=f'{system.name}->{dview.name}',
        seed=seed,
        params={'radius': radius, 'depth': depth, 'sign': sign},
        budget={'arrows': len(tview.arrows), 'points': len(points)},
    )

    psi: dict[str, Arrow] = {}
    for a in tview.arrows:
        image = steinberg_psi(shift, a.payload.g, a.payload.x)
        inst = a.id
        if image is None or image.id not in dview:
            report.add_flag('transport.arrow', inst, False)
            continue
        psi[a.id] = dview.arrow(image.id)
        report.add_flag('transport.arrow', inst, True)
        report.add_flag('transport.cocycle', inst, image.k == words.phi_hom(a.payload.g, sign))

    def pull(f: Section) -> Section:
        return Section(tbundle, {a: f[psi[a.id]] for a in tview.arrows if a.id in psi})

    half = radius // 2
    units = set(tview.units)

    def inner(a: Arrow) -> bool:
        return dview.length(a) <= half and a.src in units and a.rng in units

    for i in range(count):
        f = random_section(dbundle, rng_for(seed, i, 0), inner)
        h = random_section(dbundle, rng_for(seed, i, 1), inner)
        inst = f'pair={i:03d}'
        pf, ph = pull(f), pull(h)
        scale = _scale(f, h) ** 2
        gap = pull(convolve(f, h)).max_difference(convolve(pf, ph))
        report.add('transport.convolution', inst, gap, 0.0, TOL_HOM * scale)
        gap = pull(involve(f)).max_difference(involve(pf))
        report.add('transport.involution', inst, gap, 0.0)

        lifted_f = phi_transport(pf, lifted)
        worst = 0.0
        for a in tview.arrows:
            if a.id not in psi:
                continue
            g = lifted.view.arrow(system.group.encode(a.payload.g))
            value = lifted_f[g][lifted.block(a)]
            worst = max(worst, float(np.max(np.abs(value - f[psi[a.id]]))))
        report.add('transport.triangle', inst, worst, 0.0)
    return report


__all__ = [
    'LiftedBundle',
    'lift_to_group_bundle',
    'phi_inverse',
    'phi_transport',
    'reduction_equivalence_check',
    'steinberg_check',
    'steinberg_transport_check',
]
