import logging
from typing import Any, Mapping

import numpy as np

from grd._utils import rng_for
from grd.fell.base import (
    ActionBundle,
    ConcreteBundle,
    RestrictedBundle,
    Sigma,
    TrivialBundle,
    TwistedLineBundle,
)
from grd.groupoid import Arrow, BudgetError, FiniteGroupoidView
from grd.linalg import hermitian_min, operator_norm
from grd.report import CheckReport


logger = logging.getLogger(__name__)

TOL_BUNDLE = 1e-10
AXIOM_SAMPLES = 100
MAX_AXIOM_TRIPLES = 5_000

BUNDLE_KINDS = ('trivial', 'twisted', 'action')


def sigma_from_table(table: Mapping[tuple[str, str], complex], default: complex = 1.0) -> Sigma:
    """Cocycle given on pairs of arrow ids, ``default`` elsewhere."""
    values = {tuple(k): complex(v) for k, v in table.items()}
    return lambda g, h: values.get((g.id, h.id), default)


def cocycle_violations(view: FiniteGroupoidView, sigma: Sigma, tol: float = TOL_BUNDLE) -> list:
    """Triples where ``sigma(a,b) sigma(ab,c) = sigma(a,bc) sigma(b,c)`` fails,
    plus arrows where sigma is not normalized or not of unit modulus."""
    bad = []
    for g in view.arrows:
        for u in (view.unit_arrow(g.rng),):
            if abs(sigma(u, g) - 1) > tol:
                bad.append((u.id, g.id))
        for u in (view.unit_arrow(g.src),):
            if abs(sigma(g, u) - 1) > tol:
                bad.append((g.id, u.id))
    for g, h, k in _triples(view, MAX_AXIOM_TRIPLES * 10):
        gh, hk = view.compose(g, h), view.compose(h, k)
        left = sigma(g, h) * sigma(gh, k)
        right = sigma(g, hk) * sigma(h, k)
        if abs(sigma(g, h)) - 1 > tol or abs(left - right) > tol:
            bad.append((g.id, h.id, k.id))
    return bad


def _pairs(view: FiniteGroupoidView):
    by_range: dict[str, list[Arrow]] = {}
    for eta in view.arrows:
        by_range.setdefault(eta.rng, []).append(eta)
    for g in view.arrows:
        for h in by_range.get(g.src, []):
            try:
                view.compose(g, h)
            except BudgetError:
                continue
            yield g, h


def _triples(view: FiniteGroupoidView, cap: int):
    count = 0
    pairs = list(_pairs(view))
    by_first: dict[str, list[Arrow]] = {}
    for h, k in pairs:
        by_first.setdefault(h.id, []).append(k)
    for g, h in pairs:
        for k in by_first.get(h.id, []):
            try:
                view.compose(view.compose(g, h), k)
                view.compose(g, view.compose(h, k))
            except BudgetError:
                continue
            yield g, h, k
            count += 1
            if count >= cap:
                return


def build_bundle(view: FiniteGroupoidView, kind: str, **params: Any) -> ConcreteBundle:
    """Builds a concrete Fell bundle over ``view``.

    Parameters
    ----------
    view : FiniteGroupoidView
        The base groupoid.
    kind : str
        ``'trivial'`` (``dim``: fiber size, default 1), ``'twisted'``
        (``sigma``: callable on arrow pairs or a table keyed by id pairs) or
        ``'action'`` (``dim`` and ``unitaries``: arrow id -> unitary).

    Raises
    ------
    ValueError
        For unknown kinds, shape mismatches, a sigma that is not a normalized
        unit-modulus 2-cocycle, or unitaries that do not define an action.

    Examples
    --------
    >>> build_bundle(cyclic_group(2), 'twisted', sigma={('1', '1'): -1})
    """
    if kind == 'trivial':
        return TrivialBundle(view, params.get('dim', 1))

    if kind == 'twisted':
        sigma = params.get('sigma', lambda g, h: 1.0)
        if isinstance(sigma, Mapping):
            sigma = sigma_from_table(sigma)
        bad = cocycle_violations(view, sigma)
        if bad:
            raise ValueError(f'sigma is not a normalized 2-cocycle at {bad[0]}')
        return TwistedLineBundle(view, sigma)

    if kind == 'action':
        dim = params.get('dim', 2)
        bundle = ActionBundle(view, dim, params.get('unitaries', {}))
        for g, h in _pairs(view):
            product = bundle.unitary(g) @ bundle.unitary(h)
            target = bundle.unitary(view.compose(g, h))
            # u_g u_h must equal u_gh up to a phase
            overlap = abs(np.trace(target.conj().T @ product)) / dim
            if abs(overlap - 1.0) > TOL_BUNDLE:
                raise ValueError(f'unitaries do not define an action at ({g.id}, {h.id})')
        return bundle

    raise ValueError(f'unknown bundle kind {kind!r}; choose from {BUNDLE_KINDS}')


def swap_unitary(n: int = 2) -> np.ndarray:
    """Permutation unitary reversing the basis of C^n."""
    return np.eye(n, dtype=complex)[::-1]


def check_bundle_axioms(
    bundle: ConcreteBundle,
    samples: int = AXIOM_SAMPLES,
    seed: int = 0,
    tol: float = TOL_BUNDLE,
    max_triples: int = MAX_AXIOM_TRIPLES,
) -> CheckReport:
    """Verifies the Fell bundle laws on random fiber elements.

    Associativity and ``(ab)* = b* a*`` run over composable pairs and triples
    of the view; ``(a*)* = a``, the C*-identity ``||a* a|| = ||a||^2`` and
    positivity of ``a* a`` run on ``samples`` elements spread over the arrows.
    Tolerances are per entry and relative to the size of the elements.
    """
    view = bundle.view
    report = CheckReport(
        system=bundle.name,
        seed=seed,
        budget={'samples': samples, 'max_triples': max_triples, 'tol': tol},
    )

    def element(g: Arrow, *stream: int) -> np.ndarray:
        return bundle.random_element(g, rng_for(seed, *stream))

    arrows = view.arrows
    index = {a.id: i for i, a in enumerate(arrows)}
    for j in range(samples):
        g = arrows[j % len(arrows)]
        a = element(g, 0, j)
        scale = max(1.0, bundle.norm(g, a) ** 2)
        inv = view.inverse(g)
        a_star = bundle.invol(g, a)
        inst = f'{g.id}#{j}'
        report.add_equal('involution.involutive', inst, bundle.invol(inv, a_star), a, tol * scale)
        a_star_a = bundle.mult(inv, g, a_star, a)
        norm_sq = bundle.norm(view.compose(inv, g), a_star_a)
        report.add_equal('cstar.identity', inst, norm_sq, bundle.norm(g, a) ** 2, tol * scale)
        report.add('cstar.positive', inst, 0.0, hermitian_min(a_star_a), tol * scale)

    for g, h in _pairs(view):
        a = element(g, 1, index[g.id])
        b = element(h, 2, index[h.id])
        gh = view.compose(g, h)
        scale = max(1.0, operator_norm(a) * operator_norm(b))
        left = bundle.invol(gh, bundle.mult(g, h, a, b))
        h_inv, g_inv = view.inverse(h), view.inverse(g)
        right = bundle.mult(h_inv, g_inv, bundle.invol(h, b), bundle.invol(g, a))
        inst = f'{g.id}*{h.id}'
        report.add_equal('involution.antimultiplicative', inst, left, right, tol * scale)

    triples = 0
    for g, h, k in _triples(view, max_triples):
        a = element(g, 1, index[g.id])
        b = element(h, 2, index[h.id])
        c = element(k, 3, index[k.id])
        gh, hk = view.compose(g, h), view.compose(h, k)
        left = bundle.mult(gh, k, bundle.mult(g, h, a, b), c)
        right = bundle.mult(g, hk, a, bundle.mult(h, k, b, c))
        scale = max(1.0, operator_norm(a) * operator_norm(b) * operator_norm(c))
        report.add_equal('associativity', f'{g.id}*{h.id}*{k.id}', left, right, tol * scale)
        triples += 1
    report.budget['triples_checked'] = triples

    if isinstance(bundle, TwistedLineBundle):
        for bad in cocycle_violations(view, bundle.sigma, tol):
            report.add_flag('cocycle', '*'.join(bad), False)
    logger.debug('check_bundle_axioms(%s): %s', bundle.name, report.verdict)
    return report


__all__ = [
    'ActionBundle',
    'BUNDLE_KINDS',
    'ConcreteBundle',
    'RestrictedBundle',
    'TOL_BUNDLE',
    'TrivialBundle',
    'TwistedLineBundle',
    'build_bundle',
    'check_bundle_axioms',
    'cocycle_violations',
    'sigma_from_table',
    'swap_unitary',
]
