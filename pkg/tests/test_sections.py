import math
import unittest

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from grd import fell, groupoid
from grd import sections as sec
from grd._utils import rng_for
from grd.groupoid import BudgetError
from tests._strategies import PROPERTY_SETTINGS, sections


def _trivial(kind: str, *args, dim: int = 1):
    return fell.build_bundle(groupoid.build(kind, *args), 'trivial', dim=dim)


class TestSectionAlgebra(unittest.TestCase):
    def test_zero_entries_dropped(self):
        bundle = _trivial('cyclic', 3)
        f = sec.Section(bundle, {'0': 0.0, '1': 2.0})
        assert len(f) == 1
        assert [a.id for a in f.support] == ['1']
        assert f['2'][0, 0] == 0

    def test_unknown_arrow(self):
        with self.assertRaises(ValueError):
            sec.Section(_trivial('cyclic', 3), {'7': 1.0})

    def test_mixed_bundles(self):
        f = sec.delta(_trivial('cyclic', 2), '1')
        g = sec.delta(_trivial('cyclic', 2), '1')
        with self.assertRaises(ValueError):
            f + g
        with self.assertRaises(TypeError):
            f * f

    def test_convolution_on_group(self):
        bundle = _trivial('cyclic', 3)
        f = sec.convolve(sec.delta(bundle, '1'), sec.delta(bundle, '2'))
        assert [a.id for a in f.support] == ['0']

    def test_twisted_convolution(self):
        view = groupoid.build('cyclic', 2)
        bundle = fell.build_bundle(view, 'twisted', sigma={('1', '1'): -1})
        g = sec.delta(bundle, '1')
        assert sec.convolve(g, g)['0'][0, 0] == -1

    def test_pair_matrix_units(self):
        bundle = _trivial('pair', 3)
        e01 = sec.delta(bundle, '(0,1)')
        e12 = sec.delta(bundle, '(1,2)')
        assert [a.id for a in sec.convolve(e01, e12).support] == ['(0,2)']
        assert not sec.convolve(e12, e01)

    def test_involution(self):
        bundle = _trivial('pair', 2, dim=2)
        f = sec.random_section(bundle, rng_for(0, 1))
        assert sec.involve(sec.involve(f)).allclose(f)
        h = f + sec.involve(f)
        assert sec.is_self_adjoint(h)

    def test_convolution_out_of_view(self):
        bundle = _trivial('integer', 2)
        f = sec.delta(bundle, '+00002')
        with self.assertRaises(BudgetError):
            sec.convolve(f, f)

    def test_restrict_and_distance(self):
        bundle = _trivial('pair', 3)
        f = sec.indicator(bundle)
        units = sec.indicator(bundle, lambda a: a.is_unit)
        assert f.restrict(lambda a: a.is_unit).allclose(units)
        assert sec.l2_distance_to_restriction(units, lambda a: a.is_unit) == 0.0
        assert abs(sec.l2_distance_to_restriction(f, lambda a: a.is_unit) - math.sqrt(2)) < 1e-12


class TestNorms(unittest.TestCase):
    def test_group_reduced_norm(self):
        bundle = _trivial('cyclic', 2)
        f = sec.delta(bundle, '0') + sec.delta(bundle, '1')
        result = sec.reduced_norm(f)
        assert abs(result.value - 2.0) < 1e-12
        assert not result.lower_bound

    def test_pair_all_ones(self):
        for n in (2, 3, 5):
            f = sec.indicator(_trivial('pair', n))
            result = sec.norms(f, reduced=True)
            assert abs(result.reduced.value - n) < 1e-9
            assert abs(result.l2_s - math.sqrt(n)) < 1e-12
            assert result.I == n
            assert result.sup == 1.0
            assert result.chain_holds()

    def test_sobolev_weights(self):
        bundle = _trivial('integer', 3)
        f = sec.delta(bundle, '+00001')
        assert sec.sobolev_norm(f, p=3) == 8.0
        assert sec.sobolev_norm(f, p=0) == 1.0
        assert sec.sobolev_norm(sec.weight(f, p=1.0), p=0) == 2.0

    def test_side_norms(self):
        bundle = _trivial('pair', 3)
        f = sec.indicator(bundle, lambda a: a.rng == '0')
        assert abs(sec.sobolev_norm(f, side='range') - math.sqrt(3)) < 1e-12
        assert abs(sec.sobolev_norm(f, side='source') - 1.0) < 1e-12
        with self.assertRaises(ValueError):
            sec.fiber_sums(f, side='left')

    def test_norm_chain_random(self):
        bundle = _trivial('symmetric', 3, dim=2)
        for i in range(5):
            f = sec.random_section(bundle, rng_for(4, i))
            assert sec.norms(f, reduced=True).chain_holds()

    def test_truncated_reduced_norm_is_lower_bound(self):
        bundle = _trivial('integer', 3)
        f = sec.delta(bundle, '+00001')
        with self.assertWarns(UserWarning):
            result = sec.reduced_norm(f)
        assert result.lower_bound
        assert abs(result.value - 1.0) < 1e-12

    def test_budget_must_cover_support(self):
        bundle = _trivial('integer', 3)
        f = sec.delta(bundle, '+00002')
        with self.assertRaises(ValueError):
            sec.reduced_norm(f, budget=1)
        with self.assertRaises(ValueError):
            sec.reduced_norm(f, units=['nowhere'])

    def test_workers_do_not_change_result(self):
        bundle = _trivial('pair', 4)
        f = sec.random_section(bundle, rng_for(9, 0))
        assert sec.reduced_norm(f).value == sec.reduced_norm(f, workers=3).value


_PAIR3 = _trivial('pair', 3, dim=2)
_Z4 = _trivial('cyclic', 4)
_TWISTED = fell.build_bundle(groupoid.build('cyclic', 2), 'twisted', sigma={('1', '1'): -1})


class TestSectionLaws(unittest.TestCase):
    @PROPERTY_SETTINGS
    @given(st.one_of(sections(_PAIR3), sections(_Z4), sections(_TWISTED)))
    def test_norm_chain(self, f):
        result = sec.norms(f, reduced=True)
        assert result.chain_holds(tol=1e-9 * max(1.0, result.I))

    @PROPERTY_SETTINGS
    @given(sections(_PAIR3), sections(_PAIR3))
    def test_adjoint_of_product(self, f, g):
        left = sec.involve(sec.convolve(f, g))
        right = sec.convolve(sec.involve(g), sec.involve(f))
        assert left.max_difference(right) <= 1e-10 * max(1.0, sec.i_norm(f) * sec.i_norm(g))

    @PROPERTY_SETTINGS
    @given(sections(_TWISTED), sections(_TWISTED), sections(_TWISTED))
    def test_twisted_convolution_is_associative(self, f, g, h):
        left = sec.convolve(sec.convolve(f, g), h)
        right = sec.convolve(f, sec.convolve(g, h))
        scale = sec.i_norm(f) * sec.i_norm(g) * sec.i_norm(h)
        assert left.max_difference(right) <= 1e-10 * max(1.0, scale)

    @PROPERTY_SETTINGS
    @given(sections(_Z4), sections(_Z4))
    def test_reduced_norm_is_submultiplicative(self, f, g):
        product = sec.reduced_norm(f).value * sec.reduced_norm(g).value
        assert sec.reduced_norm(sec.convolve(f, g)).value <= product + 1e-9 * max(1.0, product)
