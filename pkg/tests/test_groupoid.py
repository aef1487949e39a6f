import unittest

from hypothesis import given
from hypothesis import strategies as st

from grd import groupoid
from grd.groupoid import BudgetError
from tests._strategies import PROPERTY_SETTINGS, composable_triples


class TestBuilders(unittest.TestCase):
    def test_pair_groupoid(self):
        view = groupoid.build('pair', 3)
        assert len(view.arrows) == 9
        assert view.units == ('0', '1', '2')
        assert len(view.fiber('1', 'source')) == 3
        assert view.full

        g = view.arrow('(0,1)')
        h = view.arrow('(1,2)')
        assert view.compose(g, h).id == '(0,2)'
        assert view.compose(h, h) is None
        assert view.inverse(g).id == '(1,0)'
        assert view.length(g) == 1.0
        assert view.length(view.unit_arrow('0')) == 0.0

    def test_cyclic_group(self):
        view = groupoid.build('cyclic', 4)
        assert view.units == (groupoid.GROUP_UNIT,)
        one = view.arrow('1')
        three = view.arrow('3')
        assert view.compose(one, three).is_unit
        assert view.length(view.arrow('2')) == 2.0
        assert view.length(three) == 1.0

    def test_symmetric_group(self):
        view = groupoid.build('symmetric', 3)
        assert len(view.arrows) == 6
        assert max(view.length(a) for a in view.arrows) == 2.0

    def test_integer_ball_is_truncated(self):
        view = groupoid.build('integer', 2)
        assert len(view.arrows) == 5
        assert not view.full
        assert view.budget == {'radius': 2}
        two = view.arrow('+00002')
        with self.assertRaises(BudgetError):
            view.compose(two, view.arrow('+00001'))
        assert view.compose(two, view.arrow('-00001')).id == '+00001'

    def test_free_ball(self):
        view = groupoid.build('free', 2, 2)
        assert len(view.arrows) == 17
        assert view.length(view.arrow('a1 A2')) == 2.0

    def test_product_with_set(self):
        view = groupoid.build('product', groupoid.build('cyclic', 2), 3)
        assert len(view.arrows) == 6
        assert len(view.units) == 3

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            groupoid.build('torus', 2)
        with self.assertRaises(ValueError):
            groupoid.build('pair', 0)
        with self.assertRaises(TypeError):
            groupoid.build('pair', 2.5)

    def test_subgroupoid(self):
        view = groupoid.build('cyclic', 4)
        sub = groupoid.subgroupoid(view, lambda a: a.id in ('0', '2'))
        assert len(sub.arrows) == 2
        with self.assertRaises(ValueError):
            groupoid.subgroupoid(view, lambda a: a.id in ('0', '1'))


class TestCheckAxioms(unittest.TestCase):
    def test_fixtures_pass(self):
        for view in (
            groupoid.build('pair', 3),
            groupoid.build('cyclic', 5),
            groupoid.build('symmetric', 3),
            groupoid.build('integer', 3),
            groupoid.build('free', 2, 2),
        ):
            report = groupoid.check_axioms(view, length=view.length)
            assert report.passed, (view.name, report.failures()[:3])

    def test_truncation_skips_triples(self):
        report = groupoid.check_axioms(groupoid.build('integer', 2))
        assert report.passed
        assert report.budget['triples_skipped'] > 0

    def test_broken_inverse_fails(self):
        view = groupoid.build('pair', 3).with_inverse(lambda g: g.id)
        report = groupoid.check_axioms(view)
        assert not report.passed
        failed = {row.check for row in report.failures()}
        assert 'inverse.endpoints' in failed

    def test_broken_unit_law_fails(self):
        view = groupoid.build('cyclic', 2)

        def compose_key(g, h):
            # e * g lands on e instead of g
            return '0' if g.is_unit else str((g.payload + h.payload) % 2)

        report = groupoid.check_axioms(view.with_composition(compose_key))
        failed = {(row.check, row.instance) for row in report.failures()}
        assert ('unit.left', '1') in failed
        assert ('unit.right', '1') not in failed
        assert view.compose(view.arrow('0'), view.arrow('1')).id == '1'
        assert view.with_composition(compose_key).compose(
            view.arrow('0'), view.arrow('1'), strict=True
        ).id == '0'

    def test_unit_table_outside_view_fails(self):
        view = groupoid.build('pair', 2).with_composition(lambda g, h: 'missing')
        report = groupoid.check_axioms(view)
        failed = {row.check for row in report.failures()}
        assert {'unit.left', 'unit.right', 'inverse.unit'} <= failed

    def test_bad_length_fails(self):
        view = groupoid.build('cyclic', 4)
        lengths = {'0': 0.0, '1': 1.0, '2': 5.0, '3': 1.0}
        bad = groupoid.LengthFn('bad', lambda a: lengths[a.id])
        report = groupoid.check_axioms(view, length=bad)
        assert 'length.subadditive' in {row.check for row in report.failures()}


_PAIR4 = groupoid.build('pair', 4)
_CYCLIC6 = groupoid.build('cyclic', 6)
_SYM3 = groupoid.build('symmetric', 3)


class TestGroupoidLaws(unittest.TestCase):
    def _associative(self, view, triple):
        g, h, k = triple
        left = view.compose(view.compose(g, h, strict=True), k, strict=True)
        assert left == view.compose(g, view.compose(h, k, strict=True), strict=True)
        assert view.length(left) <= view.length(g) + view.length(h) + view.length(k)

    @PROPERTY_SETTINGS
    @given(composable_triples(_PAIR4))
    def test_pair_associativity(self, triple):
        self._associative(_PAIR4, triple)

    @PROPERTY_SETTINGS
    @given(composable_triples(_CYCLIC6))
    def test_cyclic_associativity(self, triple):
        self._associative(_CYCLIC6, triple)

    @PROPERTY_SETTINGS
    @given(composable_triples(_SYM3))
    def test_symmetric_associativity(self, triple):
        self._associative(_SYM3, triple)

    @PROPERTY_SETTINGS
    @given(st.sampled_from(_SYM3.arrows), st.sampled_from(_SYM3.arrows))
    def test_inverse_of_product(self, g, h):
        gh = _SYM3.compose(g, h, strict=True)
        assert _SYM3.inverse(gh) == _SYM3.compose(_SYM3.inverse(h), _SYM3.inverse(g), strict=True)
        assert _SYM3.compose(gh, _SYM3.inverse(gh), strict=True).is_unit

    @PROPERTY_SETTINGS
    @given(st.sampled_from(_PAIR4.arrows))
    def test_pair_inverse_and_units(self, g):
        inv = _PAIR4.inverse(g)
        assert (inv.src, inv.rng) == (g.rng, g.src)
        assert _PAIR4.inverse(inv) == g
        assert _PAIR4.compose(_PAIR4.unit_arrow(g.rng), g, strict=True) == g
        assert _PAIR4.compose(g, _PAIR4.unit_arrow(g.src), strict=True) == g
