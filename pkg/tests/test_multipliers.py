import math
import unittest

from grd import fell, groupoid
from grd import multipliers as mp
from grd import sections as sec
from grd._utils import rng_for


def _bundle(kind: str, *args):
    return fell.build_bundle(groupoid.build(kind, *args), 'trivial')


class TestNegativeType(unittest.TestCase):
    def test_equilateral(self):
        for view in (groupoid.build('pair', 3), groupoid.build('cyclic', 5)):
            assert mp.is_negative_type(mp.equilateral(), view).passed

    def test_word_length_on_free_group(self):
        view = groupoid.build('free', 2, 6)
        report = mp.is_negative_type(
            mp.length_psi(view.length), view, within=lambda a: view.length(a) <= 3
        )
        assert report.passed
        assert len([r for r in report.rows if r.check == 'negative_type']) == 1

    def test_sampled_tuples(self):
        view = groupoid.build('free', 2, 6)
        report = mp.is_negative_type(
            mp.length_psi(view.length),
            view,
            within=lambda a: view.length(a) <= 3,
            full_fiber_max=10,
            samples=20,
            seed=3,
        )
        assert report.passed
        assert len([r for r in report.rows if r.check == 'negative_type']) == 20

    def test_failures(self):
        z2 = groupoid.build('cyclic', 2)
        psi = mp.table_function('negative', {'1': -1.0})
        assert 'negative_type' in {r.check for r in mp.is_negative_type(psi, z2).failures()}

        z3 = groupoid.build('cyclic', 3)
        skew = mp.table_function('skew', {'1': 1.0, '2': 2.0})
        failed = {r.check for r in mp.is_negative_type(skew, z3).failures()}
        assert 'negative_type.symmetric' in failed


class TestPositiveDefinite(unittest.TestCase):
    def test_schoenberg_family(self):
        view = groupoid.build('pair', 3)
        family = mp.schoenberg_family(mp.equilateral(), view, [2.0, 0.5, 1.0])
        assert family.ts == [0.5, 1.0, 2.0]
        assert family.report.passed
        assert abs(family[1.0](view.arrow('(0,1)')) - math.exp(-1)) < 1e-15
        with self.assertRaises(ValueError):
            mp.schoenberg_family(mp.equilateral(), view, [1.0, 0.0])

    def test_coefficient_functions(self):
        for kind, args in (('pair', (3,)), ('symmetric', (3,)), ('cyclic', (4,))):
            view = groupoid.build(kind, *args)
            for i in range(3):
                h = mp.random_positive_definite(view, rng_for(0, i))
                assert mp.positive_definite_check(h, view).passed
                assert h.sup(view.arrows) <= 1.0 + 1e-12

    def test_multiplier_bound(self):
        view = groupoid.build('integer', 3)
        h = mp.schoenberg(mp.length_psi(view.length), 1.0)
        expected = max(math.exp(-k) * (1 + k) for k in range(4))
        assert abs(mp.multiplier_bound(h, view, 1.0) - expected) < 1e-15


class TestApplyMultiplier(unittest.TestCase):
    def test_two_element_group(self):
        bundle = _bundle('cyclic', 2)
        f = sec.delta(bundle, '0') + sec.delta(bundle, '1')
        h = mp.table_function('half', {'0': 1.0, '1': 0.5})
        assert mp.positive_definite_check(h, bundle.view).passed
        result = mp.apply_multiplier(h, f)
        assert abs(sec.reduced_norm(result.section).value - 1.5) < 1e-12
        assert result.sup == 1.0
        assert result.report.passed

    def test_random_pairs(self):
        bundle = _bundle('symmetric', 3)
        report = None
        for i in range(10):
            h = mp.random_positive_definite(bundle.view, rng_for(5, i, 0))
            f = sec.random_section(bundle, rng_for(5, i, 1))
            report = mp.apply_multiplier(h, f, report=report, instance=f'pair{i}').report
        assert report.passed
        assert len(report.rows) == 20

    def test_not_positive_definite(self):
        bundle = _bundle('cyclic', 2)
        f = sec.delta(bundle, '0') + sec.delta(bundle, '1', 1j)
        h = mp.table_function('twist', {'0': 1.0, '1': -1j})
        report = mp.apply_multiplier(h, f).report
        assert [r.check for r in report.failures()] == ['multiplier.contractive']
        assert mp.apply_multiplier(h, f, contractive=False).report.passed

    def test_truncated_view_uses_schwartz_only(self):
        bundle = _bundle('integer', 3)
        f = sec.random_section(bundle, rng_for(1, 0))
        h = mp.schoenberg(mp.length_psi(bundle.view.length), 0.5)
        result = mp.apply_multiplier(h, f)
        report = result.report
        assert [r.check for r in report.rows] == ['multiplier.schwartz']
        assert report.passed
        (row,) = report.rows
        assert math.isclose(row.rhs, result.bound * sec.sobolev_norm(f, 0))
        assert math.isclose(row.rhs, result.bound * sec.norms(f).II)


class TestLocalApproximation(unittest.TestCase):
    def test_support_inside_u(self):
        bundle = _bundle('pair', 3)
        f = sec.random_section(bundle, rng_for(2, 0))
        trace, report = mp.local_approximate(
            f, [a.id for a in bundle.view.arrows], mp.equilateral(), [4, 2, 1, 0.5, 0.25]
        )
        assert report.passed
        assert trace['t'].tolist() == [4.0, 2.0, 1.0, 0.5, 0.25, 0.0]
        assert trace['error'].iloc[-1] < 1e-9
        assert list(trace.columns) == mp.TRACE_COLUMNS

    def test_support_outside_u(self):
        bundle = _bundle('pair', 3)
        f = sec.indicator(bundle)
        trace, report = mp.local_approximate(f, lambda a: a.is_unit, mp.equilateral(), [1.0])
        assert report.passed
        assert 'local.limit' not in {r.check for r in report.rows}
        assert abs(trace['error'].iloc[-1] - 2.0) < 1e-9

    def test_truncated_view(self):
        view = groupoid.build('free', 2, 2)
        bundle = fell.build_bundle(view, 'trivial')
        f = sec.random_section(bundle, rng_for(3, 0))
        keep = [a.id for a in view.arrows if view.length(a) <= 1]
        trace, report = mp.local_approximate(f, keep, mp.length_psi(view.length), [2, 1, 0.5])
        assert report.passed
        assert report.params['norm'] == 'I'
        assert (trace['error'] == trace['error_I']).all()

    def test_bad_inputs(self):
        f = sec.indicator(_bundle('pair', 2))
        with self.assertRaises(ValueError):
            mp.local_approximate(f, ['(7,7)'], mp.equilateral(), [1.0])
        with self.assertRaises(ValueError):
            mp.local_approximate(f, ['(0,0)'], mp.equilateral(), [1.0, -1.0])


class TestHapDecay(unittest.TestCase):
    def test_decay_matches_prediction(self):
        for kind, args in (('pair', (3,)), ('symmetric', (3,))):
            bundle = _bundle(kind, *args)
            f = sec.random_section(bundle, rng_for(7, 0))
            trace, report = mp.hap_decay_trace(f, [4.0, 1.0, 0.25])
            assert report.passed
            assert trace['error'].is_monotonic_decreasing
