import math
import unittest
import warnings

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from grd import fell, groupoid, growth, rd
from grd import sections as sec
from grd._utils import rng_for
from grd.groupoid import CyclicGroup, IntegerGroup
from grd.linalg import random_psd
from grd.report import CheckReport
from tests._strategies import PROPERTY_SETTINGS, sections


def _trivial(kind: str, *args, dim: int = 1):
    return fell.build_bundle(groupoid.build(kind, *args), 'trivial', dim=dim)


class TestScan(unittest.TestCase):
    def test_series_s(self):
        assert abs(rd.series_s() - 1.0823232) < 1e-6
        assert abs(rd.series_s() - math.pi**4 / 90) < 1e-12

    def test_finite_group_ratio(self):
        bundle = _trivial('cyclic', 2)
        scan = rd.rd_ratio_scan(bundle, rd.random_source(bundle), count=50)
        assert 1.0 - 1e-12 <= scan.ratio <= math.sqrt(2) + 1e-12
        assert not scan.lower_bound
        assert len(scan.to_frame()) == 50
        assert scan.witness(view='Z/2').C == scan.ratio

    def test_scan_is_seeded(self):
        bundle = _trivial('pair', 3)
        first = rd.rd_ratio_scan(bundle, rd.random_source(bundle), count=10, seed=5)
        second = rd.rd_ratio_scan(bundle, rd.random_source(bundle), count=10, seed=5, workers=3)
        assert first.ratios == second.ratios

    def test_zero_sections_skipped(self):
        bundle = _trivial('pair', 2)
        scan = rd.rd_ratio_scan(bundle, [sec.Section(bundle), sec.indicator(bundle)])
        assert scan.skipped == [0]
        assert scan.worst == 1
        assert abs(scan.ratio - math.sqrt(2)) < 1e-12

    def test_source_needs_count(self):
        bundle = _trivial('pair', 2)
        with self.assertRaises(ValueError):
            rd.rd_ratio_scan(bundle, rd.random_source(bundle))

    def test_ball_indicators(self):
        bundle = _trivial('integer', 3)
        balls = rd.ball_indicators(bundle, [0, 1, 3])
        assert [len(f) for f in balls] == [1, 3, 7]

    def test_witness_validation(self):
        with self.assertRaises(ValueError):
            rd.RDWitness(0.0, 1)
        with self.assertRaises(ValueError):
            rd.RDWitness(1.0, -1)
        with self.assertRaises(ValueError):
            rd.RDWitness(1.0, 0.5)


class TestTheorems(unittest.TestCase):
    def test_poly_growth(self):
        view = groupoid.build('integer', 4)
        bundle = fell.build_bundle(view, 'trivial')
        table = growth.ball_counts(growth.ViewFiberEnumerator(view), view.units, 4)
        result = growth.classify_growth(table)
        assert result.d == 1
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            report = rd.poly_growth_rd_check(
                bundle, result.certificate, rd.random_source(bundle), count=10
            )
        assert report.passed
        assert report.params['k'] == 3

    def test_bad_certificate(self):
        bundle = _trivial('pair', 2)
        with self.assertRaises(ValueError):
            rd.poly_growth_rd_check(bundle, (0, 1), [sec.indicator(bundle)])
        with self.assertRaises(ValueError):
            rd.poly_growth_rd_check(bundle, (1, -1), [sec.indicator(bundle)])

    def test_bhm(self):
        for bundle in (_trivial('pair', 3, dim=2), _trivial('symmetric', 3)):
            for i in range(5):
                f = sec.random_section(bundle, rng_for(2, i))
                assert rd.bhm_check(f).passed

    def test_cauchy_schwarz(self):
        rng = rng_for(0, 0)
        report = CheckReport()
        for i in range(10):
            mats = [random_psd(rng, 3) for _ in range(4)]
            report = rd.cauchy_schwarz_check(mats, rng.standard_normal(4), report=report)
        assert report.passed
        assert len(report.rows) == 10

    def test_cauchy_schwarz_inputs(self):
        with self.assertRaises(ValueError):
            rd.cauchy_schwarz_check([np.eye(2)], [1.0, 2.0])
        with self.assertRaises(ValueError):
            rd.cauchy_schwarz_check([-np.eye(2)], [1.0])
        with self.assertRaises(ValueError):
            rd.cauchy_schwarz_check([], [])

    def test_weight_inequality(self):
        view = groupoid.build('free', 2, 2)
        assert rd.weight_inequality_check(view).passed

    def test_weighted_convolution(self):
        bundle = _trivial('pair', 3)
        witness = rd.RDWitness(math.sqrt(3 * rd.series_s()), 2)
        report = None
        for i in range(5):
            f = sec.random_section(bundle, rng_for(1, i, 0))
            g = sec.random_section(bundle, rng_for(1, i, 1))
            report = rd.weighted_conv_check(f, g, witness, report=report, instance=f'pair{i}')
        assert report.passed

    def test_weighted_convolution_z2(self):
        bundle = _trivial('cyclic', 2)
        witness = rd.RDWitness(math.sqrt(2), 0)
        report = CheckReport(system=bundle.name)
        for i in range(100):
            f = sec.random_section(bundle, rng_for(2, i, 0))
            g = sec.random_section(bundle, rng_for(2, i, 1))
            rd.weighted_conv_check(f, g, witness, report=report, instance=f'z2-{i:03d}')
        assert report.passed
        assert len([row for row in report.rows if row.check == 'weighted_conv.source']) == 100

    def test_weighted_convolution_z2_is_sharp(self):
        bundle = _trivial('cyclic', 2)
        f = sec.delta(bundle, '0') + sec.delta(bundle, '1')
        report = rd.weighted_conv_check(f, f, rd.RDWitness(math.sqrt(2), 0))
        assert report.passed
        tight = rd.weighted_conv_check(f, f, rd.RDWitness(math.sqrt(2) - 1e-3, 0))
        assert not tight.passed

    def test_norm_chain_fixtures(self):
        fixtures = [('pair', n) for n in (2, 3, 5)] + [('cyclic', n) for n in (2, 4)]
        for kind, n in fixtures:
            for dim in (1, 2):
                report = rd.norm_chain_check(_trivial(kind, n, dim=dim), count=200)
                assert report.passed, (kind, n, dim, report.failures()[:3])
                assert len(report.rows) == 600

    def test_norm_chain(self):
        assert rd.norm_chain_check(_trivial('pair', 3, dim=2), count=10).passed
        bundle = fell.build_bundle(groupoid.build('cyclic', 2), 'twisted', sigma={('1', '1'): -1})
        assert rd.norm_chain_check(bundle, count=10).passed


class TestPermanence(unittest.TestCase):
    def test_restriction(self):
        bundle = _trivial('cyclic', 4, dim=2)
        report = rd.restriction_check(bundle, lambda a: a.id in ('0', '2'), count=5)
        assert report.passed
        with self.assertRaises(ValueError):
            rd.restriction_check(bundle, lambda a: a.id in ('0', '1'), count=1)

    def test_unit_embedding(self):
        view = groupoid.build('cyclic', 2)
        bundle = fell.build_bundle(view, 'action', dim=2, unitaries={'1': fell.swap_unitary(2)})
        assert rd.unit_embedding_check(bundle, count=5).passed
        with self.assertRaises(TypeError):
            rd.unit_embedding_check(_trivial('cyclic', 2))

    def test_trivial_action(self):
        view = groupoid.build('cyclic', 3)
        assert rd.trivial_action_check(view, coefficients='full', count=20).passed
        assert rd.trivial_action_check(view, coefficients='diagonal', count=20).passed
        with self.assertRaises(ValueError):
            rd.trivial_action_check(groupoid.build('pair', 2))

    def test_degenerate_action(self):
        assert rd.degenerate_action_check(CyclicGroup(3), count=5).passed
        assert rd.degenerate_action_check(IntegerGroup(), n_points=2, count=5).passed


class TestObstruction(unittest.TestCase):
    def test_closed_form(self):
        assert rd.kernel_indicator_ratio(2, 2, 0) == 2.0
        assert abs(rd.kernel_indicator_ratio(2, 3, 0) - 2 ** 1.5) < 1e-12
        expected = 4 / math.sqrt(1 + 3**4 + 2 * 5**4)
        assert abs(rd.kernel_indicator_ratio(2, 2, 2) - expected) < 1e-12

    def test_trend(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            frame, report = rd.obstruction_trend(2, range(2, 6), p=2)
        assert report.passed
        assert frame['n'].tolist() == [2, 3, 4, 5]
        assert frame['ratio'].is_monotonic_decreasing
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', UserWarning)
            frame, report = rd.obstruction_trend(2, range(1, 6), p=0)
        assert frame['ratio'].is_monotonic_increasing


_Z2 = _trivial('cyclic', 2)
_PAIR3 = _trivial('pair', 3)


class TestWeightedConvolutionLaws(unittest.TestCase):
    @PROPERTY_SETTINGS
    @given(sections(_Z2), sections(_Z2), st.integers(0, 3))
    def test_z2(self, f, g, p):
        report = rd.weighted_conv_check(f, g, rd.RDWitness(math.sqrt(2), 0), p=p)
        assert report.passed, report.failures()[:3]

    @PROPERTY_SETTINGS
    @given(sections(_PAIR3), sections(_PAIR3))
    def test_pair(self, f, g):
        witness = rd.RDWitness(math.sqrt(3 * rd.series_s()), 2)
        assert rd.weighted_conv_check(f, g, witness).passed
