import unittest

from grd import fell, reduction
from grd._utils import rng_for
from grd.groupoid import CyclicGroup
from grd.partial_actions import (
    DegeneratePartialAction,
    ShiftPartialAction,
    build_transformation_groupoid,
    swap_action,
)
from grd.sections import Section, random_section


def _swap_lift(dim: int = 1):
    view = build_transformation_groupoid(swap_action(), [0, 1])
    base = fell.build_bundle(view, 'trivial', dim=dim)
    return reduction.lift_to_group_bundle(base, CyclicGroup(2))


class TestLift(unittest.TestCase):
    def test_swap_fibers(self):
        lifted = _swap_lift()
        assert lifted.size == 2
        assert [lifted.fiber_dim(g) for g in lifted.view.arrows] == [2, 2]
        assert lifted.points == ('0', '1')

    def test_degenerate_fibers(self):
        system = DegeneratePartialAction(CyclicGroup(3), 2)
        view = build_transformation_groupoid(system, system.points)
        lifted = reduction.lift_to_group_bundle(fell.build_bundle(view, 'trivial'), system.group)
        dims = {g.id: lifted.fiber_dim(g) for g in lifted.view.arrows}
        assert dims == {'0': 2, '1': 0, '2': 0}
        assert lifted.domain('1') == []

    def test_escaping_point(self):
        view = build_transformation_groupoid(swap_action(), [0, 1])
        base = fell.build_bundle(view, 'trivial')
        with self.assertRaises(ValueError):
            reduction.lift_to_group_bundle(base, CyclicGroup(2), points=['0'])

    def test_elements_stay_in_domain_blocks(self):
        lifted = _swap_lift()
        unit = lifted.view.arrows[0]
        with self.assertRaises(ValueError):
            lifted.element(unit, [[1, 1], [0, 1]])


class TestPhi(unittest.TestCase):
    def test_round_trip(self):
        lifted = _swap_lift(dim=2)
        f = random_section(lifted.base, rng_for(3, 0))
        pf = reduction.phi_transport(f, lifted)
        assert pf.bundle is lifted
        assert reduction.phi_inverse(pf, lifted).max_difference(f) == 0.0

    def test_wrong_bundle(self):
        lifted = _swap_lift()
        other = _swap_lift()
        with self.assertRaises(ValueError):
            reduction.phi_transport(Section(other.base), lifted)
        with self.assertRaises(ValueError):
            reduction.phi_inverse(Section(other), lifted)


class TestReductionEquivalence(unittest.TestCase):
    def test_swap(self):
        report = reduction.reduction_equivalence_check(_swap_lift(dim=2), count=20, seed=1)
        assert report.passed
        assert len(report.rows) == 20 * 9

    def test_degenerate(self):
        system = DegeneratePartialAction(CyclicGroup(3), 2)
        view = build_transformation_groupoid(system, system.points)
        lifted = reduction.lift_to_group_bundle(fell.build_bundle(view, 'trivial'), system.group)
        assert reduction.reduction_equivalence_check(lifted, count=10).passed

    def test_shift_truncated(self):
        system = ShiftPartialAction(2)
        view = build_transformation_groupoid(system, system.shift.prefix_points(4), 2)
        lifted = reduction.lift_to_group_bundle(fell.build_bundle(view, 'trivial'), system.group)
        assert len(lifted.points) >= 16
        report = reduction.reduction_equivalence_check(lifted, count=2, ps=[0, 1, 2, 3])
        assert report.passed, report.failures()[:3]
        assert report.notes
        assert {row.check for row in report.rows} >= {'phi.reduced', 'phi.sobolev.p3'}


class TestSteinberg(unittest.TestCase):
    def test_validated_sign(self):
        report = reduction.steinberg_check(2, radius=4, depth=6)
        assert report.passed, report.failures()[:3]
        assert report.budget['points'] == 2**6
        assert report.params['validated_sign'] == 1
        assert report.budget['sign_mismatches.+1'] == 0
        assert report.budget['sign_mismatches.-1'] > 0

    def test_transport(self):
        report = reduction.steinberg_transport_check(count=5)
        assert report.passed
        assert any(r.check == 'transport.cocycle' for r in report.rows)

    def test_wrong_sign_fails_transport(self):
        report = reduction.steinberg_transport_check(count=1, sign=-1)
        assert not report.passed


if __name__ == '__main__':
    unittest.main()
