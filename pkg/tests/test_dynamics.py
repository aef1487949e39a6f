import json
import tempfile
import unittest
from pathlib import Path

import networkx as nx

from grd import dynamics, groupoid
from grd.dynamics import EvPeriodicPoint, FullShift
from grd.words import Word


class TestPoints(unittest.TestCase):
    def test_canonical_form(self):
        assert EvPeriodicPoint((1, 0), (0,)) == EvPeriodicPoint((1,), (0, 0))
        assert EvPeriodicPoint((), (0, 1, 0, 1)).period == (0, 1)
        assert EvPeriodicPoint((1,), (0, 1)) == EvPeriodicPoint((), (1, 0))
        assert str(EvPeriodicPoint((1,), (0,))) == '1(0)'

    def test_period_is_least_rotation(self):
        x = EvPeriodicPoint((), (1, 0))
        assert (x.pre, x.period) == ((1,), (0, 1))
        assert x == EvPeriodicPoint((1,), (0, 1))
        y = EvPeriodicPoint((2, 0, 1), (2, 0, 1, 2, 0, 1))
        assert (y.pre, y.period) == ((2,), (0, 1, 2))
        z = EvPeriodicPoint((0,), (2, 1))
        assert (z.pre, z.period) == ((0, 2), (1, 2))
        assert str(z) == '02(12)'
        for point in (x, y, z):
            again = EvPeriodicPoint(point.pre, point.period)
            assert (again.pre, again.period) == (point.pre, point.period)
            assert point.shift(len(point.pre) + 1).period == point.period
        assert z.prefix(5) == (0, 2, 1, 2, 1)
        assert z != EvPeriodicPoint((), (1, 2))

    def test_shift_and_prepend(self):
        x = EvPeriodicPoint((2, 1), (0, 1))
        assert x.shift(1) == EvPeriodicPoint((1,), (0, 1))
        assert x.shift(3) == EvPeriodicPoint((), (1, 0))
        assert x.shift(2).prepend((2, 1)) == x
        with self.assertRaises(ValueError):
            x.shift(-1)
        with self.assertRaises(ValueError):
            EvPeriodicPoint((1,), ())


class TestSystems(unittest.TestCase):
    def test_full_shift_points(self):
        shift = FullShift(2)
        assert len(shift.prefix_points(3)) == 8
        assert len(shift.preimages(shift.base_point())) == 2
        assert len(set(shift.sample_points(5))) == 5

    def test_af_system(self):
        system = dynamics.af_system(6)
        for n, level in enumerate(dynamics.preimage_levels(system, 'a', 6)):
            assert len(level) == n + 1
        assert system.exact_radius('a') == 7
        with self.assertRaises(ValueError):
            dynamics.af_system(-1)

    def test_graph_validation(self):
        with self.assertRaises(ValueError):
            dynamics.graph_from_dict({'vertices': ['v', 'w'], 'edges': [{'src': 'v', 'dst': 'w'}]})
        with self.assertRaises(ValueError):
            dynamics.graph_from_dict({'vertices': ['v']})
        with self.assertRaises(ValueError):
            dynamics.graph_from_dict([1, 2])

    def test_load_graph(self):
        data = {'vertices': ['v'], 'edges': [{'src': 'v', 'dst': 'v', 'label': 'e'}]}
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'loop.json'
            path.write_text(json.dumps(data), encoding='utf-8')
            graph = dynamics.load_graph(path)
        assert graph.name == 'graph(loop)'
        assert len(graph.sample_points(3)) == 1

    def test_graph_is_multidigraph(self):
        data = {
            'vertices': ['v', 'w'],
            'edges': [
                {'src': 'v', 'dst': 'v', 'label': 'loop'},
                {'src': 'v', 'dst': 'w', 'label': 'out'},
                {'src': 'w', 'dst': 'v', 'label': 'back'},
                {'src': 'w', 'dst': 'v', 'label': 'back2'},
            ],
        }
        graph = dynamics.graph_from_dict(data)
        assert isinstance(graph.graph, nx.MultiDiGraph)
        assert graph.graph.number_of_edges() == 4
        labels = [graph.edges[k].label for k in graph.in_edges('v')]
        assert sorted(labels) == ['back', 'back2', 'loop']
        assert [graph.edges[k].label for k in graph.out_edges('w')] == ['back', 'back2']
        point = graph.sample_points(1)[0]
        assert graph.is_path(point)
        assert len(graph.preimages(point)) == len(graph.in_edges(graph.edges[point.symbol(0)].src))

    def test_sink_is_named(self):
        data = {
            'vertices': ['v', 'w'],
            'edges': [{'src': 'v', 'dst': 'w', 'label': 'e'}, {'src': 'v', 'dst': 'v'}],
        }
        with self.assertRaisesRegex(ValueError, "sink at vertex 'w'"):
            dynamics.graph_from_dict(data)

    def test_cycles_without_exit(self):
        assert dynamics.single_loop().cycles_without_exit()
        assert not dynamics.bouquet(2).cycles_without_exit()
        tail = {
            'vertices': ['u', 'v'],
            'edges': [{'src': 'u', 'dst': 'v', 'label': 'in'}, {'src': 'v', 'dst': 'v'}],
        }
        assert dynamics.graph_from_dict(tail).cycles_without_exit()
        exit_ = {
            'vertices': ['u', 'v'],
            'edges': [
                {'src': 'u', 'dst': 'v', 'label': 'in'},
                {'src': 'v', 'dst': 'v', 'label': 'loop'},
                {'src': 'u', 'dst': 'u', 'label': 'stay'},
            ],
        }
        assert not dynamics.graph_from_dict(exit_).cycles_without_exit()

    def test_bouquet_matches_full_shift(self):
        graph = dynamics.bouquet(2)
        point = graph.sample_points(1)[0]
        counts = [len(dynamics.dr_fiber(graph, point, r)) for r in range(5)]
        assert counts == [1, 4, 10, 22, 46]


class TestDeaconuRenault(unittest.TestCase):
    def test_full_shift_ball_counts(self):
        shift = FullShift(2)
        y = shift.base_point()
        counts = [len(dynamics.dr_fiber(shift, y, r)) for r in range(7)]
        assert counts == [1, 4, 10, 22, 46, 94, 190]

    def test_kernel_fiber(self):
        shift = FullShift(2)
        for n in range(5):
            assert len(dynamics.kernel_fiber(shift, shift.base_point(), n)) == 2**n

    def test_single_loop(self):
        loop = dynamics.single_loop()
        point = loop.sample_points(1)[0]
        for r in range(6):
            assert len(dynamics.dr_fiber(loop, point, r)) == 2 * r + 1

    def test_minimal_witness(self):
        shift = FullShift(2)
        x = EvPeriodicPoint((1, 1), (0,))
        y = shift.base_point()
        assert dynamics.minimal_witness(shift, x, y, 2, 4) == (2, 0)
        assert dynamics.minimal_witness(shift, x, y, 0, 4) == (2, 2)
        assert dynamics.minimal_witness(shift, x, y, 0, 3) is None

    def test_arrow_id(self):
        arrow = dynamics.DRArrow(EvPeriodicPoint((1,), (0,)), 1, EvPeriodicPoint.constant(0), 1, 0)
        assert arrow.id == '(1(0),1,(0))'
        assert arrow.length == 1
        assert not arrow.is_unit

    def test_dr_groupoid_axioms(self):
        shift = FullShift(2)
        view = dynamics.dr_groupoid(shift, [shift.base_point()], 2)
        assert not view.full
        report = groupoid.check_axioms(view, length=view.length)
        assert report.passed

    def test_kernel_class_view_is_pair_groupoid(self):
        shift = FullShift(2)
        view = dynamics.kernel_class_view(shift, shift.base_point(), 3)
        assert len(view.units) == 8
        assert len(view.arrows) == 64


class TestWordAction(unittest.TestCase):
    def test_generators(self):
        shift = FullShift(2)
        zero = shift.base_point()
        assert dynamics.word_action(shift, Word.parse('a1', 2), zero) == EvPeriodicPoint((1,), (0,))
        assert dynamics.word_action(shift, Word.parse('a2', 2), zero) == zero
        assert dynamics.word_action(shift, Word.parse('A1', 2), zero) is None
        assert dynamics.word_action(shift, Word.parse('A1 a2', 2), zero) is None

    def test_rank_mismatch(self):
        with self.assertRaises(ValueError):
            dynamics.word_action(FullShift(2), Word.parse('a1', 3), FullShift(2).base_point())

    def test_steinberg_psi(self):
        shift = FullShift(2)
        zero = shift.base_point()
        arrow = dynamics.steinberg_psi(shift, Word.parse('a1', 2), zero)
        assert arrow.k == 1
        assert arrow.length == 1
        assert arrow.x == EvPeriodicPoint((1,), (0,))
        assert dynamics.steinberg_psi(shift, Word(2), zero).is_unit
