import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

from grd import report as rp
from grd._utils import SEED_ENV, fmt_number, parallel_map, resolve_seed, rng_for
from grd.report import CheckReport


def _sample() -> CheckReport:
    report = CheckReport(command='demo', system='pair(2)', params={'p': 2}, seed=3)
    report.add('norm.bound', 'f0001', 1.0, 2.0)
    report.add('norm.bound', 'f0002', 1.5, 1.6)
    report.add_equal('identity', 'a', np.eye(2), np.eye(2) + 1e-13, 1e-12)
    return report


class TestCheckReport(unittest.TestCase):
    def test_rows_and_verdict(self):
        report = _sample()
        assert report.passed
        assert report.verdict == 'pass'
        assert [r.instance for r in report.rows] == ['a', 'f0001', 'f0002']
        summary = report.checks()
        assert summary['norm.bound']['count'] == 2
        assert abs(summary['norm.bound']['min_slack'] - 0.1) < 1e-12

        report.add_flag('broken', 'x', False)
        assert not report.passed
        assert [r.check for r in report.failures()] == ['broken']

    def test_tolerance(self):
        report = CheckReport()
        assert report.add('t', 'i', 1.0 + 1e-10, 1.0, 1e-9).passed
        assert not report.add('t', 'j', 1.0 + 1e-8, 1.0, 1e-9).passed

    def test_extend_merges_notes_and_budget(self):
        a = CheckReport(budget={'radius': 2})
        b = CheckReport(budget={'radius': 5, 'units': 3}, notes=['truncated'])
        b.add('x', 'i', 0.0, 1.0)
        a.note('truncated')
        a.extend(b)
        assert a.notes == ['truncated']
        assert a.budget == {'radius': 2, 'units': 3}
        assert len(a.rows) == 1

    def test_to_dict_keeps_worst_rows(self):
        payload = _sample().to_dict()
        assert [r['instance'] for r in payload['rows']] == ['a', 'f0002']
        assert len(_sample().to_dict(all_rows=True)['rows']) == 3
        assert payload['verdict'] == 'pass'


class TestEmit(unittest.TestCase):
    def test_json_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            first = rp.emit_report(_sample(), Path(tmp) / 'a.json')
            second = rp.emit_report(_sample(), Path(tmp) / 'b.json')
            assert first.read_bytes() == second.read_bytes()
            payload = json.loads(first.read_text(encoding='utf-8'))
        assert payload['params'] == {'p': 2}
        assert payload['checks']['norm.bound']['failed'] == 0

    def test_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = rp.emit_report(_sample(), Path(tmp) / 'rows.csv', fmt='csv')
            frame = pd.read_csv(path)
            trace = pd.DataFrame({'t': [0.5], 'error': [0.1]})
            table = rp.emit_report(trace, Path(tmp) / 't.csv', 'csv')
            assert pd.read_csv(table)['error'].iloc[0] == 0.1
        assert list(frame.columns) == rp.REPORT_ROW_COLUMNS
        assert len(frame) == 3

    def test_bad_format(self):
        with self.assertRaises(ValueError):
            rp.emit_report(_sample(), 'x.txt', fmt='txt')
        with self.assertRaises(TypeError):
            rp.emit_report(pd.DataFrame(), 'x.json')
        with self.assertRaises(TypeError):
            rp.emit_report(object(), 'x.csv', fmt='csv')

    def test_dumps_normalizes_numbers(self):
        text = rp.dumps({'b': np.float64(0.1 + 0.2), 'a': np.int64(3), 'c': float('inf')})
        assert json.loads(text) == {'a': 3, 'b': 0.3, 'c': 'inf'}


class TestUtils(unittest.TestCase):
    def test_resolve_seed(self):
        with mock.patch.dict(os.environ, {SEED_ENV: '11'}):
            assert resolve_seed() == 11
            assert resolve_seed(4) == 4
        with mock.patch.dict(os.environ, {SEED_ENV: 'abc'}):
            with self.assertRaises(ValueError):
                resolve_seed()
        with mock.patch.dict(os.environ, {}, clear=True):
            assert resolve_seed() == 0

    def test_rng_streams(self):
        a = rng_for(1, 2).standard_normal(3)
        b = rng_for(1, 2).standard_normal(3)
        c = rng_for(1, 3).standard_normal(3)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_parallel_map_keeps_order(self):
        assert parallel_map(lambda x: x * x, range(10), workers=4) == [x * x for x in range(10)]

    def test_fmt_number(self):
        assert fmt_number(0.1 + 0.2) == 0.3
        assert fmt_number(float('nan')) == 'nan'
        assert fmt_number(-0.0) == 0.0
