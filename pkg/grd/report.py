import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import polars as pl

from grd._utils import fmt_number


logger = logging.getLogger(__name__)

REPORT_ROW_COLUMNS = ['check', 'instance', 'lhs', 'rhs', 'slack', 'tol', 'verdict']


@dataclass(frozen=True)
class CheckRow:
    """One asserted inequality ``lhs <= rhs`` with tolerance ``tol``."""

    check: str
    instance: str
    lhs: float
    rhs: float
    tol: float = 0.0

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol)

    @property
    def verdict(self) -> str:
        return 'pass' if self.passed else 'fail'

    def to_dict(self) -> dict[str, Any]:
        return {
            'check': self.check,
            'instance': self.instance,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'slack': self.slack,
            'tol': self.tol,
            'verdict': self.verdict,
        }


@dataclass
class CheckReport:
    """Rows of asserted inequalities plus the context they were computed in.

    The summary verdict is ``'pass'`` iff every row passes. Check operations
    never raise on violations; they add failing rows.
    """

    command: str = ''
    system: str = ''
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    budget: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    _rows: list[CheckRow] = field(default_factory=list, repr=False)

    def add(self, check: str, instance: Any, lhs: float, rhs: float, tol: float = 0.0) -> CheckRow:
        row = CheckRow(check, str(instance), float(lhs), float(rhs), float(tol))
        if not row.passed:
            logger.debug('check %s failed at %s: %r > %r', check, row.instance, lhs, rhs)
        self._rows.append(row)
        return row

    def add_equal(self, check: str, instance: Any, a, b, tol: float) -> CheckRow:
        """Asserts ``max |a - b| <= tol`` entrywise."""
        diff = np.max(np.abs(np.asarray(a) - np.asarray(b))) if np.size(a) or np.size(b) else 0.0
        return self.add(check, instance, float(diff), 0.0, tol)

    def add_flag(self, check: str, instance: Any, ok: bool) -> CheckRow:
        return self.add(check, instance, 0.0 if ok else 1.0, 0.0)

    def note(self, text: str):
        if text not in self.notes:
            self.notes.append(text)

    def extend(self, other: 'CheckReport') -> 'CheckReport':
        self._rows.extend(other._rows)
        for text in other.notes:
            self.note(text)
        for key, value in other.budget.items():
            self.budget.setdefault(key, value)
        return self

    @property
    def rows(self) -> list[CheckRow]:
        return sorted(self._rows, key=lambda r: (r.check, r.instance))

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self._rows)

    @property
    def verdict(self) -> str:
        return 'pass' if self.passed else 'fail'

    def failures(self) -> list[CheckRow]:
        return [row for row in self.rows if not row.passed]

    def checks(self) -> dict[str, dict[str, Any]]:
        """Per check id: instance count, failures and the worst slack."""
        summary: dict[str, dict[str, Any]] = {}
        for row in self.rows:
            entry = summary.setdefault(
                row.check, {'count': 0, 'failed': 0, 'min_slack': float('inf')}
            )
            entry['count'] += 1
            entry['failed'] += 0 if row.passed else 1
            entry['min_slack'] = min(entry['min_slack'], row.slack)
        return summary

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [row.to_dict() for row in self.rows], columns=REPORT_ROW_COLUMNS
        )

    def to_dict(self, all_rows: bool = False) -> dict[str, Any]:
        """Serializable form.

        Unless ``all_rows``, only failing rows and the worst row of each check
        are listed; the per-check summary always covers every row.
        """
        rows = self.rows
        if not all_rows:
            worst: dict[str, CheckRow] = {}
            for row in rows:
                if row.check not in worst or row.slack < worst[row.check].slack:
                    worst[row.check] = row
            keep = {id(r) for r in worst.values()} | {id(r) for r in rows if not r.passed}
            rows = [r for r in rows if id(r) in keep]
        return {
            'command': self.command,
            'system': self.system,
            'params': self.params,
            'seed': self.seed,
            'budget': self.budget,
            'notes': sorted(self.notes),
            'checks': self.checks(),
            'rows': [r.to_dict() for r in rows],
            'verdict': self.verdict,
        }


def _normalize(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return fmt_number(value)
    if isinstance(value, complex):
        return {'re': fmt_number(value.real), 'im': fmt_number(value.imag)}
    if value is None or isinstance(value, str):
        return value
    return str(value)


def dumps(payload: dict[str, Any]) -> str:
    """JSON with sorted keys and numbers at 15 significant digits."""
    return json.dumps(_normalize(payload), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def emit_report(report, path: str | Path, fmt: str = 'json', all_rows: bool = False) -> Path:
    """Writes a CheckReport (json or csv) or a table-like object (csv).

    Parameters
    ----------
    report : CheckReport | GrowthTable | pandas.DataFrame
        What to write. Objects with a ``to_csv_frame`` method are written as CSV.
    path : str | Path
        Destination file.
    fmt : str
        ``'json'`` or ``'csv'``.
    """
    path = Path(path)
    if fmt not in ('json', 'csv'):
        raise ValueError(f"fmt must be 'json' or 'csv', got {fmt!r}")

    if fmt == 'json':
        if not isinstance(report, CheckReport):
            raise TypeError(f'json output needs a CheckReport, got {type(report).__name__}')
        path.write_text(dumps(report.to_dict(all_rows=all_rows)), encoding='utf-8')
    else:
        if isinstance(report, CheckReport):
            frame = report.to_frame()
        elif hasattr(report, 'to_csv_frame'):
            frame = report.to_csv_frame()
        elif isinstance(report, pd.DataFrame):
            frame = report
        else:
            raise TypeError(f'cannot write {type(report).__name__} as csv')
        _write_csv(frame, path)
    logger.info('report written to %s', path)
    return path


def _fmt_cell(value: float) -> str:
    formatted = fmt_number(value)
    return formatted if isinstance(formatted, str) else repr(formatted)


def _write_csv(frame: pd.DataFrame, path: Path):
    df = pl.from_pandas(frame)
    float_cols = [c for c, t in zip(df.columns, df.dtypes) if t in (pl.Float32, pl.Float64)]
    if float_cols:
        df = df.with_columns(
            pl.col(c).map_elements(_fmt_cell, return_dtype=pl.String)
            for c in float_cols
        )
    df.write_csv(path)
