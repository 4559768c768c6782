"""CSV ingestion and emission.

Outputs are UTF-8 with LF line endings and ``.`` as decimal separator. Floats
are written with ``repr`` so a write/read round trip is lossless.
"""

from __future__ import annotations

import csv
import warnings
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .inference import VolSeries
from .premium import VarSwapQuoteSet

__all__ = [
    "InputError",
    "ReorderNotice",
    "ingest_vol_series",
    "ingest_price_series",
    "ingest_varswap_quotes",
    "write_csv",
    "read_csv",
    "TENOR_DAY_COUNT",
]

TENOR_DAY_COUNT = 365


class InputError(ValueError):
    """Malformed input file; the message names the file and line."""


class ReorderNotice(UserWarning):
    """Input rows were not in date order and have been sorted."""


def _rows(path, header: Sequence[str]):
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None:
            return
        got = [h.strip() for h in first]
        if got != list(header):
            raise InputError(f"{path}:1: expected header {','.join(header)}, got {','.join(got)}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            yield line, [c.strip() for c in row]


def _date(s, path, line):
    try:
        return np.datetime64(s, "D")
    except ValueError:
        raise InputError(f"{path}:{line}: cannot parse date {s!r}") from None


def _num(s, path, line, what):
    try:
        x = float(s)
    except ValueError:
        raise InputError(f"{path}:{line}: cannot parse {what} {s!r}") from None
    if not np.isfinite(x):
        raise InputError(f"{path}:{line}: {what} must be finite")
    return x


def _dated_series(path, column):
    dates, vals = [], []
    for line, (d, x) in _rows(path, ["date", column]):
        date = _date(d, path, line)
        val = _num(x, path, line, column)
        if val <= 0:
            raise InputError(f"{path}:{line}: {column} must be positive, got {x}")
        dates.append(date)
        vals.append(val)
    dates = np.array(dates, dtype="datetime64[D]")
    vals = np.array(vals)
    order = np.argsort(dates, kind="stable")
    if np.any(order != np.arange(len(order))):
        warnings.warn(f"{path}: rows reordered by date", ReorderNotice, stacklevel=3)
        dates, vals = dates[order], vals[order]
    dup = np.flatnonzero(np.diff(dates) == np.timedelta64(0, "D"))
    if len(dup):
        raise InputError(f"{path}: duplicate date {dates[dup[0]]}")
    return dates, vals


def ingest_vol_series(path) -> VolSeries:
    """Read ``date,rv`` rows (ISO dates, annualized volatility as a decimal)."""
    dates, rv = _dated_series(path, "rv")
    if len(dates) == 0:
        raise InputError(f"{path}: no data rows")
    return VolSeries(dates, rv)


def ingest_price_series(path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``date,close`` rows."""
    return _dated_series(path, "close")


def ingest_varswap_quotes(path) -> list[VarSwapQuoteSet]:
    """Read ``date,tenor_days,strike_vol`` rows into one quote set per date.

    Tenors are converted to years with a 365-day count. An empty file yields
    an empty list and a warning.
    """
    groups = defaultdict(dict)
    for line, (d, tenor, strike) in _rows(path, ["date", "tenor_days", "strike_vol"]):
        date = _date(d, path, line)
        days = _num(tenor, path, line, "tenor_days")
        k = _num(strike, path, line, "strike_vol")
        if days <= 0:
            raise InputError(f"{path}:{line}: tenor must be positive")
        if k <= 0:
            raise InputError(f"{path}:{line}: strike_vol must be positive, got {strike}")
        if days in groups[date]:
            raise InputError(f"{path}:{line}: duplicate tenor {tenor} on {d}")
        groups[date][days] = k
    if not groups:
        warnings.warn(f"{path}: no quotes found", stacklevel=2)
        return []
    out = []
    for date in sorted(groups):
        days = sorted(groups[date])
        out.append(
            VarSwapQuoteSet(
                np.array(days) / TENOR_DAY_COUNT, np.array([groups[date][t] for t in days]), as_of=date
            )
        )
    return out


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.datetime64):
        return str(x.astype("datetime64[D]"))
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
