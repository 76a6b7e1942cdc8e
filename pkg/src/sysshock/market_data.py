"""CDS spread panels: loading, intensity extraction, yearly Kendall taus.

Input files are CSV with header ``date,<entity1>,...`` and ISO dates; spreads
are in basis points.  Intensities come from the credit triangle
lambda = spread / LGD, which is what a flat hazard and flat rate reduce to.
"""
from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import TauMatrix
from .montecarlo import empirical_tau

__all__ = [
    "DataError",
    "ParseError",
    "InsufficientDataError",
    "CleaningReport",
    "SpreadPanel",
    "IntensityPanel",
    "load_spreads",
    "write_spreads",
    "extract_intensities",
    "yearly_empirical_taus",
    "synthetic_panel",
    "MIN_ROWS_PER_YEAR",
]

MIN_ROWS_PER_YEAR = 30
DEFAULT_LGD = 0.6
DEFAULT_RATE = 0.0
_MISSING = {"", "na", "n/a", "nan", "null", "#n/a"}


class DataError(Exception):
    """Input data cannot be used."""


class ParseError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


@dataclass
class CleaningReport:
    rows_read: int = 0
    dropped_missing: list = field(default_factory=list)
    dropped_nonpositive: list = field(default_factory=list)

    @property
    def dropped(self):
        return len(self.dropped_missing) + len(self.dropped_nonpositive)

    def summary(self):
        lines = [f"rows read: {self.rows_read}", f"rows dropped: {self.dropped}"]
        if self.dropped_missing:
            lines.append(f"  missing cells on lines {self.dropped_missing}")
        if self.dropped_nonpositive:
            lines.append(f"  non-positive spreads on lines {self.dropped_nonpositive}")
        return "\n".join(lines)


@dataclass(eq=False)
class SpreadPanel:
    dates: np.ndarray  # datetime64[D]
    entities: tuple
    spreads: np.ndarray  # basis points, (n_dates, d)
    report: CleaningReport = field(default_factory=CleaningReport)

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        self.spreads = np.asarray(self.spreads, dtype=float)
        self.entities = tuple(self.entities)
        if self.spreads.shape != (self.dates.size, len(self.entities)):
            raise ValueError("spreads must have shape (dates, entities)")
        if self.dates.size > 1 and np.any(np.diff(self.dates) <= np.timedelta64(0, "D")):
            raise ValueError("dates must be strictly increasing")

    @property
    def d(self):
        return len(self.entities)


@dataclass(eq=False)
class IntensityPanel:
    dates: np.ndarray
    entities: tuple
    intensities: np.ndarray
    lgd: float
    rate: float

    @property
    def d(self):
        return len(self.entities)

    def years(self):
        return sorted(set(self.dates.astype("datetime64[Y]").astype(int) + 1970))


def _parse_float(cell):
    try:
        return float(cell)
    except ValueError:
        return None


def load_spreads(path) -> SpreadPanel:
    """Read a spread file; rows with a missing or non-positive cell are dropped."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    report = CleaningReport()
    dates, rows = [], []
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: line 1: empty file") from None
        header = [h.strip() for h in header]
        if not header or header[0].lower() != "date":
            raise ParseError(f"{path}: line 1: first column must be 'date'")
        entities = header[1:]
        if not entities or any(not e for e in entities):
            raise ParseError(f"{path}: line 1: need at least one named entity column")
        if len(set(entities)) != len(entities):
            raise ParseError(f"{path}: line 1: duplicate entity names")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: line {line}: expected {len(header)} fields, got {len(row)}")
            report.rows_read += 1
            try:
                date = dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"{path}: line {line}: bad date {row[0]!r}") from None
            if dates and date <= dates[-1]:
                raise ParseError(f"{path}: line {line}: date {date} is not after {dates[-1]}")
            values = []
            missing = False
            for cell in row[1:]:
                cell = cell.strip()
                if cell.lower() in _MISSING:
                    missing = True
                    values.append(math.nan)
                    continue
                v = _parse_float(cell)
                if v is None:
                    raise ParseError(f"{path}: line {line}: bad number {cell!r}")
                values.append(v)
            if missing or any(math.isnan(v) for v in values):
                report.dropped_missing.append(line)
                continue
            if any(not (v > 0 and math.isfinite(v)) for v in values):
                report.dropped_nonpositive.append(line)
                continue
            dates.append(date)
            rows.append(values)
    spreads = np.array(rows, dtype=float).reshape(len(rows), len(entities))
    return SpreadPanel(np.array(dates, dtype="datetime64[D]"), entities, spreads, report)


def write_spreads(panel: SpreadPanel, path):
    """Write a panel in the input format (shortest round-trip float repr)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.entities])
        for date, row in zip(panel.dates, panel.spreads):
            w.writerow([str(date), *(repr(float(v)) for v in row)])


def extract_intensities(panel: SpreadPanel, lgd=DEFAULT_LGD, rate=DEFAULT_RATE) -> IntensityPanel:
    """lambda = (spread / 10^4) / LGD; the flat rate is kept as metadata."""
    if not (0 < lgd <= 1):
        raise ValueError(f"lgd must lie in (0, 1], got {lgd}")
    if not math.isfinite(rate):
        raise ValueError(f"rate must be finite, got {rate}")
    return IntensityPanel(panel.dates.copy(), panel.entities, panel.spreads / 1e4 / lgd, float(lgd), float(rate))


def yearly_empirical_taus(panel: IntensityPanel, year: int, tau_on="levels", backend=None) -> TauMatrix:
    """Pairwise empirical taus of intensities observed in one calendar year.

    ``tau_on`` is "levels" or "diffs" (day-on-day changes within the year).
    """
    if tau_on not in ("levels", "diffs"):
        raise ValueError(f"tau_on must be 'levels' or 'diffs', got {tau_on!r}")
    years = panel.dates.astype("datetime64[Y]").astype(int) + 1970
    sel = panel.intensities[years == int(year)]
    if sel.shape[0] < MIN_ROWS_PER_YEAR:
        raise InsufficientDataError(
            f"year {year}: {sel.shape[0]} observations, need at least {MIN_ROWS_PER_YEAR}"
        )
    if tau_on == "diffs":
        sel = np.diff(sel, axis=0)
    d = panel.d
    if d < 2:
        raise DataError("need at least two entities for pairwise taus")
    v = np.eye(d)
    for i in range(d):
        for k in range(i + 1, d):
            v[i, k] = v[k, i] = empirical_tau(sel[:, i], sel[:, k], backend)
    return TauMatrix(v, panel.entities)


def synthetic_panel(params, n_days=250, start="2021-01-04", base_bp=None, lgd=DEFAULT_LGD,
                    seed=0, entities=None) -> SpreadPanel:
    """Spread panel whose intensity ranks follow lifetimes drawn from ``params``.

    Day r carries lambda_j = base_j * exp(-T_rj / 4) for a model draw T_r, so
    the panel's rank dependence is that of the lifetimes.
    """
    from .montecarlo import SimulationConfig, sample_model

    d = params.d
    base_bp = np.full(d, 100.0) if base_bp is None else np.asarray(base_bp, dtype=float)
    entities = tuple(entities or (f"E{j + 1}" for j in range(d)))
    batch = sample_model(params, SimulationConfig(n_days, seed=seed))
    lam = base_bp / 1e4 / lgd * np.exp(-batch.T / 4.0)
    days = []
    day = np.datetime64(start, "D")
    while len(days) < n_days:
        if np.is_busday(day):
            days.append(day)
        day += 1
    return SpreadPanel(np.array(days), entities, lam * lgd * 1e4)
