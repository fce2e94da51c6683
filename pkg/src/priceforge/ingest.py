"""Reading, validating and calendar-slicing historical DA/ID price data.

Input files are CSV with a ``timestamp,price_eur_mwh`` header; DA rows are
hourly, ID rows quarter-hourly. Timestamps are local market time; offsets
(``+01:00``) are honoured by converting to the market time zone first.

Daylight-saving days are normalised so every day holds exactly 24 hourly
and 96 quarter-hourly values: the missing spring hour is linearly
interpolated, the repeated autumn hour is averaged.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, TextIO, Tuple
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

import numpy as np

from .errors import GapError, MalformedRow, MisalignedSeries, NoFullWeek

log = logging.getLogger(__name__)

HEADER = ("timestamp", "price_eur_mwh")
DEFAULT_TZ = "Europe/Berlin"
TZ_ENV = "PRICEFORGE_TZ"
MAX_FILL = 2
DST_POLICY = (
    "spring-forward hour filled by linear interpolation; "
    "fall-back duplicate hour averaged"
)


@dataclass
class CalendarReport:
    timezone: str = DEFAULT_TZ
    dst_filled: List[str] = field(default_factory=list)
    dst_merged: List[str] = field(default_factory=list)
    gap_filled: List[str] = field(default_factory=list)
    dropped_days: List[str] = field(default_factory=list)
    policy: str = DST_POLICY

    def to_dict(self) -> dict:
        return {
            "timezone": self.timezone,
            "policy": self.policy,
            "dst_filled": list(self.dst_filled),
            "dst_merged": list(self.dst_merged),
            "gap_filled": list(self.gap_filled),
            "dropped_days": list(self.dropped_days),
        }

    def merge(self, other: "CalendarReport") -> "CalendarReport":
        return CalendarReport(
            self.timezone,
            self.dst_filled + other.dst_filled,
            self.dst_merged + other.dst_merged,
            self.gap_filled + other.gap_filled,
            sorted(set(self.dropped_days + other.dropped_days)),
        )


def _frozen(values, name) -> np.ndarray:
    arr = np.array(values, dtype=np.float64).reshape(-1) + 0.0  # folds -0.0 into 0.0
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} prices must be finite")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Whole days of hourly DA and quarter-hourly ID prices (EUR/MWh)."""

    start_date: date
    da: np.ndarray
    id: np.ndarray
    calendar: CalendarReport = field(default_factory=CalendarReport, repr=False)

    def __post_init__(self):
        da = _frozen(self.da, "DA")
        id_ = _frozen(self.id, "ID")
        if da.size == 0 or da.size % 24:
            raise ValueError(f"DA length {da.size} is not a positive multiple of 24")
        if id_.size != 4 * da.size:
            raise ValueError(f"ID length {id_.size} does not match 96 per day ({4 * da.size})")
        object.__setattr__(self, "da", da)
        object.__setattr__(self, "id", id_)

    @property
    def n_days(self) -> int:
        return self.da.size // 24

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=self.n_days - 1)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.start_date == other.start_date
            and np.array_equal(self.da, other.da)
            and np.array_equal(self.id, other.id)
        )

    def __hash__(self):
        return hash((self.start_date, self.da.tobytes(), self.id.tobytes()))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.start_date.isoformat().encode())
        h.update(self.da.astype("<f8").tobytes())
        h.update(self.id.astype("<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class DayRecord:
    day_index: int
    weekday: int
    da: np.ndarray
    id: np.ndarray
    date: Optional[date] = None

    def __post_init__(self):
        da = _frozen(self.da, "DA")
        id_ = _frozen(self.id, "ID")
        if id_.size != 4 * da.size:
            raise ValueError("a day needs four ID quarters per DA hour")
        object.__setattr__(self, "da", da)
        object.__setattr__(self, "id", id_)


@dataclass(frozen=True)
class WeekRecord:
    week_index: int
    days: Tuple[DayRecord, ...]

    def __post_init__(self):
        if len(self.days) != 7 or self.days[0].weekday != 0:
            raise ValueError("a week holds seven days starting on Monday")

    @property
    def da(self) -> np.ndarray:
        return np.concatenate([d.da for d in self.days])

    @property
    def id(self) -> np.ndarray:
        return np.concatenate([d.id for d in self.days])

    @property
    def start_date(self) -> Optional[date]:
        return self.days[0].date


# --------------------------------------------------------------------------
# parsing


def resolve_timezone(manifest_tz: Optional[str] = None) -> str:
    tz = os.environ.get(TZ_ENV) or manifest_tz or DEFAULT_TZ
    try:
        ZoneInfo(tz)
    except (ZoneInfoNotFoundError, ValueError) as exc:
        raise MisalignedSeries(f"unknown time zone {tz!r}") from exc
    return tz


def _parse_timestamp(text: str, tz: ZoneInfo) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is not None:
        ts = ts.astimezone(tz).replace(tzinfo=None)
    return ts


def _read_rows(source: TextIO, tz: ZoneInfo, label: str) -> List[Tuple[datetime, float, int]]:
    rows = []
    header_seen = False
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip().lstrip("﻿")
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if not header_seen:
            if tuple(p.lower() for p in parts) != HEADER:
                raise MalformedRow(line_no, f"{label}: expected header 'timestamp,price_eur_mwh'")
            header_seen = True
            continue
        if len(parts) != 2:
            raise MalformedRow(line_no, f"{label}: expected 2 fields, got {len(parts)}")
        try:
            ts = _parse_timestamp(parts[0], tz)
        except ValueError:
            raise MalformedRow(line_no, f"{label}: bad timestamp {parts[0]!r}") from None
        try:
            price = float(parts[1])
        except ValueError:
            raise MalformedRow(line_no, f"{label}: bad price {parts[1]!r}") from None
        if not math.isfinite(price):
            raise MalformedRow(line_no, f"{label}: non-finite price {parts[1]!r}")
        rows.append((ts, price, line_no))
    if not header_seen:
        raise MalformedRow(1, f"{label}: empty file")
    if not rows:
        raise MalformedRow(2, f"{label}: no data rows")
    return rows


def _nonexistent(ts: datetime, tz: ZoneInfo) -> bool:
    aware = ts.replace(tzinfo=tz)
    back = aware.astimezone(ZoneInfo("UTC")).astimezone(tz).replace(tzinfo=None)
    return back != ts


def _ambiguous(ts: datetime, tz: ZoneInfo) -> bool:
    return ts.replace(tzinfo=tz, fold=0).utcoffset() != ts.replace(tzinfo=tz, fold=1).utcoffset()


def _grid_series(
    rows, step_minutes: int, tz: ZoneInfo, label: str, fill_gaps: bool, report: CalendarReport
) -> Tuple[date, np.ndarray]:
    per_day = 24 * 60 // step_minutes
    step = timedelta(minutes=step_minutes)
    grouped: Dict[datetime, List[float]] = {}
    for ts, price, line_no in rows:
        if ts.minute % step_minutes or ts.second or ts.microsecond:
            raise MalformedRow(line_no, f"{label}: timestamp {ts.isoformat()} is off the {step_minutes}-minute grid")
        bucket = grouped.setdefault(ts, [])
        if bucket and not _ambiguous(ts, tz):
            raise MalformedRow(line_no, f"{label}: duplicate timestamp {ts.isoformat()}")
        bucket.append(price)

    stamps = sorted(grouped)
    first_day, last_day = stamps[0].date(), stamps[-1].date()

    def day_complete_edge(d: date, leading: bool) -> bool:
        start = datetime.combine(d, datetime.min.time())
        edge = start if leading else start + (per_day - 1) * step
        return edge in grouped or _nonexistent(edge, tz)

    def drop(d: date):
        if d.isoformat() not in report.dropped_days:
            report.dropped_days.append(d.isoformat())

    if not day_complete_edge(first_day, leading=True):
        drop(first_day)
        first_day += timedelta(days=1)
    if last_day >= first_day and not day_complete_edge(last_day, leading=False):
        drop(last_day)
        last_day -= timedelta(days=1)
    if last_day < first_day:
        raise GapError([], f"{label}: no complete day present")

    n_days = (last_day - first_day).days + 1
    t0 = datetime.combine(first_day, datetime.min.time())
    values = np.full(n_days * per_day, np.nan)
    missing_dst = []
    missing_other = []
    for k in range(values.size):
        ts = t0 + k * step
        bucket = grouped.get(ts)
        if bucket is None:
            (missing_dst if _nonexistent(ts, tz) else missing_other).append(k)
            continue
        if len(bucket) > 1:
            report.dst_merged.append(f"{label} {ts.isoformat()}")
        values[k] = float(np.mean(bucket))

    if missing_other:
        runs = _runs(missing_other)
        too_long = [r for r in runs if len(r) > MAX_FILL]
        if not fill_gaps or too_long:
            bad = too_long[0] if (fill_gaps and too_long) else runs[0]
            stamps_missing = [(t0 + k * step).isoformat() for k in bad]
            raise GapError(stamps_missing, f"{label}: missing timestamp {stamps_missing[0]}"
                           + (f" (+{len(stamps_missing) - 1} more)" if len(stamps_missing) > 1 else ""))
        for k in missing_other:
            stamp = (t0 + k * step).isoformat()
            log.warning("%s: interpolating missing value at %s", label, stamp)
            report.gap_filled.append(f"{label} {stamp}")
    for k in missing_dst:
        report.dst_filled.append(f"{label} {(t0 + k * step).isoformat()}")
    holes = np.isnan(values)
    if holes.any():
        idx = np.arange(values.size)
        values[holes] = np.interp(idx[holes], idx[~holes], values[~holes])
    return first_day, values


def _runs(indices: List[int]) -> List[List[int]]:
    runs: List[List[int]] = []
    for k in indices:
        if runs and k == runs[-1][-1] + 1:
            runs[-1].append(k)
        else:
            runs.append([k])
    return runs


def parse_price_csv(
    da_source: TextIO,
    id_source: TextIO,
    timezone: Optional[str] = None,
    fill_gaps: bool = False,
) -> PriceSeries:
    """Parse DA and ID price streams into one aligned :class:`PriceSeries`.

    Missing intervals outside DST transitions raise :class:`GapError`; with
    ``fill_gaps`` runs of up to two intervals are interpolated instead.
    """
    tz_name = resolve_timezone(timezone)
    tz = ZoneInfo(tz_name)
    report = CalendarReport(timezone=tz_name)
    da_rows = _read_rows(da_source, tz, "DA")
    id_rows = _read_rows(id_source, tz, "ID")
    da_start, da = _grid_series(da_rows, 60, tz, "DA", fill_gaps, report)
    id_start, id_ = _grid_series(id_rows, 15, tz, "ID", fill_gaps, report)
    da_days, id_days = da.size // 24, id_.size // 96
    if da_start != id_start or da_days != id_days:
        raise MisalignedSeries(
            f"DA covers {da_start}..{da_start + timedelta(days=da_days - 1)}, "
            f"ID covers {id_start}..{id_start + timedelta(days=id_days - 1)}"
        )
    return PriceSeries(da_start, da, id_, report)


def _manifest_for(path: Path) -> Optional[dict]:
    candidate = path.with_suffix(".json")
    if candidate.exists():
        return json.loads(candidate.read_text(encoding="utf-8"))
    return None


def read_price_files(da_path, id_path, fill_gaps: bool = False) -> PriceSeries:
    """Read CSV files plus optional ``<name>.json`` manifests next to them."""
    da_path, id_path = Path(da_path), Path(id_path)
    tz = None
    for path in (da_path, id_path):
        manifest = _manifest_for(path)
        if manifest and manifest.get("timezone"):
            if tz is not None and manifest["timezone"] != tz:
                raise MisalignedSeries("DA and ID manifests name different time zones")
            tz = manifest["timezone"]
    with open(da_path, encoding="utf-8", newline="") as fd, open(id_path, encoding="utf-8", newline="") as fi:
        return parse_price_csv(fd, fi, timezone=tz, fill_gaps=fill_gaps)


def _format_rows(start: date, values: np.ndarray, step_minutes: int, decimals: Optional[int]) -> str:
    out = io.StringIO()
    out.write("timestamp,price_eur_mwh\n")
    t0 = datetime.combine(start, datetime.min.time())
    step = timedelta(minutes=step_minutes)
    for k, v in enumerate(values):
        price = repr(float(v)) if decimals is None else f"{v:.{decimals}f}"
        out.write(f"{(t0 + k * step).strftime('%Y-%m-%dT%H:%M')},{price}\n")
    return out.getvalue()


def write_price_csv(series: PriceSeries, decimals: Optional[int] = 2) -> Tuple[str, str]:
    """Serialise back to (DA text, ID text); one row per grid slot, no DST gaps."""
    return (
        _format_rows(series.start_date, series.da, 60, decimals),
        _format_rows(series.start_date, series.id, 15, decimals),
    )


def manifest_json(market: str, year: int, timezone: str = DEFAULT_TZ) -> str:
    return json.dumps({"market": market, "year": year, "timezone": timezone}, sort_keys=True)


# --------------------------------------------------------------------------
# slicing


def slice_days(
    series: PriceSeries, day_filter: Optional[Callable[[DayRecord], bool]] = None
) -> List[DayRecord]:
    """One record per day; ``day_filter`` (off by default) may drop days."""
    days = []
    for i in range(series.n_days):
        d = series.start_date + timedelta(days=i)
        rec = DayRecord(
            day_index=i + 1,
            weekday=d.weekday(),
            da=series.da[24 * i : 24 * (i + 1)],
            id=series.id[96 * i : 96 * (i + 1)],
            date=d,
        )
        if day_filter is None or day_filter(rec):
            days.append(rec)
    return days


def slice_weeks(series: PriceSeries) -> List[WeekRecord]:
    days = slice_days(series)
    first_monday = next((k for k, d in enumerate(days) if d.weekday == 0), None)
    if first_monday is None or len(days) - first_monday < 7:
        raise NoFullWeek(f"{series.n_days} day(s) from {series.start_date} hold no Monday-Sunday week")
    weeks = []
    for w, k in enumerate(range(first_monday, len(days) - 6, 7), start=1):
        weeks.append(WeekRecord(w, tuple(days[k : k + 7])))
    return weeks


def stack_days(days: Iterable[DayRecord]) -> Tuple[np.ndarray, np.ndarray]:
    """(N x H) DA and (N x 4H) ID matrices in day order."""
    days = list(days)
    return np.vstack([d.da for d in days]), np.vstack([d.id for d in days])
