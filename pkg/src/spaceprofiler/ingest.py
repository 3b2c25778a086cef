"""Readings ingestion: CSV parsing, validity filtering, temporal labels, normalization.

Readings arrive as `sensor_id,timestamp,count` rows sampled on a 5-minute
grid. Missing slots stay absent (they are never zero-filled); downstream
averaging divides by the number of samples actually present.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from spaceprofiler.errors import (
    ConfigError,
    DomainError,
    DuplicateReadingError,
    ReadingsParseError,
)

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

BINS_PER_DAY = 288
BIN_MINUTES = 5

POI_TYPES = (
    "playground",
    "precinct_pavilion",
    "multi_purpose_court",
    "link_way",
    "community_garden",
)


class TemporalLabel(enum.Enum):
    """One of the nine per-date labels; holidays override weekday names."""

    MON = "Mon"
    TUE = "Tue"
    WED = "Wed"
    THU = "Thu"
    FRI = "Fri"
    SAT = "Sat"
    SUN = "Sun"
    SCHOOL_HOLIDAY = "SchoolHoliday"
    PUBLIC_HOLIDAY = "PublicHoliday"


class DayType(enum.Enum):
    """Generic day types the nine labels aggregate into."""

    WEEKDAY = "Weekday"
    WEEKEND = "Weekend"
    SCHOOL_HOLIDAY = "SchoolHoliday"


WEEKDAY_LABELS = (
    TemporalLabel.MON,
    TemporalLabel.TUE,
    TemporalLabel.WED,
    TemporalLabel.THU,
    TemporalLabel.FRI,
)
WEEKEND_LABELS = (TemporalLabel.SAT, TemporalLabel.SUN)

# Maps each of the 9 labels to its generic day type; PublicHoliday maps to
# None because those dates are dropped from the profiling stage entirely.
GENERIC_MAP: dict[TemporalLabel, DayType | None] = {
    **{lab: DayType.WEEKDAY for lab in WEEKDAY_LABELS},
    **{lab: DayType.WEEKEND for lab in WEEKEND_LABELS},
    TemporalLabel.SCHOOL_HOLIDAY: DayType.SCHOOL_HOLIDAY,
    TemporalLabel.PUBLIC_HOLIDAY: None,
}

_EPOCH = dt.date(1970, 1, 1)


def date_to_day_number(d: dt.date) -> int:
    return (d - _EPOCH).days


def day_number_to_date(n: int) -> dt.date:
    return _EPOCH + dt.timedelta(days=int(n))


@dataclass
class SensorSeries:
    """One sensor's count stream on the 5-minute grid.

    times are minutes since the Unix epoch, strictly increasing and
    5-minute aligned; counts are non-negative integers.
    """

    sensor_id: str
    times: np.ndarray
    counts: np.ndarray
    expected_span: tuple[dt.date, dt.date]
    poi_type: str | None = None

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class NormalizedSeries:
    """A sensor stream after per-sensor min-max normalization to [0, 1]."""

    sensor_id: str
    times: np.ndarray
    values: np.ndarray
    expected_span: tuple[dt.date, dt.date]
    poi_type: str | None = None

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class Calendar:
    """Public holidays and school-holiday date ranges for one study region."""

    public_holidays: frozenset[dt.date] = field(default_factory=frozenset)
    school_holiday_ranges: tuple[tuple[dt.date, dt.date], ...] = ()

    def __post_init__(self):
        merged = _merge_ranges(self.school_holiday_ranges)
        object.__setattr__(self, "school_holiday_ranges", merged)

    def in_school_holiday(self, d: dt.date) -> bool:
        return any(lo <= d <= hi for lo, hi in self.school_holiday_ranges)


def _merge_ranges(
    ranges: Iterable[tuple[dt.date, dt.date]],
) -> tuple[tuple[dt.date, dt.date], ...]:
    """Sort ranges and merge overlapping or adjacent ones."""
    items = sorted(ranges)
    for lo, hi in items:
        if hi < lo:
            raise ConfigError(f"school holiday range {lo}..{hi} ends before it starts")
    merged: list[tuple[dt.date, dt.date]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1] + dt.timedelta(days=1):
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


def _coerce_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value))


def load_calendar(path: str | Path) -> Calendar:
    """Load a calendar config file (TOML with a [calendar] table)."""
    path = Path(path)
    with path.open("rb") as fh:
        data = tomllib.load(fh)
    cal = data.get("calendar", data)
    try:
        holidays = frozenset(_coerce_date(d) for d in cal.get("public_holidays", []))
        ranges = tuple(
            (_coerce_date(r["start"]), _coerce_date(r["end"]))
            for r in cal.get("school_holidays", [])
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid calendar file {path}: {exc}") from exc
    return Calendar(public_holidays=holidays, school_holiday_ranges=ranges)


def default_calendar() -> Calendar:
    """The bundled 2017 Singapore calendar fixture."""
    return load_calendar(Path(__file__).parent / "data" / "calendar_sg_2017.toml")


def _parse_timestamp_column(raw: list[str]) -> np.ndarray:
    """Vectorized ISO-8601 -> epoch minutes; falls back row-by-row to report the bad line."""
    try:
        stamps = np.array(raw, dtype="datetime64[s]")
    except ValueError:
        for lineno, text in enumerate(raw, start=2):
            try:
                np.datetime64(text, "s")
            except ValueError:
                raise ReadingsParseError(f"bad timestamp {text!r}", line=lineno) from None
        raise
    seconds = stamps.astype("int64")
    if np.any(seconds % 60 != 0):
        bad = int(np.argmax(seconds % 60 != 0))
        raise ReadingsParseError(
            f"timestamp {raw[bad]!r} is not minute-aligned", line=bad + 2
        )
    return seconds // 60


def parse_readings(
    stream: IO[str] | str | Path,
    expected_span: tuple[dt.date, dt.date] | None = None,
) -> list[SensorSeries]:
    """Parse a readings CSV into one SensorSeries per sensor, sorted by id.

    The stream must carry a `sensor_id,timestamp,count` header. Rows are
    grouped per sensor and sorted by timestamp. Duplicate (sensor_id,
    timestamp) pairs, negative counts, off-grid timestamps and malformed
    rows are rejected. When expected_span is not given it is inferred as
    the (min date, max date) across the whole stream.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, newline="") as fh:
            return parse_readings(fh, expected_span)

    reader = csv.reader(stream)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header] != ["sensor_id", "timestamp", "count"]:
        raise ReadingsParseError(
            f"expected header sensor_id,timestamp,count, got {header}", line=1
        )

    ids: list[str] = []
    stamps: list[str] = []
    counts_raw: list[str] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ReadingsParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        ids.append(row[0].strip())
        stamps.append(row[1].strip())
        counts_raw.append(row[2].strip())

    if not ids:
        return []

    times = _parse_timestamp_column(stamps)
    if np.any(times % BIN_MINUTES != 0):
        bad = int(np.argmax(times % BIN_MINUTES != 0))
        raise ReadingsParseError(
            f"timestamp {stamps[bad]!r} is not aligned to the 5-minute grid",
            line=bad + 2,
        )

    try:
        counts = np.array(counts_raw, dtype=np.int64)
    except ValueError:
        for lineno, text in enumerate(counts_raw, start=2):
            try:
                int(text)
            except ValueError:
                raise ReadingsParseError(f"bad count {text!r}", line=lineno) from None
        raise
    if np.any(counts < 0):
        bad = int(np.argmax(counts < 0))
        raise DomainError(
            f"negative count {counts[bad]} for sensor {ids[bad]!r} on line {bad + 2}"
        )

    if expected_span is None:
        day_lo = int(np.min(times)) // 1440
        day_hi = int(np.max(times)) // 1440
        expected_span = (day_number_to_date(day_lo), day_number_to_date(day_hi))

    id_arr = np.array(ids)
    order = np.lexsort((times, id_arr))
    id_arr, times, counts = id_arr[order], times[order], counts[order]

    series: list[SensorSeries] = []
    unique_ids, starts = np.unique(id_arr, return_index=True)
    bounds = np.append(starts, len(id_arr))
    for i, sensor_id in enumerate(unique_ids):
        t = times[bounds[i] : bounds[i + 1]]
        c = counts[bounds[i] : bounds[i + 1]]
        dup = np.nonzero(np.diff(t) == 0)[0]
        if dup.size:
            when = dt.datetime.fromtimestamp(int(t[dup[0]]) * 60, dt.timezone.utc)
            raise DuplicateReadingError(
                f"sensor {sensor_id!r} has duplicate readings at {when:%Y-%m-%d %H:%M}"
            )
        series.append(
            SensorSeries(
                sensor_id=str(sensor_id),
                times=t,
                counts=c,
                expected_span=expected_span,
            )
        )
    return series


def filter_validity(
    series_list: list[SensorSeries], min_fraction: float = 0.10
) -> tuple[list[SensorSeries], list[str]]:
    """Split sensors into valid and excluded by sample coverage.

    A sensor is valid iff present readings / (days in expected_span * 288)
    >= min_fraction. The excluded id list is sorted and must also be
    applied to the static-feature table.
    """
    if not 0.0 <= min_fraction <= 1.0:
        raise DomainError(f"min_fraction must be in [0, 1], got {min_fraction}")
    valid: list[SensorSeries] = []
    excluded: list[str] = []
    for series in series_list:
        start, end = series.expected_span
        expected = ((end - start).days + 1) * BINS_PER_DAY
        if expected <= 0:
            raise DomainError(f"sensor {series.sensor_id!r} has an empty expected span")
        if len(series) / expected >= min_fraction:
            valid.append(series)
        else:
            excluded.append(series.sensor_id)
    return valid, sorted(excluded)


def label_days(
    calendar: Calendar, span: tuple[dt.date, dt.date]
) -> dict[dt.date, TemporalLabel]:
    """Assign exactly one temporal label to every date in span (inclusive).

    Override order: public holiday > school holiday > day-of-week name.
    Holidays outside the span are ignored with a warning.
    """
    start, end = span
    if end < start:
        raise DomainError(f"span {start}..{end} is empty")

    out_of_span = sorted(d for d in calendar.public_holidays if not start <= d <= end)
    if out_of_span:
        warnings.warn(
            f"{len(out_of_span)} public holiday(s) outside span {start}..{end} ignored "
            f"(first: {out_of_span[0]})",
            stacklevel=2,
        )

    weekday_order = (
        TemporalLabel.MON,
        TemporalLabel.TUE,
        TemporalLabel.WED,
        TemporalLabel.THU,
        TemporalLabel.FRI,
        TemporalLabel.SAT,
        TemporalLabel.SUN,
    )
    labels: dict[dt.date, TemporalLabel] = {}
    d = start
    while d <= end:
        if d in calendar.public_holidays:
            labels[d] = TemporalLabel.PUBLIC_HOLIDAY
        elif calendar.in_school_holiday(d):
            labels[d] = TemporalLabel.SCHOOL_HOLIDAY
        else:
            labels[d] = weekday_order[d.weekday()]
        d += dt.timedelta(days=1)
    return labels


def normalize_counts(series: SensorSeries) -> NormalizedSeries:
    """Min-max normalize one sensor's counts over its full history.

    v maps to (v - min) / (max - min); a constant series maps to all
    zeros with a degenerate-range warning.
    """
    counts = series.counts.astype(np.float64)
    if counts.size == 0:
        raise DomainError(f"sensor {series.sensor_id!r} has no readings")
    lo, hi = float(counts.min()), float(counts.max())
    if hi == lo:
        warnings.warn(
            f"sensor {series.sensor_id!r} has a degenerate count range "
            f"(all values {lo:g}); normalizing to zeros",
            stacklevel=2,
        )
        values = np.zeros_like(counts)
    else:
        values = (counts - lo) / (hi - lo)
    return NormalizedSeries(
        sensor_id=series.sensor_id,
        times=series.times,
        values=values,
        expected_span=series.expected_span,
        poi_type=series.poi_type,
    )


def attach_poi_types(
    series_list: list[SensorSeries], poi_types: dict[str, str]
) -> list[SensorSeries]:
    """Return copies of the series with poi_type filled in from the static table."""
    return [
        replace(s, poi_type=poi_types.get(s.sensor_id, s.poi_type)) for s in series_list
    ]
