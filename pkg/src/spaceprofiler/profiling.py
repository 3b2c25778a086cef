"""Daily-window averaging into per-label profiles and generic day types.

Each sensor's labeled, normalized stream collapses to a 288-bin mean
curve per temporal label; the nine labels then aggregate into the
Weekday / Weekend / SchoolHoliday generic profiles (public holidays are
dropped — too few samples to profile).
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping

import numpy as np

from spaceprofiler.errors import DimensionError, InsufficientDataError
from spaceprofiler.ingest import (
    BINS_PER_DAY,
    DayType,
    NormalizedSeries,
    TemporalLabel,
    WEEKDAY_LABELS,
    WEEKEND_LABELS,
    day_number_to_date,
)


@dataclass
class BinProfile:
    """A 288-bin mean curve plus per-bin sample counts; nan where support is 0."""

    bins: np.ndarray
    support: np.ndarray

    @property
    def empty(self) -> bool:
        return bool((self.support == 0).all())


@dataclass
class DayTypeProfile:
    """One sensor's average daily utilization curve for a generic day type."""

    sensor_id: str
    label: DayType
    bins: np.ndarray
    support: np.ndarray
    poi_type: str | None = None

    def dense(self) -> np.ndarray:
        """Bins with empty slots filled by linear interpolation from neighbours.

        Distance kernels need total vectors; interpolation is the least
        structured completion. Edge gaps take the nearest defined value.
        """
        filled = np.isfinite(self.bins) & (self.support > 0)
        if not filled.any():
            raise InsufficientDataError(
                f"sensor {self.sensor_id!r} has no samples for {self.label.value}"
            )
        if filled.all():
            return self.bins.copy()
        idx = np.arange(BINS_PER_DAY)
        return np.interp(idx, idx[filled], self.bins[filled])


def daily_windows(
    series: NormalizedSeries, day_labels: Mapping[dt.date, TemporalLabel]
) -> dict[TemporalLabel, BinProfile]:
    """Average one sensor's normalized stream into a 288-bin curve per label.

    Bin b of label L is the mean over all dates labeled L of the reading
    at time-of-day b; the divisor is the number of samples actually
    present. Labels with no dates yield empty profiles.
    """
    values = np.asarray(series.values, dtype=np.float64)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise DimensionError(
            f"sensor {series.sensor_id!r} values outside [0, 1]; normalize first"
        )

    day_numbers = series.times // 1440
    bin_idx = (series.times % 1440) // 5

    label_list = list(TemporalLabel)
    label_pos = {lab: i for i, lab in enumerate(label_list)}

    unique_days, day_inverse = np.unique(day_numbers, return_inverse=True)
    day_codes = np.empty(len(unique_days), dtype=np.int64)
    for i, day_num in enumerate(unique_days):
        date = day_number_to_date(int(day_num))
        try:
            day_codes[i] = label_pos[day_labels[date]]
        except KeyError:
            raise InsufficientDataError(
                f"sensor {series.sensor_id!r} has a reading on unlabeled date {date}"
            ) from None

    codes = day_codes[day_inverse]
    flat = codes * BINS_PER_DAY + bin_idx
    size = len(label_list) * BINS_PER_DAY
    sums = np.bincount(flat, weights=values, minlength=size).reshape(-1, BINS_PER_DAY)
    counts = np.bincount(flat, minlength=size).reshape(-1, BINS_PER_DAY)

    out: dict[TemporalLabel, BinProfile] = {}
    for lab, i in label_pos.items():
        support = counts[i].astype(np.int64)
        with np.errstate(invalid="ignore"):
            bins = np.where(support > 0, sums[i] / np.maximum(support, 1), np.nan)
        out[lab] = BinProfile(bins=bins, support=support)
    return out


def _weighted_merge(parts: list[BinProfile]) -> BinProfile:
    sums = np.zeros(BINS_PER_DAY)
    support = np.zeros(BINS_PER_DAY, dtype=np.int64)
    for p in parts:
        filled = p.support > 0
        sums[filled] += p.bins[filled] * p.support[filled]
        support += p.support
    with np.errstate(invalid="ignore"):
        bins = np.where(support > 0, sums / np.maximum(support, 1), np.nan)
    return BinProfile(bins=bins, support=support)


def generic_profiles(
    sensor_id: str,
    label_profiles: Mapping[TemporalLabel, BinProfile],
    poi_type: str | None = None,
) -> dict[DayType, DayTypeProfile]:
    """Aggregate the nine label profiles into Weekday / Weekend / SchoolHoliday.

    Weekday and Weekend are support-weighted means of their member
    labels; SchoolHoliday passes through; PublicHoliday is discarded.
    Raises when a generic day type ends up with no samples at all.
    """
    groups = {
        DayType.WEEKDAY: [label_profiles[lab] for lab in WEEKDAY_LABELS],
        DayType.WEEKEND: [label_profiles[lab] for lab in WEEKEND_LABELS],
        DayType.SCHOOL_HOLIDAY: [label_profiles[TemporalLabel.SCHOOL_HOLIDAY]],
    }
    out: dict[DayType, DayTypeProfile] = {}
    for day_type, parts in groups.items():
        merged = _weighted_merge(parts)
        if merged.empty:
            raise InsufficientDataError(
                f"sensor {sensor_id!r} has no samples for day type {day_type.value}"
            )
        out[day_type] = DayTypeProfile(
            sensor_id=sensor_id,
            label=day_type,
            bins=merged.bins,
            support=merged.support,
            poi_type=poi_type,
        )
    return out


def write_profiles_csv(
    target: IO[str] | str | Path, profiles: list[DayTypeProfile]
) -> None:
    """Export profiles as sensor_id,label,b000..b287 rows (nan for empty bins)."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_profiles_csv(fh, profiles)
            return
    writer = csv.writer(target)
    writer.writerow(["sensor_id", "label"] + [f"b{i:03d}" for i in range(BINS_PER_DAY)])
    for prof in sorted(profiles, key=lambda p: (p.sensor_id, p.label.value)):
        writer.writerow(
            [prof.sensor_id, prof.label.value]
            + [f"{v:.9g}" if np.isfinite(v) else "nan" for v in prof.bins]
        )
