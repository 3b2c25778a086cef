import datetime as dt

import numpy as np
import pytest

from spaceprofiler.ingest import Calendar, SensorSeries


@pytest.fixture
def small_calendar() -> Calendar:
    """Eight-week window in 2021 with one public holiday and a two-week
    school holiday block (2021-05-31 is a Monday)."""
    return Calendar(
        public_holidays=frozenset([dt.date(2021, 6, 7)]),
        school_holiday_ranges=((dt.date(2021, 6, 14), dt.date(2021, 6, 27)),),
    )


@pytest.fixture
def small_span() -> tuple[dt.date, dt.date]:
    return (dt.date(2021, 5, 31), dt.date(2021, 7, 25))


def make_series(
    sensor_id: str,
    day_values: dict[dt.date, np.ndarray],
    span: tuple[dt.date, dt.date],
) -> SensorSeries:
    """Build a SensorSeries from per-date 288-bin count vectors."""
    times = []
    counts = []
    epoch = dt.date(1970, 1, 1)
    for date in sorted(day_values):
        base = (date - epoch).days * 1440
        values = np.asarray(day_values[date])
        for b, v in enumerate(values):
            if np.isnan(v):
                continue
            times.append(base + 5 * b)
            counts.append(int(v))
    return SensorSeries(
        sensor_id=sensor_id,
        times=np.array(times, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
        expected_span=span,
    )
