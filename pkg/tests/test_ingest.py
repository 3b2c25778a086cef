import datetime as dt
import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spaceprofiler.errors import (
    DomainError,
    DuplicateReadingError,
    ReadingsParseError,
)
from spaceprofiler.ingest import (
    Calendar,
    SensorSeries,
    TemporalLabel,
    default_calendar,
    filter_validity,
    label_days,
    load_calendar,
    normalize_counts,
    parse_readings,
)

HEADER = "sensor_id,timestamp,count\n"


def _parse(text: str, **kwargs):
    return parse_readings(io.StringIO(HEADER + text), **kwargs)


class TestParseReadings:
    def test_groups_rows_by_sensor(self):
        series = _parse(
            "s1,2017-05-01T00:00:00,3\n"
            "s2,2017-05-01T00:05:00,1\n"
            "s1,2017-05-01T00:05:00,4\n"
        )
        assert [s.sensor_id for s in series] == ["s1", "s2"]
        assert [len(s) for s in series] == [2, 1]
        np.testing.assert_array_equal(series[0].counts, [3, 4])

    def test_rows_sorted_by_timestamp(self):
        series = _parse(
            "s1,2017-05-01T00:10:00,9\n"
            "s1,2017-05-01T00:00:00,1\n"
        )
        assert list(np.diff(series[0].times) > 0) == [True]
        np.testing.assert_array_equal(series[0].counts, [1, 9])

    def test_empty_stream_gives_empty_list(self):
        assert _parse("") == []

    def test_negative_count_is_domain_error(self):
        with pytest.raises(DomainError, match="-3"):
            _parse("s1,2017-05-01T00:00:00,-3\n")

    def test_malformed_row_reports_line_number(self):
        with pytest.raises(ReadingsParseError, match="line 3"):
            _parse("s1,2017-05-01T00:00:00,3\ns1,2017-05-01T00:05:00\n")

    def test_bad_timestamp_reports_line_number(self):
        with pytest.raises(ReadingsParseError, match="line 2"):
            _parse("s1,notatime,3\n")

    def test_bad_count_reports_line_number(self):
        with pytest.raises(ReadingsParseError, match="line 2"):
            _parse("s1,2017-05-01T00:00:00,many\n")

    def test_off_grid_timestamp_rejected(self):
        with pytest.raises(ReadingsParseError, match="5-minute"):
            _parse("s1,2017-05-01T00:03:00,3\n")

    def test_duplicate_timestamp_rejected(self):
        with pytest.raises(DuplicateReadingError, match="s1"):
            _parse(
                "s1,2017-05-01T00:00:00,3\n"
                "s1,2017-05-01T00:00:00,5\n"
            )

    def test_missing_header_rejected(self):
        with pytest.raises(ReadingsParseError, match="header"):
            parse_readings(io.StringIO("s1,2017-05-01T00:00:00,3\n"))

    def test_span_inferred_from_data(self):
        series = _parse(
            "s1,2017-05-01T00:00:00,3\n"
            "s1,2017-05-03T10:00:00,4\n"
        )
        assert series[0].expected_span == (dt.date(2017, 5, 1), dt.date(2017, 5, 3))


class TestFilterValidity:
    def _series_with(self, n_readings: int, sensor_id="s1") -> SensorSeries:
        # 10-day span: expected = 10 * 288 = 2880 samples
        times = np.arange(n_readings, dtype=np.int64) * 5 + 17297280
        return SensorSeries(
            sensor_id=sensor_id,
            times=times,
            counts=np.ones(n_readings, dtype=np.int64),
            expected_span=(dt.date(2002, 11, 13), dt.date(2002, 11, 22)),
        )

    def test_above_threshold_is_valid(self):
        valid, excluded = filter_validity([self._series_with(291)])  # 10.1%
        assert len(valid) == 1 and excluded == []

    def test_below_threshold_is_excluded(self):
        valid, excluded = filter_validity([self._series_with(285)])  # 9.9%
        assert valid == [] and excluded == ["s1"]

    def test_exactly_at_threshold_is_valid(self):
        valid, excluded = filter_validity([self._series_with(288)])  # 10.0%
        assert len(valid) == 1

    def test_full_coverage_cohort_all_valid(self):
        cohort = [self._series_with(2880, f"n{i:02d}") for i in range(47)]
        valid, excluded = filter_validity(cohort)
        assert len(valid) == 47 and excluded == []

    def test_excluded_ids_sorted(self):
        _, excluded = filter_validity(
            [self._series_with(1, "zz"), self._series_with(1, "aa")]
        )
        assert excluded == ["aa", "zz"]

    def test_empty_input_gives_empty_outputs(self):
        assert filter_validity([]) == ([], [])

    def test_idempotent(self):
        cohort = [self._series_with(n, f"s{n}") for n in (100, 288, 500, 2880)]
        valid1, excl1 = filter_validity(cohort)
        valid2, excl2 = filter_validity(valid1)
        assert [s.sensor_id for s in valid1] == [s.sensor_id for s in valid2]
        assert excl2 == []

    def test_bad_fraction_rejected(self):
        with pytest.raises(DomainError):
            filter_validity([], min_fraction=1.5)


@pytest.mark.filterwarnings("ignore:.*outside span.*:UserWarning")
class TestLabelDays:
    def test_public_holiday_overrides_weekday(self):
        labels = label_days(default_calendar(), (dt.date(2017, 5, 1), dt.date(2017, 5, 2)))
        assert labels[dt.date(2017, 5, 1)] is TemporalLabel.PUBLIC_HOLIDAY  # a Monday
        assert labels[dt.date(2017, 5, 2)] is TemporalLabel.TUE

    def test_school_holiday_range_membership(self):
        labels = label_days(default_calendar(), (dt.date(2017, 6, 1), dt.date(2017, 6, 30)))
        assert labels[dt.date(2017, 6, 7)] is TemporalLabel.SCHOOL_HOLIDAY

    def test_public_holiday_overrides_school_holiday(self):
        # 2017-06-25 falls inside the mid-year school break and is a holiday
        labels = label_days(default_calendar(), (dt.date(2017, 6, 1), dt.date(2017, 6, 30)))
        assert labels[dt.date(2017, 6, 25)] is TemporalLabel.PUBLIC_HOLIDAY

    def test_plain_weekday(self):
        labels = label_days(default_calendar(), (dt.date(2017, 11, 1), dt.date(2017, 11, 17)))
        assert labels[dt.date(2017, 11, 14)] is TemporalLabel.TUE

    def test_every_date_labeled_exactly_once(self):
        span = (dt.date(2017, 5, 1), dt.date(2017, 12, 30))
        labels = label_days(default_calendar(), span)
        expected = {span[0] + dt.timedelta(days=i) for i in range(244)}
        assert set(labels) == expected

    def test_out_of_span_holiday_warns(self):
        with pytest.warns(UserWarning, match="outside span"):
            label_days(default_calendar(), (dt.date(2017, 11, 1), dt.date(2017, 11, 10)))

    def test_empty_span_rejected(self):
        with pytest.raises(DomainError):
            label_days(Calendar(), (dt.date(2017, 5, 2), dt.date(2017, 5, 1)))


class TestNormalizeCounts:
    def _series(self, counts) -> SensorSeries:
        counts = np.asarray(counts, dtype=np.int64)
        return SensorSeries(
            sensor_id="s1",
            times=np.arange(len(counts), dtype=np.int64) * 5,
            counts=counts,
            expected_span=(dt.date(1970, 1, 1), dt.date(1970, 1, 1)),
        )

    def test_linear_map_endpoints(self):
        out = normalize_counts(self._series([0, 5, 10]))
        np.testing.assert_allclose(out.values, [0.0, 0.5, 1.0])

    def test_degenerate_range_warns_and_zeros(self):
        with pytest.warns(UserWarning, match="degenerate"):
            out = normalize_counts(self._series([7, 7, 7]))
        np.testing.assert_array_equal(out.values, [0.0, 0.0, 0.0])

    def test_direct_evaluation(self):
        out = normalize_counts(self._series([2, 4, 8]))
        np.testing.assert_allclose(out.values, [0.0, 1.0 / 3.0, 1.0])

    @given(
        st.lists(st.integers(min_value=0, max_value=10_000), min_size=2, max_size=50)
    )
    def test_range_and_extrema_preserved(self, counts):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = normalize_counts(self._series(counts))
        values = out.values
        assert values.min() >= 0.0 and values.max() <= 1.0
        arr = np.asarray(counts)
        if arr.min() != arr.max():
            assert values[int(np.argmax(arr))] == 1.0
            assert values[int(np.argmin(arr))] == 0.0
            # order preserving
            order = np.argsort(arr, kind="stable")
            assert (np.diff(values[order]) >= 0).all()


class TestCalendarLoading:
    def test_load_roundtrip(self, tmp_path):
        path = tmp_path / "cal.toml"
        path.write_text(
            "[calendar]\n"
            'public_holidays = [2021-06-07, "2021-08-09"]\n'
            "[[calendar.school_holidays]]\n"
            "start = 2021-06-14\n"
            "end = 2021-06-27\n"
        )
        cal = load_calendar(path)
        assert dt.date(2021, 6, 7) in cal.public_holidays
        assert dt.date(2021, 8, 9) in cal.public_holidays
        assert cal.in_school_holiday(dt.date(2021, 6, 20))
        assert not cal.in_school_holiday(dt.date(2021, 6, 28))

    def test_overlapping_ranges_merge(self):
        cal = Calendar(
            school_holiday_ranges=(
                (dt.date(2021, 6, 1), dt.date(2021, 6, 10)),
                (dt.date(2021, 6, 8), dt.date(2021, 6, 20)),
            )
        )
        assert cal.school_holiday_ranges == ((dt.date(2021, 6, 1), dt.date(2021, 6, 20)),)

    def test_default_calendar_spans_study_window(self):
        cal = default_calendar()
        assert dt.date(2017, 5, 1) in cal.public_holidays
        assert cal.in_school_holiday(dt.date(2017, 12, 1))
