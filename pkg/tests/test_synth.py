import datetime as dt
import io

import numpy as np
import pytest

from spaceprofiler.errors import ConfigError
from spaceprofiler.ingest import (
    BINS_PER_DAY,
    Calendar,
    DayType,
    filter_validity,
    parse_readings,
)
from spaceprofiler.synth import (
    ArchetypeSpec,
    paper_archetypes,
    paper_fixture,
    synth_generate,
)

SPAN = (dt.date(2021, 5, 31), dt.date(2021, 7, 25))  # 8 weeks, Monday-aligned
CAL = Calendar(
    public_holidays=frozenset([dt.date(2021, 6, 7)]),
    school_holiday_ranges=((dt.date(2021, 6, 14), dt.date(2021, 6, 27)),),
)

ALL_ONE = {DayType.WEEKDAY: 1.0, DayType.WEEKEND: 1.0, DayType.SCHOOL_HOLIDAY: 1.0}


def grid_curve() -> np.ndarray:
    """Curve on the 1/20 grid so counts with max_count=20 are exact."""
    rng = np.random.default_rng(0)
    return rng.integers(0, 21, BINS_PER_DAY) / 20.0


def two_archetypes(noise=0.0, dropout=0.0):
    return [
        ArchetypeSpec("x", grid_curve(), ALL_ONE, noise, dropout),
        ArchetypeSpec("y", grid_curve() * 0.5, ALL_ONE, noise, dropout),
    ]


class TestSynthGenerate:
    def test_noiseless_counts_match_curve_exactly(self):
        ds = synth_generate(
            two_archetypes(), 1, SPAN, CAL, seed=0, max_count_range=(20, 20)
        )
        series = ds.series[0]
        expected = np.rint(grid_curve() * 20).astype(np.int64)
        n_days = 56
        assert len(series) == n_days * BINS_PER_DAY
        np.testing.assert_array_equal(
            series.counts.reshape(n_days, BINS_PER_DAY),
            np.tile(expected, (n_days, 1)),
        )

    def test_deterministic_per_seed(self, tmp_path):
        d1 = synth_generate(two_archetypes(0.05, 0.1), 2, SPAN, CAL, seed=42)
        d2 = synth_generate(two_archetypes(0.05, 0.1), 2, SPAN, CAL, seed=42)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        d1.write(out1)
        d2.write(out2)
        for name in ("readings.csv", "static.csv", "truth.csv", "calendar.toml"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_different_seed_differs(self):
        d1 = synth_generate(two_archetypes(0.05, 0.0), 1, SPAN, CAL, seed=1)
        d2 = synth_generate(two_archetypes(0.05, 0.0), 1, SPAN, CAL, seed=2)
        assert not np.array_equal(d1.series[0].counts, d2.series[0].counts)

    def test_heavy_dropout_fails_validity_filter(self):
        specs = [
            ArchetypeSpec("dead", grid_curve(), ALL_ONE, 0.0, 0.95),
            ArchetypeSpec("alive", grid_curve(), ALL_ONE, 0.0, 0.0),
        ]
        ds = synth_generate(specs, 1, SPAN, CAL, seed=3)
        valid, excluded = filter_validity(ds.series, 0.10)
        assert excluded == ["s000"]
        assert [s.sensor_id for s in valid] == ["s001"]

    def test_output_parses_as_valid_readings(self):
        ds = synth_generate(two_archetypes(0.05, 0.2), 1, SPAN, CAL, seed=4)
        buf = io.StringIO()
        from spaceprofiler.synth import write_readings_csv

        write_readings_csv(buf, ds.series)
        buf.seek(0)
        parsed = parse_readings(buf, expected_span=SPAN)
        assert [s.sensor_id for s in parsed] == [s.sensor_id for s in ds.series]
        for got, want in zip(parsed, ds.series):
            np.testing.assert_array_equal(got.times, want.times)
            np.testing.assert_array_equal(got.counts, want.counts)

    def test_expected_per_bin_mean_matches_curve(self):
        # law-of-large-numbers check on bins where clipping is inactive
        curve = np.full(BINS_PER_DAY, 0.5)
        noise = 0.05
        spec = ArchetypeSpec("mid", curve, ALL_ONE, noise, 0.0)
        other = ArchetypeSpec("other", curve * 0.6, ALL_ONE, noise, 0.0)
        ds = synth_generate([spec, other], 1, SPAN, CAL, seed=5, max_count_range=(200, 200))
        series = ds.series[0]
        n_days = 56
        values = series.counts.reshape(n_days, BINS_PER_DAY) / 200.0
        per_bin_mean = values.mean(axis=0)
        quantization = 0.5 / 200.0
        tolerance = 3 * noise / np.sqrt(n_days) + quantization
        deviations = np.abs(per_bin_mean - 0.5)
        # 3-sigma bound per bin: with 288 simultaneous bins allow the
        # expected ~0.3% false-positive rate, but cap every bin at 5 sigma
        assert (deviations <= tolerance).mean() >= 0.99
        assert deviations.max() <= 5 * noise / np.sqrt(n_days) + quantization

    def test_truth_groups_for_paper_archetypes(self):
        ds = synth_generate(paper_archetypes(0.0, 0.0), 2, SPAN, CAL, seed=6)
        for day_type, expected in [
            (DayType.WEEKDAY, 5),
            (DayType.WEEKEND, 4),
            (DayType.SCHOOL_HOLIDAY, 5),
        ]:
            groups = ds.truth_groups(day_type)
            assert len(set(groups.values())) == expected

    def test_static_rows_complete_and_nonnegative(self):
        ds = synth_generate(two_archetypes(), 3, SPAN, CAL, seed=7)
        assert len(ds.static_rows) == 6
        from spaceprofiler.staticfeat import FEATURE_NAMES

        for row in ds.static_rows:
            for name in FEATURE_NAMES:
                assert float(row[name]) >= 0.0

    def test_five_minute_alignment_and_nonnegative_counts(self):
        ds = synth_generate(two_archetypes(0.1, 0.3), 1, SPAN, CAL, seed=8)
        for s in ds.series:
            assert (s.times % 5 == 0).all()
            assert (np.diff(s.times) > 0).all()
            assert (s.counts >= 0).all()


class TestValidation:
    def test_short_span_rejected(self):
        with pytest.raises(ConfigError, match="28"):
            synth_generate(
                two_archetypes(), 1, (dt.date(2021, 5, 31), dt.date(2021, 6, 10)), CAL, 0
            )

    def test_single_archetype_rejected(self):
        with pytest.raises(ConfigError):
            synth_generate(two_archetypes()[:1], 1, SPAN, CAL, 0)

    def test_count_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            synth_generate(two_archetypes(), [1, 2, 3], SPAN, CAL, 0)

    def test_bad_curve_rejected(self):
        with pytest.raises(ConfigError, match="288"):
            ArchetypeSpec("bad", np.zeros(10), ALL_ONE)
        with pytest.raises(ConfigError, match="\\[0, 1\\]"):
            ArchetypeSpec("bad", np.full(BINS_PER_DAY, 1.5), ALL_ONE)
        with pytest.raises(ConfigError, match="dropout"):
            ArchetypeSpec("bad", np.zeros(BINS_PER_DAY), ALL_ONE, dropout_rate=1.0)


def test_paper_fixture_scale():
    ds = paper_fixture(seed=0, span=SPAN, calendar=CAL)
    assert len(ds.series) == 47
    names = {row["archetype"] for row in ds.truth.values()}
    assert len(names) == 5


@pytest.mark.filterwarnings("ignore:.*outside span.*:UserWarning")
def test_full_study_span_yields_288_bin_profiles():
    from spaceprofiler.ingest import (
        default_calendar,
        label_days,
        normalize_counts,
    )
    from spaceprofiler.profiling import daily_windows, generic_profiles

    span = (dt.date(2017, 5, 1), dt.date(2017, 12, 30))
    assert (span[1] - span[0]).days + 1 == 244
    calendar = default_calendar()
    ds = synth_generate(
        paper_archetypes(0.02, 0.02)[:2], 1, span, calendar, seed=9
    )
    labels = label_days(calendar, span)
    for series in ds.series:
        by_label = daily_windows(normalize_counts(series), labels)
        for prof in by_label.values():
            assert prof.bins.shape == (BINS_PER_DAY,)
        for prof in generic_profiles(series.sensor_id, by_label).values():
            assert prof.bins.shape == (BINS_PER_DAY,)
            assert prof.support.sum() > 0
