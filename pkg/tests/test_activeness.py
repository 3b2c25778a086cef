import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spaceprofiler.errors import ConfigError, DomainError, InsufficientDataError
from spaceprofiler.activeness import (
    categorize,
    classify_poi,
    cluster_mean,
    validate_bounds,
)
from spaceprofiler.ingest import DayType


class TestCategorize:
    @pytest.mark.parametrize(
        "mean,expected",
        [
            # cluster means reported for the study's weekday groups
            (0.3850, 1),
            (0.2301, 2),
            (0.1621, 3),
            (0.0577, 4),
            (0.0105, 5),
        ],
    )
    def test_reference_means(self, mean, expected):
        assert categorize(mean) == expected

    @pytest.mark.parametrize(
        "boundary,expected",
        [(0.30, 1), (0.20, 2), (0.10, 3), (0.03, 4)],
    )
    def test_inclusive_edges(self, boundary, expected):
        assert categorize(boundary) == expected

    def test_extremes(self):
        assert categorize(0.0) == 5
        assert categorize(1.0) == 1

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            categorize(1.5)
        with pytest.raises(DomainError):
            categorize(-0.01)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, m1, m2):
        if m1 <= m2:
            assert categorize(m1) >= categorize(m2)

    def test_bands_tile_unit_interval(self):
        # every value gets exactly one category; transitions only at bounds
        eps = 1e-12
        grid = np.concatenate(
            [
                np.linspace(0, 1, 1001),
                np.array([b for b in (0.30, 0.20, 0.10, 0.03)]),
                np.array([b - eps for b in (0.30, 0.20, 0.10, 0.03)]),
            ]
        )
        for x in grid:
            assert categorize(float(x)) in {1, 2, 3, 4, 5}
        assert categorize(0.30 - eps) == 2
        assert categorize(0.20 - eps) == 3
        assert categorize(0.10 - eps) == 4
        assert categorize(0.03 - eps) == 5

    def test_custom_bounds_validated(self):
        with pytest.raises(ConfigError):
            validate_bounds((0.1, 0.2, 0.3, 0.4))  # ascending
        with pytest.raises(ConfigError):
            validate_bounds((0.3, 0.2, 0.1))  # wrong arity


class TestClusterMean:
    def test_singleton_flat_profile(self):
        out = cluster_mean({"s1": 0}, {"s1": np.full(288, 0.2)})
        assert out[0] == pytest.approx(0.2)

    def test_two_member_mean(self):
        out = cluster_mean(
            {"s1": 0, "s2": 0},
            {"s1": np.full(288, 0.1), "s2": np.full(288, 0.3)},
        )
        assert out[0] == pytest.approx(0.2)

    def test_planted_mean_recovered_within_noise(self):
        rng = np.random.default_rng(0)
        target = 0.3850
        profiles = {
            f"s{i}": np.clip(target + rng.normal(0, 0.02, 288), 0, 1) for i in range(9)
        }
        out = cluster_mean({sid: 0 for sid in profiles}, profiles)
        assert out[0] == pytest.approx(target, abs=3 * 0.02 / np.sqrt(9 * 288))

    def test_empty_cluster_warns_and_excluded(self):
        with pytest.warns(UserWarning, match="cluster 1 is empty"):
            out = cluster_mean({"s1": 0}, {"s1": np.full(288, 0.5)}, k=2)
        assert set(out) == {0}

    def test_missing_profile_is_error(self):
        with pytest.raises(InsufficientDataError):
            cluster_mean({"s1": 0}, {})


class TestClassifyPoi:
    def _verdict(self, wd, we, sh):
        return classify_poi(
            "s1",
            {DayType.WEEKDAY: wd, DayType.WEEKEND: we, DayType.SCHOOL_HOLIDAY: sh},
        )

    @pytest.mark.parametrize(
        "triple,expected",
        [
            ((3, 3, 5), "active"),
            ((4, 4, 1), "less_active"),
            ((1, 2, 3), "active"),
            ((5, 5, 5), "less_active"),
            ((3, 4, 3), "active"),
        ],
    )
    def test_examples(self, triple, expected):
        assert self._verdict(*triple).verdict == expected

    def test_exhaustive_rule(self):
        for triple in itertools.product(range(1, 6), repeat=3):
            verdict = self._verdict(*triple)
            expected = sum(1 for c in triple if c <= 3) >= 2
            assert verdict.active == expected, triple

    def test_monotone_improvement_never_deactivates(self):
        for triple in itertools.product(range(1, 6), repeat=3):
            if not self._verdict(*triple).active:
                continue
            for pos in range(3):
                for better in range(1, triple[pos]):
                    improved = list(triple)
                    improved[pos] = better
                    assert self._verdict(*improved).active, (triple, improved)

    def test_missing_day_type_is_error(self):
        with pytest.raises(InsufficientDataError, match="Weekend"):
            classify_poi("s1", {DayType.WEEKDAY: 1, DayType.SCHOOL_HOLIDAY: 2})
