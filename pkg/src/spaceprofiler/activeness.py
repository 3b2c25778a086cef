"""Activeness grading: cluster means to the five categories, and the
two-of-three rule deciding whether a PoI counts as active."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from spaceprofiler.errors import ConfigError, DomainError, InsufficientDataError
from spaceprofiler.ingest import DayType

# Lower bounds for categories 1..4, in descending order; values below the
# last bound fall into category 5. A mean sitting exactly on a bound takes
# the more-active category (0.30 is category 1).
DEFAULT_CATEGORY_BOUNDS: tuple[float, ...] = (0.30, 0.20, 0.10, 0.03)

# A PoI is active when at least this many of its three day-type
# categories are at or above category 3.
ACTIVE_CATEGORY_CUTOFF = 3
ACTIVE_MIN_QUALIFYING = 2


def validate_bounds(bounds: Sequence[float]) -> tuple[float, ...]:
    out = tuple(float(b) for b in bounds)
    if len(out) != 4 or any(not 0.0 < b < 1.0 for b in out) or list(out) != sorted(out, reverse=True):
        raise ConfigError(
            f"category bounds must be 4 descending values in (0, 1), got {bounds}"
        )
    return out


def categorize(mean: float, bounds: Sequence[float] = DEFAULT_CATEGORY_BOUNDS) -> int:
    """Map a mean normalized utilization in [0, 1] to a category ordinal 1..5."""
    if not 0.0 <= mean <= 1.0:
        raise DomainError(f"mean utilization must be in [0, 1], got {mean}")
    bounds = validate_bounds(bounds)
    for ordinal, lower in enumerate(bounds, start=1):
        if mean >= lower:
            return ordinal
    return 5


def cluster_mean(
    assignments: Mapping[str, int],
    profiles: Mapping[str, np.ndarray],
    k: int | None = None,
) -> dict[int, float]:
    """Mean utilization per cluster: average over members of each member's
    288-bin profile mean. Empty clusters are excluded with a warning.

    When k is given, all cluster indices in [0, k) are inspected;
    otherwise only indices present in the assignments."""
    missing = sorted(set(assignments) - set(profiles))
    if missing:
        raise InsufficientDataError(f"no profile for assigned sensor(s) {missing}")

    members: dict[int, list[float]] = {}
    for sensor_id, cluster in assignments.items():
        members.setdefault(int(cluster), []).append(
            float(np.mean(profiles[sensor_id]))
        )

    clusters = range(k) if k is not None else sorted(set(assignments.values()))
    out: dict[int, float] = {}
    for cluster in clusters:
        values = members.get(cluster, [])
        if not values:
            warnings.warn(f"cluster {cluster} is empty; excluded", stacklevel=2)
            continue
        out[cluster] = float(np.mean(values))
    return out


@dataclass
class PoIVerdict:
    """Per-PoI activeness categories and the active / less-active call."""

    sensor_id: str
    categories: dict[DayType, int]
    verdict: str  # "active" | "less_active"
    poi_type: str | None = None

    @property
    def active(self) -> bool:
        return self.verdict == "active"


def classify_poi(
    sensor_id: str,
    categories: Mapping[DayType, int],
    poi_type: str | None = None,
) -> PoIVerdict:
    """Active iff at least two of the three day-type categories are <= 3."""
    missing = [dt for dt in DayType if dt not in categories]
    if missing:
        raise InsufficientDataError(
            f"sensor {sensor_id!r} lacks categories for "
            f"{[dt.value for dt in missing]}; it should have been filtered earlier"
        )
    qualifying = sum(
        1 for dt in DayType if categories[dt] <= ACTIVE_CATEGORY_CUTOFF
    )
    verdict = "active" if qualifying >= ACTIVE_MIN_QUALIFYING else "less_active"
    return PoIVerdict(
        sensor_id=sensor_id,
        categories={dt: int(categories[dt]) for dt in DayType},
        verdict=verdict,
        poi_type=poi_type,
    )
