"""Static geographic features: loading, min-max normalization with
distance inversion, and the active vs less-active group comparison."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from spaceprofiler.errors import DomainError, SchemaError
from spaceprofiler.activeness import PoIVerdict

# The 12-feature schema: (column name, kind). Distance features are in
# meters and get inverted after normalization so 1.0 means nearest;
# count features keep their orientation.
FEATURES: tuple[tuple[str, str], ...] = (
    ("bus_stop_1st_m", "distance"),
    ("bus_stop_2nd_m", "distance"),
    ("shop_1st_m", "distance"),
    ("shop_2nd_m", "distance"),
    ("food_1st_m", "distance"),
    ("food_2nd_m", "distance"),
    ("grocery_1st_m", "distance"),
    ("grocery_2nd_m", "distance"),
    ("housing_blocks_100m", "count"),
    ("housing_units_100m", "count"),
    ("poi_topology", "count"),
    ("connected_pathways_50m", "count"),
)
FEATURE_NAMES = tuple(name for name, _ in FEATURES)
FEATURE_KINDS = dict(FEATURES)
COUNT_FEATURES = tuple(name for name, kind in FEATURES if kind == "count")


@dataclass
class StaticFeatureTable:
    """Per-sensor static feature rows, aligned with `ids`."""

    ids: tuple[str, ...]
    poi_types: tuple[str, ...]
    values: np.ndarray  # shape (n, 12), column order == FEATURE_NAMES
    normalized: bool = False

    def row(self, sensor_id: str) -> np.ndarray:
        return self.values[self.ids.index(sensor_id)]

    def poi_type_of(self) -> dict[str, str]:
        return dict(zip(self.ids, self.poi_types))


def load_static(
    stream: IO[str] | str | Path, excluded_ids: Sequence[str] = ()
) -> StaticFeatureTable:
    """Load the static-feature CSV, dropping rows for excluded sensors.

    The header must carry sensor_id, poi_type and the 12 feature
    columns. Rows with missing, non-numeric or negative cells are
    rejected with a warning; count columns must be integral.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, newline="") as fh:
            return load_static(fh, excluded_ids)

    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise SchemaError("static features file is empty")
    missing = [c for c in ("sensor_id", "poi_type") + FEATURE_NAMES if c not in reader.fieldnames]
    if missing:
        raise SchemaError(f"static features file lacks column(s) {missing}")

    excluded = set(excluded_ids)
    ids: list[str] = []
    poi_types: list[str] = []
    rows: list[list[float]] = []
    for lineno, record in enumerate(reader, start=2):
        sensor_id = (record.get("sensor_id") or "").strip()
        if not sensor_id:
            warnings.warn(f"line {lineno}: row without sensor_id rejected", stacklevel=2)
            continue
        if sensor_id in excluded:
            continue
        try:
            parsed = [_parse_cell(record, name) for name in FEATURE_NAMES]
        except ValueError as exc:
            warnings.warn(f"line {lineno}: {exc}; row rejected", stacklevel=2)
            continue
        ids.append(sensor_id)
        poi_types.append((record.get("poi_type") or "").strip())
        rows.append(parsed)

    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(FEATURES)))
    return StaticFeatureTable(ids=tuple(ids), poi_types=tuple(poi_types), values=values)


def _parse_cell(record: dict, name: str) -> float:
    raw = (record.get(name) or "").strip()
    if not raw:
        raise ValueError(f"missing {name}")
    value = float(raw)
    if value < 0:
        raise ValueError(f"negative {name} ({value:g})")
    if name in COUNT_FEATURES and value != int(value):
        raise ValueError(f"non-integral count {name} ({value:g})")
    return value


def normalize_static(table: StaticFeatureTable) -> StaticFeatureTable:
    """Min-max normalize each column over retained sensors, then invert
    distance columns so 1.0 marks the nearest amenity.

    Constant columns normalize to all zeros (all ones after inversion
    for distance kinds) with a degenerate-range warning.
    """
    if table.normalized:
        raise DomainError("table is already normalized")
    values = table.values.astype(np.float64).copy()
    for j, (name, kind) in enumerate(FEATURES):
        col = values[:, j]
        lo, hi = float(col.min()), float(col.max())
        if hi == lo:
            warnings.warn(
                f"static feature {name} has a degenerate range (all {lo:g})",
                stacklevel=2,
            )
            col = np.zeros_like(col)
        else:
            col = (col - lo) / (hi - lo)
        if kind == "distance":
            col = 1.0 - col
        values[:, j] = col
    return StaticFeatureTable(
        ids=table.ids, poi_types=table.poi_types, values=values, normalized=True
    )


@dataclass
class FeatureComparison:
    poi_type: str
    feature: str
    active_mean: float
    less_active_mean: float
    significant: bool


@dataclass
class ComparisonReport:
    """Active vs less-active group means per PoI type and feature."""

    entries: list[FeatureComparison]
    omitted: list[tuple[str, str]] = field(default_factory=list)
    margin: float = 0.0

    def significant_features(self) -> list[tuple[str, str]]:
        return [(e.poi_type, e.feature) for e in self.entries if e.significant]

    def to_jsonable(self) -> dict:
        return {
            "margin": self.margin,
            "omitted": [{"poi_type": p, "reason": r} for p, r in self.omitted],
            "entries": [
                {
                    "poi_type": e.poi_type,
                    "feature": e.feature,
                    "active_mean": e.active_mean,
                    "less_active_mean": e.less_active_mean,
                    "significant": e.significant,
                }
                for e in self.entries
            ],
        }


def group_compare(
    table: StaticFeatureTable,
    verdicts: Sequence[PoIVerdict],
    margin: float = 0.0,
) -> ComparisonReport:
    """Compare normalized feature means between active and less-active
    sensors, per PoI type.

    A feature is flagged significant when the active mean exceeds the
    less-active mean by more than `margin` (strict comparison at the
    default margin of 0). PoI types where either group is empty are
    omitted with a note.
    """
    if not table.normalized:
        raise DomainError("group_compare expects a normalized table")
    verdict_by_id = {v.sensor_id: v for v in verdicts}
    missing = sorted(set(table.ids) - set(verdict_by_id))
    if missing:
        raise DomainError(f"no verdict for sensor(s) {missing}")

    entries: list[FeatureComparison] = []
    omitted: list[tuple[str, str]] = []
    for poi_type in sorted(set(table.poi_types)):
        idx = [i for i, p in enumerate(table.poi_types) if p == poi_type]
        active_rows = [i for i in idx if verdict_by_id[table.ids[i]].active]
        less_rows = [i for i in idx if not verdict_by_id[table.ids[i]].active]
        if not idx:
            continue
        if not active_rows or not less_rows:
            side = "active" if not active_rows else "less-active"
            omitted.append((poi_type, f"no {side} sensors"))
            continue
        active_mean = table.values[active_rows].mean(axis=0)
        less_mean = table.values[less_rows].mean(axis=0)
        for j, name in enumerate(FEATURE_NAMES):
            entries.append(
                FeatureComparison(
                    poi_type=poi_type,
                    feature=name,
                    active_mean=float(active_mean[j]),
                    less_active_mean=float(less_mean[j]),
                    significant=bool(active_mean[j] > less_mean[j] + margin),
                )
            )
    return ComparisonReport(entries=entries, omitted=omitted, margin=margin)


def write_static_csv(
    target: IO[str] | str | Path,
    table: StaticFeatureTable,
) -> None:
    """Write a static feature table in the documented CSV schema."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_static_csv(fh, table)
            return
    writer = csv.writer(target)
    writer.writerow(["sensor_id", "poi_type"] + list(FEATURE_NAMES))
    for sensor_id, poi_type, row in zip(table.ids, table.poi_types, table.values):
        writer.writerow([sensor_id, poi_type] + [f"{v:.10g}" for v in row])
