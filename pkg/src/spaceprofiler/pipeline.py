"""End-to-end pipeline: ingest -> profiling -> per-day-type clustering ->
activeness -> static-feature comparison, with a deterministic report
bundle written at the end.

All computation happens before any file is written, so a bundle on disk
is either complete (report.json present) or absent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from spaceprofiler import __version__, kernels
from spaceprofiler.activeness import categorize, classify_poi, cluster_mean, PoIVerdict
from spaceprofiler.config import PipelineConfig
from spaceprofiler.errors import ConfigError, InsufficientDataError
from spaceprofiler.ingest import (
    DayType,
    attach_poi_types,
    filter_validity,
    label_days,
    load_calendar,
    normalize_counts,
    parse_readings,
)
from spaceprofiler.profiling import (
    DayTypeProfile,
    daily_windows,
    generic_profiles,
    write_profiles_csv,
)
from spaceprofiler.similarity import write_square_csv
from spaceprofiler.spectral import ClusterModel, cluster_pipeline
from spaceprofiler.staticfeat import (
    ComparisonReport,
    group_compare,
    load_static,
    normalize_static,
)

SCHEMA_VERSION = 1

REPORT_NAME = "report.json"
VERDICTS_NAME = "verdicts.csv"
PROFILES_NAME = "profiles.csv"
AUDIT_DIR = "audit"


@dataclass
class ReportBundle:
    """In-memory results of one pipeline run plus where they were written."""

    out_dir: Path
    report: dict[str, Any]
    models: dict[DayType, ClusterModel]
    verdicts: list[PoIVerdict]
    comparison: ComparisonReport
    profiles: dict[DayType, dict[str, DayTypeProfile]]


def _require_file(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ConfigError(f"{what} file not found: {path}")
    return path


def run_pipeline(cfg: PipelineConfig) -> ReportBundle:
    """Execute the full pipeline and write the report bundle to cfg.out_dir."""
    cfg.validate()
    _require_file(cfg.readings_path, "readings")
    _require_file(cfg.static_path, "static features")
    _require_file(cfg.calendar_path, "calendar")

    series_list = parse_readings(cfg.readings_path)
    series_list, excluded = filter_validity(series_list, cfg.min_valid_fraction)
    if not series_list:
        raise InsufficientDataError("no sensor passed the validity filter")

    static_table = load_static(cfg.static_path, excluded_ids=excluded)
    series_list = attach_poi_types(series_list, static_table.poi_type_of())

    calendar = load_calendar(cfg.calendar_path)
    span = series_list[0].expected_span
    day_labels = label_days(calendar, span)

    profiles: dict[DayType, dict[str, DayTypeProfile]] = {t: {} for t in DayType}
    for series in series_list:
        normalized = normalize_counts(series)
        by_label = daily_windows(normalized, day_labels)
        for day_type, profile in generic_profiles(
            series.sensor_id, by_label, poi_type=series.poi_type
        ).items():
            profiles[day_type][series.sensor_id] = profile

    models: dict[DayType, ClusterModel] = {}
    categories: dict[str, dict[DayType, int]] = {}
    cluster_means: dict[DayType, dict[int, float]] = {}
    for day_type in DayType:
        model = cluster_pipeline(
            list(profiles[day_type].values()),
            wied_window=cfg.wied_window,
            sessions=cfg.sessions,
            w1=cfg.w1,
            w2=cfg.w2,
            k_range=cfg.k_range,
            seed=cfg.kmeans_seed,
            n_init=cfg.kmeans_restarts,
        )
        models[day_type] = model
        dense = {sid: prof.dense() for sid, prof in profiles[day_type].items()}
        means = cluster_mean(model.assignments, dense)
        cluster_means[day_type] = means
        for sensor_id, cluster in model.assignments.items():
            categories.setdefault(sensor_id, {})[day_type] = categorize(
                means[cluster], cfg.category_bounds
            )

    poi_types = static_table.poi_type_of()
    verdicts = [
        classify_poi(sensor_id, cats, poi_type=poi_types.get(sensor_id))
        for sensor_id, cats in sorted(categories.items())
    ]

    normalized_static = normalize_static(static_table)
    comparison = group_compare(normalized_static, verdicts, margin=cfg.significance_margin)

    report = _build_report(cfg, excluded, models, cluster_means, categories, verdicts, comparison)
    bundle = ReportBundle(
        out_dir=cfg.out_dir,
        report=report,
        models=models,
        verdicts=verdicts,
        comparison=comparison,
        profiles=profiles,
    )
    _write_bundle(bundle)
    return bundle


def _build_report(
    cfg: PipelineConfig,
    excluded: list[str],
    models: dict[DayType, ClusterModel],
    cluster_means: dict[DayType, dict[int, float]],
    categories: dict[str, dict[DayType, int]],
    verdicts: list[PoIVerdict],
    comparison: ComparisonReport,
) -> dict[str, Any]:
    day_types: dict[str, Any] = {}
    for day_type, model in models.items():
        means = cluster_means[day_type]
        day_types[day_type.value] = {
            "k": model.k,
            "seed": model.seed,
            "db_scores": {str(k): v for k, v in model.db_scores.items()},
            "cluster_means": {str(c): m for c, m in means.items()},
            "cluster_categories": {
                str(c): categorize(m, cfg.category_bounds) for c, m in means.items()
            },
            "assignments": dict(sorted(model.assignments.items())),
            "eigenvalues": list(model.eigenvalues),
        }
    report = {
        "schema_version": SCHEMA_VERSION,
        "generator": f"spaceprofiler {__version__}",
        "kernel_backend": kernels.BACKEND,
        "config": {
            "min_valid_fraction": cfg.min_valid_fraction,
            "wied_window_bins": cfg.wied_window,
            "weights": {"w1": cfg.w1, "w2": cfg.w2},
            "k_range": list(cfg.k_range),
            "kmeans_seed": cfg.kmeans_seed,
            "kmeans_restarts": cfg.kmeans_restarts,
            "category_bounds": list(cfg.category_bounds),
            "significance_margin": cfg.significance_margin,
            "sessions": {
                s.name: [s.start.isoformat("minutes"), s.end.isoformat("minutes")]
                for s in cfg.sessions
            },
        },
        "excluded_sensors": excluded,
        "day_types": day_types,
        "verdicts": {
            v.sensor_id: {
                "poi_type": v.poi_type,
                "categories": {t.value: c for t, c in v.categories.items()},
                "verdict": v.verdict,
            }
            for v in verdicts
        },
        "static_comparison": comparison.to_jsonable(),
        "significant_features": [
            {"poi_type": p, "feature": f} for p, f in comparison.significant_features()
        ],
    }
    return _jsonable(report)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    return obj


def _write_bundle(bundle: ReportBundle) -> None:
    out = bundle.out_dir
    out.mkdir(parents=True, exist_ok=True)

    all_profiles = [p for per_dt in bundle.profiles.values() for p in per_dt.values()]
    write_profiles_csv(out / PROFILES_NAME, all_profiles)

    with (out / VERDICTS_NAME).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sensor_id", "poi_type", "cat_wd", "cat_we", "cat_sh", "verdict"])
        for v in bundle.verdicts:
            writer.writerow(
                [
                    v.sensor_id,
                    v.poi_type or "",
                    v.categories[DayType.WEEKDAY],
                    v.categories[DayType.WEEKEND],
                    v.categories[DayType.SCHOOL_HOLIDAY],
                    v.verdict,
                ]
            )

    for day_type, model in bundle.models.items():
        _write_audit(out / AUDIT_DIR / day_type.value.lower(), model)

    # report.json goes last: its presence marks the bundle complete.
    (out / REPORT_NAME).write_text(
        json.dumps(bundle.report, indent=2, sort_keys=True) + "\n"
    )


def _write_audit(audit_dir: Path, model: ClusterModel) -> None:
    audit_dir.mkdir(parents=True, exist_ok=True)
    audit = model.audit
    ids = list(audit["sensor_ids"])

    write_square_csv(audit_dir / "similarity_full.csv", ids, audit["similarity_full"].values)
    for name, mat in audit["similarity_sessions"].items():
        write_square_csv(audit_dir / f"similarity_{name}.csv", ids, mat.values)
    write_square_csv(audit_dir / "affinity.csv", ids, audit["affinity"].values)
    write_square_csv(audit_dir / "laplacian.csv", ids, audit["laplacian"])

    with (audit_dir / "degree.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sensor_id", "degree"])
        for sensor_id, d in zip(ids, audit["degree"]):
            writer.writerow([sensor_id, f"{d:.12g}"])

    with (audit_dir / "eigenvalues.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, lam in enumerate(audit["eigenvalues"]):
            writer.writerow([i, f"{lam:.12g}"])

    with (audit_dir / "embedding.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        k_max = audit["embedding"].shape[1]
        writer.writerow(["sensor_id"] + [f"u{i}" for i in range(k_max)])
        for sensor_id, row in zip(ids, audit["embedding"]):
            writer.writerow([sensor_id] + [f"{v:.12g}" for v in row])

    (audit_dir / "db_scores.json").write_text(
        json.dumps(
            {
                "chosen_k": model.k,
                "db_scores": {str(k): float(v) for k, v in model.db_scores.items()},
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
