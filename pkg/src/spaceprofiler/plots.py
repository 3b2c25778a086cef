"""SVG figure generation from a finished report bundle.

Five plot families, deterministic file names: per-day-type cluster
profiles, eigenvector heatmaps, category grids of cluster curves, the
per-PoI activeness grid, and the static-feature group comparison bars.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from spaceprofiler.errors import MissingArtifactError
from spaceprofiler.ingest import BINS_PER_DAY
from spaceprofiler.pipeline import AUDIT_DIR, PROFILES_NAME, REPORT_NAME

plt.rcParams["svg.hashsalt"] = "spaceprofiler"

DAY_TYPE_ORDER = ("Weekday", "Weekend", "SchoolHoliday")
CATEGORY_COLORS = {1: "#b2182b", 2: "#ef8a62", 3: "#fddbc7", 4: "#d1e5f0", 5: "#67a9cf"}


def _load_report(out_dir: Path) -> dict:
    report_path = out_dir / REPORT_NAME
    if not report_path.is_file():
        raise MissingArtifactError(f"missing artifact: {report_path}")
    return json.loads(report_path.read_text())


def _load_profiles(out_dir: Path) -> dict[tuple[str, str], np.ndarray]:
    path = out_dir / PROFILES_NAME
    if not path.is_file():
        raise MissingArtifactError(f"missing artifact: {path}")
    profiles: dict[tuple[str, str], np.ndarray] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            profiles[(row[0], row[1])] = np.array(row[2:], dtype=np.float64)
    return profiles


def _check_bundle(out_dir: Path, report: dict) -> None:
    missing = []
    for day_type in report["day_types"]:
        emb = out_dir / AUDIT_DIR / day_type.lower() / "embedding.csv"
        if not emb.is_file():
            missing.append(str(emb))
    if not (out_dir / PROFILES_NAME).is_file():
        missing.append(str(out_dir / PROFILES_NAME))
    if missing:
        raise MissingArtifactError("missing artifact(s): " + ", ".join(missing))


def _hours_axis(ax):
    ax.set_xlim(0, BINS_PER_DAY - 1)
    ax.set_xticks(np.arange(0, BINS_PER_DAY + 1, 72))
    ax.set_xticklabels([f"{h:02d}:00" for h in range(0, 25, 6)])


def _cluster_curves(
    report: dict, profiles: dict[tuple[str, str], np.ndarray], day_type: str
) -> dict[int, np.ndarray]:
    info = report["day_types"][day_type]
    curves: dict[int, list[np.ndarray]] = {}
    for sensor_id, cluster in info["assignments"].items():
        prof = profiles.get((sensor_id, day_type))
        if prof is not None:
            curves.setdefault(int(cluster), []).append(prof)
    return {
        c: np.nanmean(np.stack(members), axis=0) for c, members in sorted(curves.items())
    }


def _plot_profiles(out_dir: Path, report: dict, profiles) -> list[Path]:
    paths = []
    for day_type in DAY_TYPE_ORDER:
        if day_type not in report["day_types"]:
            continue
        curves = _cluster_curves(report, profiles, day_type)
        fig, ax = plt.subplots(figsize=(7, 3.2))
        for cluster, curve in curves.items():
            ax.plot(curve, lw=1.4, label=f"cluster {cluster}")
        _hours_axis(ax)
        ax.set_ylabel("mean normalized utilization")
        ax.set_title(f"{day_type}: average cluster profiles")
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        path = out_dir / f"profiles_{day_type.lower()}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def _plot_eigenvectors(out_dir: Path, report: dict) -> list[Path]:
    paths = []
    for day_type in DAY_TYPE_ORDER:
        if day_type not in report["day_types"]:
            continue
        emb_path = out_dir / AUDIT_DIR / day_type.lower() / "embedding.csv"
        with emb_path.open(newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            rows = [row for row in reader]
        matrix = np.array([r[1:] for r in rows], dtype=np.float64)
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(matrix, aspect="auto", cmap="RdBu_r")
        ax.set_xlabel("eigenvector")
        ax.set_ylabel("sensor")
        ax.set_title(f"{day_type}: embedding (columns = smallest eigenvectors)")
        fig.colorbar(im, ax=ax, shrink=0.8)
        fig.tight_layout()
        path = out_dir / f"eigenvectors_{day_type.lower()}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def _plot_category_grid(out_dir: Path, report: dict, profiles) -> list[Path]:
    paths = []
    for day_type in DAY_TYPE_ORDER:
        if day_type not in report["day_types"]:
            continue
        info = report["day_types"][day_type]
        curves = _cluster_curves(report, profiles, day_type)
        by_category: dict[int, list[int]] = {}
        for cluster_str, category in info["cluster_categories"].items():
            by_category.setdefault(int(category), []).append(int(cluster_str))

        fig, axes = plt.subplots(1, 5, figsize=(13, 2.6), sharey=True)
        for cat, ax in zip(range(1, 6), axes):
            clusters = sorted(by_category.get(cat, []))
            for cluster in clusters:
                ax.plot(curves[cluster], lw=1.2)
            means = [float(info["cluster_means"][str(c)]) for c in clusters]
            label = f"X̄={np.mean(means):.4f}" if means else "—"
            ax.set_title(f"Category {cat}\n{label}", fontsize=9)
            _hours_axis(ax)
            ax.tick_params(labelsize=6)
        axes[0].set_ylabel("utilization")
        fig.suptitle(f"{day_type}: clusters by activeness category", fontsize=11)
        fig.tight_layout()
        path = out_dir / f"categories_{day_type.lower()}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


def _plot_activeness_grid(out_dir: Path, report: dict) -> Path:
    verdicts = report["verdicts"]
    order = sorted(verdicts, key=lambda s: (verdicts[s]["poi_type"] or "", s))
    n = len(order)
    fig_height = max(2.5, 0.22 * n + 1.2)
    fig, ax = plt.subplots(figsize=(6, fig_height))
    for row, sensor_id in enumerate(order):
        cats = verdicts[sensor_id]["categories"]
        for col, day_type in enumerate(DAY_TYPE_ORDER):
            cat = cats[day_type]
            ax.add_patch(
                plt.Rectangle((col, n - 1 - row), 0.95, 0.9,
                              color=CATEGORY_COLORS[int(cat)])
            )
            ax.text(col + 0.475, n - 1 - row + 0.45, str(cat),
                    ha="center", va="center", fontsize=6)
        marker = "●" if verdicts[sensor_id]["verdict"] == "active" else "○"
        ax.text(-0.15, n - 1 - row + 0.45,
                f"{marker} {sensor_id} ({verdicts[sensor_id]['poi_type'] or '?'})",
                ha="right", va="center", fontsize=6)
    ax.set_xlim(-4.5, 3.1)
    ax.set_ylim(-0.2, n + 0.4)
    for col, day_type in enumerate(DAY_TYPE_ORDER):
        ax.text(col + 0.475, n + 0.1, day_type, ha="center", fontsize=8)
    ax.axis("off")
    ax.set_title("Activeness categories per PoI (● active, ○ less active)", fontsize=10)
    fig.tight_layout()
    path = out_dir / "activeness_grid.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def _plot_static_features(out_dir: Path, report: dict) -> Path:
    entries = report["static_comparison"]["entries"]
    poi_types = sorted({e["poi_type"] for e in entries})
    fig, axes = plt.subplots(
        max(1, len(poi_types)), 1, figsize=(9, 2.6 * max(1, len(poi_types))),
        squeeze=False,
    )
    for ax, poi_type in zip(axes[:, 0], poi_types):
        rows = [e for e in entries if e["poi_type"] == poi_type]
        x = np.arange(len(rows))
        active = [e["active_mean"] for e in rows]
        less = [e["less_active_mean"] for e in rows]
        colors = ["#b2182b" if e["significant"] else "#888888" for e in rows]
        ax.bar(x - 0.2, active, width=0.4, color=colors, label="active")
        ax.bar(x + 0.2, less, width=0.4, color="#cccccc", label="less active")
        ax.set_xticks(x)
        ax.set_xticklabels([e["feature"] for e in rows], rotation=45, ha="right", fontsize=6)
        ax.set_ylim(0, 1)
        ax.set_title(poi_type, fontsize=9)
        ax.legend(fontsize=7)
    if not poi_types:
        axes[0, 0].text(0.5, 0.5, "no PoI type has both groups", ha="center")
        axes[0, 0].axis("off")
    fig.suptitle("Static features: active vs less-active group means", fontsize=11)
    fig.tight_layout()
    path = out_dir / "static_features.svg"
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def emit_plots(out_dir: str | Path) -> list[Path]:
    """Render every plot family for a complete bundle; returns the paths."""
    out_dir = Path(out_dir)
    report = _load_report(out_dir)
    _check_bundle(out_dir, report)
    profiles = _load_profiles(out_dir)

    paths = []
    paths += _plot_profiles(out_dir, report, profiles)
    paths += _plot_eigenvectors(out_dir, report)
    paths += _plot_category_grid(out_dir, report, profiles)
    paths.append(_plot_activeness_grid(out_dir, report))
    paths.append(_plot_static_features(out_dir, report))
    return paths
