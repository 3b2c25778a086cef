"""Pipeline configuration: defaults, TOML round-trip, validation.

Defaults match the study values: 10% validity, Table-I session
boundaries, uniform affinity weights, the five category bands.
"""

from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, replace
from pathlib import Path

from spaceprofiler.activeness import DEFAULT_CATEGORY_BOUNDS, validate_bounds
from spaceprofiler.errors import ConfigError
from spaceprofiler.similarity import DEFAULT_SESSIONS, SessionSpec, validate_sessions

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

OUT_DIR_ENV = "SPACEPROFILER_OUT"


@dataclass
class PipelineConfig:
    readings_path: Path
    static_path: Path
    calendar_path: Path
    out_dir: Path = Path("out")
    min_valid_fraction: float = 0.10
    wied_window: int = 2
    sessions: tuple[SessionSpec, ...] = DEFAULT_SESSIONS
    w1: float = 0.5
    w2: float = 0.5
    k_range: tuple[int, int] = (2, 10)
    kmeans_seed: int = 0
    kmeans_restarts: int = 10
    category_bounds: tuple[float, ...] = DEFAULT_CATEGORY_BOUNDS
    significance_margin: float = 0.0

    def validate(self) -> "PipelineConfig":
        if not 0.0 <= self.min_valid_fraction <= 1.0:
            raise ConfigError(f"min_valid_fraction must be in [0, 1], got {self.min_valid_fraction}")
        if self.wied_window < 0:
            raise ConfigError(f"wied window must be >= 0, got {self.wied_window}")
        if self.w1 < 0 or self.w2 < 0 or abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise ConfigError(f"weights must be non-negative and sum to 1, got {self.w1}, {self.w2}")
        if self.k_range[0] < 2 or self.k_range[1] < self.k_range[0]:
            raise ConfigError(f"invalid k_range {self.k_range}")
        if self.kmeans_restarts < 1:
            raise ConfigError("kmeans restarts must be >= 1")
        validate_bounds(self.category_bounds)
        validate_sessions(self.sessions)
        return self


def _parse_time(value: str) -> dt.time:
    hh, mm = value.split(":")
    return dt.time(int(hh), int(mm))


def load_config(path: str | Path, out_dir_override: str | Path | None = None) -> PipelineConfig:
    """Load a TOML config; relative input paths resolve against the file.

    Output directory precedence: --out override, then the
    SPACEPROFILER_OUT environment variable, then the file, then ./out.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc

    base = path.parent

    def _path(key: str) -> Path:
        try:
            raw = data["inputs"][key]
        except KeyError:
            raise ConfigError(f"config lacks inputs.{key}") from None
        p = Path(raw)
        return p if p.is_absolute() else base / p

    sessions = DEFAULT_SESSIONS
    if "sessions" in data:
        sessions = tuple(
            SessionSpec(name, _parse_time(lo), _parse_time(hi))
            for name, (lo, hi) in data["sessions"].items()
        )

    if out_dir_override is not None:
        out_dir = Path(out_dir_override)
    elif os.environ.get(OUT_DIR_ENV):
        out_dir = Path(os.environ[OUT_DIR_ENV])
    else:
        raw_out = data.get("out_dir", "out")
        out_dir = Path(raw_out)
        if not out_dir.is_absolute():
            out_dir = base / out_dir

    weights = data.get("weights", {})
    kmeans = data.get("kmeans", {})
    wied = data.get("wied", {})
    cfg = PipelineConfig(
        readings_path=_path("readings"),
        static_path=_path("static"),
        calendar_path=_path("calendar"),
        out_dir=out_dir,
        min_valid_fraction=float(data.get("min_valid_fraction", 0.10)),
        wied_window=int(wied.get("window_bins", 2)),
        sessions=sessions,
        w1=float(weights.get("w1", 0.5)),
        w2=float(weights.get("w2", 0.5)),
        k_range=tuple(int(k) for k in data.get("k_range", (2, 10))),  # type: ignore[arg-type]
        kmeans_seed=int(kmeans.get("seed", 0)),
        kmeans_restarts=int(kmeans.get("restarts", 10)),
        category_bounds=tuple(float(b) for b in data.get("category_bounds", DEFAULT_CATEGORY_BOUNDS)),
        significance_margin=float(data.get("significance_margin", 0.0)),
    )
    return cfg.validate()


def save_config(path: str | Path, cfg: PipelineConfig) -> None:
    """Write a config TOML that load_config reads back equivalently."""
    path = Path(path)

    def _rel(p: Path) -> str:
        try:
            return os.path.relpath(p, path.parent)
        except ValueError:
            return str(p)

    lines = [
        # top-level keys must precede the first table header
        f'out_dir = "{_rel(cfg.out_dir)}"',
        f"min_valid_fraction = {cfg.min_valid_fraction!r}",
        f"k_range = [{cfg.k_range[0]}, {cfg.k_range[1]}]",
        f"category_bounds = [{', '.join(repr(b) for b in cfg.category_bounds)}]",
        f"significance_margin = {cfg.significance_margin!r}",
        "",
        "[inputs]",
        f'readings = "{_rel(cfg.readings_path)}"',
        f'static = "{_rel(cfg.static_path)}"',
        f'calendar = "{_rel(cfg.calendar_path)}"',
        "",
        "[wied]",
        f"window_bins = {cfg.wied_window}",
        "",
        "[weights]",
        f"w1 = {cfg.w1!r}",
        f"w2 = {cfg.w2!r}",
        "",
        "[kmeans]",
        f"seed = {cfg.kmeans_seed}",
        f"restarts = {cfg.kmeans_restarts}",
        "",
        "[sessions]",
    ]
    for s in cfg.sessions:
        lines.append(
            f'{s.name} = ["{s.start.hour:02d}:{s.start.minute:02d}", '
            f'"{s.end.hour:02d}:{s.end.minute:02d}"]'
        )
    path.write_text("\n".join(lines) + "\n")


def with_overrides(
    cfg: PipelineConfig,
    min_valid_fraction: float | None = None,
    seed: int | None = None,
) -> PipelineConfig:
    updates = {}
    if min_valid_fraction is not None:
        updates["min_valid_fraction"] = min_valid_fraction
    if seed is not None:
        updates["kmeans_seed"] = seed
    return replace(cfg, **updates).validate() if updates else cfg
