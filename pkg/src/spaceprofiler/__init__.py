"""Space-centric profiling of outdoor public-space utilization.

Turns PoI motion-sensor count streams into per-day-type utilization
profiles, clusters them spectrally with a windowed similarity kernel,
grades each PoI's activeness, and compares static geographic features
between active and less-active groups.
"""

__version__ = "0.1.0"

from spaceprofiler.ingest import (
    Calendar,
    DayType,
    SensorSeries,
    TemporalLabel,
    filter_validity,
    label_days,
    normalize_counts,
    parse_readings,
)

__all__ = [
    "Calendar",
    "DayType",
    "SensorSeries",
    "TemporalLabel",
    "filter_validity",
    "label_days",
    "normalize_counts",
    "parse_readings",
    "__version__",
]
