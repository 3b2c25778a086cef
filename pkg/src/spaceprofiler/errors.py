"""Exception types shared across the pipeline."""


class SpaceProfilerError(Exception):
    """Base class for all pipeline errors."""


class ReadingsParseError(SpaceProfilerError):
    """A readings CSV row could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateReadingError(SpaceProfilerError):
    """Two rows share the same (sensor_id, timestamp)."""


class DomainError(SpaceProfilerError):
    """A value violates its documented domain (negative count, bad fraction, ...)."""


class DimensionError(SpaceProfilerError):
    """Vectors or matrices that must agree in shape do not."""


class AlignmentError(SpaceProfilerError):
    """Matrices that must share the same sensor ordering do not."""


class ConfigError(SpaceProfilerError):
    """Invalid configuration value or file."""


class SchemaError(SpaceProfilerError):
    """An input table does not match its documented column schema."""


class InsufficientDataError(SpaceProfilerError):
    """Not enough samples to build a required profile."""


class IsolatedSensorError(SpaceProfilerError):
    """A sensor has zero affinity to every other sensor."""


class DegenerateClusteringError(SpaceProfilerError):
    """Clustering cannot produce k non-empty clusters."""


class EigensolverError(SpaceProfilerError):
    """The eigensolver failed to converge or returned invalid results."""


class MissingArtifactError(SpaceProfilerError):
    """A report bundle lacks artifacts required by a downstream step."""
