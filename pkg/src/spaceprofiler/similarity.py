"""Pairwise profile similarity: the windowed kernel, baselines, and sessions.

Distances are length-normalized so values are comparable across
session lengths, then inverted into (0, 1] similarities via 1/(1+d).
The full-day matrix S_U and the four per-session matrices feed the
affinity combination in the spectral stage.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from spaceprofiler import kernels
from spaceprofiler.errors import ConfigError, DimensionError, DomainError
from spaceprofiler.ingest import BIN_MINUTES, BINS_PER_DAY


@dataclass(frozen=True)
class SessionSpec:
    """A daytime session; start/end are inclusive times of day."""

    name: str
    start: dt.time
    end: dt.time

    def __post_init__(self):
        if self.end < self.start:
            raise ConfigError(f"session {self.name}: end {self.end} before start {self.start}")

    def bin_range(self) -> tuple[int, int]:
        """Half-open bin index range [lo, hi) covered by this session."""
        lo = (self.start.hour * 60 + self.start.minute) // BIN_MINUTES
        hi = (self.end.hour * 60 + self.end.minute) // BIN_MINUTES + 1
        return lo, hi


DEFAULT_SESSIONS: tuple[SessionSpec, ...] = (
    SessionSpec("morning", dt.time(6, 0), dt.time(10, 59)),
    SessionSpec("afternoon", dt.time(11, 0), dt.time(13, 59)),
    SessionSpec("evening", dt.time(14, 0), dt.time(17, 59)),
    SessionSpec("night", dt.time(18, 0), dt.time(23, 59)),
)


def validate_sessions(sessions: Sequence[SessionSpec]) -> None:
    """Reject overlapping sessions."""
    ranges = sorted(s.bin_range() for s in sessions)
    for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
        if lo < hi:
            raise ConfigError("sessions overlap")


@dataclass(frozen=True)
class Kernel:
    """A pairwise distance kernel specification."""

    kind: str  # wied | euclidean | manhattan | minkowski
    window: int = 2
    p: float = 3.0

    @classmethod
    def wied(cls, window: int = 2) -> "Kernel":
        return cls("wied", window=window)

    @classmethod
    def euclidean(cls) -> "Kernel":
        return cls("euclidean")

    @classmethod
    def manhattan(cls) -> "Kernel":
        return cls("manhattan")

    @classmethod
    def minkowski(cls, p: float = 3.0) -> "Kernel":
        return cls("minkowski", p=p)

    def describe(self) -> str:
        if self.kind == "wied":
            return f"wied(W={self.window})"
        if self.kind == "minkowski":
            return f"minkowski(p={self.p:g})"
        return self.kind


@dataclass
class SimilarityMatrix:
    """Symmetric pairwise similarity with a zero diagonal."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape != (n, n):
            raise DimensionError(
                f"similarity matrix shape {self.values.shape} does not match {n} ids"
            )


def pairwise_distances(X: np.ndarray, kernel: Kernel) -> np.ndarray:
    """Distance matrix over profile rows for any supported kernel."""
    if kernel.kind == "wied":
        return kernels.wied_pairwise(X, kernel.window)
    if kernel.kind == "euclidean":
        return kernels.minkowski_pairwise(X, 2.0)
    if kernel.kind == "manhattan":
        return kernels.minkowski_pairwise(X, 1.0)
    if kernel.kind == "minkowski":
        return kernels.minkowski_pairwise(X, kernel.p)
    raise ConfigError(f"unknown kernel kind {kernel.kind!r}")


def wied_distance(a, b, window: int = 2) -> float:
    """Windowed absolute-difference distance between two equal-length segments.

    Each bin is matched against its best counterpart within +/-window
    offsets (clamped at the edges); the per-bin minima are averaged over
    the segment and over both scan directions, so the result is
    symmetric. window=0 reduces to the plain mean absolute difference.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise DimensionError("wied_distance expects 1-D segments")
    if a.shape != b.shape:
        raise DimensionError(f"segment lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(kernels.wied_pairwise(np.stack([a, b]), window)[0, 1])


def to_similarity(dist):
    """Invert a non-negative distance into a (0, 1] similarity: 1/(1+d)."""
    d = np.asarray(dist, dtype=np.float64)
    if np.any(d < 0):
        raise DomainError("distance must be non-negative")
    result = 1.0 / (1.0 + d)
    return float(result) if np.isscalar(dist) or d.ndim == 0 else result


def session_slice(profile: np.ndarray, session: SessionSpec) -> np.ndarray:
    """Bins of a 288-bin profile whose time of day falls inside the session."""
    profile = np.asarray(profile)
    if profile.shape[-1] != BINS_PER_DAY:
        raise DimensionError(
            f"expected {BINS_PER_DAY}-bin profiles, got length {profile.shape[-1]}"
        )
    lo, hi = session.bin_range()
    return profile[..., lo:hi]


def similarity_matrix(
    profiles: Sequence[np.ndarray] | np.ndarray,
    kernel: Kernel,
    ids: Iterable[str] | None = None,
) -> SimilarityMatrix:
    """Pairwise similarity over equal-length profiles; diagonal is zero.

    values[a][b] = 1/(1 + dist(a, b)) for a != b, following the layout
    where self-similarity slots hold 0 rather than 1.
    """
    try:
        X = np.asarray(profiles, dtype=np.float64)
    except ValueError:
        lengths = sorted({len(p) for p in profiles})
        raise DimensionError(f"profiles have mixed lengths {lengths}") from None
    if X.ndim != 2:
        lengths = sorted({len(p) for p in profiles})
        raise DimensionError(f"profiles have mixed lengths {lengths}")
    if X.shape[0] < 2:
        raise DimensionError(f"need at least 2 profiles, got {X.shape[0]}")
    id_tuple = (
        tuple(str(i) for i in ids)
        if ids is not None
        else tuple(f"p{i}" for i in range(X.shape[0]))
    )
    if len(id_tuple) != X.shape[0]:
        raise DimensionError(f"{len(id_tuple)} ids for {X.shape[0]} profiles")

    dist = pairwise_distances(X, kernel)
    values = 1.0 / (1.0 + dist)
    np.fill_diagonal(values, 0.0)
    return SimilarityMatrix(ids=id_tuple, values=values)


def session_restricted_distance(
    a: np.ndarray,
    b: np.ndarray,
    kernel: Kernel,
    sessions: Sequence[SessionSpec] = DEFAULT_SESSIONS,
) -> float:
    """Total distance accumulated over the temporal sessions (night excluded)."""
    total = 0.0
    for session in sessions:
        lo, hi = session.bin_range()
        seg = np.stack([session_slice(a, session), session_slice(b, session)])
        total += float(pairwise_distances(seg, kernel)[0, 1])
    return total


def kernel_comparison(
    a: np.ndarray,
    b: np.ndarray,
    kernels_to_compare: Sequence[Kernel] | None = None,
    sessions: Sequence[SessionSpec] = DEFAULT_SESSIONS,
) -> dict[str, dict[str, float]]:
    """Full-day vs session-restricted similarity for a pair of day profiles.

    The session-restricted figure applies the 1/(1+d) inversion to the
    distance summed over the four sessions, so a shared silent night
    cannot prop the similarity up — the effect the sessions exist to
    remove.
    """
    if kernels_to_compare is None:
        kernels_to_compare = (
            Kernel.euclidean(),
            Kernel.manhattan(),
            Kernel.minkowski(),
            Kernel.wied(),
        )
    out: dict[str, dict[str, float]] = {}
    for kernel in kernels_to_compare:
        full = to_similarity(pair_distance(a, b, kernel))
        restricted = to_similarity(session_restricted_distance(a, b, kernel, sessions))
        out[kernel.describe()] = {"full_day": full, "session_restricted": restricted}
    return out


def pair_distance(a: np.ndarray, b: np.ndarray, kernel: Kernel) -> float:
    """Distance between two single profiles under any kernel."""
    seg = np.stack([np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)])
    return float(pairwise_distances(seg, kernel)[0, 1])


def write_square_csv(target: IO[str] | str | Path, ids: Sequence[str], values: np.ndarray) -> None:
    """Write a square matrix as CSV with a sensor-id header row and column."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as fh:
            write_square_csv(fh, ids, values)
            return
    writer = csv.writer(target)
    writer.writerow(["sensor_id"] + list(ids))
    for sensor_id, row in zip(ids, values):
        writer.writerow([sensor_id] + [f"{v:.12g}" for v in row])
