"""Spectral clustering of sensor profiles: affinity blend, normalized
Laplacian, generalized eigenvector embedding, Davies-Bouldin model
selection and k-means.

The affinity graph is fully connected: session similarities and the
full-day similarity blend entry-wise with weights w1/Q and w2. The
eigenproblem is solved through the symmetric normalized form and mapped
back with u = D^(-1/2) v, which solves the generalized system
(D - A) u = lambda D u exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from spaceprofiler.errors import (
    AlignmentError,
    ConfigError,
    DegenerateClusteringError,
    EigensolverError,
    InsufficientDataError,
    IsolatedSensorError,
)
from spaceprofiler.ingest import DayType
from spaceprofiler.profiling import DayTypeProfile
from spaceprofiler.similarity import (
    DEFAULT_SESSIONS,
    Kernel,
    SessionSpec,
    SimilarityMatrix,
    session_slice,
    similarity_matrix,
    validate_sessions,
)

EIGEN_RESIDUAL_TOL = 1e-8


@dataclass
class AffinityMatrix:
    """Weighted blend of session and full-day similarities."""

    ids: tuple[str, ...]
    values: np.ndarray
    weights: tuple[float, float]


@dataclass
class ClusterModel:
    """Clustering outcome for one generic day type."""

    label: DayType
    k: int
    assignments: dict[str, int]
    embedding: np.ndarray
    eigenvalues: np.ndarray
    db_scores: dict[int, float]
    seed: int
    audit: dict[str, Any] = field(default_factory=dict, repr=False)


def affinity(
    s_u: SimilarityMatrix,
    session_matrices: Sequence[SimilarityMatrix],
    w1: float = 0.5,
    w2: float = 0.5,
) -> AffinityMatrix:
    """Blend A = (w1/Q) * sum of Q session matrices + w2 * S_U, entry-wise."""
    if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-9:
        raise ConfigError(f"weights must be non-negative and sum to 1, got {w1}, {w2}")
    if not session_matrices:
        raise ConfigError("at least one session similarity matrix is required")
    for m in session_matrices:
        if m.ids != s_u.ids:
            raise AlignmentError(
                "session and full-day similarity matrices list different sensors"
            )
    acc = np.zeros_like(s_u.values)
    for m in session_matrices:
        acc += m.values
    values = (w1 / len(session_matrices)) * acc + w2 * s_u.values
    return AffinityMatrix(ids=s_u.ids, values=values, weights=(w1, w2))


def degree(a: AffinityMatrix | np.ndarray, ids: Sequence[str] | None = None) -> np.ndarray:
    """Weighted degree vector D_ii = sum_j A_ij; zero rows are an error."""
    if isinstance(a, AffinityMatrix):
        values, ids = a.values, a.ids
    else:
        values = np.asarray(a, dtype=np.float64)
    deg = values.sum(axis=1)
    if np.any(deg <= 0.0):
        i = int(np.argmax(deg <= 0.0))
        name = ids[i] if ids is not None else f"index {i}"
        raise IsolatedSensorError(f"sensor {name} has zero affinity to all others")
    return deg


def laplacian(a: AffinityMatrix | np.ndarray, deg: np.ndarray) -> np.ndarray:
    """Symmetric normalized Laplacian L = I - D^(-1/2) A D^(-1/2)."""
    values = a.values if isinstance(a, AffinityMatrix) else np.asarray(a, dtype=np.float64)
    if np.any(deg <= 0.0):
        raise IsolatedSensorError("degree matrix is singular (isolated sensor)")
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(len(deg)) - values * inv_sqrt[:, None] * inv_sqrt[None, :]
    return (lap + lap.T) / 2.0


def embed(lap: np.ndarray, deg: np.ndarray, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Generalized eigenvector embedding for the k_max smallest eigenvalues.

    Solves the symmetric problem on L and maps back via u = D^(-1/2) v,
    so the columns satisfy (D - A) u = lambda D u with lambda equal to
    the Laplacian eigenvalue. Returns (U of shape n x k_max, all n
    eigenvalues ascending). Column signs are canonicalized.
    """
    n = lap.shape[0]
    if not 1 <= k_max <= n:
        raise ConfigError(f"k_max must be in [1, {n}], got {k_max}")
    try:
        eigenvalues, vecs = scipy.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigensolver failed (matrix condition ~{np.linalg.cond(lap):.3g}): {exc}"
        ) from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise EigensolverError("eigensolver returned non-finite eigenvalues")

    residual = lap @ vecs - vecs * eigenvalues
    worst = float(np.abs(residual).max())
    if worst > EIGEN_RESIDUAL_TOL:
        raise EigensolverError(
            f"eigenresidual {worst:.3e} exceeds {EIGEN_RESIDUAL_TOL:.0e} "
            f"(matrix condition ~{np.linalg.cond(lap):.3g})"
        )

    # Fix each eigenvector's sign by its largest-magnitude component so
    # repeated runs and permuted inputs orient identically.
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(n)])
    signs[signs == 0] = 1.0
    vecs = vecs * signs

    U = vecs / np.sqrt(deg)[:, None]
    return U[:, :k_max], eigenvalues


def row_normalize(points: np.ndarray) -> np.ndarray:
    """Scale each row to unit length; all-zero rows are left untouched."""
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    return points / np.where(norms == 0.0, 1.0, norms)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = np.square(points - centers[0]).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[i] = points[idx]
        np.minimum(d2, np.square(points - centers[i]).sum(axis=1), out=d2)
    return centers


def _lloyd(
    points: np.ndarray, centers: np.ndarray, k: int, max_iter: int
) -> tuple[np.ndarray, float]:
    n = points.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        dist2 = np.square(points[:, None, :] - centers[None, :, :]).sum(axis=2)
        new_labels = dist2.argmin(axis=1)

        # Re-seed any empty cluster with the point farthest from its centroid.
        for c in range(k):
            if not np.any(new_labels == c):
                assigned = dist2[np.arange(n), new_labels]
                far = int(np.argmax(assigned))
                if assigned[far] == 0.0:
                    raise DegenerateClusteringError(
                        f"cannot populate {k} clusters from these points"
                    )
                centers[c] = points[far]
                dist2[:, c] = np.square(points - centers[c]).sum(axis=1)
                new_labels = dist2.argmin(axis=1)

        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)

    inertia = float(
        np.square(points - centers[labels]).sum()
    )
    return labels, inertia


def _canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters in order of first occurrence."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[int(lab)] = len(mapping)
        out[i] = mapping[int(lab)]
    return out


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int,
    n_init: int = 10,
    max_iter: int = 300,
) -> np.ndarray:
    """k-means with k-means++ seeding, deterministic under a fixed seed.

    Runs n_init restarts and keeps the lowest-inertia result; clusters
    that empty out are re-seeded with the farthest point. Labels are
    canonicalized by first occurrence.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1:
        raise ConfigError(f"k must be positive, got {k}")
    if n < k:
        raise ConfigError(f"cannot form {k} clusters from {n} points")
    if np.unique(points, axis=0).shape[0] < k:
        raise DegenerateClusteringError(
            f"only {np.unique(points, axis=0).shape[0]} distinct points for k={k}"
        )

    rng = np.random.default_rng(seed)
    best_labels: np.ndarray | None = None
    best_inertia = np.inf
    for _ in range(n_init):
        centers = _kmeans_pp_init(points, k, rng)
        labels, inertia = _lloyd(points, centers.copy(), k, max_iter)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    assert best_labels is not None
    return _canonical_labels(best_labels)


def davies_bouldin(points: np.ndarray, labels: np.ndarray) -> float:
    """Davies-Bouldin score: mean over clusters of the worst
    (sigma_i + sigma_j) / d(c_i, c_j) ratio; lower is better.

    Returns inf when two centroids coincide.
    """
    ks = np.unique(labels)
    centroids = np.stack([points[labels == c].mean(axis=0) for c in ks])
    scatter = np.array(
        [
            float(np.linalg.norm(points[labels == c] - centroids[i], axis=1).mean())
            for i, c in enumerate(ks)
        ]
    )
    m = len(ks)
    if m < 2:
        raise DegenerateClusteringError("Davies-Bouldin needs at least 2 clusters")
    sep = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=2)
    if np.any(sep[~np.eye(m, dtype=bool)] == 0.0):
        return float("inf")
    np.fill_diagonal(sep, np.inf)
    ratio = (scatter[:, None] + scatter[None, :]) / sep
    np.fill_diagonal(ratio, -np.inf)
    return float(ratio.max(axis=1).mean())


def _candidate_seed(seed: int, k: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, k])


def _kmeans_for_candidate(
    points: np.ndarray, k: int, seed: int, n_init: int
) -> np.ndarray:
    # Independent deterministic stream per (seed, k) so the final k-means
    # run reproduces the selection run exactly.
    child = np.random.default_rng(_candidate_seed(seed, k))
    sub_seed = int(child.integers(2**63))
    return kmeans(points, k, seed=sub_seed, n_init=n_init)


def select_k(
    U: np.ndarray,
    k_range: tuple[int, int],
    seed: int = 0,
    n_init: int = 10,
) -> tuple[int, dict[int, float]]:
    """Choose k by minimizing the Davies-Bouldin score over candidates.

    For each k the first k embedding columns are row-normalized and
    clustered; degenerate candidates are skipped with a warning. Ties
    pick the smallest k.
    """
    n = U.shape[0]
    k_lo, k_hi = int(k_range[0]), int(k_range[1])
    if k_lo < 2 or k_hi > n - 1 or k_lo > k_hi:
        raise ConfigError(f"k_range {k_range} not within [2, {n - 1}]")
    if k_hi > U.shape[1]:
        raise ConfigError(f"embedding has {U.shape[1]} columns, k_range up to {k_hi}")

    scores: dict[int, float] = {}
    for k in range(k_lo, k_hi + 1):
        points = row_normalize(U[:, :k])
        try:
            labels = _kmeans_for_candidate(points, k, seed, n_init)
            score = davies_bouldin(points, labels)
        except DegenerateClusteringError as exc:
            warnings.warn(f"k={k} skipped: {exc}", stacklevel=2)
            continue
        if not np.isfinite(score):
            warnings.warn(f"k={k} skipped: coincident centroids", stacklevel=2)
            continue
        scores[k] = score

    if not scores:
        raise DegenerateClusteringError("every candidate k was degenerate")
    best = min(scores, key=lambda k: (scores[k], k))
    return best, scores


def cluster_pipeline(
    profiles: Sequence[DayTypeProfile],
    wied_window: int = 2,
    sessions: Sequence[SessionSpec] = DEFAULT_SESSIONS,
    w1: float = 0.5,
    w2: float = 0.5,
    k_range: tuple[int, int] | None = None,
    seed: int = 0,
    n_init: int = 10,
) -> ClusterModel:
    """Full clustering pass for one generic day type.

    Session and full-day similarity matrices feed the affinity blend,
    then degree, Laplacian, embedding, Davies-Bouldin selection of k and
    the final k-means. All intermediate matrices are kept on the audit
    attachment for export.
    """
    if len(profiles) < 3:
        raise InsufficientDataError(
            f"clustering needs at least 3 sensors, got {len(profiles)}"
        )
    day_types = {p.label for p in profiles}
    if len(day_types) != 1:
        raise AlignmentError(f"profiles mix day types: {sorted(t.value for t in day_types)}")
    label = profiles[0].label
    validate_sessions(sessions)

    ordered = sorted(profiles, key=lambda p: p.sensor_id)
    ids = tuple(p.sensor_id for p in ordered)
    X = np.stack([p.dense() for p in ordered])

    kernel = Kernel.wied(wied_window)
    s_u = similarity_matrix(X, kernel, ids)
    session_mats = {
        s.name: similarity_matrix(session_slice(X, s), kernel, ids) for s in sessions
    }

    aff = affinity(s_u, list(session_mats.values()), w1, w2)
    deg = degree(aff)
    lap = laplacian(aff, deg)

    n = len(ids)
    if k_range is None:
        k_range = (2, min(10, n - 1))
    k_range = (max(2, k_range[0]), min(k_range[1], n - 1))

    U, eigenvalues = embed(lap, deg, k_max=k_range[1])
    k, db_scores = select_k(U, k_range, seed=seed, n_init=n_init)
    points = row_normalize(U[:, :k])
    labels = _kmeans_for_candidate(points, k, seed, n_init)

    return ClusterModel(
        label=label,
        k=k,
        assignments={sensor_id: int(c) for sensor_id, c in zip(ids, labels)},
        embedding=U[:, :k],
        eigenvalues=eigenvalues[:k],
        db_scores=db_scores,
        seed=seed,
        audit={
            "sensor_ids": ids,
            "similarity_full": s_u,
            "similarity_sessions": session_mats,
            "affinity": aff,
            "degree": deg,
            "laplacian": lap,
            "eigenvalues": eigenvalues,
            "embedding": U,
        },
    )
