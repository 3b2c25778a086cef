"""Distance-kernel backends: compiled extension with a numpy fallback.

The compiled backend is used when the extension built; set
SPACEPROFILER_KERNELS=python|cython before import to force one.
`benchmarks/bench_kernels.py` compares the two.
"""

from __future__ import annotations

import os

import numpy as np

from spaceprofiler.errors import ConfigError, DimensionError, DomainError

from spaceprofiler.kernels import _backend_py

try:
    from spaceprofiler.kernels import _backend_cy
except ImportError:
    _backend_cy = None

_BACKENDS = {"python": _backend_py}
if _backend_cy is not None:
    _BACKENDS["cython"] = _backend_cy

_forced = os.environ.get("SPACEPROFILER_KERNELS")
if _forced:
    if _forced not in _BACKENDS:
        raise ConfigError(
            f"SPACEPROFILER_KERNELS={_forced!r} unavailable; "
            f"built backends: {sorted(_BACKENDS)}"
        )
    BACKEND = _forced
else:
    BACKEND = "cython" if _backend_cy is not None else "python"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _as_profile_matrix(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"profile matrix must be 2-D, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError(f"profile matrix must be non-empty, got shape {X.shape}")
    return X


def wied_pairwise(X, window: int, backend: str | None = None) -> np.ndarray:
    """Symmetrized windowed absolute-difference distance between all row pairs."""
    X = _as_profile_matrix(X)
    window = int(window)
    if window < 0:
        raise DomainError(f"window must be non-negative, got {window}")
    if window >= X.shape[1]:
        raise DimensionError(
            f"window {window} must be smaller than profile length {X.shape[1]}"
        )
    return _BACKENDS[backend or BACKEND].wied_pairwise(X, window)


def minkowski_pairwise(X, p: float, backend: str | None = None) -> np.ndarray:
    """Length-normalized Minkowski distance (mean |diff|^p)^(1/p) between row pairs."""
    X = _as_profile_matrix(X)
    p = float(p)
    if p < 1.0:
        raise ConfigError(f"Minkowski order must be >= 1, got {p}")
    return _BACKENDS[backend or BACKEND].minkowski_pairwise(X, p)
