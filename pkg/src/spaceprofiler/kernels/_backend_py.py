"""Pure-numpy kernel backend (fallback when the compiled extension is absent).

Both backends implement the same two primitives over a profile matrix
X of shape (n, t):

* wied_pairwise: per-bin best-alignment absolute difference within a
  +/-window offset (clamped at the edges), averaged over bins, then
  symmetrized by averaging the two scan directions.
* minkowski_pairwise: length-normalized Minkowski distance
  (mean |diff|^p)^(1/p); p=1 is Manhattan, p=2 is RMS Euclidean.
"""

from __future__ import annotations

import numpy as np

# Rows per broadcasting block; bounds peak memory to ~chunk*n*t floats.
_CHUNK = 32


def wied_pairwise(X: np.ndarray, window: int) -> np.ndarray:
    n, t = X.shape
    directed = np.empty((n, n), dtype=np.float64)
    for i0 in range(0, n, _CHUNK):
        i1 = min(i0 + _CHUNK, n)
        best = np.abs(X[i0:i1, None, :] - X[None, :, :])
        for o in range(1, window + 1):
            hi = t - o
            np.minimum(
                best[:, :, :hi],
                np.abs(X[i0:i1, None, :hi] - X[None, :, o:]),
                out=best[:, :, :hi],
            )
            np.minimum(
                best[:, :, o:],
                np.abs(X[i0:i1, None, o:] - X[None, :, :hi]),
                out=best[:, :, o:],
            )
        directed[i0:i1] = best.mean(axis=2)
    return (directed + directed.T) / 2.0


def minkowski_pairwise(X: np.ndarray, p: float) -> np.ndarray:
    n, t = X.shape
    out = np.empty((n, n), dtype=np.float64)
    for i0 in range(0, n, _CHUNK):
        i1 = min(i0 + _CHUNK, n)
        diff = np.abs(X[i0:i1, None, :] - X[None, :, :])
        if p == 1.0:
            out[i0:i1] = diff.mean(axis=2)
        elif p == 2.0:
            out[i0:i1] = np.sqrt(np.square(diff).mean(axis=2))
        else:
            out[i0:i1] = np.power(np.power(diff, p).mean(axis=2), 1.0 / p)
    return out
