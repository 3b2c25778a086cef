# Compiled kernel backend: tight loops over sensor pairs.
# Semantics must match _backend_py exactly; parity is enforced by tests.

import numpy as np

cimport numpy as cnp

cnp.import_array()


def wied_pairwise(cnp.float64_t[:, ::1] X, int window):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t t = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] D = out
    cdef Py_ssize_t i, k, j, o, lo, hi
    cdef double best_ab, best_ba, d, sum_ab, sum_ba

    for i in range(n):
        for k in range(i + 1, n):
            sum_ab = 0.0
            sum_ba = 0.0
            for j in range(t):
                lo = j - window
                if lo < 0:
                    lo = 0
                hi = j + window
                if hi > t - 1:
                    hi = t - 1
                best_ab = 1e300
                best_ba = 1e300
                for o in range(lo, hi + 1):
                    d = X[i, j] - X[k, o]
                    if d < 0:
                        d = -d
                    if d < best_ab:
                        best_ab = d
                    d = X[k, j] - X[i, o]
                    if d < 0:
                        d = -d
                    if d < best_ba:
                        best_ba = d
                sum_ab += best_ab
                sum_ba += best_ba
            D[i, k] = (sum_ab / t + sum_ba / t) / 2.0
            D[k, i] = D[i, k]
    return out


def minkowski_pairwise(cnp.float64_t[:, ::1] X, double p):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t t = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] D = out
    cdef Py_ssize_t i, k, j
    cdef double acc, d

    for i in range(n):
        for k in range(i + 1, n):
            acc = 0.0
            if p == 1.0:
                for j in range(t):
                    d = X[i, j] - X[k, j]
                    if d < 0:
                        d = -d
                    acc += d
                acc /= t
            elif p == 2.0:
                for j in range(t):
                    d = X[i, j] - X[k, j]
                    acc += d * d
                acc = (acc / t) ** 0.5
            else:
                for j in range(t):
                    d = X[i, j] - X[k, j]
                    if d < 0:
                        d = -d
                    acc += d ** p
                acc = (acc / t) ** (1.0 / p)
            D[i, k] = acc
            D[k, i] = acc
    return out
