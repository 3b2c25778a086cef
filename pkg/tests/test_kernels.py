"""Backend selection and compiled/python parity."""

import numpy as np
import pytest

from spaceprofiler import kernels
from spaceprofiler.errors import ConfigError, DimensionError, DomainError

needs_cython = pytest.mark.skipif(
    "cython" not in kernels.available_backends(),
    reason="compiled backend not built",
)


def test_selected_backend_is_available():
    assert kernels.BACKEND in kernels.available_backends()
    assert "python" in kernels.available_backends()


class TestValidation:
    def test_window_too_large(self):
        with pytest.raises(DimensionError):
            kernels.wied_pairwise(np.zeros((2, 5)), 5)

    def test_negative_window(self):
        with pytest.raises(DomainError):
            kernels.wied_pairwise(np.zeros((2, 5)), -1)

    def test_non_2d_input(self):
        with pytest.raises(DimensionError):
            kernels.wied_pairwise(np.zeros(5), 1)

    def test_minkowski_order_below_one(self):
        with pytest.raises(ConfigError):
            kernels.minkowski_pairwise(np.zeros((2, 5)), 0.5)


class TestPythonBackend:
    def test_wied_zero_diagonal_and_symmetry(self):
        X = np.random.default_rng(0).random((7, 30))
        D = kernels.wied_pairwise(X, 2, backend="python")
        np.testing.assert_array_equal(np.diag(D), 0.0)
        np.testing.assert_array_equal(D, D.T)

    def test_chunk_boundary(self):
        # more rows than the broadcasting chunk size
        X = np.random.default_rng(1).random((40, 12))
        D_full = kernels.wied_pairwise(X, 1, backend="python")
        for i in (0, 15, 33):
            for j in (2, 31, 39):
                pair = kernels.wied_pairwise(X[[i, j]], 1, backend="python")
                assert D_full[i, j] == pytest.approx(pair[0, 1], abs=1e-12)

    def test_minkowski_known_values(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert kernels.minkowski_pairwise(X, 1.0, backend="python")[0, 1] == pytest.approx(1.0)
        assert kernels.minkowski_pairwise(X, 2.0, backend="python")[0, 1] == pytest.approx(1.0)
        X = np.array([[0.0, 0.0], [1.0, 0.0]])
        assert kernels.minkowski_pairwise(X, 2.0, backend="python")[0, 1] == pytest.approx(
            np.sqrt(0.5)
        )


@needs_cython
class TestBackendParity:
    @pytest.mark.parametrize("window", [0, 1, 2, 5])
    def test_wied_parity(self, window):
        rng = np.random.default_rng(window)
        for n, t in [(2, 10), (5, 60), (40, 288)]:
            X = rng.random((n, t))
            d_py = kernels.wied_pairwise(X, window, backend="python")
            d_cy = kernels.wied_pairwise(X, window, backend="cython")
            np.testing.assert_allclose(d_cy, d_py, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 4.5])
    def test_minkowski_parity(self, p):
        rng = np.random.default_rng(int(p * 10))
        X = rng.random((20, 100))
        d_py = kernels.minkowski_pairwise(X, p, backend="python")
        d_cy = kernels.minkowski_pairwise(X, p, backend="cython")
        np.testing.assert_allclose(d_cy, d_py, rtol=1e-12, atol=1e-14)

    def test_non_contiguous_input_accepted(self):
        X = np.random.default_rng(9).random((10, 60))[::2, ::3]
        d_py = kernels.wied_pairwise(X, 2, backend="python")
        d_cy = kernels.wied_pairwise(X, 2, backend="cython")
        np.testing.assert_allclose(d_cy, d_py, rtol=1e-12)
