import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from avcap.linalg import jacobi_eigvalsh


@given(st.integers(1, 24), st.integers(0, 10_000))
def test_matches_dense_reference(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    a = a + a.T
    res = jacobi_eigvalsh(a)
    assert res.converged
    ref = np.linalg.eigvalsh(a)
    assert np.allclose(res.eigenvalues, ref, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_diagonal_and_degenerate():
    assert np.allclose(jacobi_eigvalsh(np.diag([3.0, -1.0, 2.0])).eigenvalues, [-1, 2, 3])
    assert np.allclose(jacobi_eigvalsh(np.ones((4, 4))).eigenvalues, [0, 0, 0, 4], atol=1e-12)
    assert jacobi_eigvalsh(np.zeros((0, 0))).eigenvalues.size == 0
    assert jacobi_eigvalsh([[5.0]]).eigenvalues[0] == 5.0


def test_rejects_non_square():
    with pytest.raises(ValueError):
        jacobi_eigvalsh(np.zeros((2, 3)))


def test_larger_toeplitz():
    n = 120
    r = 0.7 ** np.arange(n)
    K = r[np.abs(np.subtract.outer(np.arange(n), np.arange(n)))]
    res = jacobi_eigvalsh(K)
    assert np.allclose(res.eigenvalues, np.linalg.eigvalsh(K), atol=1e-11)
