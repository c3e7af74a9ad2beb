import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nysfilter import SymMatrix, jacobi_eig


def reconstruct(eig):
    return (eig.vectors * eig.values) @ eig.vectors.T


def assert_valid(matrix, eig):
    k = matrix.order
    assert np.abs(eig.vectors.T @ eig.vectors - np.eye(k)).max() < 1e-10
    scale = max(np.abs(matrix.entries).max(), 1e-300)
    assert np.abs(matrix.entries - reconstruct(eig)).max() < 1e-10 * scale
    assert np.all(np.diff(eig.values) <= 0)


def test_identity():
    eig = jacobi_eig(SymMatrix(np.eye(3)))
    assert np.array_equal(eig.values, np.ones(3))
    assert np.array_equal(eig.vectors, np.eye(3))


def test_classic_2x2():
    eig = jacobi_eig(SymMatrix(np.array([[2.0, 1.0], [1.0, 2.0]])))
    np.testing.assert_allclose(eig.values, [3.0, 1.0], atol=1e-14)
    s = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(eig.vectors[:, 0], [s, s], atol=1e-14)
    np.testing.assert_allclose(eig.vectors[:, 1], [s, -s], atol=1e-14)


def test_random_8x8_reconstruction():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((8, 8))
    sym = SymMatrix(M)
    eig = jacobi_eig(sym)
    assert np.abs(sym.entries - reconstruct(eig)).max() < 1e-10
    assert_valid(sym, eig)


@settings(deadline=None, max_examples=30)
@given(k=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_invariants_random(k, seed):
    rng = np.random.default_rng(seed)
    sym = SymMatrix(rng.standard_normal((k, k)) * rng.uniform(0.1, 100))
    eig = jacobi_eig(sym)
    assert_valid(sym, eig)
    # trace equals eigenvalue sum
    trace = float(np.trace(sym.entries))
    assert abs(trace - eig.values.sum()) <= 1e-10 * max(1.0, abs(trace))


def test_gaussian_kernel_matrix_psd():
    rng = np.random.default_rng(8)
    for trial in range(5):
        pts = rng.uniform(0, 255, (12, 3))
        d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        K = np.exp(-d2 / (2 * 40.0**2))
        eig = jacobi_eig(SymMatrix(K))
        assert eig.values.min() >= -1e-10


def test_sign_convention_deterministic():
    rng = np.random.default_rng(9)
    sym = SymMatrix(rng.standard_normal((6, 6)))
    a = jacobi_eig(sym)
    b = jacobi_eig(sym)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)
    for j in range(6):
        col = a.vectors[:, j]
        assert col[np.argmax(np.abs(col))] >= 0.0


def test_rejects_nonfinite():
    with pytest.raises(ValueError):
        SymMatrix(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_symmetrization():
    sym = SymMatrix(np.array([[1.0, 2.0], [4.0, 1.0]]))
    assert sym.entries[0, 1] == sym.entries[1, 0] == 3.0
