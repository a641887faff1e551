import numpy as np
import pytest

from ncmult.eigen import EigenSolverError, eigh_jacobi


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_matches_lapack(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = (z + z.conj().T) / 2
    w, v = eigh_jacobi(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    assert np.allclose(a @ v, v * w, atol=1e-11)


def test_ascending_and_degenerate():
    w, v = eigh_jacobi(np.diag([3.0, 1.0, 1.0]))
    assert list(w) == [1.0, 1.0, 3.0]


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigh_jacobi(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sweep_cap_raises():
    z = np.random.default_rng(1).standard_normal((6, 6))
    with pytest.raises(EigenSolverError) as exc:
        eigh_jacobi(z + z.T, max_sweeps=1, tol=1e-300)
    assert exc.value.dim == 6
