"""Cyclic Jacobi eigensolver for dense Hermitian matrices."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["EigenSolverError", "eigh_jacobi"]


class EigenSolverError(ArithmeticError):
    """Jacobi sweeps did not reach the off-diagonal tolerance."""

    def __init__(self, message: str, sweeps: int, off_norm: float, dim: int):
        super().__init__(message)
        self.sweeps = sweeps
        self.off_norm = off_norm
        self.dim = dim


def _off(a: np.ndarray) -> float:
    # direct sum of off-diagonal entries; subtracting the diagonal mass from
    # the total loses half the digits
    return float(np.linalg.norm(a[~np.eye(a.shape[0], dtype=bool)]))


def eigh_jacobi(a, tol: float = 1e-12, max_sweeps: int = 100, context: str = ""):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian matrix; only Hermitian input is accepted (checked to 1e-10
        relative).
    tol : float
        Stop once the off-diagonal Frobenius mass is at most ``tol * ||a||_F``.
    max_sweeps : int
        Sweep cap; exceeding it raises :class:`EigenSolverError`.
    context : str
        Text prepended to error messages (e.g. the factor index).

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n)
        Unitary matrix whose columns are the matching eigenvectors.
    """
    A = np.array(a, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{context}expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = float(np.linalg.norm(A))
    if np.linalg.norm(A - A.conj().T) > 1e-10 * max(scale, 1.0):
        raise ValueError(f"{context}matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    target = tol * scale
    off = _off(A)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            raise EigenSolverError(
                f"{context}Jacobi did not converge in {max_sweeps} sweeps "
                f"(off-diagonal {off:.3e} > {target:.3e}, n={n})",
                sweeps,
                off,
                n,
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # phase-augmented rotation; J^H A J has a zero (p, q) entry
                j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ j
                A[idx, :] = j.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ j
        sweeps += 1
        off = _off(A)
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
