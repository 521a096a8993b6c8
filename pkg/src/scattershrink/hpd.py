"""Algebra on complex Hermitian positive definite (HPD) matrices.

Matrices are plain ``numpy`` arrays of shape ``(p, p)``. Every function
that takes an HPD argument symmetrizes it first (``(A + A^H) / 2``) and
certifies positive definiteness through a Cholesky factorization. A failed
factorization raises :class:`NotPositiveDefinite`; nothing is clipped or
repaired.
"""

import numpy as np
from scipy import linalg

from .errors import DimensionMismatch, NotPositiveDefinite

__all__ = [
    "hermitian",
    "as_hpd",
    "is_positive_definite",
    "cholesky",
    "inverse",
    "log_det_inverse",
    "trace_inverse",
    "matrix_power",
    "sqrtm",
    "geodesic_point",
    "random_hpd",
]


def hermitian(A):
    """Return the Hermitian part ``(A + A^H) / 2`` of a square matrix."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    A = A.astype(np.complex128, copy=False)
    return (A + A.conj().T) / 2


def cholesky(A):
    """Lower Cholesky factor ``L`` with ``L @ L^H == A``.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is not strictly positive.
    """
    A = hermitian(A)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    if not np.all(np.isfinite(L)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    return L


def as_hpd(A):
    """Symmetrize ``A`` and certify it is positive definite."""
    A = hermitian(A)
    cholesky(A)
    return A


def is_positive_definite(A):
    try:
        cholesky(A)
    except NotPositiveDefinite:
        return False
    return True


def inverse(A):
    """Inverse of an HPD matrix, computed from its Cholesky factor."""
    L = cholesky(A)
    p = L.shape[0]
    Linv = linalg.solve_triangular(L, np.eye(p, dtype=complex), lower=True)
    return hermitian(Linv.conj().T @ Linv)


def log_det_inverse(A):
    """``ln |A^{-1}| = -ln |A|``, from the Cholesky diagonal."""
    L = cholesky(A)
    return float(-2.0 * np.sum(np.log(np.diag(L).real)))


def trace_inverse(A):
    """``tr(A^{-1})``, the sum of reciprocal eigenvalues."""
    L = cholesky(A)
    p = L.shape[0]
    Linv = linalg.solve_triangular(L, np.eye(p, dtype=complex), lower=True)
    return float(np.sum(np.abs(Linv) ** 2))


def _eigh_hpd(A):
    A = as_hpd(A)
    w, U = np.linalg.eigh(A)
    if w[0] <= 0:
        raise NotPositiveDefinite("non-positive eigenvalue in HPD matrix")
    return w, U


def matrix_power(A, t):
    """Real power ``A^t = U diag(lambda^t) U^H`` of an HPD matrix."""
    w, U = _eigh_hpd(A)
    return hermitian((U * w**t) @ U.conj().T)


def sqrtm(A):
    """Hermitian square root ``A^{1/2}``."""
    return matrix_power(A, 0.5)


def geodesic_point(S0, S1, t):
    """Point at time ``t`` on the affine-invariant geodesic from ``S0`` to ``S1``.

    Computes ``S0^{1/2} (S0^{-1/2} S1 S0^{-1/2})^t S0^{1/2}``.
    """
    S0 = np.asarray(S0)
    S1 = np.asarray(S1)
    if S0.shape != S1.shape:
        raise DimensionMismatch(f"shapes differ: {S0.shape} vs {S1.shape}")
    w, U = _eigh_hpd(S0)
    as_hpd(S1)
    root = (U * np.sqrt(w)) @ U.conj().T
    inv_root = (U / np.sqrt(w)) @ U.conj().T
    inner = matrix_power(inv_root @ hermitian(S1) @ inv_root, t)
    return as_hpd(root @ inner @ root)


def random_hpd(p, rng, ridge=1.0):
    """``B B^H + ridge * I`` with ``B`` complex Gaussian; a test helper."""
    B = (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))) / np.sqrt(2)
    return hermitian(B @ B.conj().T + ridge * np.eye(p))
