"""Dense complex linear algebra for small matrices.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128. The
functions here add the validation and tolerance conventions used across the
package: Hermiticity is checked relative to the largest entry, PSD tests are
relative to ``max(1, |M|_max)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonHermitian

HERMITIAN_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order with eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def as_matrix(m):
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimMismatch(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def max_abs(m):
    return float(np.max(np.abs(m))) if m.size else 0.0


def is_hermitian(m, tol=HERMITIAN_TOL):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_abs(m - m.conj().T) <= tol * (1.0 + max_abs(m))


def check_hermitian(m, tol=HERMITIAN_TOL):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimMismatch(f"matrix is not square: {m.shape}")
    if not is_hermitian(m, tol):
        raise NonHermitian("matrix fails the Hermiticity check")
    return m


def hermitian_part(m):
    """``(M + M^dag)/2``; works on stacks of matrices."""
    m = np.asarray(m)
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def eig_hermitian(m):
    """Eigendecomposition of a Hermitian matrix.

    Raises:
        NonHermitian: if ``m`` is not Hermitian within tolerance.
    """
    m = check_hermitian(m)
    # LAPACK heevd is deterministic for identical input bits.
    w, u = np.linalg.eigh(hermitian_part(m))
    return Spectrum(w, u)


def kron(a, b):
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims, keep=0):
    """Trace out one factor of a bipartite operator.

    Args:
        m: operator on ``C^dA (x) C^dB``.
        dims: ``(dA, dB)``.
        keep: index of the factor that survives (0 keeps A, 1 keeps B).
    """
    m = as_matrix(m)
    da, db = dims
    n = da * db
    if m.shape != (n, n):
        raise DimMismatch(f"matrix shape {m.shape} does not match dims {dims}")
    t = m.reshape(da, db, da, db)
    if keep in (0, "A", "a"):
        return np.einsum("ijkj->ik", t)
    if keep in (1, "B", "b"):
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 0 or 1, got {keep!r}")


def is_psd(m, tol=PSD_TOL):
    """True iff the smallest eigenvalue is >= -tol * max(1, |M|_max)."""
    m = check_hermitian(m, tol=max(HERMITIAN_TOL, tol))
    lam_min = np.linalg.eigvalsh(hermitian_part(m))[0]
    return bool(lam_min >= -tol * max(1.0, max_abs(m)))


def frobenius(m):
    return float(np.linalg.norm(m))
