"""Density matrices, Bloch vectors and random state generators."""

import numpy as np

from .errors import BadBloch, DimMismatch, NotPSD
from .linalg import as_matrix, is_hermitian

STATE_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])


def is_density(rho, tol=STATE_TOL):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or not is_hermitian(rho):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] >= -tol)


def as_density(rho, tol=STATE_TOL):
    """Validate and return ``rho`` as a complex density matrix."""
    rho = as_matrix(rho)
    if rho.shape[0] != rho.shape[1]:
        raise DimMismatch(f"state is not square: {rho.shape}")
    if not is_density(rho, tol):
        raise NotPSD("not a density matrix (Hermitian, PSD, unit trace)")
    return rho


def ket(index, d):
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def projector(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def basis_state(index, d):
    return projector(ket(index, d))


def maximally_mixed(d):
    return np.eye(d, dtype=complex) / d


def bloch_to_state(w):
    w = np.asarray(w, dtype=float)
    if np.linalg.norm(w) > 1 + 1e-9:
        raise BadBloch(f"|w| = {np.linalg.norm(w):.6g} > 1")
    return 0.5 * (np.eye(2, dtype=complex) + np.tensordot(w, PAULIS, axes=1))


def state_to_bloch(rho):
    rho = np.asarray(rho)
    return np.real(np.einsum("kij,ji->k", PAULIS, rho))


def pauli_operator(y):
    """Traceless Hermitian ``y . sigma``."""
    return np.tensordot(np.asarray(y, dtype=float), PAULIS, axes=1)


def purification_to_state(v, d):
    """Reduced state of the purification encoded by the real vector ``v``.

    ``v`` holds real then imaginary parts of a vector in ``C^d (x) C^d``; it is
    normalized here, so any nonzero vector is a valid input.
    """
    v = np.asarray(v, dtype=float)
    n = d * d
    if v.shape != (2 * n,):
        raise DimMismatch(f"purification vector must have length {2 * n}")
    psi = (v[:n] + 1j * v[n:]).reshape(d, d)
    nrm = np.vdot(psi, psi).real
    if nrm <= 0:
        raise ValueError("zero purification vector")
    return psi @ psi.conj().T / nrm


def state_to_purification(rho):
    """A real vector whose reduced state is ``rho`` (canonical purification)."""
    rho = as_density(rho)
    lam, u = np.linalg.eigh(rho)
    psi = u * np.sqrt(np.clip(lam, 0, None))
    flat = psi.reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def random_pure(rng, d):
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return projector(z / np.linalg.norm(z))


def random_state(rng, d, rank=None):
    """Random state from a Gaussian purification with ``rank`` ancilla dims."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_full_rank(rng, d, min_weight=0.05):
    """Random state mixed with the identity so every eigenvalue is >= min_weight/d."""
    a = min_weight + (1 - min_weight) * rng.random()
    return (1 - a) * random_state(rng, d) + a * maximally_mixed(d)


def random_unitary(rng, d):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, d, traceless=False):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (a + a.conj().T)
    if traceless:
        h = h - np.trace(h) / d * np.eye(d)
    return h
