"""Dense complex linear-algebra kernel.

All routines operate on numpy complex arrays and are pure functions.  The
tolerances below are the package-wide defaults; callers that need stricter
checks pass them explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotPSDError

HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-10
SQRT_TOL = 1e-9
PSD_EIG_FLOOR = -1e-8
RANK_TOL = 1e-12


def as_complex_matrix(a, name="matrix") -> np.ndarray:
    """Validate and convert input to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return m


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.linalg.norm(m - m.conj().T, 2) <= tol * max(1.0, np.linalg.norm(m, 2)))


@dataclass(frozen=True)
class SvdResult:
    """SVD A = sum_j sigma_j |l_j><r_j| with a fixed per-pair phase convention."""

    singulars: np.ndarray       # descending, >= 0
    left_vectors: np.ndarray    # columns |l_j>
    right_vectors: np.ndarray   # columns |r_j>

    def reconstruct(self) -> np.ndarray:
        return self.left_vectors @ np.diag(self.singulars) @ self.right_vectors.conj().T


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray     # real, ascending
    eigenvectors: np.ndarray    # orthonormal columns


def svd(a) -> SvdResult:
    """Economy SVD with deterministic phases.

    The phase of each pair is fixed by making the first nonzero component of
    the right vector real positive; the left vector absorbs the conjugate
    phase so the reconstruction is unchanged.
    """
    m = as_complex_matrix(a, "A")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    v = vh.conj().T
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > RANK_TOL)
        if nz.size:
            phase = col[nz[0]] / abs(col[nz[0]])
            v[:, j] = col / phase
            u[:, j] = u[:, j] / phase
    return SvdResult(singulars=s, left_vectors=u, right_vectors=v)


def hermitian_eig(h) -> HermitianEig:
    m = as_complex_matrix(h, "H")
    if not is_hermitian(m):
        raise InvalidInputError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    return HermitianEig(eigenvalues=w, eigenvectors=v)


def expm_hermitian(h, t: float) -> np.ndarray:
    """exp(-i H t) for Hermitian H, via eigendecomposition.

    Orthonormal eigenvectors make the result unitary to round-off.
    """
    eig = hermitian_eig(h)
    phases = np.exp(-1j * eig.eigenvalues * t)
    return (eig.eigenvectors * phases) @ eig.eigenvectors.conj().T


def sqrt_psd(m) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in [-1e-10, 0) are clamped to 0."""
    mat = as_complex_matrix(m, "M")
    if not is_hermitian(mat):
        raise InvalidInputError("matrix is not Hermitian")
    w, v = np.linalg.eigh(mat)
    if np.any(w < PSD_EIG_FLOOR):
        raise NotPSDError(f"eigenvalue {w.min():.6g} below PSD floor {PSD_EIG_FLOOR:g}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def op_distance(u, v) -> float:
    """Spectral-norm distance ||U - V||_2."""
    a = as_complex_matrix(u, "U")
    b = as_complex_matrix(v, "V")
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b, 2))
