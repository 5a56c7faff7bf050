"""Dense complex Hermitian linear algebra used by every other module.

Matrices are plain numpy complex128 arrays; the helpers here add the contract
checks (Hermiticity, residual bounds, pivot guards) and deterministic
post-processing (ascending eigenvalues, canonical eigenvector phases, stable
ordering of exactly-tied eigenvalues) that the rest of the package relies on.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .config import DEFAULT_TOL, Tolerances
from .errors import EigenConvergenceError, NotHermitianError, SpectrumTouchError


def as_matrix(a) -> np.ndarray:
    """Coerce to a square complex128 matrix."""
    A = np.asarray(a, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def hermitian_defect(A: np.ndarray) -> float:
    """max_ij |a_ij - conj(a_ji)|, zero for exactly Hermitian input."""
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)))


def ensure_hermitian(A: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    A = as_matrix(A)
    scale = max(1.0, float(np.linalg.norm(A)))
    defect = hermitian_defect(A)
    if defect > tol.hermitian_tol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: defect {defect:.3e} exceeds "
            f"{tol.hermitian_tol:.1e} x max(1, frobenius) = {tol.hermitian_tol * scale:.3e}"
        )
    return A


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending real eigenvalues and a matching unitary column basis."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def _canonical_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        mags = np.abs(col)
        top = mags.max()
        if top == 0.0:
            continue
        idx = int(np.argmax(mags > 1e-12 * top))
        phase = col[idx] / abs(col[idx])
        V[:, j] = col * np.conj(phase)
    return V


def _order_exact_ties(w: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Exactly equal eigenvalues get a stable order: by the index of the first
    # significant component of the (phase-canonical) eigenvector.
    i = 0
    m = w.size
    while i < m:
        j = i + 1
        while j < m and w[j] == w[i]:
            j += 1
        if j - i > 1:
            block = V[:, i:j]
            keys = []
            for c in range(block.shape[1]):
                mags = np.abs(block[:, c])
                keys.append(int(np.argmax(mags > 1e-12 * mags.max())))
            order = np.argsort(np.asarray(keys), kind="stable")
            V[:, i:j] = block[:, order]
        i = j
    return w, V


def hermitian_eig(A, tol: Tolerances = DEFAULT_TOL, validate: bool = True) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix.

    Returns ascending eigenvalues and unitary eigenvectors with canonical
    phases.  Validates the reconstruction and orthonormality residuals against
    eig_tol unless ``validate`` is switched off.
    """
    A = ensure_hermitian(A, tol)
    if A.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigensolver failed: {exc}") from exc
    V = _canonical_phases(V)
    w, V = _order_exact_ties(w, V)
    if validate:
        scale = max(1.0, float(np.linalg.norm(A)))
        resid = float(np.linalg.norm(A @ V - V * w))
        ortho = float(np.linalg.norm(V.conj().T @ V - np.eye(V.shape[0])))
        if resid > tol.eig_tol * scale or ortho > tol.eig_tol * V.shape[0]:
            raise EigenConvergenceError(
                f"eigendecomposition residuals too large: |AV-VW|={resid:.3e}, "
                f"|V*V-I|={ortho:.3e}"
            )
    return EigenDecomposition(np.asarray(w, dtype=float), V)


def solve_shifted(A, z: complex, B, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Solve (A - z I) X = B with partial pivoting.

    A pivot that is singular to working precision signals that the shift sits
    on (or numerically touches) the spectrum and raises SpectrumTouchError.
    """
    A = as_matrix(A)
    B = np.asarray(B, dtype=np.complex128)
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, expected {A.shape[0]}")
    M = A - z * np.eye(A.shape[0], dtype=np.complex128)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        try:
            lu, piv = lu_factor(M)
        except np.linalg.LinAlgError as exc:
            raise SpectrumTouchError(f"contour touches spectrum at z={z!r}: {exc}") from exc
    pivots = np.abs(np.diag(lu))
    floor = tol.pivot_floor * max(1.0, float(pivots.max(initial=0.0)))
    if pivots.size and float(pivots.min()) <= floor:
        raise SpectrumTouchError(
            f"contour touches spectrum: pivot {pivots.min():.3e} at z={z!r} "
            f"is below the working-precision floor {floor:.3e}"
        )
    return lu_solve((lu, piv), B)


def numerical_rank(A, tol_abs: float) -> int:
    """Number of singular values strictly above the absolute threshold."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.count_nonzero(s > tol_abs))


def operator_norm(A) -> float:
    """Largest singular value (the operator 2-norm)."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def random_hermitian(rng: np.random.Generator, m: int, scale: float = 1.0) -> np.ndarray:
    """Dense Hermitian test matrix with Gaussian entries."""
    M = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return scale * 0.5 * (M + M.conj().T)


def hermitian_with_spectrum(rng: np.random.Generator, eigenvalues) -> np.ndarray:
    """Hermitian matrix with prescribed spectrum and Haar-ish eigenbasis."""
    w = np.asarray(eigenvalues, dtype=float)
    m = w.size
    Z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    Q, R = np.linalg.qr(Z)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return (Q * w) @ Q.conj().T
