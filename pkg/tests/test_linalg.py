import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralbranch import (
    NotHermitianError,
    ensure_hermitian,
    hermitian_defect,
    hermitian_eig,
    hermitian_with_spectrum,
    numerical_rank,
    operator_norm,
    random_hermitian,
    solve_shifted,
)
from spectralbranch.linalg import as_matrix


def test_eig_2x2_oracle():
    # [[2,1],[1,2]] has eigenvalues 1 and 3
    A = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    dec = hermitian_eig(A)
    assert np.allclose(dec.eigenvalues, [1.0, 3.0], atol=1e-12)
    assert np.linalg.norm(dec.reconstruct() - A) < 1e-12


def test_eig_sorted_ascending(rng):
    A = random_hermitian(rng, 8)
    w = hermitian_eig(A).eigenvalues
    assert np.all(np.diff(w) >= 0)


def test_eig_eigenvector_residuals(rng):
    A = random_hermitian(rng, 10)
    dec = hermitian_eig(A)
    for k in range(10):
        v = dec.eigenvectors[:, k]
        assert np.linalg.norm(A @ v - dec.eigenvalues[k] * v) < 1e-10 * max(1, operator_norm(A))


def test_eig_rejects_non_hermitian():
    A = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(NotHermitianError):
        hermitian_eig(A)


def test_hermitian_defect_zero_for_hermitian(rng):
    A = random_hermitian(rng, 6)
    assert hermitian_defect(A) < 1e-14
    assert ensure_hermitian(A) is A


def test_solve_shifted_diag_oracle():
    # (diag(1,2,5) - 1.5 I)^{-1} applied to I has diagonal (-2, 2, 2/7)
    A = np.diag([1.0, 2.0, 5.0]).astype(complex)
    R = solve_shifted(A, 1.5 + 0.0j, np.eye(3, dtype=complex))
    expect = np.diag([-2.0, 2.0, 0.2857142857142857])
    assert np.linalg.norm(R - expect) < 1e-12


def test_solve_shifted_complex_shift(rng):
    A = random_hermitian(rng, 7)
    z = 0.3 + 0.9j
    B = rng.normal(size=(7, 3)) + 1j * rng.normal(size=(7, 3))
    X = solve_shifted(A, z, B)
    assert np.linalg.norm((A - z * np.eye(7)) @ X - B) < 1e-10


def test_numerical_rank_projector():
    P = np.diag([1.0, 1.0, 0.0]).astype(complex)
    assert numerical_rank(P, 0.5) == 2
    assert numerical_rank(np.zeros((3, 3), dtype=complex), 0.5) == 0


def test_operator_norm_diag():
    assert abs(operator_norm(np.diag([1.0, -7.0, 3.0]).astype(complex)) - 7.0) < 1e-12


def test_hermitian_with_spectrum(rng):
    target = np.array([-2.0, 0.5, 0.5, 3.0])
    A = hermitian_with_spectrum(rng, target)
    w = hermitian_eig(A).eigenvalues
    assert np.allclose(w, np.sort(target), atol=1e-10)


def test_as_matrix_rejects_nonsquare():
    with pytest.raises(ValueError):
        as_matrix(np.zeros((2, 3)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 9))
def test_reconstruction_property(seed, m):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, m)
    dec = hermitian_eig(A)
    assert np.linalg.norm(dec.reconstruct() - A) < 1e-10 * max(1.0, operator_norm(A))
    # eigenvector matrix is unitary
    V = dec.eigenvectors
    assert np.linalg.norm(V.conj().T @ V - np.eye(m)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_unitary_invariance_of_spectrum(seed):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, 6)
    Q = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))[0]
    w1 = hermitian_eig(A).eigenvalues
    w2 = hermitian_eig(Q @ A @ Q.conj().T).eigenvalues
    assert np.allclose(w1, w2, atol=1e-9)
