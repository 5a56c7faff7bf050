import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectralbranch import (
    ExprMatrixSpec,
    GraphNorm,
    HermitianFamily,
    NotHermitianError,
    derivative_family,
    graph_norm,
    graph_norm_equivalence_ratio,
)
from spectralbranch.gallery import CurveLemmaFamily, ResolventExampleFamily, SchrodingerFamily

from conftest import make_diag_family, make_offdiag_t_family


def smooth_family():
    def matrix(t):
        return np.array([[np.sin(t), t**3], [t**3, np.cos(2 * t)]], dtype=complex)

    def deriv(t):
        return np.array([[np.cos(t), 3 * t**2], [3 * t**2, -2 * np.sin(2 * t)]], dtype=complex)

    return HermitianFamily(name="smooth", dim=2, matrix=matrix, deriv=deriv)


def test_eval_is_prefactor_times_unit():
    fam = HermitianFamily(name="scaled", dim=1,
                          matrix=lambda t: np.array([[t]], dtype=complex),
                          scale_prefactor=2.0**-20)
    assert fam.eval(3.0)[0, 0] == 3.0 * 2.0**-20
    assert fam.unit(3.0)[0, 0] == 3.0


def test_eval_rejects_non_hermitian():
    fam = HermitianFamily(name="bad", dim=2,
                          matrix=lambda t: np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    with pytest.raises(NotHermitianError):
        fam.eval(0.0)


def test_eval_rejects_wrong_shape():
    fam = HermitianFamily(name="bad", dim=3,
                          matrix=lambda t: np.eye(2, dtype=complex))
    with pytest.raises(ValueError):
        fam.eval(0.0)


def test_hermiticity_on_gallery_families(rng):
    families = [
        CurveLemmaFamily(n_max=6).global_family(),
        ResolventExampleFamily(m=25).family(),
        SchrodingerFamily(m=15, potential="t*x").family(),
    ]
    lo_hi = [(3.0, 8.0), (0.05, 1.0), (0.0, 1.0)]
    for fam, (lo, hi) in zip(families, lo_hi):
        for t in rng.uniform(lo, hi, size=100):
            A = fam.eval(t)
            assert np.linalg.norm(A - A.conj().T) <= 1e-10 * max(1, np.linalg.norm(A))


def test_analytic_derivative_oracle():
    fam = make_offdiag_t_family()
    D = derivative_family(fam)(0.37)
    assert np.allclose(D, [[0.0, 1.0], [1.0, 0.0]], atol=1e-14)


def test_constant_family_zero_derivative():
    fam = make_diag_family(1.0, 2.0, 5.0)
    assert np.linalg.norm(derivative_family(fam)(0.9)) == 0.0


def test_richardson_ratio_second_order():
    # plain symmetric difference vs the analytic derivative: halving h
    # divides the residual by ~4 on a smooth family
    fam = smooth_family()
    t, h = 0.7, 1e-3

    def residual(step):
        fd = (fam.eval(t + step) - fam.eval(t - step)) / (2 * step)
        return np.linalg.norm(fd - fam.derivative(t))

    ratio = residual(h) / residual(h / 2)
    assert 3.5 <= ratio <= 4.5


def test_fd_fallback_matches_analytic():
    fam = smooth_family()
    bare = HermitianFamily(name="smooth-fd", dim=2, matrix=fam.matrix)
    for t in (-1.1, 0.0, 0.7):
        assert np.linalg.norm(bare.derivative(t) - fam.derivative(t)) < 1e-9
        assert np.linalg.norm(bare.derivative(t) - bare.derivative(t).conj().T) == 0.0


def test_second_derivative_fd():
    fam = smooth_family()
    D2 = fam.second_derivative(0.4)
    expect = np.array([[-np.sin(0.4), 6 * 0.4], [6 * 0.4, -4 * np.cos(0.8)]])
    assert np.linalg.norm(D2 - expect) < 1e-6


def test_graph_norm_oracles():
    zero = make_diag_family(0.0, 0.0)
    u = np.array([3.0, 4.0])
    assert graph_norm(zero, 0.0, u) == pytest.approx(5.0)

    three = make_diag_family(3.0)
    assert graph_norm(three, 0.0, np.array([1.0])) == pytest.approx(np.sqrt(10.0))
    assert graph_norm(three, 0.0, np.array([0.0])) == 0.0


def test_graph_norm_dimension_mismatch():
    with pytest.raises(ValueError):
        graph_norm(make_diag_family(1.0, 2.0), 0.0, np.array([1.0, 2.0, 3.0]))


def test_graph_norm_callable_type():
    fam = make_diag_family(3.0)
    gn = GraphNorm(fam, 0.0)
    assert gn(np.array([1.0])) == pytest.approx(np.sqrt(10.0))


def test_graph_norm_dominates_euclidean(rng):
    fam = smooth_family()
    for _ in range(20):
        u = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert graph_norm(fam, 0.3, u) >= np.linalg.norm(u) - 1e-14


def test_equivalence_ratio_same_t():
    fam = smooth_family()
    assert graph_norm_equivalence_ratio(fam, 0.4, 0.4) == pytest.approx(1.0, abs=1e-12)


def test_equivalence_ratio_diag_t():
    # A(t)=diag(t): ||e_1||_0 = 1 while ||e_1||_1 = sqrt(2)
    fam = HermitianFamily(name="diag-t", dim=1,
                          matrix=lambda t: np.array([[t]], dtype=complex))
    assert graph_norm_equivalence_ratio(fam, 0.0, 1.0) >= np.sqrt(2.0) - 1e-12


def test_equivalence_ratio_constant_family():
    fam = make_diag_family(1.0, 2.0)
    assert graph_norm_equivalence_ratio(fam, 0.1, 0.9) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(s=st.floats(-2, 2, allow_nan=False), t=st.floats(-2, 2, allow_nan=False),
       seed=st.integers(0, 1000))
def test_equivalence_ratio_product_at_least_one(s, t, seed):
    fam = smooth_family()
    rng = np.random.default_rng(seed)
    fwd = graph_norm_equivalence_ratio(fam, s, t, samples=8, rng=rng)
    back = graph_norm_equivalence_ratio(fam, t, s, samples=8, rng=rng)
    assert fwd * back >= 1.0 - 1e-12


def test_expr_matrix_spec_assembly():
    spec = ExprMatrixSpec(dim=2, entries=(("1", "t/2"), ("t/2", "2")))
    fam = spec.to_family()
    A = fam.eval(0.5)
    assert np.allclose(A, [[1.0, 0.25], [0.25, 2.0]])


def test_expr_matrix_power_scale():
    spec = ExprMatrixSpec(dim=1, entries=(("2^(-(3*3))",),))
    assert spec.to_family().eval(0.0)[0, 0] == pytest.approx(1.0 / 512.0)


def test_expr_matrix_upper_triangle_wins():
    # lower triangle must parse but the assembled matrix mirrors the upper
    spec = ExprMatrixSpec(dim=2, entries=(("0", "t"), ("999*t", "0")))
    A = spec.to_family().eval(2.0)
    assert A[1, 0] == A[0, 1] == 2.0


def test_expr_matrix_t_range_tracking():
    spec = ExprMatrixSpec(dim=2, entries=(("t^2", "1"), ("1", "-t^2")))
    fam = spec.to_family()
    w = np.linalg.eigvalsh(fam.eval(1.5))
    assert np.allclose(w, [-np.sqrt(1.5**4 + 1), np.sqrt(1.5**4 + 1)])


def test_with_tol_replaces():
    fam = make_diag_family(1.0)
    fam2 = fam.with_tol(fam.tol.replace(h_fd=1e-6))
    assert fam2.tol.h_fd == 1e-6
    assert fam.tol.h_fd != 1e-6
