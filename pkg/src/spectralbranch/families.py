"""Parameterized Hermitian families t -> A(t).

A family evaluates at unit scale (entries O(1)) and carries a separate
positive ``scale_prefactor`` so that extreme overall scales like 2**(-n*n)
never touch the eigensolver; downstream code rescales exactly.  Derivatives
are analytic when supplied, otherwise 5-point central differences.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .expressions import Expression, parse_expression
from .linalg import as_matrix, ensure_hermitian
from .util import central_first

MatrixFn = Callable[[float], np.ndarray]

# central 2nd derivative, O(h^4)
_CEN2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@dataclass(frozen=True)
class HermitianFamily:
    """A curve of Hermitian matrices with optional analytic derivatives.

    ``matrix``, ``deriv``, ``deriv2`` all produce unit-scale values; the true
    operator is ``scale_prefactor * matrix(t)``.  Families must be pure
    functions defined on all of R (derivative probes step outside any stated
    range of interest).
    """

    name: str
    dim: int
    matrix: MatrixFn
    deriv: MatrixFn | None = None
    deriv2: MatrixFn | None = None
    scale_prefactor: float = 1.0
    params: tuple = ()
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if not (self.scale_prefactor > 0.0 and np.isfinite(self.scale_prefactor)):
            raise ValueError(f"scale_prefactor must be positive, got {self.scale_prefactor}")

    def with_tol(self, tol: Tolerances) -> "HermitianFamily":
        return replace(self, tol=tol)

    def _checked(self, raw) -> np.ndarray:
        A = as_matrix(raw)
        if A.shape != (self.dim, self.dim):
            raise ValueError(
                f"family {self.name!r} produced shape {A.shape}, expected {(self.dim, self.dim)}"
            )
        return ensure_hermitian(A, self.tol)

    def unit(self, t: float) -> np.ndarray:
        """Unit-scale matrix at t, validated Hermitian."""
        return self._checked(self.matrix(float(t)))

    def eval(self, t: float) -> np.ndarray:
        """True-scale matrix scale_prefactor * unit(t)."""
        return self.scale_prefactor * self.unit(t)

    def unit_deriv(self, t: float) -> np.ndarray:
        t = float(t)
        if self.deriv is not None:
            return self._checked(self.deriv(t))
        h = self.tol.h_fd * max(1.0, abs(t))
        samples = np.stack([self.unit(t + k * h) for k in (-2, -1, 0, 1, 2)])
        D = central_first(samples, h)
        return 0.5 * (D + D.conj().T)

    def derivative(self, t: float) -> np.ndarray:
        """True-scale A'(t): analytic when available, else O(h^2+) central FD."""
        return self.scale_prefactor * self.unit_deriv(t)

    def unit_deriv2(self, t: float) -> np.ndarray:
        t = float(t)
        if self.deriv2 is not None:
            return self._checked(self.deriv2(t))
        h = self.tol.h_fd2 * max(1.0, abs(t))
        samples = np.stack([self.unit(t + k * h) for k in (-2, -1, 0, 1, 2)])
        D = np.tensordot(_CEN2, samples, axes=(0, 0)) / h**2
        return 0.5 * (D + D.conj().T)

    def second_derivative(self, t: float) -> np.ndarray:
        return self.scale_prefactor * self.unit_deriv2(t)


def derivative_family(family: HermitianFamily) -> MatrixFn:
    """The curve t -> A'(t) at true scale."""
    return family.derivative


@dataclass(frozen=True)
class GraphNorm:
    """The norm ||u||_t with ||u||_t^2 = ||u||^2 + ||A(t)u||^2."""

    family: HermitianFamily
    t: float

    def __call__(self, u) -> float:
        return graph_norm(self.family, self.t, u)


def graph_norm(family: HermitianFamily, t: float, u) -> float:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (family.dim,):
        raise ValueError(f"vector has shape {u.shape}, family dimension is {family.dim}")
    Au = family.eval(t) @ u
    return float(np.sqrt(np.vdot(u, u).real + np.vdot(Au, Au).real))


def graph_norm_equivalence_ratio(
    family: HermitianFamily,
    s: float,
    t: float,
    samples: int = 32,
    rng: np.random.Generator | None = None,
) -> float:
    """Empirical equivalence constant: max ||u||_t over sampled unit-||.||_s vectors.

    The sample set always contains the standard basis, which floors the ratio
    at the coordinate-wise value and makes ratio(s,t) * ratio(t,s) >= 1
    unconditionally.  Remaining samples are complex Gaussian draws; a fixed
    seed is used when no generator is given so repeated calls agree.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    m = family.dim
    vectors = [np.eye(m, dtype=np.complex128)[k] for k in range(m)]
    for _ in range(samples):
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        vectors.append(v)
    best = 0.0
    for v in vectors:
        ns = graph_norm(family, s, v)
        nt = graph_norm(family, t, v)
        # ||.||_s >= ||.|| > 0 for v != 0, so no division guard needed
        best = max(best, nt / ns)
    return best


@dataclass(frozen=True)
class ExprMatrixSpec:
    """Matrix family given entrywise by expressions in t.

    Assembly reads the diagonal and the upper triangle; the lower triangle is
    filled by conjugate mirroring (all expression values are real, so the
    result is Hermitian by construction).  Lower-triangle entries must still
    parse but their values are ignored.
    """

    dim: int
    entries: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if len(self.entries) != self.dim or any(len(r) != self.dim for r in self.entries):
            raise ValueError(f"entries must form a {self.dim}x{self.dim} grid")

    def parsed(self) -> list[list[Expression]]:
        return [[parse_expression(src) for src in row] for row in self.entries]

    def to_family(self, name: str = "expr", tol: Tolerances = DEFAULT_TOL) -> HermitianFamily:
        exprs = self.parsed()
        m = self.dim

        def matrix(t: float) -> np.ndarray:
            A = np.zeros((m, m), dtype=np.complex128)
            for i in range(m):
                A[i, i] = exprs[i][i](t)
                for j in range(i + 1, m):
                    v = exprs[i][j](t)
                    A[i, j] = v
                    A[j, i] = v
            return A

        return HermitianFamily(
            name=name,
            dim=m,
            matrix=matrix,
            scale_prefactor=1.0,
            params=(("dim", m),),
            tol=tol,
        )
