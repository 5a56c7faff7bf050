"""Differentiable eigenvalue-branch tracking through crossings.

The sorted eigenvalue curves of a Hermitian family are continuous but kink
where branches cross.  This module detects the collisions on a grid, refines
the collision parameter, estimates one-sided derivatives of the colliding
slots from both sides, pairs them by sorted order (curvature-refined at
order 2), and applies the resulting permutation so each output column is a
differentiable branch.  A contour around each collision verifies that the
enclosed eigenvalue count is constant across the detection box.

Collision detection and stencil arithmetic run at the family's unit scale so
tiny overall prefactors do not collapse every gap below the detection
threshold; reported values and derivatives are exact rescalings.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT_TOL, Tolerances
from .contour import Contour, riesz_projector
from .errors import CountingError, GapCollapseError, RankDriftError
from .families import HermitianFamily
from .linalg import hermitian_eig, numerical_rank, operator_norm
from .util import one_sided_first, one_sided_second, remove_nearest, worker_count

_SIDES = ("left", "right")


def _unit_sorted(family: HermitianFamily, t: float, tol: Tolerances) -> np.ndarray:
    return hermitian_eig(family.unit(t), tol).eigenvalues


def sorted_eigenvalues(family: HermitianFamily, t: float,
                       tol: Tolerances | None = None) -> np.ndarray:
    """Ascending true-scale eigenvalues of A(t)."""
    tol = tol if tol is not None else family.tol
    return _unit_sorted(family, t, tol) * family.scale_prefactor


@dataclass(frozen=True)
class MatchReport:
    """One-sided derivative data and the pairing chosen at one crossing.

    ``left`` and ``right`` are in slot order (the i-th entry belongs to the
    i-th colliding slot on that side); ``pairing`` holds local index pairs
    (left slot position, right slot position).  ``residual`` is the largest
    |rho_plus - rho_minus| over the chosen pairs.
    """

    t_star: float
    left: np.ndarray
    right: np.ndarray
    pairing: tuple[tuple[int, int], ...]
    residual: float
    order: int
    second_left: np.ndarray | None = None
    second_right: np.ndarray | None = None


@dataclass(frozen=True)
class CrossingEvent:
    t_star: float
    grid_span: tuple[int, int]     # inclusive rows where the collision was seen
    slots: tuple[int, ...]         # colliding slots, ascending
    labels: tuple[int, ...]        # branch label occupying each slot on the left
    sigma: tuple[int, ...]         # sigma[i] = slot continuing slots[i] on the right
    report: MatchReport
    contour: Contour | None        # verification contour (true coordinates)


@dataclass(frozen=True)
class BranchSet:
    """Matched branches on a grid: column j of ``values`` is branch j."""

    grid: np.ndarray
    values: np.ndarray
    crossings: tuple[CrossingEvent, ...]
    order: int
    family_name: str = ""

    @property
    def n_branches(self) -> int:
        return self.values.shape[1]

    def branch(self, j: int) -> np.ndarray:
        return self.values[:, j]


def one_sided_slot_derivatives(family: HermitianFamily, t_star: float, slots,
                               side: str, tol: Tolerances | None = None,
                               second: bool = False):
    """One-sided d/dt of the sorted-eigenvalue slot curves at t_star.

    Fresh eigensolves at five stencil points on the requested side; returns
    (first, second) true-scale arrays over ``slots`` (second is None unless
    requested).  Probes may leave any grid of interest; families are total.
    """
    tol = tol if tol is not None else family.tol
    if side not in _SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    slots = list(slots)
    sgn = 1.0 if side == "right" else -1.0
    f = family.scale_prefactor
    h1 = tol.h_fd * max(1.0, abs(t_star))
    samples = np.stack(
        [_unit_sorted(family, t_star + sgn * j * h1, tol)[slots] for j in range(5)]
    )
    first = one_sided_first(samples, h1, side) * f
    if not second:
        return first, None
    h2 = tol.h_fd2 * max(1.0, abs(t_star))
    samples2 = np.stack(
        [_unit_sorted(family, t_star + sgn * j * h2, tol)[slots] for j in range(5)]
    )
    return first, one_sided_second(samples2, h2) * f


def rayleigh_derivative(family: HermitianFamily, t: float, w,
                        tol: Tolerances | None = None) -> float:
    """<A'(t) w, w> for a unit eigenvector w of A(t): the branch slope."""
    tol = tol if tol is not None else family.tol
    w = np.asarray(w, dtype=np.complex128).ravel()
    if w.shape != (family.dim,):
        raise ValueError(f"vector has shape {w.shape}, family dimension is {family.dim}")
    if abs(float(np.linalg.norm(w)) - 1.0) > 1e-8:
        raise ValueError("w must be a unit vector")
    A = family.eval(t)
    lam = float(np.vdot(w, A @ w).real)
    resid = float(np.linalg.norm(A @ w - lam * w))
    if resid > tol.eig_tol * max(1.0, operator_norm(A)):
        raise ValueError(f"w is not an eigenvector: residual {resid:.3e}")
    v = complex(np.vdot(w, family.derivative(t) @ w))
    if abs(v.imag) > 1e-10 * (1.0 + abs(v)):
        raise ValueError(f"derivative quadratic form has imaginary part {v.imag:.3e}")
    return v.real


def one_sided_derivatives(family: HermitianFamily, t_star: float, gamma: Contour,
                          side: str = "right",
                          tol: Tolerances | None = None) -> np.ndarray:
    """Eigenvalues of the compressed operator P A'(t*) P on range P, ascending.

    These are the one-sided derivatives (from either side) of the branches
    colliding inside gamma at t_star.  The projector rank is probed on the
    requested side; a change means the box is too large.
    """
    tol = tol if tol is not None else family.tol
    if side not in _SIDES:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    sgn = 1.0 if side == "right" else -1.0
    P = riesz_projector(family, t_star, gamma, tol)
    N = numerical_rank(P, 0.5)
    h = tol.h_fd * max(1.0, abs(t_star))
    for j in (1, 2):
        Pj = riesz_projector(family, t_star + sgn * j * h, gamma, tol)
        rank_j = numerical_rank(Pj, 0.5)
        if rank_j != N:
            raise RankDriftError(
                f"box too large: contour encloses {N} eigenvalues at t={t_star!r} "
                f"but {rank_j} at t={t_star + sgn * j * h!r}"
            )
    if N == 0:
        return np.zeros(0)
    if family.deriv is not None:
        Ad = family.derivative(t_star)
    else:
        samples = np.stack([family.unit(t_star + sgn * j * h) for j in range(5)])
        D = one_sided_first(samples, h, side)
        Ad = family.scale_prefactor * 0.5 * (D + D.conj().T)
    U, _, _ = np.linalg.svd(P)
    F = U[:, :N]
    C = F.conj().T @ Ad @ F
    C = 0.5 * (C + C.conj().T)
    return np.sort(np.linalg.eigvalsh(C))


def _tie_groups(sorted_left: np.ndarray, sorted_right: np.ndarray,
                tol: Tolerances) -> list[tuple[int, int]]:
    """Index ranges [start, stop) where both sorted sequences stay within tie tol."""
    n = sorted_left.shape[0]
    groups = []
    start = 0
    for i in range(1, n):
        jump_l = sorted_left[i] - sorted_left[i - 1] > tol.deriv_tie_tol * (1.0 + abs(sorted_left[i]))
        jump_r = sorted_right[i] - sorted_right[i - 1] > tol.deriv_tie_tol * (1.0 + abs(sorted_right[i]))
        if jump_l or jump_r:
            groups.append((start, i))
            start = i
    groups.append((start, n))
    return groups


def match_crossing(left, right, order: int = 1, second_left=None, second_right=None,
                   tol: Tolerances = DEFAULT_TOL, t_star: float = float("nan")) -> MatchReport:
    """Pair left and right one-sided derivative multisets at a crossing.

    Sorting both sides ascending and pairing in order is the optimal
    assignment for scalars.  At order 2, runs of first derivatives that tie
    within deriv_tie_tol are sub-ordered by their one-sided second difference
    quotients before pairing.
    """
    left = np.asarray(left, dtype=np.float64).ravel()
    right = np.asarray(right, dtype=np.float64).ravel()
    if left.shape != right.shape:
        raise ValueError(f"derivative multisets differ in size: {left.shape[0]} vs {right.shape[0]}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    l_order = np.argsort(left, kind="stable")
    r_order = np.argsort(right, kind="stable")
    sec_l = sec_r = None
    if order == 2:
        if second_left is None or second_right is None:
            raise ValueError("order=2 matching needs second difference quotients for both sides")
        sec_l = np.asarray(second_left, dtype=np.float64).ravel()
        sec_r = np.asarray(second_right, dtype=np.float64).ravel()
        if sec_l.shape != left.shape or sec_r.shape != right.shape:
            raise ValueError("second-quotient arrays must match the first-derivative arrays")
        for start, stop in _tie_groups(left[l_order], right[r_order], tol):
            if stop - start < 2:
                continue
            seg = l_order[start:stop]
            l_order[start:stop] = seg[np.argsort(sec_l[seg], kind="stable")]
            seg = r_order[start:stop]
            r_order[start:stop] = seg[np.argsort(sec_r[seg], kind="stable")]
    pairing = tuple(zip(l_order.tolist(), r_order.tolist()))
    residual = 0.0
    if left.size:
        residual = float(np.max(np.abs(left[l_order] - right[r_order])))
    return MatchReport(
        t_star=float(t_star), left=left, right=right, pairing=pairing,
        residual=residual, order=order, second_left=sec_l, second_right=sec_r,
    )


def _tight_runs(row: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Maximal slot intervals [lo, hi] whose consecutive gaps are all below threshold."""
    runs = []
    lo = None
    gaps = np.diff(row)
    for i, g in enumerate(gaps):
        if g < threshold:
            if lo is None:
                lo = i
        elif lo is not None:
            runs.append((lo, i))
            lo = None
    if lo is not None:
        runs.append((lo, row.shape[0] - 1))
    return runs


class _Detection:
    """Mutable accumulator for collision rows before refinement."""

    __slots__ = ("k_start", "k_end", "lo", "hi")

    def __init__(self, k: int, lo: int, hi: int):
        self.k_start = k
        self.k_end = k
        self.lo = lo
        self.hi = hi

    def absorbs(self, k: int, lo: int, hi: int) -> bool:
        if k > self.k_end + 1 or lo > self.hi or hi < self.lo:
            return False
        self.k_end = k
        self.lo = min(self.lo, lo)
        self.hi = max(self.hi, hi)
        return True


def _detect(values_unit: np.ndarray, threshold: float) -> list[_Detection]:
    detections: list[_Detection] = []
    for k in range(values_unit.shape[0]):
        for lo, hi in _tight_runs(values_unit[k], threshold):
            if not any(d.absorbs(k, lo, hi) for d in detections):
                detections.append(_Detection(k, lo, hi))
    return detections


def _refine_t_star(family: HermitianFamily, grid: np.ndarray, det: _Detection,
                   tol: Tolerances) -> float:
    """Parameter of minimal cluster spread inside the detection box."""
    a = grid[max(det.k_start - 1, 0)]
    b = grid[min(det.k_end + 1, grid.shape[0] - 1)]
    if a == b:
        return float(a)

    def spread(t: float) -> float:
        w = _unit_sorted(family, t, tol)
        return float(w[det.hi] - w[det.lo])

    res = minimize_scalar(spread, bounds=(float(a), float(b)), method="bounded",
                          options={"xatol": 1e-10 * max(1.0, abs(a), abs(b))})
    return float(res.x)


_PROBE_OFFSETS = (0.0, -3.0, -1.5, 1.5, 3.0)  # units of the grid step


def _event_contour(family: HermitianFamily, t_star: float, w_star_unit: np.ndarray,
                   glo: int, ghi: int, dt: float, tol: Tolerances) -> Contour:
    """Verification contour around the value group [glo, ghi], with rank probes.

    The radius must cover the cluster's drift across the probe box (3 grid
    steps each side) while keeping the rest of the spectrum outside, so it is
    sized from eigensolves at the probe times, not from t_star alone.
    """
    f = family.scale_prefactor
    center = float(np.mean(w_star_unit[glo:ghi + 1])) * f
    probes = [(t_star + off * dt, _unit_sorted(family, t_star + off * dt, tol) * f
               if off != 0.0 else w_star_unit * f) for off in _PROBE_OFFSETS]
    spread = max(np.max(np.abs(w[glo:ghi + 1] - center)) for _, w in probes)
    rest = [np.concatenate([w[:glo], w[ghi + 1:]]) for _, w in probes]
    d_out = min((float(np.min(np.abs(r - center))) for r in rest if r.size),
                default=np.inf)
    radius = max(1.3 * spread, 0.5 * d_out if np.isfinite(d_out) else 0.5 * max(1.0, abs(center)))
    if radius > 0.75 * d_out:
        raise RankDriftError(
            f"box too large: cluster around {center!r} spreads {spread!r} over the "
            f"probe window but the rest of the spectrum comes within {d_out!r}"
        )
    gamma = Contour(center=center, radius=radius)
    gamma.validate_against(w_star_unit * f, tol)
    expected = ghi - glo + 1
    for t_probe, _ in probes:
        P = riesz_projector(family, t_probe, gamma, tol)
        rank = numerical_rank(P, 0.5)
        if rank != expected:
            raise RankDriftError(
                f"rank drift: contour around {center!r} encloses {rank} eigenvalues "
                f"at t={t_probe!r}, expected {expected}"
            )
    return gamma


@dataclass(frozen=True)
class _PendingEvent:
    t_star: float
    grid_span: tuple[int, int]
    slots: tuple[int, ...]
    sigma_local: tuple[int, ...]
    report: MatchReport
    contour: Contour | None


def _match_group(family: HermitianFamily, t_star: float, slots: tuple[int, ...],
                 order: int, tol: Tolerances) -> tuple[MatchReport, tuple[int, ...]]:
    want_second = order == 2
    dl, sl = one_sided_slot_derivatives(family, t_star, slots, "left", tol, second=want_second)
    dr, sr = one_sided_slot_derivatives(family, t_star, slots, "right", tol, second=want_second)
    report = match_crossing(dl, dr, order=order, second_left=sl, second_right=sr,
                            tol=tol, t_star=t_star)
    sigma_local = _sigma_from_pairing(report.pairing, len(slots))
    return report, sigma_local


def _sigma_from_pairing(pairing, n: int) -> tuple[int, ...]:
    to_right = dict(pairing)
    return tuple(to_right[i] for i in range(n))


def _grid_events(family: HermitianFamily, grid: np.ndarray, values_unit: np.ndarray,
                 order: int, tol: Tolerances, with_contours: bool) -> list[_PendingEvent]:
    m = values_unit.shape[1]
    scale = max(1.0, float(np.max(np.abs(values_unit))))
    threshold = tol.cluster_tol * scale
    dt = float(grid[1] - grid[0]) if grid.shape[0] > 1 else 1.0
    events: list[_PendingEvent] = []
    for det in _detect(values_unit, threshold):
        t_star = _refine_t_star(family, grid, det, tol)
        w_star = _unit_sorted(family, t_star, tol)
        # membership must be decidable: the detected cluster cannot be merging
        # into its neighbors at the refined collision point
        if det.lo > 0 and w_star[det.lo] - w_star[det.lo - 1] < threshold:
            raise GapCollapseError(
                f"gap collapse unresolved near t={t_star!r}: cluster membership is "
                f"ambiguous at this grid resolution, refine the grid"
            )
        if det.hi < m - 1 and w_star[det.hi + 1] - w_star[det.hi] < threshold:
            raise GapCollapseError(
                f"gap collapse unresolved near t={t_star!r}: cluster membership is "
                f"ambiguous at this grid resolution, refine the grid"
            )
        for glo, ghi in _tight_runs(w_star[det.lo:det.hi + 1], threshold):
            slots = tuple(range(det.lo + glo, det.lo + ghi + 1))
            contour = None
            if with_contours:
                contour = _event_contour(family, t_star, w_star, slots[0], slots[-1], dt, tol)
            report, sigma_local = _match_group(family, t_star, slots, order, tol)
            events.append(_PendingEvent(
                t_star=t_star, grid_span=(det.k_start, det.k_end), slots=slots,
                sigma_local=sigma_local, report=report, contour=contour,
            ))
    events.sort(key=lambda e: e.t_star)
    return events


def _assemble(grid: np.ndarray, values_true: np.ndarray,
              pending: list[_PendingEvent]) -> tuple[np.ndarray, tuple[CrossingEvent, ...]]:
    rows, m = values_true.shape
    slot_of = np.arange(m)
    out = np.empty_like(values_true)
    finished: list[CrossingEvent] = []
    ptr = 0
    for k in range(rows):
        while ptr < len(pending) and pending[ptr].t_star < grid[k]:
            ev = pending[ptr]
            label_at = np.empty(m, dtype=int)
            label_at[slot_of] = np.arange(m)
            labels = tuple(int(label_at[s]) for s in ev.slots)
            sigma_abs = tuple(ev.slots[j] for j in ev.sigma_local)
            slot_map = {ev.slots[i]: sigma_abs[i] for i in range(len(ev.slots))}
            for j in range(m):
                slot_of[j] = slot_map.get(slot_of[j], slot_of[j])
            finished.append(CrossingEvent(
                t_star=ev.t_star, grid_span=ev.grid_span, slots=ev.slots,
                labels=labels, sigma=sigma_abs, report=ev.report, contour=ev.contour,
            ))
            ptr += 1
        out[k] = values_true[k, slot_of]
    # events at or beyond the last grid point still get reported
    while ptr < len(pending):
        ev = pending[ptr]
        label_at = np.empty(m, dtype=int)
        label_at[slot_of] = np.arange(m)
        labels = tuple(int(label_at[s]) for s in ev.slots)
        sigma_abs = tuple(ev.slots[j] for j in ev.sigma_local)
        finished.append(CrossingEvent(
            t_star=ev.t_star, grid_span=ev.grid_span, slots=ev.slots,
            labels=labels, sigma=sigma_abs, report=ev.report, contour=ev.contour,
        ))
        ptr += 1
    return out, tuple(finished)


def track_branches(family: HermitianFamily, t_range, grid_size: int, order: int = 1,
                   tol: Tolerances | None = None,
                   workers: int | None = None) -> BranchSet:
    """Track all eigenvalue branches of the family over t_range.

    Eigensolves run per grid point (concurrently when workers > 1, result
    order fixed by index); collisions are matched so each output column has
    one-sided derivatives that agree across every crossing within the
    matching residual.
    """
    tol = tol if tol is not None else family.tol
    t0, t1 = float(t_range[0]), float(t_range[1])
    if not t0 < t1:
        raise ValueError(f"t_range must satisfy t0 < t1, got ({t0}, {t1})")
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    workers = worker_count(1) if workers is None else max(1, int(workers))
    grid = np.linspace(t0, t1, grid_size)

    def solve(t: float) -> np.ndarray:
        return _unit_sorted(family, t, tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(solve, grid))
    else:
        rows = [solve(t) for t in grid]
    values_unit = np.array(rows)
    pending = _grid_events(family, grid, values_unit, order, tol, with_contours=True)
    values_true = values_unit * family.scale_prefactor
    matched, events = _assemble(grid, values_true, pending)
    return BranchSet(grid=grid, values=matched, crossings=events, order=order,
                     family_name=family.name)


@dataclass(frozen=True)
class GronwallReport:
    """Outcome of the pairwise growth screen |dL| <= (1+|L2|)(e^{a dt}-1)."""

    a: float
    passed: bool
    pairs_checked: int
    worst_margin: float
    violations: tuple[tuple[int, int, int, float, float], ...]  # (branch, k1, k2, lhs, rhs)


def gronwall_screen(grid, values, a: float) -> GronwallReport:
    """Check every ordered grid pair on every branch against the growth bound.

    Strict comparison, no slack: a pair fails exactly when
    |v(t1) - v(t2)| > (1 + |v(t2)|) * (e^{a |t1-t2|} - 1).
    """
    grid = np.asarray(grid, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if not a > 0.0:
        raise ValueError(f"growth constant a must be positive, got {a}")
    rows, m = values.shape
    growth = np.expm1(a * np.abs(grid[:, None] - grid[None, :]))
    off_diag = ~np.eye(rows, dtype=bool)
    violations: list[tuple[int, int, int, float, float]] = []
    worst = np.inf
    total = 0
    for j in range(m):
        v = values[:, j]
        lhs = np.abs(v[:, None] - v[None, :])
        rhs = (1.0 + np.abs(v)[None, :]) * growth
        margin = rhs - lhs
        worst = min(worst, float(np.min(margin[off_diag])))
        total += int(np.count_nonzero(off_diag))
        bad = np.argwhere((lhs > rhs) & off_diag)
        for k1, k2 in bad[:20]:
            violations.append((j, int(k1), int(k2), float(lhs[k1, k2]), float(rhs[k1, k2])))
    return GronwallReport(
        a=float(a), passed=not violations, pairs_checked=total,
        worst_margin=float(worst), violations=tuple(violations[:20]),
    )


def estimate_derivative_bound(family: HermitianFamily, grid,
                              tol: Tolerances | None = None) -> float:
    """max over the grid of ||A'(t) (I + A(t)^2)^{-1/2}||, the growth constant.

    Pointwise this bounds |lambda'| <= C (1 + |lambda|): the slope is a
    Rayleigh quotient of A'(t) at a unit eigenvector, and (I + A^2)^{1/2}
    stretches that eigenvector by sqrt(1 + lambda^2) <= 1 + |lambda|.
    """
    tol = tol if tol is not None else family.tol
    f = family.scale_prefactor
    best = 0.0
    for t in np.asarray(grid, dtype=np.float64):
        dec = hermitian_eig(family.unit(float(t)), tol)
        w = dec.eigenvalues * f
        V = dec.eigenvectors
        damp = (V * (1.0 / np.sqrt(1.0 + w**2))) @ V.conj().T
        best = max(best, operator_norm(family.derivative(float(t)) @ damp))
    return best


def _grid_side_samples(column: np.ndarray, k_star: int, side: str, limit: int = 5) -> np.ndarray:
    if side == "left":
        n = min(limit, k_star + 1)
        idx = [k_star - j for j in range(n)]
    else:
        n = min(limit, column.shape[0] - k_star)
        idx = [k_star + j for j in range(n)]
    return column[idx]


def _grid_slot_derivatives(comp: np.ndarray, k_star: int, slots, side: str, dt: float,
                           second: bool) -> tuple[np.ndarray, np.ndarray | None]:
    first = np.zeros(len(slots))
    sec = np.zeros(len(slots)) if second else None
    for i, s in enumerate(slots):
        samples = _grid_side_samples(comp[:, s], k_star, side)
        if samples.shape[0] >= 2:
            first[i] = float(one_sided_first(samples, dt, side))
        if second and samples.shape[0] >= 3:
            sec[i] = float(one_sided_second(samples, dt))
    return first, sec


def extend_parameterization(branches: BranchSet, mu_partial, order: int = 1,
                            tol: Tolerances | None = None) -> np.ndarray:
    """Complete k given branches to the full eigenvalue multiset per grid point.

    At every grid point each given value must sit within cluster_tol of a
    still-unclaimed eigenvalue (the counting condition); the complement
    values are then glued across their own crossings with the same matching
    rule as track_branches, using grid-spacing difference stencils (the
    complement is only known on the grid).  Returns the (rows, N-k) matrix of
    completing branches.
    """
    tol = tol if tol is not None else DEFAULT_TOL
    grid = branches.grid
    values = branches.values
    rows, m = values.shape
    mu = np.asarray(mu_partial, dtype=np.float64)
    if mu.ndim == 1:
        mu = mu[:, None] if mu.size == rows else mu.reshape(rows, -1)
    if mu.shape[0] != rows:
        raise ValueError(f"given branches have {mu.shape[0]} rows, grid has {rows}")
    k = mu.shape[1]
    if k > m:
        raise CountingError(f"more given branches ({k}) than eigenvalues ({m})")
    scale = max(1.0, float(np.max(np.abs(values))))
    comp = np.empty((rows, m - k))
    for r in range(rows):
        remaining = np.sort(values[r])
        for j in range(k):
            z = float(mu[r, j])
            remaining, dist = remove_nearest(remaining, z)
            if dist > tol.cluster_tol * scale:
                raise CountingError(
                    f"counting condition violated at t={float(grid[r])!r}, z={z!r}: "
                    f"nearest unclaimed eigenvalue is {dist:.3e} away"
                )
        comp[r] = remaining
    if comp.shape[1] == 0 or rows < 2:
        return comp
    dt = float(grid[1] - grid[0])
    threshold = tol.cluster_tol * scale
    pending: list[_PendingEvent] = []
    for det in _detect(comp, threshold):
        spreads = comp[det.k_start:det.k_end + 1, det.hi] - comp[det.k_start:det.k_end + 1, det.lo]
        k_star = det.k_start + int(np.argmin(spreads))
        for glo, ghi in _tight_runs(comp[k_star, det.lo:det.hi + 1], threshold):
            slots = tuple(range(det.lo + glo, det.lo + ghi + 1))
            want_second = order == 2
            dl, sl = _grid_slot_derivatives(comp, k_star, slots, "left", dt, want_second)
            dr, sr = _grid_slot_derivatives(comp, k_star, slots, "right", dt, want_second)
            report = match_crossing(dl, dr, order=order, second_left=sl, second_right=sr,
                                    tol=tol, t_star=float(grid[k_star]))
            pending.append(_PendingEvent(
                t_star=float(grid[k_star]), grid_span=(det.k_start, det.k_end),
                slots=slots, sigma_local=_sigma_from_pairing(report.pairing, len(slots)),
                report=report, contour=None,
            ))
    pending.sort(key=lambda e: e.t_star)
    glued, _ = _assemble(grid, comp, pending)
    return glued
