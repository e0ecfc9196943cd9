"""
Nonnegative minimization of the discrete J_σ and the signed second-NDR solve.
"""

from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config import Config
from geometry import Quadrature
from kernel import QuadraticForm, RhsKind, functional_value, rhs_values

CONVERGED = 'Converged'
MAX_ITER = 'MaxIter'
NOT_PSD = 'NotPSD'

# non-improving block exchanges tolerated before switching to single exchanges
_BLOCK_PATIENCE = 3
_ORACLE_MAX_N = 16


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class DiscreteMeasure:
    quadrature: Quadrature
    u: np.ndarray
    signed: bool = False
    support_threshold: Optional[float] = None

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.quadrature.n,):
            raise ValueError(f"density has {u.size} values for {self.quadrature.n} nodes")
        if not self.signed and np.any(u < 0):
            raise ValueError("unsigned measure with negative density")
        u.setflags(write=False)
        object.__setattr__(self, 'u', u)
        relative = Config.SUPPORT_THRESHOLD if self.support_threshold is None else self.support_threshold
        object.__setattr__(self, 'support_threshold', float(relative))

    @property
    def threshold(self) -> float:
        """Absolute support threshold: relative threshold times max|u|"""
        peak = float(np.max(np.abs(self.u))) if self.u.size else 0.0
        return self.support_threshold * peak

    @property
    def support_mask(self) -> np.ndarray:
        if not self.u.size or not np.any(self.u):
            return np.zeros(self.u.shape, dtype=bool)
        values = np.abs(self.u) if self.signed else self.u
        return values > self.threshold

    @property
    def mass(self) -> float:
        return float(np.sum(self.u * self.quadrature.weights))


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    kkt_residual: float
    energy: float
    active_set_changes: int
    status: str

    def to_dict(self) -> dict:
        return asdict(self)


def support_mask(u: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
    relative = Config.SUPPORT_THRESHOLD if threshold is None else threshold
    peak = float(np.max(np.abs(u))) if np.size(u) else 0.0
    return np.abs(u) > relative * peak if peak > 0 else np.zeros(np.shape(u), dtype=bool)


def variational_residual(form: QuadraticForm, m: DiscreteMeasure) -> np.ndarray:
    """Gμ(zᵢ) + σᵢuᵢ − φᵢ in un-weighted units"""
    if m.u.shape != form.b.shape:
        raise ValueError("measure and form dimensions differ")
    return (form.A @ m.u + form.S * m.u - form.b) / form.quadrature.weights


def measure_energy(form: QuadraticForm, m: DiscreteMeasure) -> float:
    return functional_value(form, m.u)


def _residual_scale(form: QuadraticForm) -> float:
    return max(1.0, float(np.max(np.abs(form.phi)))) if form.n else 1.0


def kkt_violation(form: QuadraticForm, u: np.ndarray) -> float:
    """Largest complementarity violation, relative to max(1, max|φ|)"""
    r = (form.A @ u + form.S * u - form.b) / form.quadrature.weights
    positive = u > 0
    on_support = np.abs(r[positive]).max() if positive.any() else 0.0
    off_support = np.maximum(-r[~positive], 0.0).max() if (~positive).any() else 0.0
    negativity = max(0.0, -float(u.min())) if u.size else 0.0
    return max(float(on_support), float(off_support)) / _residual_scale(form) + negativity


def _solve_on(H: np.ndarray, b: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Equality-constrained minimizer with zeros off the free set (one refinement step)"""
    x = np.zeros(len(b))
    idx = np.flatnonzero(free)
    if idx.size == 0:
        return x
    H_ff = H[np.ix_(idx, idx)]
    factor = linalg.cho_factor(H_ff)
    x_f = linalg.cho_solve(factor, b[idx])
    x_f += linalg.cho_solve(factor, b[idx] - H_ff @ x_f)
    x[idx] = x_f
    return x


def solve_nonnegative(form: QuadraticForm, tol: Optional[float] = None, max_iter: Optional[int] = None,
                      support_threshold: Optional[float] = None,
                      start: Optional[np.ndarray] = None) -> Tuple[DiscreteMeasure, SolveReport]:
    """
    Minimize uᵀ(A + diag(S))u − 2bᵀu over u ≥ 0 by active-set iteration

    Args:
        form: assembled quadratic form
        tol: KKT tolerance (defaults to NDR_TOL)
        max_iter: iteration cap (defaults to NDR_MAX_ITER_FACTOR * n)
        support_threshold: relative support threshold for the returned measure
        start: optional feasible starting density; its positive entries seed the free set

    Returns:
        (measure, report); report.status is Converged, MaxIter or NotPSD
    """
    tol = Config.TOL if tol is None else tol
    n = form.n
    max_iter = Config.MAX_ITER_FACTOR * max(n, 1) if max_iter is None else max_iter
    q = form.quadrature
    H, b, w = form.hessian, form.b, q.weights
    scale = _residual_scale(form)

    def measure(u: np.ndarray) -> DiscreteMeasure:
        return DiscreteMeasure(q, u, signed=False, support_threshold=support_threshold)

    try:
        if start is None:
            free = _solve_on(H, b, np.ones(n, dtype=bool)) > 0
        else:
            free = np.asarray(start, dtype=float) > 0
    except linalg.LinAlgError:
        if Config.VERBOSE:
            print("⚠️ Warning: A + diag(S) is not positive definite; nonnegative solve skipped")
        zero = np.zeros(n)
        return measure(zero), SolveReport(0, float('inf'), 0.0, 0, NOT_PSD)

    iterations = 0
    changes = 0
    best = n + 1
    stall = 0
    x = np.zeros(n)
    optimal = False
    while iterations < max_iter:
        iterations += 1
        try:
            x = _solve_on(H, b, free)
        except linalg.LinAlgError:
            if Config.VERBOSE:
                print("⚠️ Warning: free-set system is not positive definite; nonnegative solve stopped")
            return measure(np.zeros(n)), SolveReport(iterations, float('inf'), 0.0, changes, NOT_PSD)

        r = (H @ x - b) / w
        negative_free = free & (x < 0)
        violated_bound = ~free & (r < -tol * scale)
        count = int(negative_free.sum() + violated_bound.sum())
        if count == 0:
            optimal = True
            break

        if count < best:
            best = count
            stall = 0
        else:
            stall += 1

        if stall < _BLOCK_PATIENCE:
            free = (free & ~negative_free) | violated_bound
            changes += count
        else:
            # least-index rule: exchange only the first infeasible variable
            k = int(np.flatnonzero(negative_free | violated_bound)[0])
            free[k] = not free[k]
            changes += 1

    u = np.maximum(x, 0.0)
    u[~free] = 0.0
    kkt = kkt_violation(form, u)
    energy = functional_value(form, u)
    status = CONVERGED if optimal and kkt <= tol else MAX_ITER
    if status == MAX_ITER and Config.VERBOSE:
        reason = 'iteration cap reached' if not optimal else 'KKT residual above tolerance'
        print(f"⚠️ Warning: nonnegative solve stopped after {iterations} iterations ({reason}, kkt={kkt:.3e})")
    return measure(u), SolveReport(iterations, kkt, energy, changes, status)


def exhaustive_nonnegative(form: QuadraticForm, feasibility_tol: float = 1e-12) -> np.ndarray:
    """
    Brute-force minimizer: enumerate every support set and keep the KKT-feasible one

    Only for small n (at most 16 nodes).
    """
    n = form.n
    if n > _ORACLE_MAX_N:
        raise ValueError(f"exhaustive oracle is limited to n <= {_ORACLE_MAX_N}, got {n}")
    H, b, w = form.hessian, form.b, form.quadrature.weights
    scale = _residual_scale(form)
    best_u, best_energy = None, np.inf
    for bits in range(1 << n):
        free = np.array([(bits >> i) & 1 == 1 for i in range(n)], dtype=bool)
        idx = np.flatnonzero(free)
        x = np.zeros(n)
        if idx.size:
            try:
                x[idx] = linalg.solve(H[np.ix_(idx, idx)], b[idx], assume_a='sym')
            except linalg.LinAlgError:
                continue
        if np.any(x[free] < -feasibility_tol * max(1.0, np.abs(x).max())):
            continue
        r = (H @ x - b) / w
        if np.any(r[~free] < -feasibility_tol * scale * 1e3):
            continue
        x = np.maximum(x, 0.0)
        energy = functional_value(form, x)
        if energy < best_energy:
            best_u, best_energy = x, energy
    if best_u is None:
        raise SolverError("no KKT point found by exhaustive enumeration")
    return best_u


def solve_signed(form: QuadraticForm, restrict_to: Optional[np.ndarray] = None,
                 support_threshold: Optional[float] = None) -> Tuple[DiscreteMeasure, SolveReport]:
    """
    Solve (A + diag(S))v = b, optionally on a restricted index set

    Args:
        form: assembled quadratic form (typically with a temporal right-hand side)
        restrict_to: optional boolean mask; v = 0 outside it

    Returns:
        (signed measure, report)
    """
    n = form.n
    mask = np.ones(n, dtype=bool) if restrict_to is None else np.asarray(restrict_to, dtype=bool)
    if mask.shape != (n,):
        raise ValueError(f"restriction mask has {mask.size} entries for {n} nodes")
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise SolverError("degenerate support")
    H = form.hessian
    v = np.zeros(n)
    try:
        v[idx] = linalg.solve(H[np.ix_(idx, idx)], form.b[idx], assume_a='pos')
    except linalg.LinAlgError as e:
        raise SolverError(f"degenerate support: {e}") from e
    r = (H @ v - form.b) / form.quadrature.weights
    residual = float(np.abs(r[idx]).max()) / _residual_scale(form)
    measure = DiscreteMeasure(form.quadrature, v, signed=True, support_threshold=support_threshold)
    return measure, SolveReport(1, residual, functional_value(form, v), 0, CONVERGED)


@dataclass(frozen=True)
class SplittingReport:
    max_difference: float
    relative_difference: float
    nodes_compared: int
    shift: float

    def to_dict(self) -> dict:
        return asdict(self)


def splitting_crosscheck(form: QuadraticForm, phi: RhsKind, M: Optional[float] = None,
                         tol: Optional[float] = None) -> SplittingReport:
    """
    Compare the signed solve for φ with the difference of two nonnegative solves

    u₂ solves the density problem for φ + M, u₁ the one for the constant M;
    on their common support u₂ − u₁ must equal the signed solution for φ.
    """
    q = form.quadrature
    values = rhs_values(phi, q.nodes)
    if M is None:
        peak = float(np.max(np.abs(values))) if values.size else 0.0
        M = 2.0 * peak if peak > 0 else 1.0
    shifted = values + M
    if M <= 0 or np.any(shifted <= 0):
        bad = int(np.argmin(shifted))
        raise ValueError(f"splitting needs phi + M > 0; node {bad} at {q.nodes[bad]} has {shifted[bad]}")
    sig = form.sigma_values
    sigma_zero = not np.any(sig)
    if not sigma_zero and np.any(sig <= 0):
        bad = int(np.argmin(sig))
        raise ValueError(f"splitting needs sigma == 0 or sigma > 0 everywhere; node {bad} at {q.nodes[bad]} has sigma = 0")

    upper, _ = solve_nonnegative(form.with_rhs(RhsKind.tabulated(shifted)), tol=tol)
    lower, _ = solve_nonnegative(form.with_rhs(RhsKind.constant(M)), tol=tol)
    common = upper.support_mask & lower.support_mask
    restrict = common if sigma_zero else None
    if not common.any():
        raise SolverError("degenerate support")
    signed, _ = solve_signed(form.with_rhs(phi), restrict_to=restrict)

    gap = np.abs((upper.u - lower.u) - signed.u)[common]
    peak = float(np.max(np.abs(signed.u[common])))
    difference = float(gap.max())
    return SplittingReport(difference, difference / peak if peak > 0 else difference, int(common.sum()), float(M))


def solve_pair(form: QuadraticForm, temporal_rhs: Optional[RhsKind], tol: Optional[float] = None,
               max_iter: Optional[int] = None, support_threshold: Optional[float] = None):
    """
    Density solve followed by the signed temporal solve on its support

    Returns:
        (u measure, u report, v measure or None, v report or None)
    """
    m_u, report_u = solve_nonnegative(form, tol=tol, max_iter=max_iter, support_threshold=support_threshold)
    if temporal_rhs is None or report_u.status == NOT_PSD:
        return m_u, report_u, None, None
    restrict = m_u.support_mask if not np.any(form.S) else None
    m_v, report_v = solve_signed(form.with_rhs(temporal_rhs), restrict_to=restrict,
                                 support_threshold=support_threshold)
    return m_u, report_u, m_v, report_v
