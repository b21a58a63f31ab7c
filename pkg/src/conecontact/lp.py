"""Phase-1 simplex (steepest-edge pricing, Bland fallback) and the Farkas alternative.

Two entry points:

``phase_one(A, b)``
    decides ``{x >= 0 : A x = b}`` and returns the final basis, the primal
    point and the phase-1 dual vector.
``lp_feasibility(rows)``
    decides ``rows @ y >= 1`` for free ``y``; on infeasibility returns the
    Farkas ray ``lam >= 0, sum(lam) = 1, lam @ rows = 0``.

The feasibility problem is solved through the equality system on ``lam``
(one row per column of ``rows`` plus the normalisation), so the tableau has
``ncols + 1`` rows regardless of how many generator rows there are. The
primal point ``y`` is then read off the phase-1 duals.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels

PIVOT_TOL = 1e-9
CERT_TOL = 1e-9


class IterationLimitError(RuntimeError):
    """The simplex exceeded its pivot budget."""

    def __init__(self, iterations, limit):
        super().__init__(f"simplex iteration limit reached ({iterations} >= {limit} pivots)")
        self.iterations = iterations
        self.limit = limit


@dataclass(frozen=True)
class PhaseOneResult:
    feasible: bool
    x: np.ndarray
    dual: np.ndarray
    basis: np.ndarray
    objective: float
    iterations: int


def phase_one(A, b, tol=PIVOT_TOL, max_iter=None) -> PhaseOneResult:
    """Phase-1 simplex for ``A x = b, x >= 0`` with artificial variables.

    The tableau is only used to discover the optimal basis. Primal values
    and duals are recomputed from the original data on that basis, which
    keeps round-off from accumulated pivots out of the returned vectors.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({m},)")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("LP data must be finite")
    flip = b < 0
    A = np.where(flip[:, None], -A, A)
    b[flip] *= -1.0

    full = np.hstack([A, np.eye(m)])
    T = np.zeros((m + 1, n + m + 1))
    T[:m, : n + m] = full
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m, dtype=np.int64)
    if max_iter is None:
        max_iter = 10 * (m + n)

    status, iterations, _ = kernels.simplex_pivot_loop(T, basis, float(tol), int(max_iter))
    if status == kernels.ITERATION_LIMIT:
        raise IterationLimitError(iterations, max_iter)
    if status == kernels.UNBOUNDED:  # cannot happen for phase 1; kept as a guard
        raise RuntimeError("phase-1 objective reported unbounded")

    B = full[:, basis]
    cost = np.zeros(n + m)
    cost[n:] = 1.0
    try:
        xb = np.linalg.solve(B, b)
        dual = np.linalg.solve(B.T, cost[basis])
    except np.linalg.LinAlgError:
        xb, *_ = np.linalg.lstsq(B, b, rcond=None)
        dual, *_ = np.linalg.lstsq(B.T, cost[basis], rcond=None)
    x_full = np.zeros(n + m)
    x_full[basis] = xb
    objective = float(x_full[n:].sum())
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    dual = np.where(flip, -dual, dual)
    return PhaseOneResult(
        feasible=objective <= tol * scale,
        x=x_full[:n],
        dual=dual,
        basis=basis.copy(),
        objective=objective,
        iterations=int(iterations),
    )


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of ``rows @ y >= 1``: exactly one of ``y`` / ``lam`` is set."""

    y: Optional[np.ndarray]
    lam: Optional[np.ndarray]
    residual: float
    iterations: int

    @property
    def feasible(self):
        return self.y is not None


def l1_dual_tableau(rows):
    """Slack-basis tableau of the dual used by :func:`min_l1_point`."""
    rows = np.asarray(rows, dtype=np.float64)
    nrows, ncols = rows.shape
    k = 2 * ncols
    T = np.zeros((k + 1, nrows + k + 1))
    T[:k, :nrows] = np.vstack([rows.T, -rows.T])
    T[:k, nrows : nrows + k] = np.eye(k)
    T[:k, -1] = 1.0
    T[k, :nrows] = -1.0
    return T, np.arange(nrows, nrows + k, dtype=np.int64)


def min_l1_point(rows, tol=PIVOT_TOL, max_iter=None):
    """``argmin |y|_1`` subject to ``rows @ y >= 1``, or None if infeasible.

    Solved through the dual ``max 1.lam`` s.t. ``-1 <= rows.T @ lam <= 1``,
    ``lam >= 0``, whose slack basis is feasible, so no phase 1 is needed.
    ``y`` is read off the optimal duals. Returns ``(y, iterations)``.
    """
    rows = np.asarray(rows, dtype=np.float64)
    nrows, ncols = rows.shape
    k = 2 * ncols
    A = np.vstack([rows.T, -rows.T])
    T, basis = l1_dual_tableau(rows)
    if max_iter is None:
        max_iter = 10 * (k + nrows)
    status, iterations, _ = kernels.simplex_pivot_loop(T, basis, float(tol), int(max_iter))
    if status == kernels.ITERATION_LIMIT:
        raise IterationLimitError(iterations, max_iter)
    if status == kernels.UNBOUNDED:
        return None, int(iterations)
    full = np.hstack([A, np.eye(k)])
    cost = np.zeros(nrows + k)
    cost[:nrows] = -1.0
    try:
        u = -np.linalg.solve(full[:, basis].T, cost[basis])
    except np.linalg.LinAlgError:
        u = -np.linalg.lstsq(full[:, basis].T, cost[basis], rcond=None)[0]
    return u[:ncols] - u[ncols:], int(iterations)


def lp_feasibility(rows, tol=PIVOT_TOL, max_iter=None, regularize=True) -> FeasibilityResult:
    """Decide ``rows @ y >= 1`` and return the matching certificate.

    With ``regularize`` the returned ``y`` is the l1-smallest solution
    (see :func:`min_l1_point`); otherwise it is whatever the phase-1 duals
    give, which is an arbitrary vertex.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("rows must be a non-empty 2-D matrix")
    nrows, ncols = rows.shape
    A = np.vstack([rows.T, np.ones((1, nrows))])
    b = np.zeros(ncols + 1)
    b[-1] = 1.0
    res = phase_one(A, b, tol=tol, max_iter=max_iter)

    if res.feasible:
        lam = np.clip(res.x, 0.0, None)
        lam = lam / lam.sum()
        residual = float(np.abs(lam @ rows).max(initial=0.0))
        return FeasibilityResult(None, lam, residual, res.iterations)

    # Phase-1 duals u = (u_y, u_z) satisfy rows @ u_y + u_z <= 0 with u_z > 0.
    u_y, u_z = res.dual[:ncols], res.dual[ncols]
    if u_z <= 0:
        raise RuntimeError(f"phase-1 dual has non-positive normalisation component {u_z!r}")
    y = -u_y / u_z
    iterations = res.iterations
    if regularize:
        y_reg, extra = min_l1_point(rows, tol=tol, max_iter=max_iter)
        iterations += extra
        if y_reg is not None and (rows @ y_reg).min() > 0:
            y = y_reg
    vals = rows @ y
    low = float(vals.min())
    if low > 0:
        y = y / low
        vals = rows @ y
    residual = float(max(0.0, 1.0 - vals.min()))
    return FeasibilityResult(y, None, residual, iterations)
