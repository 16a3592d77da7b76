"""
Simplex method for linear programs in equality form

    maximize c.x  subject to  A x = b,  x >= 0

using a full-tableau two-phase implementation with Bland's rule for both the
entering and the leaving variable, so that it cannot cycle. Redundant
equality rows are removed beforehand by a rank-revealing (column pivoted) QR
factorization, and inconsistent systems are reported as infeasible.
"""

import logging
import numpy as np
import scipy.linalg
from dataclasses import dataclass, field
from typing import Optional
from ._other_utils import DimensionMismatch, UnboundedError

logger = logging.getLogger(__name__)

REDUNDANCY_TOL = 1e-10


@dataclass
class LinearProgram:
    """
    A linear program in equality form with nonnegative variables.

    Parameters:
    ===========
        * A_eq (np.ndarray): The m x n real equality matrix.
        * b_eq (np.ndarray): The right-hand side of length m.
        * c (np.ndarray): The objective (maximized) of length n; zeros for pure feasibility.
    """

    A_eq: np.ndarray
    b_eq: np.ndarray
    c: Optional[np.ndarray] = None

    def __post_init__(self):
        self.A_eq = np.atleast_2d(np.asarray(self.A_eq, dtype=float))
        self.b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if self.A_eq.shape[0] != self.b_eq.size:
            raise DimensionMismatch(f"A_eq has {self.A_eq.shape[0]} rows but b_eq has {self.b_eq.size} entries.")
        self.c = np.zeros(self.n_vars) if self.c is None else np.asarray(self.c, dtype=float).reshape(-1)
        if self.c.size != self.n_vars:
            raise DimensionMismatch(f"Objective has {self.c.size} entries for {self.n_vars} variables.")

    @property
    def n_vars(self) -> int:
        return self.A_eq.shape[1]


@dataclass
class LPResult:
    """Outcome of lp_solve: status is 'feasible' or 'infeasible'."""

    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    phase_one_value: float = 0.0
    iterations: int = 0
    removed_rows: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.status == 'feasible'


def remove_redundant_rows(A: np.ndarray, b: np.ndarray, tol: float = REDUNDANCY_TOL):
    """
    Keeps a maximal linearly independent subset of the rows of A.

    Returns:
    ========
        * Tuple[np.ndarray, np.ndarray, list, bool]: Reduced A and b, indices of removed rows, and whether the
          original system A x = b is consistent.
    """
    m = A.shape[0]
    if m == 0:
        return A, b, [], True
    _, R, piv = scipy.linalg.qr(A.T, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > tol * scale))
    keep = np.sort(piv[:rank])
    removed = sorted(set(range(m)) - set(keep.tolist()))
    if rank == 0:
        return A[keep], b[keep], removed, bool(np.linalg.norm(b) <= 1e-9)
    x_ls = np.linalg.lstsq(A[keep], b[keep], rcond=None)[0]
    consistent = np.linalg.norm(A @ x_ls - b) <= 1e-9 * (1 + np.linalg.norm(b))
    return A[keep], b[keep], removed, bool(consistent)


def _pivot_col(T: np.ndarray, ncols: int, tol: float) -> Optional[int]:
    """Bland's rule: the first column with a negative reduced cost."""
    candidates = np.nonzero(T[-1, :ncols] < -tol)[0]
    return int(candidates[0]) if candidates.size else None


def _pivot_row(T: np.ndarray, basis: np.ndarray, pivcol: int, nrows: int, tol: float) -> Optional[int]:
    """Minimum ratio test; ties go to the row whose basic variable has the smallest index."""
    column = T[:nrows, pivcol]
    rows = np.nonzero(column > tol)[0]
    if rows.size == 0:
        return None
    ratios = T[rows, -1] / column[rows]
    best = ratios.min()
    ties = rows[ratios <= best + tol * (1 + abs(best))]
    return int(ties[np.argmin(basis[ties])])


def _apply_pivot(T: np.ndarray, basis: np.ndarray, pivrow: int, pivcol: int):
    basis[pivrow] = pivcol
    T[pivrow] = T[pivrow] / T[pivrow, pivcol]
    for irow in range(T.shape[0]):
        if irow != pivrow:
            T[irow] = T[irow] - T[irow, pivcol] * T[pivrow]


def _solve_simplex(T: np.ndarray, basis: np.ndarray, nrows: int, ncols: int, tol: float, maxiter: int, nit0: int = 0):
    """
    Pivots until no reduced cost in the last row is negative.

    Returns:
    ========
        * Tuple[int, Optional[int]]: Iteration count and, if unbounded, the column with no positive entry.
    """
    nit = nit0
    while nit < maxiter:
        pivcol = _pivot_col(T, ncols, tol)
        if pivcol is None:
            return nit, None
        pivrow = _pivot_row(T, basis, pivcol, nrows, tol)
        if pivrow is None:
            return nit, pivcol
        _apply_pivot(T, basis, pivrow, pivcol)
        nit += 1
    raise RuntimeError(f"Simplex did not terminate within {maxiter} iterations.")


def lp_solve(P: LinearProgram, tol: float = 1e-9, maxiter: int = 10000) -> LPResult:
    """
    Solves a linear program exactly with the two-phase simplex method.

    Parameters:
    ===========
        * P (LinearProgram): The program (maximization).
        * tol (float): Pivoting tolerance; a phase-1 optimum above tol certifies infeasibility.
        * maxiter (int): Iteration guard.

    Returns:
    ========
        * LPResult: 'feasible' with the optimal vertex x and objective c.x, or 'infeasible'.

    Raises:
    =======
        * UnboundedError: If the objective is unbounded above; the error carries a ray.
    """
    A, b, removed, consistent = remove_redundant_rows(P.A_eq, P.b_eq)
    if not consistent:
        logger.debug("Equality system is inconsistent; LP infeasible without pivoting.")
        return LPResult('infeasible', phase_one_value=np.inf, removed_rows=removed)

    n = P.n_vars
    m = A.shape[0]
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    # Rows: m constraints, phase-2 objective, phase-1 objective.
    T = np.zeros((m + 2, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -P.c
    T[m + 1, :n] = -A.sum(axis=0)
    T[m + 1, -1] = -b.sum()
    basis = np.arange(n, n + m)

    nit1, _ = _solve_simplex(T, basis, m, n + m, tol, maxiter)
    phase_one_value = -T[-1, -1]
    if phase_one_value > tol:
        logger.debug("Phase 1 optimum %.3e exceeds %.1e: infeasible.", phase_one_value, tol)
        return LPResult('infeasible', phase_one_value=float(phase_one_value), iterations=nit1, removed_rows=removed)

    # Drive artificial variables out of the basis, dropping rows that turn out redundant.
    keep_rows = []
    for row in range(m):
        if basis[row] < n:
            keep_rows.append(row)
            continue
        candidates = np.nonzero(np.abs(T[row, :n]) > tol)[0]
        if candidates.size:
            _apply_pivot(T, basis, row, int(candidates[0]))
            keep_rows.append(row)
    T = np.vstack([T[keep_rows], T[m:m + 1]])
    T = np.hstack([T[:, :n], T[:, -1:]])
    basis = basis[keep_rows]
    m2 = len(keep_rows)

    nit2, unbounded_col = _solve_simplex(T, basis, m2, n, tol, maxiter, nit0=nit1)
    if unbounded_col is not None:
        ray = np.zeros(n)
        ray[unbounded_col] = 1.0
        for row, var in enumerate(basis):
            ray[var] = -T[row, unbounded_col]
        raise UnboundedError("The linear program is unbounded.", ray=ray)

    x = np.zeros(n)
    x[basis] = T[:m2, -1]
    x = np.where((x < 0) & (x > -tol), 0.0, x)
    residual = np.linalg.norm(P.A_eq @ x - P.b_eq)
    if residual > 1e-9 * (1 + np.linalg.norm(P.b_eq)):
        logger.warning("Simplex solution violates the equality constraints by %.3e.", residual)
    return LPResult('feasible', x=x, objective=float(P.c @ x), phase_one_value=float(max(phase_one_value, 0.0)),
                    iterations=nit2, removed_rows=removed)
