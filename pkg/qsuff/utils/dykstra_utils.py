"""
Feasibility search on (affine subspace) ∩ (PSD cone) with Dykstra's algorithm.

Hermitian variables are handled in real coordinates: the diagonal, then
sqrt(2) Re and sqrt(2) Im of the strict upper triangle. This map is an
isometry from the Hilbert-Schmidt geometry, so <F, X> = f . x and the affine
projection is an ordinary least-squares correction.
"""

import logging
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union
from ._other_utils import DimensionMismatch, NotHermitian, spawn_generators
from .linalg_utils import hermitian_part, random_hermitian

logger = logging.getLogger(__name__)

CONVERGENCE_STEP = 1e-10


def herm_to_real(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    iu = np.triu_indices(n, 1)
    upper = X[iu]
    return np.concatenate([np.real(np.diag(X)), np.sqrt(2) * upper.real, np.sqrt(2) * upper.imag])


def real_to_herm(x: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    k = iu[0].size
    X = np.zeros((n, n), dtype=complex)
    X[iu] = (x[n:n + k] + 1j * x[n + k:]) / np.sqrt(2)
    X = X + np.conj(X).T
    X[np.arange(n), np.arange(n)] = x[:n]
    return X


def mask_to_real(mask: np.ndarray) -> np.ndarray:
    """Real-coordinate mask of a symmetric boolean matrix mask."""
    n = mask.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([np.diag(mask), mask[iu], mask[iu]]).astype(bool)


def hermitian_constraints(E: np.ndarray, value: complex):
    """
    Splits a complex equation <E, X> = value on Hermitian X into two real
    constraints <F, X> = g with Hermitian F.
    """
    E = np.asarray(E, dtype=complex)
    F_re = (E + np.conj(E).T) / 2
    F_im = 1j * (E - np.conj(E).T) / 2
    return [(F_re, float(np.real(value))), (F_im, float(np.imag(value)))]


@dataclass
class AffinePsdProblem:
    """
    The feasibility problem  <F_k, X> = g_k (all k),  X[mask] = 0,  X PSD.

    Parameters:
    ===========
        * dim (int): Size of the Hermitian variable X.
        * F (np.ndarray): Hermitian constraint matrices, shape (m, dim, dim).
        * g (np.ndarray): Real right-hand sides of length m.
        * fixed_zero (np.ndarray): Optional symmetric boolean mask of entries forced to zero.
        * objective (np.ndarray): Optional Hermitian direction D that biases the random starts and along which feasible points are pushed.
    """

    dim: int
    F: np.ndarray
    g: np.ndarray
    fixed_zero: Optional[np.ndarray] = None
    objective: Optional[np.ndarray] = None
    _projector: Optional["_AffineProjector"] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.F = np.asarray(self.F, dtype=complex).reshape(-1, self.dim, self.dim)
        g = np.asarray(self.g, dtype=complex).reshape(-1)
        if g.size != self.F.shape[0]:
            raise DimensionMismatch(f"{self.F.shape[0]} constraints but {g.size} right-hand sides.")
        if np.max(np.abs(self.F - np.conj(np.transpose(self.F, (0, 2, 1)))), initial=0.0) > 1e-12:
            raise NotHermitian("Constraint matrices must be Hermitian.")
        if np.max(np.abs(g.imag), initial=0.0) > 1e-12:
            raise ValueError("Right-hand sides must be real.")
        self.g = g.real
        if self.fixed_zero is not None:
            self.fixed_zero = np.asarray(self.fixed_zero, dtype=bool)
            self.fixed_zero = self.fixed_zero | self.fixed_zero.T
        if self.objective is not None:
            self.objective = hermitian_part(np.asarray(self.objective, dtype=complex))

    @classmethod
    def from_equations(cls, dim: int, equations: Sequence, fixed_zero=None, objective=None) -> "AffinePsdProblem":
        """Builds the problem from complex equations (E, value) meaning <E, X> = value."""
        F, g = [], []
        for E, value in equations:
            for F_k, g_k in hermitian_constraints(E, value):
                if np.abs(F_k).max() > 0 or abs(g_k) > 0:
                    F.append(F_k)
                    g.append(g_k)
        return cls(dim, np.array(F).reshape(-1, dim, dim), np.array(g), fixed_zero, objective)

    @property
    def projector(self) -> "_AffineProjector":
        if self._projector is None:
            self._projector = _AffineProjector(self)
        return self._projector

    def affine_residual(self, X: np.ndarray) -> float:
        return self.projector.residual(herm_to_real(X))


class _AffineProjector:

    """Orthogonal projection onto the affine set, from a precomputed SVD of the constraint rows."""

    def __init__(self, problem: AffinePsdProblem):
        n = problem.dim
        N = n * n
        fixed = mask_to_real(problem.fixed_zero) if problem.fixed_zero is not None else np.zeros(N, dtype=bool)
        self.free = ~fixed
        rows = np.array([herm_to_real(F) for F in problem.F]).reshape(-1, N)
        self.rows = rows[:, self.free]
        self.rows_fixed = rows[:, ~self.free]
        self.g = problem.g
        self.empty = False
        if self.rows.shape[0] == 0:
            self.Q = np.zeros((0, int(self.free.sum())))
            self.h = np.zeros(0)
            return
        U, s, Vt = np.linalg.svd(self.rows, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
        self.Q = Vt[:rank]
        self.h = (U[:, :rank].T @ self.g) / s[:rank]
        consistent = np.linalg.norm(self.rows @ (self.Q.T @ self.h) - self.g) <= 1e-9 * (1 + np.linalg.norm(self.g))
        if not consistent:
            logger.debug("Affine constraints are inconsistent: the feasible set is empty.")
            self.empty = True

    def project(self, x: np.ndarray) -> np.ndarray:
        y = np.zeros_like(x)
        xf = x[self.free]
        y[self.free] = xf - self.Q.T @ (self.Q @ xf - self.h)
        return y

    def residual(self, x: np.ndarray) -> float:
        value = np.linalg.norm(self.rows @ x[self.free] - self.g) if self.rows.size else 0.0
        return float(value + np.linalg.norm(x[~self.free]))


def project_psd(x: np.ndarray, n: int) -> np.ndarray:
    X = real_to_herm(x, n)
    w, V = np.linalg.eigh(X)
    w = np.clip(w, 0.0, None)
    return herm_to_real((V * w) @ np.conj(V).T)


@dataclass
class DykstraRun:
    """Outcome of one Dykstra run from one start."""

    X: Optional[np.ndarray]
    feasible: bool
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


def dykstra_project(
    P: AffinePsdProblem,
    start: np.ndarray,
    max_iter: int = 5000,
    feas_tol: float = 1e-7,
    require_convergence: bool = False,
    early_accept: Optional[Callable[[np.ndarray], bool]] = None,
) -> DykstraRun:
    """
    Runs Dykstra's algorithm from one start.

    Each iteration projects onto the affine set and then onto the PSD cone
    (eigenvalue clipping), both with Dykstra correction terms. An iterate is
    feasible when its affine residual is at most feas_tol; being a PSD
    projection, its eigenvalues are nonnegative.

    Parameters:
    ===========
        * P (AffinePsdProblem): The problem.
        * start (np.ndarray): Hermitian starting matrix.
        * max_iter (int): Iteration budget.
        * feas_tol (float): Affine residual tolerance.
        * require_convergence (bool): Keep iterating past the first feasible point until the step is at most 1e-10.
        * early_accept (Callable): A feasible iterate passing this predicate is returned at once.

    Returns:
    ========
        * DykstraRun: The last feasible iterate (if any) together with the residual trace.
    """
    projector = P.projector
    n = P.dim
    if projector.empty:
        return DykstraRun(None, False, False, 0)
    x = herm_to_real(hermitian_part(np.asarray(start, dtype=complex)))
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    trace = []
    for it in range(1, max_iter + 1):
        y = projector.project(x + p)
        p = x + p - y
        x_new = project_psd(y + q, n)
        q = y + q - x_new
        residual = projector.residual(x_new)
        trace.append(residual)
        step = np.linalg.norm(x_new - x)
        x = x_new
        if residual <= feas_tol:
            X = real_to_herm(x, n)
            if early_accept is not None and early_accept(X):
                return DykstraRun(X, True, False, it, trace)
            if not require_convergence or step <= CONVERGENCE_STEP:
                return DykstraRun(X, True, step <= CONVERGENCE_STEP, it, trace)
    logger.debug("Dykstra budget of %d iterations exhausted (last residual %.3e).", max_iter, trace[-1] if trace else np.nan)
    return DykstraRun(None, False, False, max_iter, trace)


def _random_start(P: AffinePsdProblem, rng: np.random.Generator, center: Optional[np.ndarray], scale: float) -> np.ndarray:
    R = random_hermitian(P.dim, rng)
    R = scale * R / max(np.linalg.norm(R), 1e-300)
    base = np.zeros((P.dim, P.dim), dtype=complex) if center is None else center
    if P.objective is not None:
        D = P.objective / max(np.linalg.norm(P.objective), 1e-300)
        return base + R + scale * D
    return base + R


def _push(P: AffinePsdProblem, X: np.ndarray, max_iter: int, feas_tol: float, steps: int) -> np.ndarray:
    """Local push along the objective direction, keeping the best feasible point found."""
    D = P.objective / max(np.linalg.norm(P.objective), 1e-300)
    best, best_value = X, np.real(np.vdot(D, X))
    for k in range(steps):
        run = dykstra_project(P, best + D * (1.0 + np.linalg.norm(best)) / (k + 1), max_iter, feas_tol)
        if run.feasible and np.real(np.vdot(D, run.X)) > best_value:
            best, best_value = run.X, np.real(np.vdot(D, run.X))
    return best


@dataclass
class DykstraSearch:
    """Outcome of a multi-start search: the first verified witness in seed order, if any."""

    witness: Optional[np.ndarray]
    start_index: Optional[int]
    runs: list


def dykstra_search(
    P: AffinePsdProblem,
    starts: Union[int, Sequence[np.ndarray]] = 20,
    max_iter: int = 5000,
    seed: Optional[int] = 0,
    feas_tol: float = 1e-7,
    center: Optional[np.ndarray] = None,
    scale: Optional[float] = None,
    require_convergence: bool = False,
    early_accept: Optional[Callable[[np.ndarray], bool]] = None,
    accept: Optional[Callable[[np.ndarray], bool]] = None,
    push_steps: int = 2,
    threads: int = 1,
) -> DykstraSearch:
    """
    Multi-start Dykstra search. Starts are random Hermitian perturbations of
    `center` (or the given matrices); a run's final point is a witness when it
    is feasible and passes `accept`. Starts run in parallel when threads > 1,
    and the witness of the lowest start index is returned, so the outcome
    depends on the seed only.
    """
    if isinstance(starts, (int, np.integer)):
        scale = float(np.sqrt(P.dim)) if scale is None else scale
        start_points = [_random_start(P, rng, center, scale) for rng in spawn_generators(seed, int(starts))]
    else:
        start_points = [np.asarray(s, dtype=complex) for s in starts]

    def run_one(start):
        run = dykstra_project(P, start, max_iter, feas_tol, require_convergence, early_accept)
        if run.feasible and P.objective is not None and push_steps > 0:
            run.X = _push(P, run.X, max_iter, feas_tol, push_steps)
        return run

    def verified(run):
        return run.feasible and (accept is None or accept(run.X))

    runs = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run_one, start_points))
        for index, run in enumerate(runs):
            if verified(run):
                return DykstraSearch(run.X, index, runs)
        return DykstraSearch(None, None, runs)

    for index, start in enumerate(start_points):
        run = run_one(start)
        runs.append(run)
        if verified(run):
            logger.debug("Start %d produced a witness after %d iterations.", index, run.iterations)
            return DykstraSearch(run.X, index, runs)
    return DykstraSearch(None, None, runs)


def dykstra_feasibility(
    P: AffinePsdProblem,
    starts: Union[int, Sequence[np.ndarray]] = 20,
    max_iter: int = 5000,
    seed: Optional[int] = 0,
    feas_tol: float = 1e-7,
    push_steps: int = 2,
    threads: int = 1,
) -> Optional[np.ndarray]:
    """
    Searches for a PSD matrix satisfying the affine constraints.

    Parameters:
    ===========
        * P (AffinePsdProblem): The problem.
        * starts (int | Sequence[np.ndarray]): Number of random starts, or explicit starting matrices.
        * max_iter (int): Iteration budget per start.
        * seed (int): Seed of the random starts.
        * feas_tol (float): Affine residual tolerance of an accepted point.
        * push_steps (int): Restarts along the objective direction after a feasible point is found; unused without an objective.
        * threads (int): Number of worker threads.

    Returns:
    ========
        * np.ndarray | None: A feasible Hermitian matrix, or None once the budget is exhausted.
    """
    return dykstra_search(P, starts, max_iter, seed, feas_tol, push_steps=push_steps, threads=threads).witness
