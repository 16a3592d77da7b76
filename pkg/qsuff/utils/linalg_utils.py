"""
Created on Mon Oct  5 09:40 2026

This script contains the dense complex linear algebra primitives every other
module builds on: a cyclic Jacobi eigensolver for Hermitian matrices, spectral
functions (support projections, imaginary powers), partial traces and the
Hilbert-Schmidt geometry of operator spaces.
"""

import logging
import numpy as np
import scipy.linalg
from typing import Optional, Sequence, Tuple
from ._other_utils import (
    Tolerances,
    NotHermitian,
    InvalidState,
    SingularState,
    DimensionMismatch,
    resolve_tolerances,
)

logger = logging.getLogger(__name__)

# Rank decisions (ranges, nullspaces) share one relative singular value threshold.
RANK_RTOL = 1e-8


def as_square(A, name: str = 'matrix') -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}.")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(A).T


def frobenius(A: np.ndarray) -> float:
    return float(np.linalg.norm(A))


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return (A + dagger(A)) / 2


def is_hermitian(A, tol: float = 1e-9) -> bool:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    return bool(np.max(np.abs(A - dagger(A)), initial=0.0) <= tol)


def is_psd(A, tol: float = 1e-7, herm_tol: float = 1e-9) -> bool:
    if not is_hermitian(A, herm_tol):
        return False
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return True
    return bool(np.linalg.eigvalsh(hermitian_part(A))[0] >= -tol)


def is_density(A, tol: float = 1e-7, herm_tol: float = 1e-9) -> bool:
    return is_psd(A, tol, herm_tol) and abs(np.trace(np.asarray(A)) - 1) <= tol


def min_eigenvalue(A: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(np.asarray(A, dtype=complex)))[0])


def eig_hermitian(H, tolerances: Optional[Tolerances] = None, max_sweeps: int = 100) -> Tuple[np.ndarray, np.ndarray]:
    """
    Diagonalizes a Hermitian matrix with the cyclic Jacobi method.

    Each rotation first removes the phase of the pivot element, reducing the 2x2
    problem to a real symmetric one, then applies the classical Jacobi rotation.
    Sweeps stop once the largest off-diagonal modulus is at most 1e-12 times the
    Frobenius norm of H.

    Parameters:
    ===========
        * H (np.ndarray): A Hermitian matrix (within eq_tol).
        * tolerances (Tolerances): Tolerances in use; defaults to DEFAULT_TOLERANCES.
        * max_sweeps (int): Upper bound on the number of full sweeps.

    Returns:
    ========
        * Tuple[np.ndarray, np.ndarray]: Ascending real eigenvalues and a unitary whose columns are the eigenvectors.

    Raises:
    =======
        * NotHermitian: If H fails the Hermitian predicate.
    """
    tol = resolve_tolerances(tolerances)
    H = as_square(H, 'H')
    if not is_hermitian(H, tol.eq_tol):
        raise NotHermitian(f"Matrix is not Hermitian within {tol.eq_tol}.")

    n = H.shape[0]
    A = hermitian_part(H).astype(complex)
    V = np.eye(n, dtype=complex)
    threshold = 1e-12 * np.linalg.norm(A)

    for sweep in range(max_sweeps):
        off = np.abs(A - np.diag(np.diag(A)))
        if n < 2 or off.max() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= threshold:
                    continue
                phase = apq / r
                theta = (A[q, q].real - A[p, p].real) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                G = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ G
                A[idx, :] = dagger(G) @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ G
    else:
        logger.warning("Jacobi eigensolver reached %d sweeps without meeting the off-diagonal threshold.", max_sweeps)

    evals = np.real(np.diag(A))
    order = np.argsort(evals, kind='stable')
    return evals[order], V[:, order]


def cluster_eigenvalues(evals: np.ndarray, rel_tol: float) -> list:
    """
    Groups ascending eigenvalues into clusters; neighbours belong to one cluster
    iff their gap is at most rel_tol * (1 + |lambda|).

    Returns:
    ========
        * list[np.ndarray]: Index arrays, one per cluster, in ascending order.
    """
    evals = np.asarray(evals, dtype=float)
    if evals.size == 0:
        return []
    clusters, current = [], [0]
    for i in range(1, evals.size):
        scale = 1.0 + max(abs(evals[i]), abs(evals[i - 1]))
        if evals[i] - evals[i - 1] <= rel_tol * scale:
            current.append(i)
        else:
            clusters.append(np.array(current))
            current = [i]
    clusters.append(np.array(current))
    return clusters


def cluster_gap_statistics(evals: np.ndarray, clusters: list) -> dict:
    """Smallest gap between clusters and largest spread inside one, both relative."""
    min_gap, max_spread = np.inf, 0.0
    for k, cluster in enumerate(clusters):
        values = evals[cluster]
        max_spread = max(max_spread, float(values.max() - values.min()) / (1.0 + abs(values.max())))
        if k + 1 < len(clusters):
            following = evals[clusters[k + 1]]
            min_gap = min(min_gap, float(following.min() - values.max()) / (1.0 + abs(following.min())))
    return {'min_relative_gap': float(min_gap), 'max_relative_spread': max_spread, 'clusters': len(clusters)}


def _checked_psd(rho, tol: Tolerances, name: str = 'state') -> np.ndarray:
    rho = as_square(rho, name)
    if not is_psd(rho, tol.feas_tol, tol.eq_tol):
        raise InvalidState(f"The {name} must be positive semidefinite.")
    return rho


def support_basis(rho, tolerances: Optional[Tolerances] = None) -> np.ndarray:
    """
    Orthonormal basis (as isometry columns) of the support of a PSD matrix: the
    eigenvectors whose eigenvalue exceeds eig_cluster_tol times the largest one.
    """
    tol = resolve_tolerances(tolerances)
    rho = _checked_psd(rho, tol)
    evals, U = eig_hermitian(rho, tol)
    lam_max = max(float(evals[-1]), 0.0) if evals.size else 0.0
    if lam_max <= 0.0:
        return np.zeros((rho.shape[0], 0), dtype=complex)
    keep = evals > tol.eig_cluster_tol * lam_max
    return U[:, keep]


def support_projection(rho, tolerances: Optional[Tolerances] = None) -> np.ndarray:
    """
    The support s(rho) of a PSD matrix: the smallest projection P with P rho P = rho.

    Parameters:
    ===========
        * rho (np.ndarray): A positive semidefinite matrix.
        * tolerances (Tolerances): Tolerances in use.

    Returns:
    ========
        * np.ndarray: The orthogonal projection onto the span of eigenvectors with eigenvalue > eig_cluster_tol * lambda_max.
    """
    W = support_basis(rho, tolerances)
    return W @ dagger(W)


def imag_powers(rho, t_grid: Sequence[float], tolerances: Optional[Tolerances] = None, support_only: bool = False) -> list:
    """
    rho^{it} for every t of a grid, sharing one eigendecomposition.

    With support_only=True, rho may be singular and rho^{it} is taken on the
    support of rho (zero on its kernel), as in Connes cocycles of non-faithful
    states; otherwise a (numerically) singular rho raises SingularState.
    """
    tol = resolve_tolerances(tolerances)
    rho = _checked_psd(rho, tol)
    evals, U = eig_hermitian(rho, tol)
    if support_only:
        lam_max = max(float(evals[-1]), 0.0)
        keep = evals > tol.eig_cluster_tol * lam_max
    else:
        if evals[0] <= tol.eig_cluster_tol:
            raise SingularState(f"Minimum eigenvalue {evals[0]:.3e} does not exceed {tol.eig_cluster_tol}.")
        keep = np.ones_like(evals, dtype=bool)
    logs = np.log(np.where(keep, evals, 1.0))
    powers = []
    for t in t_grid:
        phases = np.where(keep, np.exp(1j * float(t) * logs), 0.0)
        powers.append((U * phases) @ dagger(U))
    return powers


def matrix_imag_power(rho, t: float, tolerances: Optional[Tolerances] = None, support_only: bool = False) -> np.ndarray:
    """
    The unitary rho^{it} = U diag(lambda_k^{it}) U* of a strictly positive matrix.

    Parameters:
    ===========
        * rho (np.ndarray): A PSD matrix with minimum eigenvalue > eig_cluster_tol.
        * t (float): The real exponent.
        * tolerances (Tolerances): Tolerances in use.
        * support_only (bool): Take the power on the support of rho instead of raising on singular input.

    Returns:
    ========
        * np.ndarray: The matrix rho^{it}.

    Raises:
    =======
        * SingularState: If the minimum eigenvalue is at most eig_cluster_tol and support_only is False.
    """
    return imag_powers(rho, [t], tolerances, support_only)[0]


def partial_trace(X, dims: Tuple[int, int], side: str = 'second') -> np.ndarray:
    """
    Partial trace over one factor of C^{d1} (x) C^{d2}.

    Parameters:
    ===========
        * X (np.ndarray): A (d1*d2) x (d1*d2) matrix.
        * dims (Tuple[int, int]): The factor dimensions (d1, d2).
        * side (str): The factor traced out, 'first' or 'second'.

    Returns:
    ========
        * np.ndarray: A d2 x d2 matrix (side='first') or d1 x d1 matrix (side='second').

    Raises:
    =======
        * DimensionMismatch: If X does not factor as declared.
    """
    d1, d2 = int(dims[0]), int(dims[1])
    X = np.asarray(X, dtype=complex)
    if X.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(f"Matrix of shape {X.shape} does not factor as {d1} x {d2}.")
    T = X.reshape(d1, d2, d1, d2)
    if side == 'second':
        return np.einsum('ajbj->ab', T)
    elif side == 'first':
        return np.einsum('iaib->ab', T)
    else:
        raise ValueError("Invalid side. Choose 'first' or 'second'.")


def hs_inner(A, B) -> complex:
    """Hilbert-Schmidt inner product tr[A* B], conjugate-linear in A."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimensionMismatch(f"Shapes {A.shape} and {B.shape} differ.")
    return complex(np.vdot(A, B))


def range_basis(X: np.ndarray, rel_tol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column space of X under the shared rank policy."""
    X = np.asarray(X, dtype=complex)
    if X.size == 0:
        return np.zeros((X.shape[0], 0), dtype=complex)
    return scipy.linalg.orth(X, rcond=rel_tol)


def nullspace(X: np.ndarray, rel_tol: float = RANK_RTOL, abs_tol: float = 0.0) -> np.ndarray:
    """
    Orthonormal basis of the nullspace of X. Singular values up to
    max(rel_tol * s_max, abs_tol) count as zero.
    """
    X = np.asarray(X, dtype=complex)
    if X.shape[0] == 0:
        return np.eye(X.shape[1], dtype=complex)
    # Vh is square in both branches.
    _, s, Vh = scipy.linalg.svd(X, full_matrices=X.shape[0] < X.shape[1])
    cutoff = max(rel_tol * s.max(initial=0.0), abs_tol)
    rank = int(np.sum(s > cutoff))
    return np.conj(Vh[rank:]).T


def nearest_isometry(V: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition V = U P."""
    U, _ = scipy.linalg.polar(np.asarray(V, dtype=complex), side='right')
    return U


def block_diag(*blocks) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=complex) for b in blocks])


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian_part(Z)


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    rank = d if rank is None else rank
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ dagger(G)
    return rho / np.trace(rho).real


def gell_mann_basis(d: int) -> np.ndarray:
    """
    The d^2 - 1 generalized Gell-Mann matrices, normalized to unit Hilbert-Schmidt norm.
    Together with I/sqrt(d) they form an orthonormal basis of the Hermitian matrices.
    """
    basis = []
    for j in range(d):
        for k in range(j + 1, d):
            S = np.zeros((d, d), dtype=complex)
            S[j, k] = S[k, j] = 1 / np.sqrt(2)
            basis.append(S)
            A = np.zeros((d, d), dtype=complex)
            A[j, k], A[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis.append(A)
    for l in range(1, d):
        D = np.zeros((d, d), dtype=complex)
        D[np.arange(l), np.arange(l)] = 1.0
        D[l, l] = -l
        basis.append(D / np.sqrt(l * (l + 1)))
    return np.array(basis).reshape(-1, d, d)


def informationally_complete_states(d: int) -> np.ndarray:
    """
    A fixed informationally complete family of d^2 density matrices with rho_0 = I/d
    and rho_n = (I + G_n / (2 ||G_n||))/d for the Gell-Mann matrices G_n.
    """
    family = [np.eye(d, dtype=complex) / d]
    for G in gell_mann_basis(d):
        family.append((np.eye(d) + G / (2 * np.linalg.norm(G, 2))) / d)
    return np.array(family)
