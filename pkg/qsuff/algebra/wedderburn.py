"""
Created on Tue Oct  6 15:30 2026

This script contains the Wedderburn block structure of a finite-dimensional
*-algebra, A = (+)_alpha L(H_alpha) (x) 1_{K_alpha}, and the conditional
expectations onto it of the form

    E(A) = (+)_alpha tr_{K_alpha}[P_alpha A P_alpha (1 (x) omega_alpha)] (x) 1_{K_alpha}.
"""

import logging
import numpy as np
import pandas as pd
from dataclasses import dataclass
from typing import List, Optional, Sequence
from .star_algebra import StarAlgebra, center
from ..utils._other_utils import (
    Tolerances,
    DimensionMismatch,
    InvalidState,
    NumericalDegeneracy,
    NumericalValidationError,
    resolve_tolerances,
    spawn_generators,
    validate_return_type,
)
from ..utils.linalg_utils import (
    dagger,
    eig_hermitian,
    cluster_eigenvalues,
    cluster_gap_statistics,
    is_density,
    nearest_isometry,
    partial_trace,
    range_basis,
)
from ..utils.superoperator_utils import Superoperator

logger = logging.getLogger(__name__)

RETRIES = 3


@dataclass
class WedderburnBlock:
    """
    One block L(C^d) (x) 1_m of a *-algebra.

    Parameters:
    ===========
        * central_projection (np.ndarray): The minimal central projection P_alpha.
        * d (int): Dimension of the factor H_alpha.
        * m (int): Multiplicity, the dimension of K_alpha.
        * isometry (np.ndarray): V_alpha, ambient_dim x (d*m), sending |i> (x) |s> to the ambient space.
    """

    central_projection: np.ndarray
    d: int
    m: int
    isometry: np.ndarray

    @property
    def rank(self) -> int:
        return self.d * self.m

    def compress(self, A: np.ndarray) -> np.ndarray:
        """V* A V on C^d (x) C^m."""
        return dagger(self.isometry) @ np.asarray(A, dtype=complex) @ self.isometry

    def embed(self, X: np.ndarray) -> np.ndarray:
        """V X V* for X on C^d (x) C^m."""
        return self.isometry @ np.asarray(X, dtype=complex) @ dagger(self.isometry)

    def factor_part(self, A: np.ndarray) -> np.ndarray:
        """The X with V* A V = X (x) I_m, read off by a normalized partial trace."""
        return partial_trace(self.compress(A), (self.d, self.m), 'second') / self.m

    def tensor_residual(self, A: np.ndarray) -> float:
        """Distance of V* A V from the form X (x) I_m."""
        X = self.factor_part(A)
        return float(np.linalg.norm(self.compress(A) - np.kron(X, np.eye(self.m))))

    def isometry_residuals(self) -> dict:
        V = self.isometry
        return {
            'isometry': float(np.linalg.norm(dagger(V) @ V - np.eye(self.rank))),
            'projection': float(np.linalg.norm(V @ dagger(V) - self.central_projection)),
        }


def _first_index(P: np.ndarray) -> int:
    return int(np.argmax(np.real(np.diag(P)) > 0.5 / P.shape[0]))


def _central_projections(Z: StarAlgebra, rng: np.random.Generator, tol: Tolerances):
    """Spectral projections of a random Hermitian central element, or None when the clustering is ambiguous."""
    H = Z.hermitian_basis()
    C = np.tensordot(rng.standard_normal(H.shape[0]), H, axes=1)
    evals, U = eig_hermitian(C, tol)
    scale = max(1.0, float(np.abs(evals).max()))
    clusters = cluster_eigenvalues(evals / scale, tol.eig_cluster_tol)
    stats = cluster_gap_statistics(evals / scale, clusters)
    if len(clusters) != Z.dim:
        return None, stats
    return [U[:, c] @ dagger(U[:, c]) for c in clusters], stats


def _block_structure(A: StarAlgebra, P: np.ndarray, rng: np.random.Generator, tol: Tolerances):
    """
    Matrix units of the factor P A P: minimal projections from the spectral
    clusters of a random Hermitian element, off-diagonal units e_{i1} pulled
    back from a random element, and w_{i,s} = e_{i1} w_{1,s}.
    """
    W = range_basis(P)
    rank = W.shape[1]
    block_vectors = np.array([(P @ B @ P).reshape(-1) for B in A.basis])
    k = range_basis(block_vectors.T).shape[1]
    d = int(round(np.sqrt(k)))
    if d * d != k or rank % d:
        raise NumericalValidationError(f"Central block of rank {rank} carries a {k}-dimensional algebra.")
    m = rank // d

    coefficients = rng.standard_normal(A.dim) + 1j * rng.standard_normal(A.dim)
    X = P @ np.tensordot(coefficients, A.basis, axes=1) @ P
    h = W.conj().T @ ((X + dagger(X)) / 2) @ W
    evals, U = eig_hermitian(h, tol)
    scale = max(1.0, float(np.abs(evals).max()))
    clusters = cluster_eigenvalues(evals / scale, tol.eig_cluster_tol)
    stats = cluster_gap_statistics(evals / scale, clusters)
    if len(clusters) != d or any(len(c) != m for c in clusters):
        return None, stats
    minimal = [W @ U[:, c] for c in clusters]

    Y = P @ np.tensordot(rng.standard_normal(A.dim) + 1j * rng.standard_normal(A.dim), A.basis, axes=1) @ P
    E1 = minimal[0] @ dagger(minimal[0])
    columns = [minimal[0]]
    for Wi in minimal[1:]:
        e_i1 = Wi @ dagger(Wi) @ Y @ E1
        norm = np.sqrt(np.real(np.trace(dagger(e_i1) @ e_i1)) / m)
        if norm <= tol.feas_tol:
            return None, stats
        columns.append(e_i1 @ minimal[0] / norm)
    # Column i*m + s is w_{i,s}, the row-major |i> (x) |s> convention.
    V = nearest_isometry(np.concatenate(columns, axis=1))
    return WedderburnBlock(W @ dagger(W), d, m, V), stats


def wedderburn_decompose(A: StarAlgebra, tolerances: Optional[Tolerances] = None, seed: Optional[int] = 0) -> List[WedderburnBlock]:
    """
    Decomposes a unital *-algebra into blocks L(H_alpha) (x) 1_{K_alpha}.

    Parameters:
    ===========
        * A (StarAlgebra): The algebra.
        * tolerances (Tolerances): Tolerances in use.
        * seed (int): Seed of the random central and block elements.

    Returns:
    ========
        * List[WedderburnBlock]: The blocks, ordered by the first ambient basis index they occupy.

    Raises:
    =======
        * NumericalDegeneracy: If eigenvalue clustering stays ambiguous after 3 random retries.
    """
    tol = resolve_tolerances(tolerances or A.tolerances)
    Z = center(A)
    rngs = spawn_generators(seed, 2 * RETRIES)
    projections, stats = None, {}
    for attempt in range(RETRIES):
        projections, stats = _central_projections(Z, rngs[attempt], tol)
        if projections is not None:
            break
        logger.warning("Central clustering ambiguous on attempt %d (%s); retrying.", attempt + 1, stats)
    if projections is None:
        raise NumericalDegeneracy("Could not separate the minimal central projections.", gap_statistics=stats)

    blocks = []
    for P in projections:
        block = None
        for attempt in range(RETRIES):
            block, stats = _block_structure(A, P, rngs[RETRIES + attempt], tol)
            if block is not None:
                break
            logger.warning("Factor clustering ambiguous on attempt %d (%s); retrying.", attempt + 1, stats)
        if block is None:
            raise NumericalDegeneracy("Could not build matrix units of a central block.", gap_statistics=stats)
        blocks.append(block)
    blocks.sort(key=lambda b: _first_index(b.central_projection))

    total = sum(b.central_projection for b in blocks)
    if np.linalg.norm(total - np.eye(A.ambient_dim)) > tol.feas_tol or sum(b.d ** 2 for b in blocks) != A.dim:
        raise NumericalValidationError("Wedderburn blocks do not exhaust the algebra.")
    logger.info("Wedderburn structure: %s", [(b.d, b.m) for b in blocks])
    return blocks


def block_summary(blocks: Sequence[WedderburnBlock], return_type: str = 'numpy'):
    """(d, m) per block as an array or a DataFrame."""
    rows = np.array([[b.d, b.m] for b in blocks], dtype=int).reshape(-1, 2)
    if validate_return_type(return_type) == 'pandas':
        return pd.DataFrame(rows, columns=['d', 'm'])
    return rows


def block_algebra(blocks: Sequence[WedderburnBlock], tolerances: Optional[Tolerances] = None) -> StarAlgebra:
    """The algebra (+)_alpha V_alpha (L(C^d) (x) 1_m) V_alpha*, rebuilt from its blocks."""
    basis = []
    for b in blocks:
        for i in range(b.d):
            for j in range(b.d):
                E = np.zeros((b.d, b.d), dtype=complex)
                E[i, j] = 1.0
                basis.append(b.embed(np.kron(E, np.eye(b.m))) / np.sqrt(b.m))
    ambient = blocks[0].isometry.shape[0]
    return StarAlgebra(np.array(basis), ambient, tolerances)


def conditional_expectation(blocks: Sequence[WedderburnBlock], weights: Sequence[np.ndarray]) -> Superoperator:
    """
    The conditional expectation onto the block algebra with multiplicity states omega_alpha,

        A -> sum_alpha V (tr_2[V* A V (I (x) omega_alpha)] (x) I_m) V*.

    Parameters:
    ===========
        * blocks (Sequence[WedderburnBlock]): The blocks.
        * weights (Sequence[np.ndarray]): One density matrix of size m_alpha per block.

    Returns:
    ========
        * Superoperator: The unital CP idempotent map.
    """
    if len(blocks) != len(weights):
        raise DimensionMismatch(f"{len(blocks)} blocks but {len(weights)} weights.")
    ambient = blocks[0].isometry.shape[0]
    action = np.zeros((ambient * ambient, ambient * ambient), dtype=complex)
    for b, omega in zip(blocks, weights):
        omega = np.asarray(omega, dtype=complex)
        if omega.shape != (b.m, b.m):
            raise DimensionMismatch(f"Weight of shape {omega.shape} for a block of multiplicity {b.m}.")
        if not is_density(omega):
            raise InvalidState("Block weights must be density matrices.")
        V = b.isometry.reshape(ambient, b.d, b.m)
        # Y_ij = sum conj(V[a,i,s]) A[a,b] V[b,j,t] omega[t,s];  out = sum_ij Y_ij V[:,i,u] V[:,j,u]*.
        K = np.einsum('ais,bjt,ts->abij', np.conj(V), V, omega)
        R = np.einsum('ciu,eju->ceij', V, np.conj(V))
        action += np.einsum('ceij,abij->ceab', R, K).reshape(ambient * ambient, ambient * ambient)
    return Superoperator(action, ambient, ambient)
