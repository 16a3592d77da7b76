"""
Created on Tue Oct  6 10:05 2026

This script contains the finite-dimensional *-algebra machinery: unital
*-subalgebras of M_d stored by a Hilbert-Schmidt orthonormal basis, their
generation from a set of matrices, commutants, centers and subspace tests.
"""

import logging
import numpy as np
from typing import Optional, Sequence
from ..utils._other_utils import (
    Tolerances,
    DimensionMismatch,
    NumericalValidationError,
    as_generator,
    resolve_tolerances,
)
from ..utils.linalg_utils import dagger, nullspace

logger = logging.getLogger(__name__)

# Candidates whose component orthogonal to the current span is at most this (relative) size are discarded.
GRAM_SCHMIDT_TOL = 1e-8


def orthonormal_extension(candidates: np.ndarray, basis: np.ndarray, tol: float = GRAM_SCHMIDT_TOL) -> np.ndarray:
    """
    Modified Gram-Schmidt in the Hilbert-Schmidt inner product.

    Parameters:
    ===========
        * candidates (np.ndarray): Vectorized candidate matrices, shape (N, d^2).
        * basis (np.ndarray): An orthonormal family, shape (k, d^2).
        * tol (float): Relative norm below which a projected candidate is discarded.

    Returns:
    ========
        * np.ndarray: New orthonormal vectors, shape (r, d^2), orthogonal to `basis`.
    """
    candidates = np.asarray(candidates, dtype=complex)
    if candidates.size == 0:
        return np.zeros((0, basis.shape[1]), dtype=complex)
    norms = np.linalg.norm(candidates, axis=1)
    candidates = candidates[norms > 0] / norms[norms > 0, None]
    if basis.shape[0]:
        candidates = candidates - (candidates @ np.conj(basis).T) @ basis
        candidates = candidates - (candidates @ np.conj(basis).T) @ basis
    survivors = candidates[np.linalg.norm(candidates, axis=1) > tol]
    new = []
    for v in survivors:
        for q in new:
            v = v - np.vdot(q, v) * q
        for q in new:
            v = v - np.vdot(q, v) * q
        norm = np.linalg.norm(v)
        if norm > tol:
            new.append(v / norm)
    return np.array(new).reshape(-1, basis.shape[1])


class StarAlgebra:

    """
    A unital *-subalgebra of M_d given by a Hilbert-Schmidt orthonormal basis.
    """

    contains_identity = True

    def __init__(self, basis: np.ndarray, ambient_dim: int, tolerances: Optional[Tolerances] = None):
        """
        Parameters:
        ===========
            * basis (np.ndarray): Orthonormal basis matrices, shape (k, d, d).
            * ambient_dim (int): d.
            * tolerances (Tolerances): Tolerances used by membership tests.
        """
        d = int(ambient_dim)
        basis = np.asarray(basis, dtype=complex).reshape(-1, d, d)
        self.ambient_dim = d
        self.basis = basis
        self.tolerances = resolve_tolerances(tolerances)

    def __repr__(self):
        return f"StarAlgebra(dim={self.dim}, ambient_dim={self.ambient_dim})"

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1)

    @classmethod
    def full(cls, d: int, tolerances: Optional[Tolerances] = None) -> "StarAlgebra":
        return cls(np.eye(d * d, dtype=complex).reshape(d * d, d, d), d, tolerances)

    @classmethod
    def scalars(cls, d: int, tolerances: Optional[Tolerances] = None) -> "StarAlgebra":
        return cls(np.eye(d, dtype=complex)[None] / np.sqrt(d), d, tolerances)

    @classmethod
    def block_diagonal(cls, block_dims: Sequence[int], tolerances: Optional[Tolerances] = None) -> "StarAlgebra":
        """The algebra of block diagonal matrices with the given block sizes."""
        d = int(sum(block_dims))
        units, offset = [], 0
        for size in block_dims:
            for i in range(size):
                for j in range(size):
                    E = np.zeros((d, d), dtype=complex)
                    E[offset + i, offset + j] = 1.0
                    units.append(E)
            offset += size
        return cls(np.array(units), d, tolerances)

    def project(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if X.shape != (self.ambient_dim, self.ambient_dim):
            raise DimensionMismatch(f"Matrix of shape {X.shape} is not in M_{self.ambient_dim}.")
        coefficients = np.conj(self.vectors) @ X.reshape(-1)
        return (coefficients @ self.vectors).reshape(X.shape)

    def residual(self, X: np.ndarray) -> float:
        return float(np.linalg.norm(X - self.project(X)))

    def contains(self, X: np.ndarray, tol: Optional[float] = None) -> bool:
        tol = self.tolerances.feas_tol if tol is None else tol
        return self.residual(X) <= tol * max(1.0, float(np.linalg.norm(X)))

    def hermitian_basis(self) -> np.ndarray:
        """A real-orthonormal basis of the Hermitian elements of the algebra."""
        candidates = []
        for B in self.basis:
            candidates.append((B + dagger(B)) / 2)
            candidates.append(1j * (B - dagger(B)) / 2)
        stacked = np.array(candidates).reshape(len(candidates), -1)
        # Hermitian matrices form a real inner product space; orthonormalize over the reals.
        real_coords = np.concatenate([stacked.real, stacked.imag], axis=1)
        norms = np.linalg.norm(real_coords, axis=1)
        real_coords = real_coords[norms > GRAM_SCHMIDT_TOL] / norms[norms > GRAM_SCHMIDT_TOL, None]
        U, s, Vt = np.linalg.svd(real_coords, full_matrices=False)
        rank = int(np.sum(s > GRAM_SCHMIDT_TOL * s[0])) if s.size else 0
        half = stacked.shape[1]
        result = Vt[:rank, :half] + 1j * Vt[:rank, half:]
        return result.reshape(rank, self.ambient_dim, self.ambient_dim)

    def random_element(self, rng=None, hermitian: bool = False) -> np.ndarray:
        rng = as_generator(rng)
        if hermitian:
            H = self.hermitian_basis()
            return np.tensordot(rng.standard_normal(H.shape[0]), H, axes=1)
        coefficients = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return np.tensordot(coefficients, self.basis, axes=1)

    def closure_residuals(self) -> dict:
        """Residuals of the *-algebra axioms: orthonormality, identity, adjoint and product closure."""
        V = self.vectors
        gram = np.conj(V) @ V.T
        identity = np.eye(self.ambient_dim)
        adjoint = max((self.residual(dagger(B)) for B in self.basis), default=0.0)
        products = np.einsum('aij,bjk->abik', self.basis, self.basis).reshape(-1, self.ambient_dim ** 2)
        product_residual = np.linalg.norm(products - (products @ np.conj(V).T) @ V, axis=1).max(initial=0.0)
        return {
            'orthonormality': float(np.abs(gram - np.eye(self.dim)).max(initial=0.0)),
            'identity': self.residual(identity),
            'adjoint': float(adjoint),
            'product': float(product_residual),
        }

    def validate(self) -> "StarAlgebra":
        residuals = self.closure_residuals()
        tol = self.tolerances.feas_tol
        if residuals['orthonormality'] > 1e-9 or max(residuals['identity'], residuals['adjoint'], residuals['product']) > tol:
            raise NumericalValidationError(f"Basis does not span a unital *-algebra: {residuals}")
        return self


def generate_star_algebra(
    generators: Sequence[np.ndarray],
    ambient_dim: int,
    tolerances: Optional[Tolerances] = None,
    max_rounds: int = 256,
) -> StarAlgebra:
    """
    The smallest unital *-subalgebra of M_d containing the generators.

    The span of I, the generators and their adjoints is closed under pairwise
    products round by round (only products involving an element added in the
    previous round are recomputed), re-orthonormalizing with modified
    Gram-Schmidt, until one full round adds nothing.

    Parameters:
    ===========
        * generators (Sequence[np.ndarray]): Square matrices of size ambient_dim.
        * ambient_dim (int): d.
        * tolerances (Tolerances): Tolerances in use.
        * max_rounds (int): Guard on the number of closure rounds.

    Returns:
    ========
        * StarAlgebra: The generated algebra.
    """
    d = int(ambient_dim)
    seeds = [np.eye(d, dtype=complex)]
    for G in generators:
        G = np.asarray(G, dtype=complex)
        if G.shape != (d, d):
            raise DimensionMismatch(f"Generator of shape {G.shape} is not in M_{d}.")
        seeds.extend([G, dagger(G)])
    basis = orthonormal_extension(np.array(seeds).reshape(len(seeds), -1), np.zeros((0, d * d), dtype=complex))
    new = basis

    for round_index in range(max_rounds):
        if new.shape[0] == 0:
            break
        B = basis.reshape(-1, d, d)
        N = new.reshape(-1, d, d)
        added = np.zeros((0, d * d), dtype=complex)
        for chunk in range(0, N.shape[0], 16):
            part = N[chunk:chunk + 16]
            products = np.concatenate([
                np.einsum('aij,bjk->abik', part, B).reshape(-1, d * d),
                np.einsum('aij,bjk->abik', B, part).reshape(-1, d * d),
            ])
            fresh = orthonormal_extension(products, np.concatenate([basis, added]))
            added = np.concatenate([added, fresh])
        basis = np.concatenate([basis, added])
        new = added
        logger.debug("Closure round %d: dimension %d.", round_index + 1, basis.shape[0])
        if basis.shape[0] >= d * d:
            break
    return StarAlgebra(basis.reshape(-1, d, d), d, tolerances)


def commutant(A: StarAlgebra) -> StarAlgebra:
    """
    The commutant A' = {X : XB = BX for all B in A}, as the nullspace of the
    commutator map X -> ([X, B_k])_k on the d^2-dimensional operator space.
    """
    d = A.ambient_dim
    identity = np.eye(d)
    # Row-major vec: vec(XB) = (I (x) B^T) vec(X) and vec(BX) = (B (x) I) vec(X).
    blocks = [np.kron(identity, B.T) - np.kron(B, identity) for B in A.basis]
    L = np.concatenate(blocks, axis=0) if blocks else np.zeros((0, d * d))
    N = nullspace(L, abs_tol=A.tolerances.eq_tol)
    return StarAlgebra(N.T.reshape(-1, d, d), d, A.tolerances)


def intersection(A: StarAlgebra, B: StarAlgebra) -> StarAlgebra:
    """The intersection of two subalgebras of M_d (as subspaces)."""
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch("Algebras live in different ambient spaces.")
    C = A.vectors
    V = B.vectors
    residuals = C - (C @ np.conj(V).T) @ V
    # Rows of C are orthonormal, so the residual scale is absolute.
    coefficients = nullspace(residuals.T, abs_tol=A.tolerances.feas_tol)
    elements = coefficients.T @ C
    return StarAlgebra(elements.reshape(-1, A.ambient_dim, A.ambient_dim), A.ambient_dim, A.tolerances)


def center(A: StarAlgebra) -> StarAlgebra:
    """The center A ∩ A'."""
    return intersection(A, commutant(A))


def subspace_equal(A: StarAlgebra, B: StarAlgebra, tol: Optional[float] = None) -> bool:
    """
    Whether two algebras span the same subspace: every basis element of each
    projects onto the other with residual at most feas_tol.
    """
    if A.ambient_dim != B.ambient_dim:
        raise DimensionMismatch(f"Ambient dimensions {A.ambient_dim} and {B.ambient_dim} differ.")
    tol = A.tolerances.feas_tol if tol is None else tol
    a_in_b = max((B.residual(X) for X in A.basis), default=0.0)
    b_in_a = max((A.residual(X) for X in B.basis), default=0.0)
    return bool(a_in_b <= tol and b_in_a <= tol)
