"""
Superoperators in the Heisenberg picture.

A `Superoperator` is a linear map Lambda from an input algebra to M_{out_dim}.
The input algebra is either the full matrix algebra M_{in_dim}
(in_kind='matrix') or the abelian algebra of functions on in_dim points
(in_kind='diagonal'), which is the domain of a QC channel.

Conventions:
    * vec is row-major: vec(A) = A.reshape(-1).
    * `action` is the matrix S with vec(Lambda(A)) = S vec(A).
    * The Choi matrix is J = sum_ij |i><j| (x) Lambda(|i><j|) on C^{in} (x) C^{out};
      for an abelian domain it is the block diagonal sum_i |i><i| (x) Lambda(e_i).
    * The predual satisfies tr[Lambda_*(rho) A] = tr[rho Lambda(A)].
"""

import logging
import numpy as np
from functools import cached_property
from typing import Callable
from ._other_utils import DimensionMismatch, as_generator
from .linalg_utils import dagger, hermitian_part, min_eigenvalue

logger = logging.getLogger(__name__)

VALID_IN_KINDS = ['matrix', 'diagonal']


def vec(matrix: np.ndarray) -> np.ndarray:
    """Row-major vectorization: vec(A)[i * d + j] = A[i, j]."""
    return np.asarray(matrix, dtype=complex).reshape(-1)


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of vec for a dim x dim matrix."""
    return np.asarray(vector, dtype=complex).reshape(dim, dim)


def action_to_choi(action: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """
    Choi matrix J = sum_ij |i><j| (x) Lambda(|i><j|) on C^in (x) C^out of a
    Heisenberg map given by its action on row-major vecs.
    """
    S = np.asarray(action).reshape(out_dim, out_dim, in_dim, in_dim)
    return S.transpose(2, 0, 3, 1).reshape(in_dim * out_dim, in_dim * out_dim)


def choi_to_action(choi: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """Inverse of action_to_choi."""
    J = np.asarray(choi).reshape(in_dim, out_dim, in_dim, out_dim)
    return J.transpose(1, 3, 0, 2).reshape(out_dim * out_dim, in_dim * in_dim)


def diagonal_extractor(n: int) -> np.ndarray:
    """The matrix D with D vec(A) = diag(A)."""
    D = np.zeros((n, n * n), dtype=complex)
    D[np.arange(n), np.arange(n) * (n + 1)] = 1.0
    return D


class Superoperator:

    """
    A linear map between operator algebras, stored as its action on the vectorized operator space.
    """

    def __init__(self, action: np.ndarray, in_dim: int, out_dim: int, in_kind: str = 'matrix'):
        """
        Parameters:
        ===========
            * action (np.ndarray): The (out_dim^2) x (in_dim^2) matrix (in_dim for an abelian domain).
            * in_dim (int): Dimension of the input Hilbert space, or number of points of an abelian domain.
            * out_dim (int): Dimension of the output Hilbert space.
            * in_kind (str): 'matrix' or 'diagonal'.
        """
        if in_kind not in VALID_IN_KINDS:
            raise ValueError("Invalid in_kind. Choose 'matrix' or 'diagonal'.")
        action = np.asarray(action, dtype=complex)
        in_size = in_dim * in_dim if in_kind == 'matrix' else in_dim
        if action.shape != (out_dim * out_dim, in_size):
            raise DimensionMismatch(f"Action of shape {action.shape} does not match ({out_dim ** 2}, {in_size}).")
        self.action = action
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.in_kind = in_kind

    def __repr__(self):
        return f"Superoperator(in_dim={self.in_dim}, out_dim={self.out_dim}, in_kind='{self.in_kind}')"

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], in_dim: int, out_dim: int, in_kind: str = 'matrix') -> "Superoperator":
        """Tabulates fn on the matrix units (or point indicators) of the input algebra."""
        if in_kind == 'matrix':
            columns = []
            for i in range(in_dim):
                for j in range(in_dim):
                    E = np.zeros((in_dim, in_dim), dtype=complex)
                    E[i, j] = 1.0
                    columns.append(vec(fn(E)))
        else:
            columns = [vec(fn(np.eye(in_dim)[i])) for i in range(in_dim)]
        action = np.array(columns).T.reshape(out_dim * out_dim, -1)
        return cls(action, in_dim, out_dim, in_kind)

    @classmethod
    def from_choi(cls, choi: np.ndarray, in_dim: int, out_dim: int) -> "Superoperator":
        return cls(choi_to_action(choi, in_dim, out_dim), in_dim, out_dim, 'matrix')

    @classmethod
    def identity(cls, dim: int) -> "Superoperator":
        return cls(np.eye(dim * dim, dtype=complex), dim, dim, 'matrix')

    @cached_property
    def choi(self) -> np.ndarray:
        if self.in_kind == 'matrix':
            return action_to_choi(self.action, self.in_dim, self.out_dim)
        n, d = self.in_dim, self.out_dim
        J = np.zeros((n * d, n * d), dtype=complex)
        for i in range(n):
            J[i * d:(i + 1) * d, i * d:(i + 1) * d] = unvec(self.action[:, i], d)
        return J

    def apply(self, A: np.ndarray) -> np.ndarray:
        """Lambda(A); for an abelian domain A is the vector of function values."""
        if self.in_kind == 'matrix':
            A = np.asarray(A, dtype=complex)
            if A.shape != (self.in_dim, self.in_dim):
                raise DimensionMismatch(f"Input of shape {A.shape} does not match in_dim={self.in_dim}.")
            return unvec(self.action @ vec(A), self.out_dim)
        f = np.asarray(A, dtype=complex).reshape(-1)
        if f.shape != (self.in_dim,):
            raise DimensionMismatch(f"Function of length {f.size} does not match {self.in_dim} points.")
        return unvec(self.action @ f, self.out_dim)

    def apply_predual(self, rho: np.ndarray) -> np.ndarray:
        """
        Lambda_*(rho), defined by tr[Lambda_*(rho) A] = tr[rho Lambda(A)].
        For an abelian domain the result is the probability vector (tr[rho Lambda(e_i)])_i.
        """
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.out_dim, self.out_dim):
            raise DimensionMismatch(f"State of shape {rho.shape} does not match out_dim={self.out_dim}.")
        image = self.action.T @ vec(rho.T)
        if self.in_kind == 'matrix':
            return unvec(image, self.in_dim).T
        return image

    def compose(self, other: "Superoperator") -> "Superoperator":
        """
        The composition self o other (apply other first).

        An abelian-domain map composed after a matrix-valued map reads the
        diagonal of the intermediate matrix, i.e. restricts to the diagonal subalgebra.
        """
        if self.in_dim != other.out_dim:
            raise DimensionMismatch(f"Cannot compose: in_dim={self.in_dim} but inner out_dim={other.out_dim}.")
        if self.in_kind == 'matrix':
            inner = other.action
        else:
            inner = diagonal_extractor(other.out_dim) @ other.action
        return Superoperator(self.action @ inner, other.in_dim, self.out_dim, other.in_kind)

    def restrict_to_diagonal(self) -> "Superoperator":
        """The restriction of a matrix-domain map to the diagonal subalgebra."""
        if self.in_kind == 'diagonal':
            return self
        n = self.in_dim
        return Superoperator(self.action[:, np.arange(n) * (n + 1)], n, self.out_dim, 'diagonal')

    def unit_residual(self) -> float:
        """Frobenius distance of Lambda(I) from I."""
        one = np.ones(self.in_dim) if self.in_kind == 'diagonal' else np.eye(self.in_dim)
        return float(np.linalg.norm(self.apply(one) - np.eye(self.out_dim)))

    def choi_min_eigenvalue(self) -> float:
        return min_eigenvalue(self.choi)

    def is_unital(self, tol: float = 1e-7) -> bool:
        return self.unit_residual() <= tol

    def is_cp(self, tol: float = 1e-9) -> bool:
        """Hermitian Choi matrix with smallest eigenvalue at least -tol."""
        if np.max(np.abs(self.choi - dagger(self.choi)), initial=0.0) > max(tol, 1e-9) * (1 + np.abs(self.choi).max()):
            return False
        return self.choi_min_eigenvalue() >= -tol

    def is_channel(self, unit_tol: float = 1e-7, cp_tol: float = 1e-9) -> bool:
        return self.is_unital(unit_tol) and self.is_cp(cp_tol)

    def schwarz_gap(self, samples: int = 16, rng=None) -> float:
        """
        Sampled Schwarz predicate: the smallest eigenvalue of Lambda(A*A) - Lambda(A*)Lambda(A)
        over random A. Non-negative (up to rounding) for unital Schwarz maps.
        """
        rng = as_generator(rng)
        worst = np.inf
        for _ in range(samples):
            if self.in_kind == 'matrix':
                A = rng.standard_normal((self.in_dim, self.in_dim)) + 1j * rng.standard_normal((self.in_dim, self.in_dim))
                gap = self.apply(dagger(A) @ A) - self.apply(dagger(A)) @ self.apply(A)
            else:
                f = rng.standard_normal(self.in_dim) + 1j * rng.standard_normal(self.in_dim)
                gap = self.apply(np.abs(f) ** 2) - self.apply(np.conj(f)) @ self.apply(f)
            worst = min(worst, min_eigenvalue(hermitian_part(gap)))
        return float(worst)

    def distance(self, other: "Superoperator") -> float:
        """Frobenius distance between the actions of two maps on the same algebras."""
        if self.action.shape != other.action.shape or self.in_kind != other.in_kind:
            raise DimensionMismatch("Superoperators act between different algebras.")
        return float(np.linalg.norm(self.action - other.action))


def identity_choi(dim: int) -> np.ndarray:
    return Superoperator.identity(dim).choi


def compression(isometry: np.ndarray) -> Superoperator:
    """The unital CP map A -> W* A W for an isometry W (out_dim = rank, in_dim = ambient)."""
    W = np.asarray(isometry, dtype=complex)
    return Superoperator.from_function(lambda A: dagger(W) @ A @ W, W.shape[0], W.shape[1])
