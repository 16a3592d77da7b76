"""
Created on Fri Oct  9 09:00 2026

This script contains discrete POVMs, stochastic kernels and the channels built
from them:

    1. The QC channel f -> sum_i f_i M_i from the functions on the outcomes.
    2. The fully quantum dilation Gamma(A) = sum_i <i|A|i> M_i and the pinching
       E(A) = sum_i <i|A|i> |i><i|, with Gamma = Gamma^M o E.
"""

import logging
import numpy as np
import pandas as pd
from typing import List, Optional, Sequence, Tuple
from ..experiment.statistical_experiment import StatisticalExperiment, channel_as_experiment
from ..utils._other_utils import (
    Tolerances,
    DimensionMismatch,
    InputError,
    InvalidKernel,
    InvalidPovm,
    check_labels,
    resolve_tolerances,
    validate_return_type,
)
from ..utils.linalg_utils import as_square, is_psd
from ..utils.superoperator_utils import Superoperator

logger = logging.getLogger(__name__)


class DiscretePOVM:

    """
    A finite POVM: PSD effects M_i with sum_i M_i = I.
    """

    def __init__(self, effects: Sequence[np.ndarray], labels: Optional[Sequence[str]] = None, tolerances: Optional[Tolerances] = None):
        """
        Parameters:
        ===========
            * effects (Sequence[np.ndarray]): The effects, all d x d.
            * labels (Sequence[str]): Outcome labels; defaults to '0', '1', ...
            * tolerances (Tolerances): Tolerances used for validation.
        """
        self.tolerances = resolve_tolerances(tolerances)
        if len(effects) == 0:
            raise InvalidPovm("A POVM needs at least one effect.")
        effects = [as_square(M, 'effect') for M in effects]
        dim = effects[0].shape[0]
        for k, M in enumerate(effects):
            if M.shape != (dim, dim):
                raise DimensionMismatch(f"Effect {k} has shape {M.shape}, expected ({dim}, {dim}).")
            if not is_psd(M, self.tolerances.feas_tol, self.tolerances.eq_tol):
                raise InvalidPovm(f"Effect {k} is not positive semidefinite.")
        total = np.sum(effects, axis=0)
        if np.linalg.norm(total - np.eye(dim)) > self.tolerances.feas_tol:
            raise InvalidPovm(f"Effects sum to the identity only up to {np.linalg.norm(total - np.eye(dim)):.3e}.")
        labels = [str(k) for k in range(len(effects))] if labels is None else labels
        if len(labels) != len(effects):
            raise InputError(f"{len(labels)} labels for {len(effects)} effects.")
        self.labels = check_labels(labels)
        self.effects = np.array(effects)
        self.dim = dim

    def __repr__(self):
        return f"DiscretePOVM(dim={self.dim}, outcomes={len(self)})"

    def __len__(self):
        return len(self.labels)

    @property
    def traces(self) -> np.ndarray:
        """tr M_i per outcome."""
        return np.real(np.einsum('kii->k', self.effects))

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """The outcome distribution (tr[rho M_i])_i."""
        rho = as_square(rho, 'state')
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"State of shape {rho.shape} for a POVM on dimension {self.dim}.")
        return np.real(np.einsum('ij,kji->k', rho, self.effects))

    def nonzero(self) -> Tuple["DiscretePOVM", List[int]]:
        """The POVM without its zero effects, and the indices that were kept."""
        keep = [k for k, t in enumerate(self.traces) if t > self.tolerances.feas_tol]
        if len(keep) == len(self):
            return self, keep
        return DiscretePOVM(self.effects[keep], [self.labels[k] for k in keep], self.tolerances), keep


class StochasticKernel:

    """
    A column-stochastic matrix kappa(i|j): the probability of outcome i given outcome j.
    """

    def __init__(self, matrix: np.ndarray, row_labels: Optional[Sequence[str]] = None, col_labels: Optional[Sequence[str]] = None, tolerances: Optional[Tolerances] = None):
        self.tolerances = resolve_tolerances(tolerances)
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        tol = self.tolerances.feas_tol
        if matrix.min(initial=0.0) < -tol:
            raise InvalidKernel(f"Kernel has a negative entry {matrix.min():.3e}.")
        if np.abs(matrix.sum(axis=0) - 1).max(initial=0.0) > tol:
            raise InvalidKernel("Kernel columns must sum to one.")
        self.matrix = np.clip(matrix, 0.0, None)
        self.row_labels = tuple(str(k) for k in range(matrix.shape[0])) if row_labels is None else tuple(row_labels)
        self.col_labels = tuple(str(k) for k in range(matrix.shape[1])) if col_labels is None else tuple(col_labels)

    def __repr__(self):
        return f"StochasticKernel(shape={self.matrix.shape})"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, n: int) -> "StochasticKernel":
        return cls(np.eye(n))

    def apply(self, N: DiscretePOVM) -> DiscretePOVM:
        """The postprocessed POVM with effects sum_j kappa(i|j) N_j."""
        if self.matrix.shape[1] != len(N):
            raise DimensionMismatch(f"Kernel with {self.matrix.shape[1]} columns for a POVM with {len(N)} outcomes.")
        return DiscretePOVM(np.tensordot(self.matrix, N.effects, axes=1), self.row_labels, N.tolerances)

    def compose(self, other: "StochasticKernel") -> "StochasticKernel":
        """self after other: (self o other)(i|k) = sum_j self(i|j) other(j|k)."""
        if self.matrix.shape[1] != other.matrix.shape[0]:
            raise DimensionMismatch("Kernel shapes do not chain.")
        return StochasticKernel(self.matrix @ other.matrix, self.row_labels, other.col_labels, self.tolerances)

    def is_deterministic(self) -> bool:
        """Every entry is 0 or 1, i.e. the kernel is a relabeling."""
        return bool(np.all(np.isclose(self.matrix, 0.0) | np.isclose(self.matrix, 1.0)))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.matrix, index=list(self.row_labels), columns=list(self.col_labels))

    def summary(self, return_type: str = 'numpy'):
        """The kernel matrix as an array or as a DataFrame indexed by outcome labels."""
        if validate_return_type(return_type) == 'pandas':
            return self.to_frame()
        return self.matrix.copy()


def qc_channel(M: DiscretePOVM) -> Superoperator:
    """The QC channel f -> sum_i f_i M_i from the diagonal algebra on the outcomes to M_d."""
    action = M.effects.reshape(len(M), -1).T
    return Superoperator(action, len(M), M.dim, 'diagonal')


def povm_from_qc_channel(channel: Superoperator, labels: Optional[Sequence[str]] = None, tolerances: Optional[Tolerances] = None) -> DiscretePOVM:
    """The POVM i -> Gamma(e_i) of a channel, read on the diagonal subalgebra of its domain."""
    diagonal = channel.restrict_to_diagonal()
    effects = [diagonal.apply(np.eye(diagonal.in_dim)[i]) for i in range(diagonal.in_dim)]
    effects = [(E + E.conj().T) / 2 for E in effects]
    return DiscretePOVM(effects, labels, tolerances)


def fully_quantum_dilation(M: DiscretePOVM) -> Tuple[Superoperator, Superoperator]:
    """
    The channel Gamma: M_n -> M_d, Gamma(A) = sum_i <i|A|i> M_i, and the
    pinching E(A) = sum_i <i|A|i> |i><i| on M_n, for the POVM without its zero effects.

    Returns:
    ========
        * Tuple[Superoperator, Superoperator]: Gamma and the pinching.
    """
    M1, _ = M.nonzero()
    n = len(M1)
    diagonal = np.arange(n) * (n + 1)
    gamma = np.zeros((M1.dim ** 2, n * n), dtype=complex)
    gamma[:, diagonal] = M1.effects.reshape(n, -1).T
    pinching = np.zeros((n * n, n * n), dtype=complex)
    pinching[diagonal, diagonal] = 1.0
    return Superoperator(gamma, n, M1.dim), Superoperator(pinching, n, n)


def dilation_residuals(M: DiscretePOVM, gamma: Superoperator, pinching: Superoperator) -> dict:
    """Distances of Gamma from Gamma^M o E and of Gamma restricted to the diagonals from Gamma^M."""
    M1, _ = M.nonzero()
    qc = qc_channel(M1)
    return {
        'factorization': gamma.distance(qc.compose(pinching)),
        'diagonal_restriction': gamma.restrict_to_diagonal().distance(qc),
    }


def povm_as_experiment(M: DiscretePOVM, probe_states: Optional[Sequence[np.ndarray]] = None) -> StatisticalExperiment:
    """
    The classical experiment of outcome distributions of the probe states,
    an informationally complete family by default.
    """
    return channel_as_experiment(qc_channel(M), probe_states, tolerances=M.tolerances)
