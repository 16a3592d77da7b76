"""
Created on Mon Oct  5 09:12 2026

This script contains the shared tolerances, the exception hierarchy and the
seeding helpers used throughout the package.
"""

import logging
import numpy as np
from dataclasses import dataclass, replace
from typing import Optional, Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """
    Numerical tolerances shared by every operation.

    Parameters:
    ===========
        * eq_tol (float): Entrywise comparison tolerance (Hermiticity, equality of matrices).
        * eig_cluster_tol (float): Relative gap below which two eigenvalues belong to one cluster.
        * feas_tol (float): Residual tolerance of feasibility and membership tests.
    """

    eq_tol: float = 1e-9
    eig_cluster_tol: float = 1e-7
    feas_tol: float = 1e-7

    def __post_init__(self):
        for name in ('eq_tol', 'eig_cluster_tol', 'feas_tol'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"Tolerance {name} must be strictly positive, got {value}.")
        if self.eq_tol > self.eig_cluster_tol:
            raise ValueError("eq_tol must not exceed eig_cluster_tol.")

    def with_feas_tol(self, feas_tol: float) -> "Tolerances":
        return replace(self, feas_tol=feas_tol)

    def as_dict(self) -> dict:
        return {'eq_tol': self.eq_tol, 'eig_cluster_tol': self.eig_cluster_tol, 'feas_tol': self.feas_tol}


DEFAULT_TOLERANCES = Tolerances()


def resolve_tolerances(tolerances: Optional[Tolerances]) -> Tolerances:
    return DEFAULT_TOLERANCES if tolerances is None else tolerances


class QsuffError(Exception):
    """Base class of every error raised by the package."""
    pass


class InputError(QsuffError, ValueError):
    """Raised when an input violates the precondition of an operation."""
    pass


class NotHermitian(InputError):
    """Raised when a matrix expected to be Hermitian is not."""
    pass


class DimensionMismatch(InputError):
    """Raised when operands have incompatible shapes."""
    pass


class LabelMismatch(InputError):
    """Raised when two experiments do not share a parameter set."""
    pass


class InvalidState(InputError):
    """Raised when a matrix expected to be a density matrix is not."""
    pass


class InvalidPovm(InputError):
    """Raised when effects are not PSD or do not sum to the identity."""
    pass


class InvalidKernel(InputError):
    """Raised when a matrix is not columnwise stochastic."""
    pass


class SingularState(InputError):
    """Raised when a state expected to be faithful has a (numerically) zero eigenvalue."""
    pass


class FileFormatError(InputError):
    """Raised when an input file does not parse; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericalValidationError(QsuffError):
    """Base class of failures of a downstream numerical validation."""
    pass


class NumericalDegeneracy(NumericalValidationError):
    """Raised when eigenvalue clustering stays ambiguous after the retry budget."""

    def __init__(self, message: str, gap_statistics: Optional[dict] = None):
        self.gap_statistics = gap_statistics or {}
        super().__init__(f"{message} (gap statistics: {self.gap_statistics})")


class AlgebraNotStabilized(NumericalValidationError):
    """Raised when the cocycle grid refinements cannot produce a consistent minimal algebra."""
    pass


class OmegaInconsistent(NumericalValidationError):
    """Raised when the parameter independent factors of a block disagree across states."""

    def __init__(self, message: str, spread: Optional[dict] = None):
        self.spread = spread or {}
        super().__init__(f"{message} (spread per block: {self.spread})")


class NotMinimalForm(QsuffError):
    """Raised when an experiment expected to be minimal sufficient admits a fixing channel."""
    pass


class UnboundedError(QsuffError):
    """Raised when a linear program is unbounded; `ray` is a feasible direction of improvement."""

    def __init__(self, message: str, ray: Optional[np.ndarray] = None):
        self.ray = ray
        super().__init__(message)


def spawn_generators(seed: Optional[int], count: int) -> list:
    """
    Returns `count` independent random generators derived from one seed.

    Parameters:
    ===========
        * seed (int | None): The master seed.
        * count (int): Number of generators.

    Returns:
    ========
        * list[np.random.Generator]: Independent generators, deterministic given the seed.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def validate_return_type(return_type: str) -> str:
    if not isinstance(return_type, str) or return_type.lower() not in ['numpy', 'pandas']:
        raise ValueError("Invalid return type. Must be either 'numpy' or 'pandas'.")
    return return_type.lower()


def check_labels(labels: Sequence[str]) -> tuple:
    labels = tuple(str(label) for label in labels)
    if len(set(labels)) != len(labels):
        raise InputError(f"Labels must be unique, got {list(labels)}.")
    return labels
