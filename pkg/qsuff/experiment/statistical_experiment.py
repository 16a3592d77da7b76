"""
Created on Wed Oct  7 09:20 2026

This script contains the StatisticalExperiment type, a labeled family of
density matrices on a (block diagonal) matrix algebra, together with the
constructions that change an experiment without changing its information
content: support restriction, ancilla and direct-sum embeddings, and the
experiment associated with a channel.
"""

import logging
import numpy as np
from typing import Dict, List, Optional, Sequence, Tuple
from ..algebra.star_algebra import StarAlgebra
from ..utils._other_utils import (
    Tolerances,
    InputError,
    DimensionMismatch,
    InvalidState,
    check_labels,
    resolve_tolerances,
)
from ..utils.linalg_utils import (
    as_square,
    block_diag,
    dagger,
    informationally_complete_states,
    is_density,
    min_eigenvalue,
    support_basis,
)
from ..utils.superoperator_utils import Superoperator, compression

logger = logging.getLogger(__name__)


class StatisticalExperiment:

    """
    A finite family of density matrices rho_theta on the algebra (+)_alpha M_{d_alpha}.
    """

    def __init__(
        self,
        states: Sequence[np.ndarray],
        labels: Optional[Sequence[str]] = None,
        block_dims: Optional[Sequence[int]] = None,
        tolerances: Optional[Tolerances] = None,
    ):
        """
        Parameters:
        ===========
            * states (Sequence[np.ndarray]): The density matrices, all of the same size.
            * labels (Sequence[str]): Unique parameter labels; defaults to '0', '1', ...
            * block_dims (Sequence[int]): Sizes of the diagonal blocks of the outcome algebra; None for the full algebra.
            * tolerances (Tolerances): Tolerances used for validation and by every operation on the experiment.
        """
        self.tolerances = resolve_tolerances(tolerances)
        if len(states) == 0:
            raise InputError("An experiment needs at least one state.")
        states = [as_square(rho, 'state') for rho in states]
        dim = states[0].shape[0]
        for k, rho in enumerate(states):
            if rho.shape != (dim, dim):
                raise DimensionMismatch(f"State {k} has shape {rho.shape}, expected ({dim}, {dim}).")
            if not is_density(rho, self.tolerances.feas_tol, self.tolerances.eq_tol):
                raise InvalidState(f"State {k} is not a density matrix.")
        labels = [str(k) for k in range(len(states))] if labels is None else labels
        if len(labels) != len(states):
            raise InputError(f"{len(labels)} labels for {len(states)} states.")
        self.labels = check_labels(labels)
        self.states = np.array(states)
        self.dim = dim
        self.block_dims = None if block_dims is None else tuple(int(b) for b in block_dims)
        if self.block_dims is not None:
            if sum(self.block_dims) != dim or min(self.block_dims, default=0) < 1:
                raise DimensionMismatch(f"Block sizes {list(self.block_dims)} do not partition dimension {dim}.")
            mask = self.off_block_mask()
            for k, rho in enumerate(self.states):
                if np.abs(rho[mask]).max(initial=0.0) > self.tolerances.feas_tol:
                    raise InvalidState(f"State {k} is not block diagonal for blocks {list(self.block_dims)}.")

    def __repr__(self):
        return f"StatisticalExperiment(dim={self.dim}, labels={list(self.labels)}, block_dims={self.block_dims})"

    def __len__(self):
        return len(self.labels)

    @property
    def blocks(self) -> Tuple[int, ...]:
        return (self.dim,) if self.block_dims is None else self.block_dims

    @property
    def is_classical(self) -> bool:
        return all(b == 1 for b in self.blocks)

    @property
    def average_state(self) -> np.ndarray:
        return self.states.mean(axis=0)

    def state(self, label: str) -> np.ndarray:
        return self.states[self.labels.index(str(label))]

    def as_dict(self) -> Dict[str, np.ndarray]:
        return dict(zip(self.labels, self.states))

    def block_slices(self) -> List[slice]:
        offsets = np.cumsum((0,) + self.blocks)
        return [slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]

    def off_block_mask(self) -> np.ndarray:
        """Boolean mask of the entries outside the diagonal blocks."""
        mask = np.ones((self.dim, self.dim), dtype=bool)
        for s in self.block_slices():
            mask[s, s] = False
        return mask

    def outcome_algebra(self) -> StarAlgebra:
        return StarAlgebra.block_diagonal(self.blocks, self.tolerances)

    def is_faithful(self) -> bool:
        return min_eigenvalue(self.average_state) > self.tolerances.eig_cluster_tol

    def reordered(self, labels: Sequence[str]) -> "StatisticalExperiment":
        """The same experiment with its states listed in the given label order."""
        labels = check_labels(labels)
        if set(labels) != set(self.labels):
            raise InputError(f"Labels {list(labels)} are not a permutation of {list(self.labels)}.")
        return StatisticalExperiment([self.state(label) for label in labels], labels, self.block_dims, self.tolerances)


def support_isometry(E: StatisticalExperiment) -> Tuple[np.ndarray, List[int]]:
    """
    The isometry W onto the support of the average state, built blockwise,
    and the sizes of the nonempty support blocks.
    """
    sigma = E.average_state
    pieces, sizes = [], []
    for s in E.block_slices():
        W_block = support_basis(sigma[s, s], E.tolerances)
        if W_block.shape[1]:
            piece = np.zeros((E.dim, W_block.shape[1]), dtype=complex)
            piece[s, :] = W_block
            pieces.append(piece)
            sizes.append(W_block.shape[1])
    return np.concatenate(pieces, axis=1), sizes


def restrict_to_support(E: StatisticalExperiment) -> Tuple[StatisticalExperiment, Superoperator]:
    """
    Restricts an experiment to the support of its average state.

    Within each declared block, P = s(sigma) is computed and the states
    P rho P are re-expressed in an orthonormal basis of ran P; empty blocks
    disappear. The compression A -> W* A W is returned as well, so that the
    original states are the predual images of the restricted ones.

    Parameters:
    ===========
        * E (StatisticalExperiment): The experiment.

    Returns:
    ========
        * Tuple[StatisticalExperiment, Superoperator]: The faithful experiment and the compression.
    """
    if E.is_faithful():
        return E, Superoperator.identity(E.dim)
    W, new_blocks = support_isometry(E)
    states = [dagger(W) @ rho @ W for rho in E.states]
    states = [rho / np.trace(rho).real for rho in states]
    block_dims = None if E.block_dims is None else new_blocks
    logger.info("Restricted experiment from dimension %d to its support of dimension %d.", E.dim, W.shape[1])
    return StatisticalExperiment(states, E.labels, block_dims, E.tolerances), compression(W)


def embed_with_ancilla(E: StatisticalExperiment, omega: np.ndarray) -> StatisticalExperiment:
    """The experiment with states rho_theta (x) omega."""
    omega = as_square(omega, 'ancilla state')
    if not is_density(omega, E.tolerances.feas_tol, E.tolerances.eq_tol):
        raise InvalidState("The ancilla state must be a density matrix.")
    k = omega.shape[0]
    block_dims = None if E.block_dims is None else [b * k for b in E.block_dims]
    # Blockwise tensoring keeps each block rho_alpha (x) omega contiguous.
    states = []
    for rho in E.states:
        states.append(block_diag(*[np.kron(rho[s, s], omega) for s in E.block_slices()]))
    return StatisticalExperiment(states, E.labels, block_dims, E.tolerances)


def embed_direct_sum(E: StatisticalExperiment, pad_dim: int) -> StatisticalExperiment:
    """The experiment with states rho_theta (+) 0_{pad_dim}."""
    pad_dim = int(pad_dim)
    if pad_dim < 0:
        raise InputError("pad_dim must be nonnegative.")
    if pad_dim == 0:
        return E
    states = [block_diag(rho, np.zeros((pad_dim, pad_dim))) for rho in E.states]
    block_dims = None if E.block_dims is None else list(E.block_dims) + [pad_dim]
    return StatisticalExperiment(states, E.labels, block_dims, E.tolerances)


def channel_as_experiment(
    channel: Superoperator,
    probe_states: Optional[Sequence[np.ndarray]] = None,
    labels: Optional[Sequence[str]] = None,
    tolerances: Optional[Tolerances] = None,
) -> StatisticalExperiment:
    """
    The experiment (M, probes, Lambda_*(probe)) associated with a channel, on
    a finite informationally complete probe family by default.

    Parameters:
    ===========
        * channel (Superoperator): A channel M -> M_in in the Heisenberg picture.
        * probe_states (Sequence[np.ndarray]): Density matrices on M_in.
        * labels (Sequence[str]): Labels of the probes.
        * tolerances (Tolerances): Tolerances in use.

    Returns:
    ========
        * StatisticalExperiment: Classical (all blocks of size 1) when the channel has an abelian domain.
    """
    tol = resolve_tolerances(tolerances)
    probes = informationally_complete_states(channel.out_dim) if probe_states is None else probe_states
    states = []
    for k, probe in enumerate(probes):
        probe = as_square(probe, 'probe state')
        if probe.shape != (channel.out_dim, channel.out_dim):
            raise DimensionMismatch(f"Probe {k} has shape {probe.shape}, expected dimension {channel.out_dim}.")
        image = channel.apply_predual(probe)
        states.append(np.diag(image) if channel.in_kind == 'diagonal' else image)
    block_dims = [1] * channel.in_dim if channel.in_kind == 'diagonal' else None
    labels = [f"probe{k}" for k in range(len(states))] if labels is None else labels
    return StatisticalExperiment(states, labels, block_dims, tol)


def likelihood_ratio_partition(E: StatisticalExperiment, tol: float = 1e-7) -> List[List[int]]:
    """
    Groups the points of a classical experiment by their likelihood-ratio
    vectors (p_theta(i) / sigma(i))_theta against the average sigma.

    Points where sigma vanishes are left out.

    Returns:
    ========
        * List[List[int]]: The groups of point indices, ordered by their smallest point.
    """
    if any(np.abs(rho[~np.eye(E.dim, dtype=bool)]).max(initial=0.0) > E.tolerances.feas_tol for rho in E.states):
        raise InvalidState("Likelihood-ratio partitions need diagonal states.")
    p = np.real(np.einsum('kii->ki', E.states))
    sigma = p.mean(axis=0)
    support = np.nonzero(sigma > E.tolerances.eig_cluster_tol * sigma.max())[0]
    ratios = p[:, support] / sigma[support]
    groups: List[List[int]] = []
    for col, point in enumerate(support):
        for group in groups:
            reference = ratios[:, list(support).index(group[0])]
            if np.abs(ratios[:, col] - reference).max() <= tol:
                group.append(int(point))
                break
        else:
            groups.append([int(point)])
    return groups

