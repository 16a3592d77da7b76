"""
Created on Thu Oct  8 10:45 2026

This script contains the comparisons between statistical experiments:

    1. Coarse-graining E1 <= E2: a channel Lambda: M_1 -> M_2 with Lambda_*(rho2_theta) = rho1_theta.
    2. Minimality: a channel Gamma != id fixing every state of E.
    3. Isomorphism of minimal forms: a block permutation and per-block unitaries.

The channel questions are feasibility problems for the Choi matrix and are
searched with Dykstra's algorithm; a returned channel is always verified,
a None is only evidence within the iteration budget.
"""

import logging
import numpy as np
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
from .statistical_experiment import StatisticalExperiment, channel_as_experiment
from ..utils._other_utils import (
    DimensionMismatch,
    LabelMismatch,
    NotMinimalForm,
    spawn_generators,
)
from ..utils.dykstra_utils import AffinePsdProblem, dykstra_search
from ..utils.linalg_utils import dagger, min_eigenvalue, nearest_isometry, nullspace
from ..utils.superoperator_utils import Superoperator, identity_choi

logger = logging.getLogger(__name__)

# A fixing channel counts once its Choi matrix is this far from the identity's.
WITNESS_DISTANCE = 1e-5
# Feasible points this far from the identity are accepted without waiting for convergence.
SEPARATION_DISTANCE = 1e-3
FINGERPRINT_TOL = 1e-7
ISOMORPHISM_TOL = 1e-7
MAX_WORDS = 4096


def _block_of(blocks: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(blocks)), blocks)


def choi_mask(in_blocks: Sequence[int], out_blocks: Sequence[int]) -> np.ndarray:
    """
    Entries of the Choi matrix on C^in (x) C^out forced to zero: the map is
    only defined on the block diagonal input algebra and takes values in the
    block diagonal output algebra.
    """
    bi, bo = _block_of(in_blocks), _block_of(out_blocks)
    different_in = bi[:, None] != bi[None, :]
    different_out = bo[:, None] != bo[None, :]
    return (different_in[:, None, :, None] | different_out[None, :, None, :]).reshape(
        len(bi) * len(bo), len(bi) * len(bo)
    )


def channel_problem(E_in: StatisticalExperiment, E_out: StatisticalExperiment, objective: Optional[np.ndarray] = None) -> AffinePsdProblem:
    """
    The Choi feasibility problem of a channel Lambda: M_in -> M_out with
    Lambda(I) = I and Lambda_*(rho_out_theta) = rho_in_theta for every label.

    Both experiments must list their states in the same label order.
    """
    n_in, n_out = E_in.dim, E_out.dim
    mask = choi_mask(E_in.blocks, E_out.blocks)
    bi, bo = _block_of(E_in.blocks), _block_of(E_out.blocks)
    equations = []
    for a in range(n_out):
        for b in range(n_out):
            if bo[a] != bo[b]:
                continue
            unit = np.zeros((n_out, n_out))
            unit[a, b] = 1.0
            equations.append((np.kron(np.eye(n_in), unit), 1.0 if a == b else 0.0))
    for rho_in, rho_out in zip(E_in.states, E_out.states):
        for i in range(n_in):
            for j in range(n_in):
                if bi[i] != bi[j]:
                    continue
                unit = np.zeros((n_in, n_in))
                unit[j, i] = 1.0
                # Lambda_*(rho)_{ij} = sum_ab rho_ba J[(j,a),(i,b)].
                equations.append((np.kron(unit, rho_out), rho_in[i, j]))
    return AffinePsdProblem.from_equations(n_in * n_out, equations, fixed_zero=mask, objective=objective)


def _verified(P: AffinePsdProblem, J: np.ndarray, feas_tol: float) -> bool:
    return P.affine_residual(J) <= feas_tol and min_eigenvalue(J) >= -feas_tol


def channel_residuals(channel: Superoperator, E1: StatisticalExperiment, E2: StatisticalExperiment) -> Dict[str, float]:
    """Residuals of a coarse-graining witness: state mapping, unitality and Choi positivity."""
    E2 = E2.reordered(E1.labels)
    state = max(np.linalg.norm(channel.apply_predual(r2) - r1) for r1, r2 in zip(E1.states, E2.states))
    return {
        'state': float(state),
        'unit': channel.unit_residual(),
        'choi_min_eigenvalue': channel.choi_min_eigenvalue(),
    }


def _check_labels(E1: StatisticalExperiment, E2: StatisticalExperiment) -> StatisticalExperiment:
    if set(E1.labels) != set(E2.labels):
        raise LabelMismatch(f"Label sets differ: {sorted(E1.labels)} vs {sorted(E2.labels)}.")
    return E2.reordered(E1.labels)


def find_fixing_channel(
    E: StatisticalExperiment,
    starts: int = 20,
    max_iter: int = 5000,
    seed: Optional[int] = 0,
    threads: int = 1,
) -> Optional[Superoperator]:
    """
    Searches for a channel Gamma != id on the outcome algebra of E with
    Gamma_*(rho_theta) = rho_theta for every theta.

    Starts are pulled away from the identity's Choi matrix. A feasible point
    is a witness once it has converged, or earlier when it is clearly
    separated from the identity, and its Choi matrix differs from the
    identity's by more than 1e-5.

    Parameters:
    ===========
        * E (StatisticalExperiment): The experiment.
        * starts (int): Number of random starts.
        * max_iter (int): Dykstra iterations per start.
        * seed (int): Seed of the starts.
        * threads (int): Worker threads for the starts.

    Returns:
    ========
        * Superoperator | None: A verified fixing channel, or None once the budget is spent.
    """
    n = E.dim
    mask = choi_mask(E.blocks, E.blocks)
    reference = np.where(mask, 0.0, identity_choi(n))
    P = channel_problem(E, E, objective=-reference)
    feas_tol = E.tolerances.feas_tol

    def distance(J):
        return float(np.linalg.norm(J - reference))

    search = dykstra_search(
        P, starts, max_iter, seed, feas_tol,
        require_convergence=True,
        early_accept=lambda J: distance(J) >= SEPARATION_DISTANCE,
        accept=lambda J: distance(J) > WITNESS_DISTANCE and _verified(P, J, feas_tol),
        push_steps=0,
        threads=threads,
    )
    if search.witness is None:
        logger.info("No fixing channel found in %d starts of %d iterations.", starts, max_iter)
        return None
    logger.info("Start %d found a fixing channel at distance %.3e from the identity.", search.start_index, distance(search.witness))
    return Superoperator.from_choi(search.witness, n, n)


def check_coarse_graining(
    E1: StatisticalExperiment,
    E2: StatisticalExperiment,
    starts: int = 20,
    max_iter: int = 5000,
    seed: Optional[int] = 0,
    threads: int = 1,
) -> Optional[Superoperator]:
    """
    Searches for a channel Lambda: M_1 -> M_2 with Lambda_*(rho2_theta) = rho1_theta, i.e. E1 <= E2.

    Returns:
    ========
        * Superoperator | None: A verified witness, or None once the budget is spent.

    Raises:
    =======
        * LabelMismatch: If the experiments are indexed by different labels.
    """
    E2 = _check_labels(E1, E2)
    P = channel_problem(E1, E2)
    feas_tol = min(E1.tolerances.feas_tol, E2.tolerances.feas_tol)
    search = dykstra_search(
        P, starts, max_iter, seed, feas_tol,
        accept=lambda J: _verified(P, J, feas_tol),
        threads=threads,
    )
    if search.witness is None:
        logger.info("No coarse-graining channel found in %d starts of %d iterations.", starts, max_iter)
        return None
    return Superoperator.from_choi(search.witness, E1.dim, E2.dim)


def check_channel_concatenation(
    channel1: Superoperator,
    channel2: Superoperator,
    probe_states: Optional[Sequence[np.ndarray]] = None,
    **search_options,
) -> Optional[Superoperator]:
    """
    Decides Lambda_1 <= Lambda_2 (Lambda_1 = Lambda_2 o Gamma for a channel Gamma)
    through the associated experiments on a common informationally complete probe family.

    Returns:
    ========
        * Superoperator | None: Gamma: M_1 -> M_2, or None.
    """
    if channel1.out_dim != channel2.out_dim:
        raise DimensionMismatch(f"Input spaces differ: {channel1.out_dim} vs {channel2.out_dim}.")
    E1 = channel_as_experiment(channel1, probe_states)
    E2 = channel_as_experiment(channel2, probe_states)
    return check_coarse_graining(E1, E2, **search_options)


@dataclass
class IsomorphismWitness:
    """
    A normal isomorphism between two minimal forms: block alpha of the first
    is sent to block pairing[alpha] of the second by conjugation with unitaries[alpha].
    """

    pairing: List[int]
    unitaries: List[np.ndarray]
    in_blocks: Tuple[int, ...]
    out_blocks: Tuple[int, ...]
    residual: float

    def as_unitary(self) -> np.ndarray:
        """The full unitary U with U rho1_theta U* = rho2_theta."""
        s_in, s_out = _slices(self.in_blocks), _slices(self.out_blocks)
        d = sum(self.in_blocks)
        U = np.zeros((d, d), dtype=complex)
        for alpha, (beta, V) in enumerate(zip(self.pairing, self.unitaries)):
            U[s_out[beta], s_in[alpha]] = V
        return U


def _slices(blocks: Sequence[int]) -> List[slice]:
    offsets = np.cumsum((0,) + tuple(blocks))
    return [slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]


def word_traces(matrices: Sequence[np.ndarray], max_length: int, max_words: int = MAX_WORDS) -> np.ndarray:
    """
    Traces of the words in the matrices of length 1 to max_length, in shortlex
    order, stopping after max_words words.
    """
    d = matrices[0].shape[0]
    traces, level = [], [np.eye(d, dtype=complex)]
    for _ in range(max_length):
        level = [W @ M for W in level for M in matrices][:max_words - len(traces)]
        traces.extend(np.trace(W) for W in level)
        if len(traces) >= max_words:
            break
    return np.array(traces)


def intertwiner(A: Sequence[np.ndarray], B: Sequence[np.ndarray], rng: np.random.Generator, attempts: int = 3) -> Optional[np.ndarray]:
    """
    A unitary U with U A_k U* = B_k for all k: a random solution of X A_k = B_k X,
    unitarized by the polar decomposition.
    """
    d = A[0].shape[0]
    identity = np.eye(d)
    # Row-major vec: vec(X A) = (I (x) A^T) vec(X) and vec(B X) = (B (x) I) vec(X).
    L = np.concatenate([np.kron(identity, a.T) - np.kron(b, identity) for a, b in zip(A, B)])
    N = nullspace(L, abs_tol=ISOMORPHISM_TOL)
    if N.shape[1] == 0:
        return None
    for _ in range(attempts):
        coefficients = rng.standard_normal(N.shape[1]) + 1j * rng.standard_normal(N.shape[1])
        U = nearest_isometry((N @ coefficients).reshape(d, d))
        residual = max(np.linalg.norm(U @ a @ dagger(U) - b) for a, b in zip(A, B))
        if residual <= ISOMORPHISM_TOL:
            return U
    return None


def experiments_isomorphic(
    E1: StatisticalExperiment,
    E2: StatisticalExperiment,
    check_minimal: bool = True,
    starts: int = 20,
    max_iter: int = 5000,
    seed: Optional[int] = 0,
    threads: int = 1,
) -> Optional[IsomorphismWitness]:
    """
    Decides whether two minimal forms are isomorphic.

    Blocks are paired by backtracking over pairs with equal size and equal
    word-trace fingerprints (words of length up to 2 d^2); each pairing is
    confirmed by a unitary intertwiner of the block states.

    Parameters:
    ===========
        * E1, E2 (StatisticalExperiment): Minimal forms with the same labels.
        * check_minimal (bool): Run find_fixing_channel on both inputs first.
        * starts, max_iter, seed, threads: Budget of the minimality checks.

    Returns:
    ========
        * IsomorphismWitness | None: The witness, or None if the forms are not isomorphic.

    Raises:
    =======
        * LabelMismatch: If the label sets differ.
        * NotMinimalForm: If a fixing channel is found for either input.
    """
    E2 = _check_labels(E1, E2)
    if check_minimal:
        for name, E in (('first', E1), ('second', E2)):
            if find_fixing_channel(E, starts, max_iter, seed, threads) is not None:
                raise NotMinimalForm(f"The {name} experiment is not a minimal form.")
    if E1.dim != E2.dim or sorted(E1.blocks) != sorted(E2.blocks):
        logger.info("Block sizes differ: %s vs %s.", list(E1.blocks), list(E2.blocks))
        return None

    s1, s2 = _slices(E1.blocks), _slices(E2.blocks)
    states1 = [[rho[s, s] for rho in E1.states] for s in s1]
    states2 = [[rho[s, s] for rho in E2.states] for s in s2]
    prints1 = [word_traces(m, 2 * m[0].shape[0] ** 2) for m in states1]
    prints2 = [word_traces(m, 2 * m[0].shape[0] ** 2) for m in states2]
    rng = spawn_generators(seed, 1)[0]

    def compatible(alpha, beta):
        if E1.blocks[alpha] != E2.blocks[beta]:
            return False
        f, g = prints1[alpha], prints2[beta]
        return bool(np.all(np.abs(f - g) <= FINGERPRINT_TOL * (1 + np.abs(f))))

    def assign(alpha, used, pairing, unitaries):
        if alpha == len(s1):
            return list(pairing), list(unitaries)
        for beta in range(len(s2)):
            if beta in used or not compatible(alpha, beta):
                continue
            U = intertwiner(states1[alpha], states2[beta], rng)
            if U is None:
                continue
            found = assign(alpha + 1, used | {beta}, pairing + [beta], unitaries + [U])
            if found is not None:
                return found
        return None

    found = assign(0, frozenset(), [], [])
    if found is None:
        return None
    witness = IsomorphismWitness(found[0], found[1], E1.blocks, E2.blocks, 0.0)
    U = witness.as_unitary()
    witness.residual = float(max(np.linalg.norm(U @ r1 @ dagger(U) - r2) for r1, r2 in zip(E1.states, E2.states)))
    if witness.residual > ISOMORPHISM_TOL:
        return None
    return witness
