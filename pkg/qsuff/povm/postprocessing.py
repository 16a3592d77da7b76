"""
Created on Fri Oct  9 14:20 2026

This script contains the postprocessing order of discrete POVMs and the two
notions of minimal sufficiency:

    1. M <= N: a stochastic kernel kappa with M_i = sum_j kappa(i|j) N_j (exact LP).
    2. Relabeling minimal form: outcomes merged by their likelihood-ratio statistic T.
    3. Kernel minimality: the identity is the only kernel with M = kappa * M (exact LP).
"""

import logging
import numpy as np
from typing import List, Optional, Tuple
from .discrete_povm import DiscretePOVM, StochasticKernel
from ..utils._other_utils import DimensionMismatch
from ..utils.dykstra_utils import herm_to_real
from ..utils.linalg_utils import informationally_complete_states
from ..utils.simplex_utils import LinearProgram, lp_solve

logger = logging.getLogger(__name__)

T_TOL = 1e-7


def _kernel_program(M: DiscretePOVM, N: DiscretePOVM, objective: Optional[np.ndarray] = None) -> LinearProgram:
    """
    Equality constraints on kappa (row-major, m x n): each real coordinate of
    sum_j kappa(i|j) N_j - M_i vanishes, and every column sums to one.
    """
    m, n = len(M), len(N)
    coords_N = np.array([herm_to_real(E) for E in N.effects])
    coords_M = np.array([herm_to_real(E) for E in M.effects])
    k = coords_N.shape[1]
    rows, rhs = [], []
    for i in range(m):
        block = np.zeros((k, m * n))
        block[:, i * n:(i + 1) * n] = coords_N.T
        rows.append(block)
        rhs.append(coords_M[i])
    stochastic = np.zeros((n, m * n))
    for j in range(n):
        stochastic[j, j::n] = 1.0
    rows.append(stochastic)
    rhs.append(np.ones(n))
    return LinearProgram(np.vstack(rows), np.concatenate(rhs), objective)


def postprocessing_leq(M: DiscretePOVM, N: DiscretePOVM) -> Optional[StochasticKernel]:
    """
    Decides M <= N by phase-one simplex.

    Parameters:
    ===========
        * M, N (DiscretePOVM): POVMs on the same space.

    Returns:
    ========
        * StochasticKernel | None: kappa with M = kappa * N, or None, which certifies that no kernel exists.

    Raises:
    =======
        * DimensionMismatch: If the POVMs act on different spaces.
    """
    if M.dim != N.dim:
        raise DimensionMismatch(f"POVMs on dimensions {M.dim} and {N.dim}.")
    result = lp_solve(_kernel_program(M, N))
    if not result.feasible:
        logger.info("No kernel maps %d outcomes onto %d (phase-one value %.3e).", len(N), len(M), result.phase_one_value)
        return None
    return StochasticKernel(result.x.reshape(len(M), len(N)), M.labels, N.labels, M.tolerances)


def povm_postproc_equiv(M: DiscretePOVM, N: DiscretePOVM) -> Tuple[bool, Optional[StochasticKernel], Optional[StochasticKernel]]:
    """M ~ N, with the kernels of M <= N and N <= M when they exist."""
    forward = postprocessing_leq(M, N)
    backward = postprocessing_leq(N, M)
    return forward is not None and backward is not None, forward, backward


def t_statistic(M: DiscretePOVM) -> np.ndarray:
    """
    T(i) = (tr[rho_n M_i] / tr[M_i / d])_n over the informationally complete
    family with rho_0 = I/d, one row per outcome.
    """
    family = informationally_complete_states(M.dim)
    probabilities = np.real(np.einsum('nab,iba->in', family, M.effects))
    return probabilities / (M.traces[:, None] / M.dim)


def relabeling_minimal_form(M: DiscretePOVM) -> Tuple[DiscretePOVM, List[Optional[int]]]:
    """
    Drops zero effects and merges outcomes with equal T statistic, i.e. with
    proportional effects.

    Returns:
    ========
        * Tuple[DiscretePOVM, List[Optional[int]]]: The merged POVM and, per old outcome, its new
          outcome index (None for a dropped zero effect).
    """
    M1, kept = M.nonzero()
    T = t_statistic(M1)
    groups: List[List[int]] = []
    for i in range(len(M1)):
        for group in groups:
            if np.abs(T[i] - T[group[0]]).max() <= T_TOL:
                group.append(i)
                break
        else:
            groups.append([i])
    merge_map: List[Optional[int]] = [None] * len(M)
    for new, group in enumerate(groups):
        for i in group:
            merge_map[kept[i]] = new
    effects = [M1.effects[group].sum(axis=0) for group in groups]
    labels = ['+'.join(M1.labels[i] for i in group) for group in groups]
    logger.info("Relabeling minimal form merges %d outcomes into %d.", len(M), len(groups))
    return DiscretePOVM(effects, labels, M.tolerances), merge_map


def relabeling_kernels(M: DiscretePOVM, minimal: DiscretePOVM, merge_map: List[Optional[int]]) -> Tuple[StochasticKernel, StochasticKernel]:
    """
    The two kernels witnessing M ~ M_T: the deterministic relabeling
    M_T = kappa * M and the splitting M = kappa' * M_T with kappa'(i|k) = tr M_i / tr (M_T)_k.
    """
    m, n = len(minimal), len(M)
    relabel = np.zeros((m, n))
    split = np.zeros((n, m))
    totals = minimal.traces
    for i, k in enumerate(merge_map):
        if k is None:
            relabel[0, i] = 1.0
            continue
        relabel[k, i] = 1.0
        split[i, k] = M.traces[i] / totals[k]
    return (
        StochasticKernel(relabel, minimal.labels, M.labels, M.tolerances),
        StochasticKernel(split, M.labels, minimal.labels, M.tolerances),
    )


def kernel_minimal_check(M: DiscretePOVM) -> Tuple[bool, float]:
    """
    Searches for a self-kernel of M that moves mass off the diagonal. For each
    outcome j one LP maximizes sum_{i != j} kappa(i|j) = 1 - kappa(j|j).

    Returns:
    ========
        * Tuple[bool, float]: Whether M is kernel minimal sufficient, and the largest off-diagonal
          column mass, max_j sum_{i != j} kappa(i|j).
    """
    n = len(M)
    value = 0.0
    for j in range(n):
        objective = np.zeros((n, n))
        objective[j, j] = -1.0
        result = lp_solve(_kernel_program(M, M, objective.reshape(-1)))
        value = max(value, 1.0 + result.objective)
    return value <= M.tolerances.feas_tol, float(value)
