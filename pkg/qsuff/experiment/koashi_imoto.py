"""
Created on Wed Oct  7 14:10 2026

This script contains the Koashi-Imoto decomposition of a statistical experiment:

    H = (+)_alpha H_alpha (x) K_alpha,   rho_theta = (+)_alpha q_{alpha,theta} rho_{alpha,theta} (x) omega_alpha,

computed from the minimal sufficient subalgebra M_0, which is generated by
the cocycles rho_theta^{it} sigma^{-it} on a finite grid of times and closed
under the modular conjugations A -> sigma^{it} A sigma^{-it}.
"""

import logging
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from .statistical_experiment import StatisticalExperiment, restrict_to_support, support_isometry
from ..algebra.star_algebra import StarAlgebra, generate_star_algebra, subspace_equal
from ..algebra.wedderburn import WedderburnBlock, wedderburn_decompose, conditional_expectation
from ..utils._other_utils import (
    AlgebraNotStabilized,
    DimensionMismatch,
    NotMinimalForm,
    OmegaInconsistent,
    SingularState,
    validate_return_type,
)
from ..utils.linalg_utils import block_diag, dagger, imag_powers, min_eigenvalue, partial_trace
from ..utils.superoperator_utils import Superoperator, compression, vec

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = (0.37, 0.71, 1.13, 1.61, 2.23, 2.91, 3.57, 4.33)
OMEGA_TOL = 1e-7
RECONSTRUCTION_TOL = 1e-8
MAX_REFINEMENTS = 2


def refine_grid(t_grid: Sequence[float]) -> Tuple[float, ...]:
    """Doubles a grid: the old points, the midpoints of neighbours and one point past the end."""
    grid = sorted(float(t) for t in t_grid)
    if len(grid) == 1:
        return (grid[0], 2 * grid[0] + 0.5)
    midpoints = [(a + b) / 2 for a, b in zip(grid[:-1], grid[1:])]
    extra = grid[-1] + (grid[-1] - grid[-2])
    return tuple(sorted(grid + midpoints + [extra]))


def default_t_grid(size: Optional[int] = None) -> Tuple[float, ...]:
    """The first `size` points of the default grid, refined as often as needed for larger sizes."""
    grid = DEFAULT_T_GRID
    if size is None:
        return grid
    if size < 1:
        raise ValueError("The t-grid needs at least one point.")
    while len(grid) < size:
        grid = refine_grid(grid)
    return tuple(grid[:size])


def _require_faithful(E: StatisticalExperiment):
    if not E.is_faithful():
        raise SingularState(
            f"Average state has minimum eigenvalue {min_eigenvalue(E.average_state):.3e}; restrict to the support first."
        )


def cocycle_generators(
    E: StatisticalExperiment,
    t_grid: Optional[Sequence[float]] = None,
    include_modular: bool = False,
) -> List[np.ndarray]:
    """
    The cocycles rho_theta^{it} sigma^{-it} for every state and grid time.

    Parameters:
    ===========
        * E (StatisticalExperiment): A faithful experiment; sigma is its average state.
        * t_grid (Sequence[float]): The times; the default grid when None.
        * include_modular (bool): Also return sigma^{it} for every grid time.

    Returns:
    ========
        * List[np.ndarray]: The generator matrices, grouped by state.

    Raises:
    =======
        * SingularState: If the average state is not strictly positive.
    """
    _require_faithful(E)
    t_grid = DEFAULT_T_GRID if t_grid is None else tuple(t_grid)
    sigma_inv = imag_powers(E.average_state, [-t for t in t_grid], E.tolerances)
    generators = []
    for rho in E.states:
        rho_powers = imag_powers(rho, t_grid, E.tolerances, support_only=True)
        generators.extend(R @ S for R, S in zip(rho_powers, sigma_inv))
    if include_modular:
        generators.extend(imag_powers(E.average_state, t_grid, E.tolerances))
    return generators


def minimal_sufficient_subalgebra(
    E: StatisticalExperiment,
    t_grid: Optional[Sequence[float]] = None,
    max_rounds: int = 16,
) -> StarAlgebra:
    """
    The algebra generated by the cocycles, closed under A -> sigma^{it} A sigma^{-it}
    over the same grid until the closure is stable.

    Raises:
    =======
        * SingularState: If E is not faithful.
        * AlgebraNotStabilized: If the closure has not stabilized after max_rounds rounds.
    """
    t_grid = DEFAULT_T_GRID if t_grid is None else tuple(t_grid)
    A = generate_star_algebra(cocycle_generators(E, t_grid), E.dim, E.tolerances)
    sigma_plus = imag_powers(E.average_state, t_grid, E.tolerances)
    for round_index in range(max_rounds):
        conjugates = [U @ B @ dagger(U) for U in sigma_plus for B in A.basis]
        closed = generate_star_algebra(list(A.basis) + conjugates, E.dim, E.tolerances)
        if subspace_equal(A, closed):
            logger.debug("Minimal algebra of dimension %d stable after %d rounds.", A.dim, round_index + 1)
            return A
        A = closed
    raise AlgebraNotStabilized(f"Modular closure did not stabilize within {max_rounds} rounds.")


@dataclass
class KIDecomposition:
    """
    The block data of a Koashi-Imoto decomposition.

    Blocks, omegas and the per-state data live on the support of the average
    state; `support` is the isometry W from there into the original space.
    """

    labels: Tuple[str, ...]
    blocks: List[WedderburnBlock]
    omegas: List[np.ndarray]
    q: np.ndarray
    rho: List[List[np.ndarray]]
    algebra: StarAlgebra
    support: np.ndarray
    reference_state: np.ndarray
    t_grid: Tuple[float, ...] = field(default=DEFAULT_T_GRID)

    @property
    def ambient_dim(self) -> int:
        return self.support.shape[0]

    @property
    def block_dims(self) -> List[int]:
        return [b.d for b in self.blocks]

    @property
    def multiplicities(self) -> List[int]:
        return [b.m for b in self.blocks]

    def reconstruct(self, index: int) -> np.ndarray:
        """sum_alpha V_alpha (q rho (x) omega) V_alpha*, mapped back into the original space."""
        d = self.support.shape[1]
        X = np.zeros((d, d), dtype=complex)
        for a, b in enumerate(self.blocks):
            X += b.embed(self.q[a, index] * np.kron(self.rho[a][index], self.omegas[a]))
        return self.support @ X @ dagger(self.support)

    def reconstruction_residuals(self, E: StatisticalExperiment) -> np.ndarray:
        return np.array([np.linalg.norm(self.reconstruct(k) - rho) for k, rho in enumerate(E.states)])

    def minimal_states(self) -> List[np.ndarray]:
        """(+)_alpha q_{alpha,theta} rho_{alpha,theta} per state."""
        return [
            block_diag(*[self.q[a, k] * self.rho[a][k] for a in range(len(self.blocks))])
            for k in range(len(self.labels))
        ]

    def summary(self, return_type: str = 'numpy'):
        """
        One row per block: d, m and the weights q_{alpha,theta}.

        Parameters:
        ===========
            * return_type (str): 'numpy' or 'pandas'.

        Returns:
        ========
            * np.ndarray or pd.DataFrame: The block table.
        """
        rows = np.column_stack([self.block_dims, self.multiplicities, self.q])
        if validate_return_type(return_type) == 'pandas':
            frame = pd.DataFrame(rows, columns=['d', 'm'] + [f"q[{label}]" for label in self.labels])
            frame.index.name = 'block'
            return frame.astype({'d': int, 'm': int})
        return rows


def _decompose_states(E: StatisticalExperiment, blocks: List[WedderburnBlock]):
    """Per-block weights, factor states and the theta-independent multiplicity states."""
    tol = E.tolerances
    n = len(E.labels)
    q = np.zeros((len(blocks), n))
    rho_blocks, omegas, spread = [], [], {}
    for a, b in enumerate(blocks):
        rho_a, candidates = [], []
        for k, rho in enumerate(E.states):
            tilde = b.compress(rho)
            weight = float(np.real(np.trace(tilde)))
            q[a, k] = max(weight, 0.0)
            if weight > tol.feas_tol:
                candidates.append((weight, partial_trace(tilde, (b.d, b.m), 'first') / weight))
                rho_a.append(partial_trace(tilde, (b.d, b.m), 'second') / weight)
            else:
                rho_a.append(np.eye(b.d, dtype=complex) / b.d)
        total = sum(w for w, _ in candidates)
        omega = sum(w * c for w, c in candidates) / total
        deviation = max(np.linalg.norm(c - omega) for _, c in candidates)
        spread[a] = float(deviation)
        if deviation > OMEGA_TOL:
            raise OmegaInconsistent(f"Block {a}: multiplicity states differ by {deviation:.3e}.", spread=spread)
        for k, rho in enumerate(E.states):
            product = q[a, k] * np.kron(rho_a[k], omega)
            if np.linalg.norm(b.compress(rho) - product) > tol.feas_tol:
                raise OmegaInconsistent(f"Block {a}: state {E.labels[k]} is not of product form.", spread=spread)
        rho_blocks.append(rho_a)
        omegas.append((omega + dagger(omega)) / 2)
    return q, rho_blocks, omegas


def ki_decompose(
    E: StatisticalExperiment,
    t_grid: Optional[Sequence[float]] = None,
    seed: Optional[int] = 0,
    max_refinements: int = MAX_REFINEMENTS,
) -> KIDecomposition:
    """
    Computes the Koashi-Imoto decomposition of an experiment.

    The experiment is restricted to its support, the minimal sufficient
    subalgebra is decomposed into Wedderburn blocks, and each state is
    split blockwise into q rho (x) omega. When the multiplicity states
    disagree across parameters the grid is refined and the computation
    repeated, at most `max_refinements` times.

    Parameters:
    ===========
        * E (StatisticalExperiment): The experiment.
        * t_grid (Sequence[float]): The cocycle times; the default grid when None.
        * seed (int): Seed of the random elements used by the block decomposition.
        * max_refinements (int): Number of grid doublings allowed.

    Returns:
    ========
        * KIDecomposition: The decomposition; it reproduces every state within 1e-8.

    Raises:
    =======
        * OmegaInconsistent: If the decomposition is inconsistent on the finest grid.
        * AlgebraNotStabilized: If the modular closure fails to stabilize.
    """
    restricted, _ = restrict_to_support(E)
    W = np.eye(E.dim, dtype=complex) if restricted is E else support_isometry(E)[0]
    grid = DEFAULT_T_GRID if t_grid is None else tuple(t_grid)
    for attempt in range(max_refinements + 1):
        M0 = minimal_sufficient_subalgebra(restricted, grid)
        blocks = wedderburn_decompose(M0, restricted.tolerances, seed)
        try:
            q, rho_blocks, omegas = _decompose_states(restricted, blocks)
        except OmegaInconsistent as error:
            if attempt == max_refinements:
                raise
            logger.warning("%s Refining the t-grid to %d points.", error, 2 * len(grid))
            grid = refine_grid(grid)
            continue
        decomposition = KIDecomposition(
            restricted.labels, blocks, omegas, q, rho_blocks, M0, W, E.average_state, grid
        )
        residual = decomposition.reconstruction_residuals(E).max()
        if residual > RECONSTRUCTION_TOL:
            if attempt == max_refinements:
                raise OmegaInconsistent(f"Reconstruction residual {residual:.3e} exceeds {RECONSTRUCTION_TOL}.")
            grid = refine_grid(grid)
            continue
        logger.info("Koashi-Imoto blocks (d, m): %s", [(b.d, b.m) for b in blocks])
        return decomposition
    raise OmegaInconsistent("Refinement budget exhausted.")



def minimal_form(
    E: StatisticalExperiment,
    t_grid: Optional[Sequence[float]] = None,
    seed: Optional[int] = 0,
    validate: bool = False,
    **search_options,
) -> Tuple[StatisticalExperiment, KIDecomposition]:
    """
    The minimal sufficient form: states (+)_alpha q_{alpha,theta} rho_{alpha,theta}
    on the algebra (+)_alpha M_{d_alpha}.

    Parameters:
    ===========
        * E (StatisticalExperiment): The experiment.
        * t_grid (Sequence[float]): The cocycle times.
        * seed (int): Seed for the decomposition (and for the validation search).
        * validate (bool): Run find_fixing_channel on the result and raise NotMinimalForm on a witness.
        * search_options: starts, max_iter and threads of the validation search.

    Returns:
    ========
        * Tuple[StatisticalExperiment, KIDecomposition]: The minimal form and the decomposition it came from.
    """
    decomposition = ki_decompose(E, t_grid, seed)
    minimal = StatisticalExperiment(
        decomposition.minimal_states(), E.labels, decomposition.block_dims, E.tolerances
    )
    if validate:
        from .coarse_graining import find_fixing_channel
        witness = find_fixing_channel(minimal, seed=seed, **search_options)
        if witness is not None:
            raise NotMinimalForm("A non-identity channel fixes every state of the computed minimal form.")
    return minimal, decomposition


def conditional_expectation_for(E: StatisticalExperiment, decomposition: KIDecomposition) -> Superoperator:
    """
    The state-preserving conditional expectation onto the minimal sufficient subalgebra,

        E(A) = W E_0(W* A W) W* + tr[sigma A] (I - P),

    where E_0 is the block formula on the support P = W W* of the average state sigma.

    Raises:
    =======
        * DimensionMismatch: If the decomposition does not belong to an experiment of E's dimension.
    """
    if E.dim != decomposition.ambient_dim or len(E.labels) != len(decomposition.labels):
        raise DimensionMismatch("The decomposition was not computed from this experiment.")
    inner = conditional_expectation(decomposition.blocks, decomposition.omegas)
    W = decomposition.support
    if W.shape[1] == E.dim and np.allclose(W, np.eye(E.dim)):
        return inner
    lifted = compression(dagger(W)).compose(inner.compose(compression(W)))
    complement = np.eye(E.dim) - W @ dagger(W)
    action = lifted.action + np.outer(vec(complement), vec(decomposition.reference_state.T))
    return Superoperator(action, E.dim, E.dim)
