import numpy as np
import pytest
from conftest import classical_experiment, random_experiment
from qsuff.experiment import (
    StatisticalExperiment,
    cocycle_generators,
    conditional_expectation_for,
    embed_with_ancilla,
    ki_decompose,
    likelihood_ratio_partition,
    minimal_form,
    minimal_sufficient_subalgebra,
)
from qsuff.experiment.koashi_imoto import DEFAULT_T_GRID, default_t_grid, refine_grid
from qsuff.utils._other_utils import DimensionMismatch, SingularState
from qsuff.utils.linalg_utils import dagger, random_density, random_unitary


def block_points(E, decomposition):
    W = decomposition.support
    groups = []
    for b in decomposition.blocks:
        weights = np.real(np.diag(W @ b.central_projection @ dagger(W)))
        groups.append([int(i) for i in np.nonzero(weights > 0.5)[0]])
    return sorted(groups)


def check_expectation(E, decomposition, rng):
    expectation = conditional_expectation_for(E, decomposition)
    assert expectation.compose(expectation).distance(expectation) <= 1e-9
    assert expectation.unit_residual() <= 1e-10
    assert expectation.choi_min_eigenvalue() >= -1e-9
    for rho in E.states:
        assert np.linalg.norm(expectation.apply_predual(rho) - rho) <= 1e-8
    if not E.is_faithful():
        # The tr[sigma A](I - P) term leaves the range outside any *-algebra.
        return
    B1, B2 = [decomposition.algebra.random_element(rng) for _ in range(2)]
    X = rng.standard_normal((E.dim, E.dim)) + 1j * rng.standard_normal((E.dim, E.dim))
    assert np.allclose(expectation.apply(B1 @ X @ B2), B1 @ expectation.apply(X) @ B2, atol=1e-8)


def test_grid_refinement():
    refined = refine_grid(DEFAULT_T_GRID)
    assert len(refined) == 16
    assert set(DEFAULT_T_GRID) <= set(refined)
    assert default_t_grid(3) == DEFAULT_T_GRID[:3]
    assert len(default_t_grid(20)) == 20
    with pytest.raises(ValueError):
        default_t_grid(0)


def test_single_state_has_trivial_minimal_form(rng):
    rho = random_density(3, rng)
    E = StatisticalExperiment([rho])
    dec = ki_decompose(E)
    assert dec.block_dims == [1]
    assert dec.multiplicities == [3]
    assert np.allclose(np.linalg.eigvalsh(dec.omegas[0]), np.linalg.eigvalsh(rho), atol=1e-9)
    minimal, _ = minimal_form(E)
    assert minimal.dim == 1


def test_identical_states_give_scalar_algebra(rng):
    rho = random_density(2, rng)
    E = StatisticalExperiment([rho, rho])
    assert minimal_sufficient_subalgebra(E).dim == 1
    assert all(np.allclose(G, np.eye(2), atol=1e-9) for G in cocycle_generators(E))


def test_cocycles_need_a_faithful_average():
    E = StatisticalExperiment([np.diag([1.0, 0.0])])
    with pytest.raises(SingularState):
        cocycle_generators(E)


def test_three_point_classical_fixture(three_point_experiment):
    dec = ki_decompose(three_point_experiment)
    assert dec.block_dims == [1, 1]
    assert dec.multiplicities == [1, 2]
    assert np.allclose(dec.q[0], [0.5, 0.2])
    assert np.allclose(dec.omegas[1], np.eye(2) / 2, atol=1e-9)
    assert block_points(three_point_experiment, dec) == [[0], [1, 2]]
    frame = dec.summary('pandas')
    assert list(frame.columns) == ['d', 'm', 'q[0]', 'q[1]']
    minimal, _ = minimal_form(three_point_experiment)
    assert minimal.blocks == (1, 1)
    assert np.allclose(np.diag(minimal.states[1]), [0.2, 0.8])


@pytest.mark.parametrize("trial", range(6))
def test_reconstruction_and_expectation_on_random_experiments(trial):
    rng = np.random.default_rng(trial)
    d = int(rng.integers(2, 5))
    n = int(rng.integers(1, 4))
    rank = int(rng.integers(1, d + 1))
    E = random_experiment(d, n, rng, rank)
    dec = ki_decompose(E, seed=trial)
    assert dec.reconstruction_residuals(E).max() <= 1e-8
    check_expectation(E, dec, rng)


def test_ancilla_embedding_exposes_multiplicity(rng):
    E = random_experiment(2, 2, rng)
    omega = random_density(3, rng)
    dec = ki_decompose(embed_with_ancilla(E, omega))
    assert dec.block_dims == [2]
    assert dec.multiplicities == [3]
    assert np.allclose(np.linalg.eigvalsh(dec.omegas[0]), np.linalg.eigvalsh(omega), atol=1e-8)


def test_block_diagonal_input_with_multiplicity(rng):
    rho = [random_density(2, rng) for _ in range(2)]
    omega = random_density(2, rng)
    states = [np.kron(r, omega) for r in rho]
    E = StatisticalExperiment(states)
    dec = ki_decompose(E)
    assert (dec.block_dims, dec.multiplicities) == ([2], [2])
    check_expectation(E, dec, rng)


@pytest.mark.parametrize("trial", range(5))
def test_classical_blocks_match_likelihood_ratio_partition(trial):
    rng = np.random.default_rng(1000 + trial)
    points = int(rng.integers(3, 7))
    n = int(rng.integers(2, 4))
    base = rng.uniform(0.1, 1.0, (n, points - 1))
    # The last point copies the likelihood ratios of the first.
    share = rng.uniform(0.2, 0.8)
    p = np.concatenate([base[:, :1] * share, base[:, 1:], base[:, :1] * (1 - share)], axis=1)
    p = p / p.sum(axis=1, keepdims=True)
    E = classical_experiment(p)
    dec = ki_decompose(E, seed=trial)
    assert all(d == 1 for d in dec.block_dims)
    assert block_points(E, dec) == sorted(likelihood_ratio_partition(E))


def test_commuting_rotated_states(rng):
    U = random_unitary(3, rng)
    p = rng.dirichlet(np.ones(3), size=3)
    E = StatisticalExperiment([U @ np.diag(q) @ dagger(U) for q in p])
    dec = ki_decompose(E)
    assert dec.block_dims == [1, 1, 1]
    assert dec.multiplicities == [1, 1, 1]
    assert dec.reconstruction_residuals(E).max() <= 1e-8
    check_expectation(E, dec, rng)


def test_rotated_three_point_fixture(rng, three_point_experiment):
    U = random_unitary(3, rng)
    E = StatisticalExperiment([U @ rho @ dagger(U) for rho in three_point_experiment.states])
    dec = ki_decompose(E)
    assert dec.block_dims == [1, 1]
    assert sorted(dec.multiplicities) == [1, 2]
    assert dec.reconstruction_residuals(E).max() <= 1e-8
    check_expectation(E, dec, rng)


def fixed_point_dimension(expectation):
    n = expectation.action.shape[0]
    return n - np.linalg.matrix_rank(expectation.action - np.eye(n), tol=1e-8)


@pytest.mark.parametrize("trial", range(4))
def test_fixed_points_of_expectation_form_the_algebra(trial):
    rng = np.random.default_rng(300 + trial)
    E = random_experiment(int(rng.integers(2, 5)), int(rng.integers(1, 4)), rng)
    if trial % 2:
        E = embed_with_ancilla(E, random_density(2, rng))
    dec = ki_decompose(E, seed=trial)
    assert fixed_point_dimension(conditional_expectation_for(E, dec)) == dec.algebra.dim


def test_fixed_points_of_classical_expectation(three_point_experiment):
    dec = ki_decompose(three_point_experiment)
    assert dec.algebra.dim == 2
    assert fixed_point_dimension(conditional_expectation_for(three_point_experiment, dec)) == 2


def test_expectation_rejects_foreign_decomposition(rng, three_point_experiment):
    dec = ki_decompose(StatisticalExperiment([random_density(2, rng)]))
    with pytest.raises(DimensionMismatch):
        conditional_expectation_for(three_point_experiment, dec)


@pytest.mark.slow
def test_reconstruction_suite():
    rng = np.random.default_rng(2026)
    for trial in range(200):
        d = int(rng.integers(2, 9))
        n = int(rng.integers(1, 5))
        rank = int(rng.integers(1, d + 1))
        E = random_experiment(d, n, rng, rank)
        dec = ki_decompose(E, seed=trial)
        assert dec.reconstruction_residuals(E).max() <= 1e-8
        check_expectation(E, dec, rng)


@pytest.mark.slow
def test_classical_oracle_suite():
    rng = np.random.default_rng(55)
    for trial in range(100):
        points = int(rng.integers(2, 9))
        n = int(rng.integers(1, 5))
        p = rng.uniform(0.05, 1.0, (n, points))
        if points > 2 and rng.random() < 0.5:
            p[:, -1] = p[:, 0] * rng.uniform(0.2, 2.0)
        p = p / p.sum(axis=1, keepdims=True)
        E = classical_experiment(p)
        dec = ki_decompose(E, seed=trial)
        assert all(d == 1 for d in dec.block_dims)
        assert block_points(E, dec) == sorted(likelihood_ratio_partition(E))
