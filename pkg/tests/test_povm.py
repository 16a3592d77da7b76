import numpy as np
import pytest
from conftest import random_povm, random_pvm
from qsuff.povm import (
    DiscretePOVM,
    StochasticKernel,
    dilation_residuals,
    fully_quantum_dilation,
    kernel_minimal_check,
    postprocessing_leq,
    povm_as_experiment,
    povm_from_qc_channel,
    povm_postproc_equiv,
    qc_channel,
    relabeling_kernels,
    relabeling_minimal_form,
)
from qsuff.utils._other_utils import DimensionMismatch, InvalidKernel, InvalidPovm
from qsuff.utils.linalg_utils import random_density


@pytest.fixture
def duplicated():
    return DiscretePOVM([np.diag([1.0, 0.0]), np.diag([0.0, 0.5]), np.diag([0.0, 0.5])], ['a', 'b', 'c'])


def split_pair(M: DiscretePOVM, k: int) -> DiscretePOVM:
    """M with outcome k split into two proportional halves."""
    effects = list(M.effects) + [M.effects[k] / 2]
    effects[k] = M.effects[k] / 2
    return DiscretePOVM(effects)


def test_povm_validation():
    with pytest.raises(InvalidPovm):
        DiscretePOVM([np.diag([1.0, 0.0])])
    with pytest.raises(InvalidPovm):
        DiscretePOVM([np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])])
    with pytest.raises(DimensionMismatch):
        DiscretePOVM([np.eye(2), np.zeros((3, 3))])
    with pytest.raises(InvalidPovm):
        DiscretePOVM([])


def test_probabilities_form_a_distribution(rng):
    M = random_povm(3, 4, rng)
    p = M.probabilities(random_density(3, rng))
    assert p.min() >= 0 and np.isclose(p.sum(), 1.0)


def test_kernel_validation_and_composition(rng, duplicated):
    with pytest.raises(InvalidKernel):
        StochasticKernel([[0.5, 0.5], [0.4, 0.5]])
    with pytest.raises(InvalidKernel):
        StochasticKernel([[1.5, 0.0], [-0.5, 1.0]])
    merge = StochasticKernel([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0]])
    assert merge.is_deterministic()
    merged = merge.apply(duplicated)
    assert np.allclose(merged.effects[1], np.diag([0.0, 1.0]))
    coin = StochasticKernel([[0.5, 0.5], [0.5, 0.5]])
    assert np.allclose(coin.compose(merge).matrix, [[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]])
    assert list(merge.summary('pandas').columns) == ['0', '1', '2']


def test_qc_channel_round_trip(rng):
    M = random_povm(2, 3, rng)
    channel = qc_channel(M)
    assert channel.in_kind == 'diagonal'
    assert channel.is_channel()
    recovered = povm_from_qc_channel(channel, M.labels)
    assert np.allclose(recovered.effects, M.effects)


def test_fully_quantum_dilation(rng, duplicated):
    for M in (random_povm(2, 3, rng), duplicated):
        gamma, pinching = fully_quantum_dilation(M)
        assert gamma.is_channel()
        assert pinching.compose(pinching).distance(pinching) < 1e-12
        residuals = dilation_residuals(M, gamma, pinching)
        assert max(residuals.values()) < 1e-12
        equivalent, _, _ = povm_postproc_equiv(M, povm_from_qc_channel(gamma))
        assert equivalent


def test_dilation_drops_zero_effects():
    M = DiscretePOVM([np.eye(2), np.zeros((2, 2))])
    gamma, _ = fully_quantum_dilation(M)
    assert gamma.in_dim == 1


def test_povm_as_experiment_is_classical(rng):
    M = random_povm(2, 3, rng)
    E = povm_as_experiment(M)
    assert E.is_classical
    assert len(E) == 4
    assert np.allclose(np.diag(E.states[0]), M.traces / 2)


def test_trine_and_pvm_are_incomparable(trine, computational_pvm):
    assert postprocessing_leq(trine, computational_pvm) is None
    assert postprocessing_leq(computational_pvm, trine) is None


def test_trivial_povm_is_below_everything(trine):
    trivial = DiscretePOVM([np.eye(2)])
    kernel = postprocessing_leq(trivial, trine)
    assert kernel is not None
    assert np.allclose(kernel.matrix, [[1.0, 1.0, 1.0]])


def test_postprocessing_rejects_dimension_mismatch(trine):
    with pytest.raises(DimensionMismatch):
        postprocessing_leq(trine, DiscretePOVM([np.eye(3)]))


def test_kernel_reproduces_postprocessed_povm(rng):
    N = random_povm(2, 4, rng)
    kappa = StochasticKernel(rng.dirichlet(np.ones(2), size=4).T)
    M = kappa.apply(N)
    found = postprocessing_leq(M, N)
    assert found is not None
    assert np.allclose(found.apply(N).effects, M.effects, atol=1e-9)


def test_relabeling_minimal_form_merges_proportional_effects(duplicated):
    minimal, merge_map = relabeling_minimal_form(duplicated)
    assert len(minimal) == 2
    assert merge_map == [0, 1, 1]
    assert minimal.labels == ('a', 'b+c')
    relabel, split = relabeling_kernels(duplicated, minimal, merge_map)
    assert np.allclose(relabel.apply(duplicated).effects, minimal.effects)
    assert np.allclose(split.apply(minimal).effects, duplicated.effects)
    assert povm_postproc_equiv(duplicated, minimal)[0]


def test_relabeling_drops_zero_effects():
    M = DiscretePOVM([np.diag([1.0, 0.0]), np.zeros((2, 2)), np.diag([0.0, 1.0])])
    minimal, merge_map = relabeling_minimal_form(M)
    assert merge_map == [0, None, 1]
    relabel, split = relabeling_kernels(M, minimal, merge_map)
    assert np.allclose(relabel.apply(M).effects, minimal.effects)
    assert np.allclose(split.apply(minimal).effects, M.effects)


def test_kernel_check_verdicts(computational_pvm, duplicated):
    minimal, value = kernel_minimal_check(computational_pvm)
    assert minimal and value <= 1e-9
    minimal, value = kernel_minimal_check(duplicated)
    assert not minimal and value >= 0.5
    coin = DiscretePOVM([np.eye(2) / 2, np.eye(2) / 2])
    assert kernel_minimal_check(coin) == (False, pytest.approx(1.0))


@pytest.mark.parametrize("trial", range(5))
def test_random_pvms_are_kernel_minimal(trial):
    rng = np.random.default_rng(trial)
    minimal, value = kernel_minimal_check(random_pvm(int(rng.integers(2, 5)), rng))
    assert minimal and value <= 1e-9


@pytest.mark.parametrize("trial", range(5))
def test_relabeling_and_kernel_minimality_agree(trial):
    rng = np.random.default_rng(500 + trial)
    d = int(rng.integers(2, 4))
    # Outcome counts above d^2 force linearly dependent effects.
    M = random_povm(d, int(rng.integers(1, 2 * d * d + 1)), rng)
    relabeled, _ = relabeling_minimal_form(M)
    minimal, value = kernel_minimal_check(M)
    assert minimal == (len(relabeled) == len(M.nonzero()[0]))
    assert kernel_minimal_check(relabeled)[1] <= 1e-9


@pytest.mark.slow
def test_kernel_lp_suite():
    rng = np.random.default_rng(6)
    for _ in range(50):
        minimal, value = kernel_minimal_check(random_pvm(int(rng.integers(2, 5)), rng))
        assert minimal and value <= 1e-9
    for _ in range(100):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, min(2 * d * d, 12) + 1))
        M = random_povm(d, n, rng)
        if rng.random() < 0.3:
            M = split_pair(M, int(rng.integers(n)))
        relabeled, _ = relabeling_minimal_form(M)
        minimal, value = kernel_minimal_check(M)
        assert kernel_minimal_check(relabeled)[1] <= 1e-9
        assert minimal == (len(relabeled) == len(M.nonzero()[0]))
        if len(relabeled) < len(M):
            assert value >= 0.5


@pytest.mark.parametrize("d, n", [(2, 3), (3, 5), (5, 6), (2, 9)])
def test_duplicated_pair_moves_a_full_column(rng, d, n):
    M = split_pair(random_povm(d, n, rng), int(rng.integers(n)))
    minimal, value = kernel_minimal_check(M)
    assert not minimal
    assert value >= 0.5
    assert value == pytest.approx(1.0, abs=1e-9)


def test_dependent_effects_without_proportional_pairs_are_kernel_minimal(rng):
    M = random_povm(2, 7, rng)
    assert len(relabeling_minimal_form(M)[0]) == 7
    minimal, value = kernel_minimal_check(M)
    assert minimal and value <= 1e-9
