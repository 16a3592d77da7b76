import numpy as np
import pytest
from qsuff.experiment import StatisticalExperiment
from qsuff.povm import DiscretePOVM
from qsuff.utils.linalg_utils import dagger, random_density


def random_povm(d: int, n: int, rng: np.random.Generator) -> DiscretePOVM:
    """n generic effects S^{-1/2} G_i S^{-1/2} from random positive G_i."""
    G = [random_density(d, rng) for _ in range(n)]
    w, V = np.linalg.eigh(sum(G))
    inv_sqrt = (V / np.sqrt(w)) @ dagger(V)
    effects = [inv_sqrt @ g @ inv_sqrt for g in G]
    effects = [(E + dagger(E)) / 2 for E in effects]
    correction = (np.eye(d) - sum(effects)) / n
    return DiscretePOVM([E + correction for E in effects])


def random_pvm(d: int, rng: np.random.Generator) -> DiscretePOVM:
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return DiscretePOVM([np.outer(Q[:, k], np.conj(Q[:, k])) for k in range(d)])


def random_experiment(d: int, n_states: int, rng: np.random.Generator, rank=None) -> StatisticalExperiment:
    return StatisticalExperiment([random_density(d, rng, rank) for _ in range(n_states)])


def classical_experiment(distributions) -> StatisticalExperiment:
    distributions = np.asarray(distributions, dtype=float)
    states = [np.diag(p) for p in distributions]
    return StatisticalExperiment(states, block_dims=[1] * distributions.shape[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def three_point_experiment():
    """Points 1 and 2 share the likelihood ratio vector."""
    return classical_experiment([[0.5, 0.25, 0.25], [0.2, 0.4, 0.4]])


@pytest.fixture
def trine():
    effects = []
    for angle in (0.0, 2 * np.pi / 3, 4 * np.pi / 3):
        psi = np.array([np.cos(angle), np.sin(angle)])
        effects.append(2 / 3 * np.outer(psi, psi))
    return DiscretePOVM(effects, ['t0', 't1', 't2'])


@pytest.fixture
def computational_pvm():
    return DiscretePOVM([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], ['z0', 'z1'])
