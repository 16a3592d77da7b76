import numpy as np
import pytest
from qsuff.utils._other_utils import NotHermitian, SingularState, DimensionMismatch, Tolerances
from qsuff.utils.linalg_utils import (
    cluster_eigenvalues,
    dagger,
    eig_hermitian,
    gell_mann_basis,
    imag_powers,
    informationally_complete_states,
    matrix_imag_power,
    nullspace,
    partial_trace,
    random_density,
    random_hermitian,
    support_basis,
    support_projection,
)


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
def test_jacobi_matches_reference_eigenvalues(rng, d):
    H = random_hermitian(d, rng)
    evals, V = eig_hermitian(H)
    assert np.allclose(evals, np.linalg.eigvalsh(H), atol=1e-10)
    assert np.allclose(dagger(V) @ V, np.eye(d), atol=1e-10)
    assert np.allclose(V @ np.diag(evals) @ dagger(V), H, atol=1e-10)


def test_jacobi_handles_degenerate_spectrum(rng):
    U = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
    H = U @ np.diag([1.0, 1.0, 2.0, 2.0]) @ dagger(U)
    evals, V = eig_hermitian(H)
    assert np.allclose(evals, [1, 1, 2, 2], atol=1e-10)
    assert np.allclose(V @ np.diag(evals) @ dagger(V), H, atol=1e-10)


def test_jacobi_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_cluster_eigenvalues_groups_close_values():
    clusters = cluster_eigenvalues(np.array([0.0, 1e-9, 1.0, 1.0 + 1e-9, 3.0]), 1e-7)
    assert [list(c) for c in clusters] == [[0, 1], [2, 3], [4]]


def test_support_projection_of_rank_deficient_state(rng):
    rho = random_density(4, rng, rank=2)
    P = support_projection(rho)
    assert np.allclose(P @ P, P, atol=1e-10)
    assert np.isclose(np.trace(P).real, 2.0)
    assert np.allclose(P @ rho @ P, rho, atol=1e-10)
    assert support_basis(rho).shape == (4, 2)


def test_imag_powers_are_unitary_spectral_functions(rng):
    rho = random_density(3, rng)
    w, V = np.linalg.eigh(rho)
    for t, U in zip([0.3, 1.7], imag_powers(rho, [0.3, 1.7])):
        expected = (V * np.exp(1j * t * np.log(w))) @ dagger(V)
        assert np.allclose(U, expected, atol=1e-9)
        assert np.allclose(U @ dagger(U), np.eye(3), atol=1e-9)


def test_imag_power_of_singular_state():
    rho = np.diag([0.5, 0.5, 0.0])
    with pytest.raises(SingularState):
        matrix_imag_power(rho, 1.0)
    U = matrix_imag_power(rho, 1.0, support_only=True)
    assert np.allclose(U, np.diag([0.5 ** 1j, 0.5 ** 1j, 0.0]), atol=1e-12)


def test_partial_trace_of_product(rng):
    A, B = random_hermitian(2, rng), random_hermitian(3, rng)
    X = np.kron(A, B)
    assert np.allclose(partial_trace(X, (2, 3), 'second'), A * np.trace(B))
    assert np.allclose(partial_trace(X, (2, 3), 'first'), B * np.trace(A))
    with pytest.raises(DimensionMismatch):
        partial_trace(X, (2, 2))


def test_gell_mann_basis_is_orthonormal():
    G = gell_mann_basis(3).reshape(8, -1)
    assert np.allclose(np.conj(G) @ G.T, np.eye(8), atol=1e-12)
    assert np.allclose(np.einsum('kii->k', gell_mann_basis(3)), 0.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_informationally_complete_family(d):
    family = informationally_complete_states(d)
    assert family.shape == (d * d, d, d)
    assert np.linalg.matrix_rank(family.reshape(d * d, -1)) == d * d
    for rho in family:
        assert np.isclose(np.trace(rho).real, 1.0)
        assert np.linalg.eigvalsh(rho).min() > 0


def test_nullspace_dimension():
    X = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    N = nullspace(X)
    assert N.shape == (3, 1)
    assert np.allclose(X @ N, 0.0)


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(eq_tol=-1.0)
    with pytest.raises(ValueError):
        Tolerances(eq_tol=1e-5, eig_cluster_tol=1e-7)
    assert Tolerances().with_feas_tol(1e-6).feas_tol == 1e-6
