import itertools
import numpy as np
import pytest
from qsuff.utils._other_utils import UnboundedError
from qsuff.utils.simplex_utils import LinearProgram, lp_solve, remove_redundant_rows


def brute_force_optimum(A, b, c):
    """Best objective over all basic feasible solutions."""
    m, n = A.shape
    best = None
    for columns in itertools.combinations(range(n), m):
        B = A[:, columns]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xb = np.linalg.solve(B, b)
        if xb.min() < -1e-12:
            continue
        value = c[list(columns)] @ xb
        best = value if best is None else max(best, value)
    return best


@pytest.mark.parametrize("trial", range(10))
def test_simplex_matches_vertex_enumeration(trial):
    rng = np.random.default_rng(trial)
    n = 5
    x0 = rng.uniform(0.1, 1.0, n)
    A = np.vstack([rng.standard_normal(n), np.ones(n)])
    b = A @ x0
    c = rng.standard_normal(n)
    result = lp_solve(LinearProgram(A, b, c))
    assert result.feasible
    assert np.allclose(A @ result.x, b, atol=1e-9)
    assert result.x.min() >= 0
    assert np.isclose(result.objective, brute_force_optimum(A, b, c), atol=1e-9)


def test_verdicts_match_vertex_enumeration_on_random_programs():
    rng = np.random.default_rng(2024)
    verdicts = set()
    for _ in range(200):
        n = int(rng.integers(3, 9))
        m = int(rng.integers(2, min(5, n) + 1))
        # The row of ones keeps the feasible set bounded; b is not planted.
        A = np.vstack([rng.standard_normal((m - 1, n)), np.ones(n)])
        b = np.append(rng.standard_normal(m - 1), 1.0)
        c = rng.standard_normal(n)
        expected = brute_force_optimum(A, b, c)
        result = lp_solve(LinearProgram(A, b, c))
        assert result.feasible == (expected is not None)
        verdicts.add(result.feasible)
        if result.feasible:
            assert np.isclose(result.objective, expected, atol=1e-8)
            assert np.allclose(A @ result.x, b, atol=1e-9)
    assert verdicts == {True, False}


def test_infeasible_nonnegative_system():
    result = lp_solve(LinearProgram([[1.0, 1.0]], [-1.0]))
    assert not result.feasible
    assert result.phase_one_value > 0


def test_inconsistent_rows_are_infeasible():
    result = lp_solve(LinearProgram([[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0]))
    assert not result.feasible


def test_redundant_rows_are_removed():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
    b = np.array([1.0, 2.0, 0.5])
    reduced, _, removed, consistent = remove_redundant_rows(A, b)
    assert consistent
    assert reduced.shape[0] == 2
    assert len(removed) == 1
    result = lp_solve(LinearProgram(A, b, [1.0, 0.0, 0.0]))
    assert result.feasible
    assert np.isclose(result.objective, 1.0)


def test_unbounded_program_reports_a_ray():
    with pytest.raises(UnboundedError) as info:
        lp_solve(LinearProgram([[1.0, -1.0]], [0.0], [1.0, 0.0]))
    ray = info.value.ray
    assert np.allclose(np.array([[1.0, -1.0]]) @ ray, 0.0)
    assert ray.min() >= 0 and ray[0] > 0
