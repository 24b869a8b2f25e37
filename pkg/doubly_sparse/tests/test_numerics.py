"""
Tests for the numerics module
"""

from itertools import combinations, product

import numpy as np
import pytest
from numpy.testing import assert_allclose

from doubly_sparse.exceptions import DimensionMismatch, InvalidSpecError
from doubly_sparse.numerics import (
    SparseVector,
    Tolerance,
    as_vector,
    batched_rank,
    dft_at_frequencies,
    hamming_weight,
    naive_dft_at_frequencies,
    null_vector,
    numerical_rank,
    solve_on_support,
    support_of,
    wrap_frequency,
)


def test_tolerance_defaults():
    tol = Tolerance()
    assert (tol.zero_tol, tol.rank_tol, tol.residual_tol) == (1e-8, 1e-9, 1e-7)
    assert Tolerance.resolve(None) == tol


@pytest.mark.parametrize("field", ['zero_tol', 'rank_tol', 'residual_tol'])
@pytest.mark.parametrize("value", [0.0, -1e-3, 1.0, 2.5])
def test_tolerance_rejects_out_of_range(field, value):
    with pytest.raises(InvalidSpecError):
        Tolerance(**{field: value})


def test_hamming_weight_zero_vector():
    assert hamming_weight([0.0, 0.0, 0.0]) == 0


def test_hamming_weight_ignores_tiny_entries():
    assert hamming_weight([1.0, -2.0, 0.0, 3e-12]) == 2
    assert support_of([1.0, -2.0, 0.0, 3e-12]) == (0, 1)


def test_hamming_weight_scales_with_vector():
    # 1e-3 is below 1e-8 * 1e6
    assert hamming_weight([1e6, 1e-3]) == 1


def test_hamming_weight_is_permutation_invariant():
    rng = np.random.default_rng(11)
    v = np.where(rng.random(40) < 0.3, rng.standard_normal(40), 0.0)
    v[3] = 1e-12
    for _ in range(5):
        perm = rng.permutation(40)
        assert hamming_weight(v[perm]) == hamming_weight(v)
        assert sorted(int(i) for i in perm[list(support_of(v[perm]))]) == list(support_of(v))


def test_images_of_two_sparse_vectors_are_heavy(generic_8_1_1):
    H = generic_8_1_1.H
    for i, j in combinations(range(8), 2):
        for si, sj in product([1.0, -1.0], repeat=2):
            z = np.zeros(8)
            z[i], z[j] = si, sj
            assert hamming_weight(H @ z) >= 3


def test_numerical_rank_examples():
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank([[1.0, 1.0], [2.0, 2.0]]) == 1
    assert numerical_rank(np.vander([0.0, 1.0, 2.0], 2, increasing=True).T) == 2
    assert numerical_rank(np.zeros((3, 4))) == 0


@pytest.mark.parametrize("rows,cols,rank", [(5, 8, 3), (7, 4, 2), (6, 6, 6), (4, 9, 0)])
def test_numerical_rank_of_transpose(rows, cols, rank):
    rng = np.random.default_rng(rows * cols)
    M = rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
    assert numerical_rank(M) == numerical_rank(M.T) == rank
    complex_M = M + 1j * (rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols)))
    assert numerical_rank(complex_M) == numerical_rank(complex_M.T)


def test_batched_rank_matches_numerical_rank():
    rng = np.random.default_rng(3)
    stack = rng.standard_normal((5, 4, 3))
    stack[2, :, 2] = stack[2, :, 0]
    stack[4] = 0.0
    expected = [numerical_rank(m) for m in stack]
    assert batched_rank(stack).tolist() == expected
    assert expected[2] == 2 and expected[4] == 0


def test_null_vector_annihilates():
    M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 7.0]])
    v = null_vector(M)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert_allclose(M @ v, 0.0, atol=1e-12)


def test_solve_on_support_identity():
    fit = solve_on_support(np.eye(3), [1], [0.0, 5.0, 0.0])
    assert_allclose(fit.coefficients, [5.0])
    assert fit.residual == pytest.approx(0.0, abs=1e-15)
    assert fit.full_rank


def test_solve_on_support_reports_rank_deficiency():
    M = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0]])
    fit = solve_on_support(M, [0, 1], [1.0, 1.0])
    assert fit.rank == 1
    assert not fit.full_rank


def test_solve_on_support_residual_is_relative():
    fit = solve_on_support(np.eye(2), [0], [3.0, 4.0])
    assert fit.residual == pytest.approx(4.0 / 5.0)


def test_solve_on_support_rejects_bad_columns():
    with pytest.raises(DimensionMismatch):
        solve_on_support(np.eye(3), [0, 0], [1.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        solve_on_support(np.eye(3), [3], [1.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        solve_on_support(np.eye(2)[:, :1], [0], [1.0, 0.0, 0.0])


def test_as_vector_rejects_non_finite():
    with pytest.raises(InvalidSpecError):
        as_vector([1.0, np.nan])
    with pytest.raises(DimensionMismatch):
        as_vector(np.eye(2))


@pytest.mark.parametrize("m,n,expected", [(5, 8, -3), (4, 8, 4), (-1, 8, -1), (3, 7, 3), (4, 7, -3), (16, 8, 0)])
def test_wrap_frequency(m, n, expected):
    assert wrap_frequency(m, n) == expected


@pytest.mark.parametrize("n", [7, 8, 13, 32])
def test_fft_path_matches_naive_dft(n):
    rng = np.random.default_rng(n)
    v = rng.standard_normal(n)
    freqs = list(range(-((n - 1) // 2), n // 2 + 1))
    fast = dft_at_frequencies(v, freqs, n)
    slow = naive_dft_at_frequencies(v, freqs, n)
    assert np.max(np.abs(fast - slow)) <= 1e-10 * max(1.0, np.max(np.abs(slow)))


def test_dft_rejects_out_of_band_frequency():
    with pytest.raises(DimensionMismatch):
        dft_at_frequencies(np.ones(8), [5], 8)


def test_sparse_vector_validation():
    with pytest.raises(InvalidSpecError):
        SparseVector(5, (3, 1), (1.0, 2.0))
    with pytest.raises(InvalidSpecError):
        SparseVector(5, (1,), (0.0,))
    with pytest.raises(InvalidSpecError):
        SparseVector(5, (5,), (1.0,))
    with pytest.raises(DimensionMismatch):
        SparseVector(5, (1, 2), (1.0,))


def test_sparse_vector_dense_conversion():
    v = SparseVector.from_dense([0.0, 2.5, 0.0, -1.0, 1e-14])
    assert v.support == (1, 3)
    assert v.values == (2.5, -1.0)
    assert v.weight == 2
    assert_allclose(v.to_dense(), [0.0, 2.5, 0.0, -1.0, 0.0])
    assert SparseVector.zeros(4).weight == 0
