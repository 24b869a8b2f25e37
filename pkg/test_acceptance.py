#!/usr/bin/env python3
"""
Acceptance suite: the construction, recovery and oracle claims checked at
desk scale. Exhaustive and many-trial checks carry the `slow` marker
(`pytest -m "not slow"` skips them).
"""

from itertools import product

import numpy as np
import pytest

from doubly_sparse.numerics import SparseVector, dft_at_frequencies, naive_dft_at_frequencies
from doubly_sparse.oracle import (
    brute_force_recover,
    extension_constant,
    isometry_constant,
    proximity_bound_check,
    singleton_witness,
    verify_cs_property,
)
from doubly_sparse.recovery import decode_complexity_probe, recover
from doubly_sparse.rs_code import Band, EvaluationPoints, RSCode, syndrome_frequencies, syndromes
from doubly_sparse.sensing_matrix import CSMatrixSpec, Variant, build, measure
from doubly_sparse.simulate import TrialConfig, run_trials

BUDGETS = list(product([1, 2, 3], repeat=2))

TRIAL_GRID = [
    (8, 1, 1),
    (16, 2, 2),
    (12, 3, 1),
    (32, 1, 3),
    (32, 3, 3),
]


@pytest.mark.slow
@pytest.mark.parametrize("t,l", BUDGETS)
def test_optimal_redundancy(t, l):
    for n in range(2 * t + 1, 13):
        m = build(CSMatrixSpec(n, t, l, Variant.GENERIC))
        assert m.r == 2 * (t + l)
        report = verify_cs_property(m.H, t, l)
        assert report.verdict, f"n={n}: {report.details}"


@pytest.mark.slow
@pytest.mark.parametrize("n", range(3, 11))
def test_singleton_sharpness(n):
    m = build(CSMatrixSpec(n, 1, 1, Variant.GENERIC))
    for row in range(m.r):
        H = np.delete(np.array(m.H), row, axis=0)
        assert not verify_cs_property(H, 1, 1).verdict
        _, weight = singleton_witness(H, 1)
        assert weight <= 2


@pytest.mark.slow
@pytest.mark.parametrize("variant", [Variant.GENERIC, Variant.CYCLIC])
@pytest.mark.parametrize("n,t,l", TRIAL_GRID)
def test_exact_recovery(n, t, l, variant):
    config = TrialConfig(n, t, l, variant, trials=1000, base_seed=2024)
    records = run_trials(config, build(config.matrix_spec()))
    failed = [r.trial for r in records if not (r.success and r.outer_ok)]
    assert not failed, f"trials {failed[:10]} failed"


@pytest.mark.slow
@pytest.mark.parametrize("n", range(3, 11))
def test_oracle_equivalence(n):
    m = build(CSMatrixSpec(n, 1, 1, Variant.GENERIC))
    grid = [1.0, -1.0, 0.5, -0.5]
    for j, a, p, b in product(range(n), grid, range(m.r), grid):
        x = SparseVector(n, (j,), (a,))
        e = SparseVector(m.r, (p,), (b,))
        s_hat = measure(m, x, e).s_hat
        solutions = brute_force_recover(m.H, s_hat, 1, 1)
        assert len(solutions) == 1
        result = recover(m, s_hat)
        assert result.ok
        x_oracle = solutions[0][0].to_dense()
        assert np.max(np.abs(result.x_hat.to_dense() - x_oracle)) <= 1e-8 * np.max(np.abs(x_oracle))
        assert result.x_hat.support == x.support


@pytest.mark.parametrize("t,l", [(1, 1), (2, 1), (3, 3)])
def test_cyclic_redundancy(t, l):
    m = build(CSMatrixSpec(4 * t + 4, t, l, Variant.CYCLIC))
    assert m.r == 2 * (t + l + 1)
    assert m.r_tilde == 2 * t + 1


@pytest.mark.parametrize("n", [8, 15, 32, 64, 101])
def test_fft_syndromes_agree_with_dft(n):
    rng = np.random.default_rng(n)
    v = rng.standard_normal(n)
    freqs = range(-(n // 4), n // 4 + 1)
    fast, slow = dft_at_frequencies(v, freqs, n), naive_dft_at_frequencies(v, freqs, n)
    assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))

    code = RSCode(EvaluationPoints.roots_of_unity(n), n - 5, Band.HIGH)
    fast = syndromes(code, v)
    slow = naive_dft_at_frequencies(v, syndrome_frequencies(code), n)
    assert np.max(np.abs(fast - slow)) <= 1e-10 * np.max(np.abs(slow))


@pytest.mark.parametrize("n,D", [(4, 1), (6, 3), (8, 8)])
def test_identity_constants(n, D):
    assert extension_constant(np.eye(n), D) == 1.0
    assert isometry_constant(np.eye(n), D) == 0.0


@pytest.mark.slow
def test_constants_inequality_on_random_matrices():
    rng = np.random.default_rng(50)
    for _ in range(50):
        H = rng.standard_normal((5, 8)) / np.sqrt(5)
        for D in (1, 2, 3):
            assert extension_constant(H, D) >= 1.0 - isometry_constant(H, D) - 1e-12


@pytest.mark.parametrize("variant", [Variant.GENERIC, Variant.CYCLIC])
@pytest.mark.parametrize("n,t,l", [(8, 1, 1), (12, 2, 1), (16, 2, 2), (16, 3, 0)])
def test_built_matrices_extend(n, t, l, variant):
    m = build(CSMatrixSpec(n, t, l, variant))
    assert extension_constant(m.H, 2 * t) > 1e-12


@pytest.mark.slow
def test_proximity_bound():
    m = build(CSMatrixSpec(8, 1, 0, Variant.GENERIC))
    report = proximity_bound_check(m.H, 1, 1e-3, trials=100, rng_seed=0)
    assert report.verdict


@pytest.mark.slow
def test_decode_time_scaling():
    matrices = [build(CSMatrixSpec(n, 2, 2, Variant.GENERIC)) for n in (32, 64)]
    frame = decode_complexity_probe(matrices, trials=50, rng_seed=3)
    small, large = frame['median_seconds'].tolist()
    assert large <= 5 * small
