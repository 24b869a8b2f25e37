"""
Tests for two-stage recovery
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from doubly_sparse.exceptions import DecodingFailure, DimensionMismatch, InvalidSpecError
from doubly_sparse.numerics import SparseVector, infinity_norm, support_of
from doubly_sparse.recovery import (
    Stage,
    Status,
    decode_complexity_probe,
    inner_syndrome_decode,
    recover,
)
from doubly_sparse.sensing_matrix import CSMatrixSpec, build, measure
from doubly_sparse.simulate import random_sparse

MATRICES = ['generic_8_1_1', 'cyclic_8_1_1', 'generic_16_2_2', 'cyclic_16_2_2']


def assert_recovered(result, x):
    assert result.ok, result.diagnostic
    error = infinity_norm(result.x_hat.to_dense() - x.to_dense())
    assert error <= 1e-6 * max(1.0, infinity_norm(x.to_dense()))
    assert result.x_hat.support == x.support


@pytest.mark.parametrize("name", MATRICES)
def test_zero_measurement(name, request):
    m = request.getfixturevalue(name)
    result = recover(m, np.zeros(m.r))
    assert result.ok
    assert result.x_hat.weight == 0
    assert result.outer_error_positions == ()
    assert result.residual == 0.0


def test_single_spike_without_errors(generic_8_1_1):
    x = SparseVector(8, (3,), (7.0,))
    result = recover(generic_8_1_1, measure(generic_8_1_1, x).s_hat)
    assert_recovered(result, x)
    assert result.x_hat.values[0] == pytest.approx(7.0)
    assert result.outer_error_positions == ()
    assert result.stage is None


@pytest.mark.parametrize("name", MATRICES)
def test_random_instances_within_budget(name, request):
    m = request.getfixturevalue(name)
    for seed in range(15):
        rng = np.random.default_rng(seed)
        x = random_sparse(m.n, m.t, seed=rng)
        e = random_sparse(m.r, m.l, seed=rng)
        result = recover(m, measure(m, x, e).s_hat)
        assert_recovered(result, x)
        assert result.outer_error_positions == e.support
        assert_allclose(result.u, m.inner @ x.to_dense(), atol=1e-8 * max(1.0, infinity_norm(result.u)))


@pytest.mark.parametrize("name", ['generic_16_2_2', 'cyclic_16_2_2'])
def test_fewer_spikes_than_budget(name, request):
    m = request.getfixturevalue(name)
    x = SparseVector(m.n, (5,), (-2.5,))
    e = SparseVector(m.r, (0,), (100.0,))
    assert_recovered(recover(m, measure(m, x, e).s_hat), x)


@pytest.mark.parametrize("name", MATRICES)
def test_residual_support_matches_outer_errors(name, request):
    m = request.getfixturevalue(name)
    for seed in range(10):
        rng = np.random.default_rng(50 + seed)
        x = random_sparse(m.n, m.t, seed=rng)
        e = random_sparse(m.r, m.l, seed=rng)
        s_hat = measure(m, x, e).s_hat
        result = recover(m, s_hat)
        assert result.ok, result.diagnostic
        leftover = s_hat - m.H @ result.x_hat.to_dense()
        assert support_of(leftover) == result.outer_error_positions == e.support


@pytest.mark.parametrize("seed", range(5))
def test_variants_recover_the_same_signal(generic_16_2_2, cyclic_16_2_2, seed):
    x = random_sparse(16, 2, seed=seed)
    recovered = []
    for m in (generic_16_2_2, cyclic_16_2_2):
        e = SparseVector(m.r, (1, 6), (25.0, -40.0))
        result = recover(m, measure(m, x, e).s_hat)
        assert_recovered(result, x)
        assert result.outer_error_positions == (1, 6)
        recovered.append(result.x_hat)
    generic, cyclic = recovered
    assert generic.support == cyclic.support
    assert_allclose(generic.values, cyclic.values, rtol=1e-6)


def test_gross_error_on_every_position(cyclic_8_1_1):
    m = cyclic_8_1_1
    x = SparseVector(8, (6,), (1.75,))
    for p in range(m.r):
        e = SparseVector(m.r, (p,), (-9.0,))
        result = recover(m, measure(m, x, e).s_hat)
        assert_recovered(result, x)
        assert result.outer_error_positions == (p,)


@pytest.mark.parametrize("name", ['generic_16_2_2', 'cyclic_16_2_2'])
def test_too_many_errors_are_reported(name, request):
    m = request.getfixturevalue(name)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        x = random_sparse(m.n, m.t, seed=rng)
        e = random_sparse(m.r, m.l + 1, seed=rng)
        result = recover(m, measure(m, x, e).s_hat)
        assert result.status == Status.DECODING_FAILURE
        assert result.stage in (Stage.OUTER, Stage.INNER, Stage.RESIDUAL)
        assert result.x_hat.weight == 0
        assert result.residual == float('inf')
        assert result.diagnostic


def test_too_heavy_signal_is_reported(generic_16_2_2):
    m = generic_16_2_2
    x = random_sparse(m.n, m.t + 2, seed=4)
    result = recover(m, measure(m, x).s_hat)
    assert not result.ok


def test_recover_checks_length(generic_8_1_1):
    with pytest.raises(DimensionMismatch):
        recover(generic_8_1_1, np.zeros(5))


def test_timings_recorded(generic_8_1_1):
    result = recover(generic_8_1_1, np.zeros(4))
    assert set(result.timings) == {'outer', 'inner'}
    assert all(seconds >= 0 for seconds in result.timings.values())


def test_inner_decode_toy_points():
    m = build(CSMatrixSpec(3, 1, 0, inner_points=(0.0, 1.0, 2.0)))
    x_hat = inner_syndrome_decode(m, [5.0, 10.0])
    assert x_hat.support == (2,)
    assert x_hat.values[0] == pytest.approx(5.0)


@pytest.mark.parametrize("name", MATRICES)
def test_inner_decode_zero_syndrome(name, request):
    m = request.getfixturevalue(name)
    assert inner_syndrome_decode(m, np.zeros(m.r_tilde)).weight == 0


def test_inner_decode_cyclic_spikes(cyclic_16_2_2):
    m = cyclic_16_2_2
    x = SparseVector(16, (0, 9), (3.0, -0.5))
    x_hat = inner_syndrome_decode(m, m.inner @ x.to_dense())
    assert x_hat.support == (0, 9)
    assert_allclose(x_hat.values, x.values, rtol=1e-9)


def test_inner_decode_rejects_off_grid_syndrome():
    m = build(CSMatrixSpec(3, 1, 0, inner_points=(0.0, 1.0, 2.0)))
    # locator root at 0.5 is not an inner point
    with pytest.raises(DecodingFailure) as info:
        inner_syndrome_decode(m, [2.0, 1.0])
    assert info.value.stage == 'inner'


def test_complexity_probe(generic_8_1_1, generic_16_2_2):
    frame = decode_complexity_probe([generic_8_1_1, generic_16_2_2], trials=3, rng_seed=1)
    assert frame['n'].tolist() == [8, 16]
    assert frame['trials'].tolist() == [3, 3]
    assert (frame['median_seconds'] > 0).all()


def test_complexity_probe_single_matrix(cyclic_8_1_1):
    frame = decode_complexity_probe(cyclic_8_1_1, trials=1, rng_seed=0)
    assert len(frame) == 1
    assert frame.loc[0, 'variant'] == 'cyclic'


def test_complexity_probe_needs_trials(generic_8_1_1):
    with pytest.raises(InvalidSpecError):
        decode_complexity_probe(generic_8_1_1, trials=0, rng_seed=0)
