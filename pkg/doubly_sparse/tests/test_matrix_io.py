"""
Tests for matrix, measurement and report files
"""

import json

import numpy as np
import pandas as pd
import pytest

from doubly_sparse.exceptions import InvalidSpecError
from doubly_sparse.matrix_io import (
    load_json,
    load_matrix,
    load_measurement,
    manifest_sidecar,
    report_to_dict,
    result_to_dict,
    save_bench_csv,
    save_json,
    save_matrix,
    save_measurement,
    to_jsonable,
)
from doubly_sparse.numerics import SparseVector
from doubly_sparse.oracle import verify_cs_property
from doubly_sparse.recovery import recover
from doubly_sparse.sensing_matrix import Measurement, measure


@pytest.mark.parametrize("name", ['generic_16_2_2', 'cyclic_16_2_2'])
def test_matrix_file_is_exact(name, request, tmp_path):
    m = request.getfixturevalue(name)
    path = save_matrix(m, tmp_path / 'H.csv', manifest={'command': 'build'})
    loaded = load_matrix(path)
    assert np.array_equal(loaded.H, m.H)
    assert np.array_equal(loaded.inner, m.inner)
    assert np.array_equal(loaded.outer_generator, m.outer_generator)
    assert loaded.spec.variant == m.spec.variant
    assert (loaded.n, loaded.t, loaded.l) == (m.n, m.t, m.l)


def test_matrix_file_header(generic_8_1_1, tmp_path):
    path = save_matrix(generic_8_1_1, tmp_path / 'H.csv')
    lines = path.read_text().splitlines()
    assert lines[0] == '# format: doubly-sparse-matrix'
    assert '# variant: generic' in lines
    assert 'block,row,col,value' in lines


def test_loaded_matrix_decodes(generic_8_1_1, tmp_path):
    loaded = load_matrix(save_matrix(generic_8_1_1, tmp_path / 'H.csv'))
    x = SparseVector(8, (2,), (4.0,))
    e = SparseVector(4, (3,), (-1.0,))
    result = recover(loaded, measure(loaded, x, e).s_hat)
    assert result.ok
    assert result.x_hat.support == (2,)


def test_wrong_file_kind_is_rejected(generic_8_1_1, tmp_path):
    m = generic_8_1_1
    path = save_measurement(measure(m, SparseVector.zeros(8)), tmp_path / 's.csv')
    with pytest.raises(InvalidSpecError):
        load_matrix(path)
    with pytest.raises(FileNotFoundError):
        load_matrix(tmp_path / 'missing.csv')


def test_tampered_matrix_is_rejected(generic_8_1_1, tmp_path):
    path = save_matrix(generic_8_1_1, tmp_path / 'H.csv')
    lines = [('H,0,0,2.5' if line.startswith('H,0,0,') else line) for line in path.read_text().splitlines()]
    path.write_text('\n'.join(lines) + '\n')
    with pytest.raises(InvalidSpecError):
        load_matrix(path)


def test_measurement_file_is_exact(cyclic_8_1_1, tmp_path):
    m = cyclic_8_1_1
    x = SparseVector(8, (1,), (0.1 + 1e-16,))
    e = SparseVector(6, (4,), (-7.25,))
    meas = measure(m, x, e, noise=np.full(6, 1e-3 / 3))
    loaded = load_measurement(save_measurement(meas, tmp_path / 's.csv'))
    assert np.array_equal(loaded.s_hat, meas.s_hat)
    assert loaded.x == x and loaded.e == e
    assert np.array_equal(loaded.noise, meas.noise)


def test_measurement_without_provenance(generic_8_1_1, tmp_path):
    path = save_measurement(Measurement(s_hat=np.array([1.0, 2.0, 3.0, 4.0])), tmp_path / 's.csv')
    loaded = load_measurement(path)
    assert loaded.x is None and loaded.e is None and loaded.noise is None
    assert loaded.s_hat.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_result_json(generic_8_1_1, tmp_path):
    m = generic_8_1_1
    result = recover(m, measure(m, SparseVector(8, (3,), (7.0,))).s_hat)
    doc = result_to_dict(result, manifest={'command': 'recover'})
    path = save_json(doc, tmp_path / 'result.json')
    loaded = load_json(path)
    assert loaded['status'] == 'success'
    assert loaded['support'] == [3]
    assert loaded['values'][0] == pytest.approx(7.0)
    assert loaded['manifest'] == {'command': 'recover'}
    assert 'timings' in loaded
    assert 'timings' not in result_to_dict(result, include_timing=False)


def test_failed_result_json_is_valid(generic_16_2_2, tmp_path):
    m = generic_16_2_2
    s_hat = measure(m, SparseVector.zeros(16), SparseVector(8, (0, 3, 5), (1.0, -2.0, 3.0))).s_hat
    result = recover(m, s_hat)
    assert not result.ok
    doc = result_to_dict(result)
    assert doc['residual'] is None
    text = save_json(doc, tmp_path / 'fail.json').read_text()
    assert json.loads(text)['status'] == 'decoding_failure'


def test_report_json(generic_8_1_1, tmp_path):
    report = verify_cs_property(generic_8_1_1.H[:3], 1, 1)
    doc = load_json(save_json(report_to_dict(report), tmp_path / 'report.json'))
    assert doc['verdict'] is False
    assert len(doc['witness']) == 8
    assert doc['details']['columns'] == [0, 1]


def test_to_jsonable_converts_numpy():
    value = {'a': np.float64(1.5), 'b': (np.int64(2), np.inf), 'c': np.array([1j, 2.0])}
    assert to_jsonable(value) == {'a': 1.5, 'b': [2, None], 'c': {'real': [0.0, 2.0], 'imag': [1.0, 0.0]}}


def test_bench_csv_with_sidecar(tmp_path):
    frame = pd.DataFrame({'n': [8], 'trial': ['summary'], 'decode_micros': [np.nan]})
    path = save_bench_csv(frame, tmp_path / 'bench.csv', {'command': 'bench'})
    assert path.read_text() == 'n,trial,decode_micros\n8,summary,\n'
    assert manifest_sidecar(path).name == 'bench.csv.manifest.json'
    assert load_json(manifest_sidecar(path)) == {'command': 'bench'}
