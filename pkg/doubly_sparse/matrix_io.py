"""
Doubly Sparse CS - Matrix I/O Module

Plain-text file formats for matrices, measurements, results and reports.

Matrices and measurements are CSV long tables with columns
`block,row,col,value` (values written with 17 significant digits, which
round-trips doubles exactly), preceded by `# key: value` header lines.
Results and oracle reports are JSON documents with the run manifest
embedded.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union
import json
import logging

import numpy as np
import pandas as pd

from .config import TOOL_VERSION
from .exceptions import DimensionMismatch, InvalidSpecError
from .numerics import SparseVector
from .oracle import OracleReport
from .recovery import RecoveryResult
from .sensing_matrix import CSMatrix, CSMatrixSpec, Measurement, Variant, assemble

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = '%.17g'
COLUMNS = ['block', 'row', 'col', 'value']
MATRIX_FORMAT = 'doubly-sparse-matrix'
MEASUREMENT_FORMAT = 'doubly-sparse-measurement'

# Blocks stored as column vectors
_VECTOR_BLOCKS = {'s_hat', 'x', 'e', 'noise', 'inner_points', 'outer_points'}


def _long_table(blocks: Iterable[Tuple[str, np.ndarray]]) -> pd.DataFrame:
    """Stack named 1-D/2-D arrays into one block,row,col,value table."""
    frames = []
    for name, arr in blocks:
        arr = np.atleast_2d(np.asarray(arr, dtype=float))
        if arr.shape[0] == 1 and arr.ndim == 2 and name in _VECTOR_BLOCKS:
            arr = arr.T
        rows, cols = np.indices(arr.shape)
        frames.append(pd.DataFrame({
            'block': name,
            'row': rows.ravel(),
            'col': cols.ravel(),
            'value': arr.ravel(),
        }))
    return pd.concat(frames, ignore_index=True)


def _write_table(path: PathLike, header: Dict[str, Any], table: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as handle:
        for key, value in header.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            handle.write(f"# {key}: {value}\n")
        table.to_csv(handle, index=False, float_format=FLOAT_FORMAT, columns=COLUMNS)
    return path


def _read_table(path: PathLike, expected_format: str) -> Tuple[Dict[str, str], pd.DataFrame]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path} does not exist")
    header: Dict[str, str] = {}
    with open(path) as handle:
        for line in handle:
            if not line.startswith('#'):
                break
            key, _, value = line[1:].strip().partition(':')
            header[key.strip()] = value.strip()
    if header.get('format') != expected_format:
        raise InvalidSpecError(f"{path} is not a {expected_format} file (format={header.get('format')!r})")
    table = pd.read_csv(path, comment='#', float_precision='round_trip')
    if list(table.columns) != COLUMNS:
        raise InvalidSpecError(f"{path} has columns {list(table.columns)}, expected {COLUMNS}")
    return header, table


def _block(table: pd.DataFrame, name: str, shape: Optional[Tuple[int, ...]] = None) -> Optional[np.ndarray]:
    part = table[table['block'] == name]
    if part.empty:
        return None
    rows = int(part['row'].max()) + 1
    cols = int(part['col'].max()) + 1
    arr = np.zeros((rows, cols))
    arr[part['row'].to_numpy(), part['col'].to_numpy()] = part['value'].to_numpy(dtype=float)
    if name in _VECTOR_BLOCKS:
        arr = arr[:, 0]
    if shape is not None and arr.shape != shape:
        raise DimensionMismatch(f"block {name} has shape {arr.shape}, expected {shape}")
    return arr


def save_matrix(m: CSMatrix, path: PathLike, manifest: Optional[Dict[str, Any]] = None) -> Path:
    """Write H with its inner matrix, outer generator and point sets."""
    header = {
        'format': MATRIX_FORMAT,
        'tool_version': TOOL_VERSION,
        'n': m.n, 't': m.t, 'l': m.l,
        'variant': m.variant.value,
        'r': m.r, 'r_tilde': m.r_tilde,
    }
    if manifest is not None:
        header['manifest'] = manifest
    blocks = [('H', m.H), ('inner', m.inner), ('G', m.outer_generator)]
    if m.variant == Variant.GENERIC:
        blocks.append(('inner_points', np.asarray(m.inner_code.points.values)))
        blocks.append(('outer_points', np.asarray(m.outer_code.points.values)))
    path = _write_table(path, header, _long_table(blocks))
    logger.info(f"Saved {m.r}x{m.n} matrix to {path}")
    return path


def load_matrix(path: PathLike) -> CSMatrix:
    """Read a matrix file written by `save_matrix`."""
    header, table = _read_table(path, MATRIX_FORMAT)
    try:
        n, t, l = int(header['n']), int(header['t']), int(header['l'])
        variant = Variant(header['variant'])
    except (KeyError, ValueError) as exc:
        raise InvalidSpecError(f"{path}: incomplete matrix header ({exc})") from exc

    inner_points = _block(table, 'inner_points')
    outer_points = _block(table, 'outer_points')
    spec = CSMatrixSpec(
        n, t, l, variant,
        inner_points=None if inner_points is None else tuple(inner_points),
        outer_points=None if outer_points is None else tuple(outer_points),
    )
    H = _block(table, 'H', (spec.r, spec.n))
    inner = _block(table, 'inner', (spec.r_tilde, spec.n))
    G = _block(table, 'G', (spec.r_tilde, spec.r))
    if H is None or inner is None or G is None:
        raise InvalidSpecError(f"{path}: matrix blocks H, inner and G are required")
    logger.info(f"Loaded {spec.r}x{spec.n} {variant.value} matrix from {path}")
    return assemble(spec, H, inner, G)


def save_measurement(meas: Measurement, path: PathLike, manifest: Optional[Dict[str, Any]] = None) -> Path:
    """Write s_hat and, when known, the injected x, e and noise."""
    header = {'format': MEASUREMENT_FORMAT, 'tool_version': TOOL_VERSION, 'r': len(meas.s_hat)}
    if manifest is not None:
        header['manifest'] = manifest
    blocks = [('s_hat', meas.s_hat)]
    if meas.x is not None:
        blocks.append(('x', meas.x.to_dense()))
    if meas.e is not None:
        blocks.append(('e', meas.e.to_dense()))
    if meas.noise is not None:
        blocks.append(('noise', meas.noise))
    return _write_table(path, header, _long_table(blocks))


def load_measurement(path: PathLike) -> Measurement:
    """Read a measurement file; x and e come back as SparseVectors when present."""
    _, table = _read_table(path, MEASUREMENT_FORMAT)
    s_hat = _block(table, 's_hat')
    if s_hat is None:
        raise InvalidSpecError(f"{path}: no s_hat block")
    x, e = _block(table, 'x'), _block(table, 'e')
    return Measurement(
        s_hat=s_hat,
        x=None if x is None else _exact_sparse(x),
        e=None if e is None else _exact_sparse(e),
        noise=_block(table, 'noise'),
    )


def _exact_sparse(v: np.ndarray) -> SparseVector:
    support = tuple(int(i) for i in np.flatnonzero(v))
    return SparseVector(len(v), support, tuple(float(v[i]) for i in support))


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not np.isfinite(value):
        return None
    return float(value)


def to_jsonable(value: Any) -> Any:
    """Convert arrays, tuples and numpy scalars into JSON-ready values."""
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {'real': np.real(value).tolist(), 'imag': np.imag(value).tolist()}
        return value.tolist()
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def result_to_dict(result: RecoveryResult, manifest: Optional[Dict[str, Any]] = None,
                   include_timing: bool = True) -> Dict[str, Any]:
    """Structured form of a recovery result."""
    doc = {
        'status': result.status.value,
        'stage': result.stage.value if result.stage else None,
        'diagnostic': result.diagnostic,
        'n': result.x_hat.length,
        'support': list(result.x_hat.support),
        'values': [float(v) for v in result.x_hat.values],
        'outer_error_positions': list(result.outer_error_positions),
        'residual': _finite_or_none(result.residual),
        'u': to_jsonable(np.asarray(result.u)),
    }
    if include_timing:
        doc['timings'] = dict(result.timings)
    if manifest is not None:
        doc['manifest'] = manifest
    return doc


def report_to_dict(report: OracleReport, manifest: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Structured form of an oracle report."""
    doc = {
        'check': report.check,
        'verdict': report.verdict,
        'witness': to_jsonable(report.witness),
        'statistic': _finite_or_none(report.statistic),
        'enumeration_count': report.enumeration_count,
        'details': to_jsonable(report.details),
    }
    if manifest is not None:
        doc['manifest'] = manifest
    return doc


def save_json(doc: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as handle:
        json.dump(doc, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write('\n')
    return path


def load_json(path: PathLike) -> Dict[str, Any]:
    with open(path) as handle:
        return json.load(handle)


def manifest_sidecar(csv_path: PathLike) -> Path:
    """Path of the manifest that accompanies a bench CSV."""
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.name + '.manifest.json')


def save_bench_csv(frame: pd.DataFrame, path: PathLike, manifest: Dict[str, Any]) -> Path:
    """Write a bench table and its manifest sidecar; the CSV itself holds no timestamps."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')
    save_json(manifest, manifest_sidecar(path))
    logger.info(f"Wrote {len(frame)} bench rows to {path}")
    return path
