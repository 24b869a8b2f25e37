"""
Doubly sparse compressed sensing with real Reed-Solomon codes.

Builds (t, l)-CS measurement matrices H = G^T H_inner, recovers t-sparse
signals from measurements with up to l gross errors, and checks the
construction with exhaustive oracles.
"""

from .config import TOOL_VERSION as __version__
from .exceptions import (
    DecodingFailure,
    DimensionMismatch,
    DoublySparseError,
    EnumerationCapExceeded,
    InvalidSpecError,
)
from .numerics import SparseVector, Tolerance
from .oracle import OracleReport
from .recovery import RecoveryResult, recover
from .sensing_matrix import CSMatrix, CSMatrixSpec, Variant, build, measure

__all__ = [
    '__version__',
    'CSMatrix',
    'CSMatrixSpec',
    'DecodingFailure',
    'DimensionMismatch',
    'DoublySparseError',
    'EnumerationCapExceeded',
    'InvalidSpecError',
    'OracleReport',
    'RecoveryResult',
    'SparseVector',
    'Tolerance',
    'Variant',
    'build',
    'measure',
    'recover',
]
