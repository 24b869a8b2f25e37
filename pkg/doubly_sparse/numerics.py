"""
Doubly Sparse CS - Numerics Module

Scalar, vector and matrix primitives over the reals and complex numbers.
Every approximate-equality, rank and support decision in the package is made
here, under an explicit Tolerance policy.

Dense vectors and matrices are plain numpy arrays; `as_vector` and
`as_matrix` validate them (finite entries, correct dimensionality).
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCES
from .exceptions import DimensionMismatch, InvalidSpecError

logger = logging.getLogger(__name__)

DenseVector = np.ndarray
DenseMatrix = np.ndarray
Scalar = Union[float, complex]


@dataclass(frozen=True)
class Tolerance:
    """Tolerance policy shared by all numeric decisions.

    Attributes:
        zero_tol: |v_i| <= zero_tol * max(1, ||v||_inf) counts as zero
        rank_tol: singular values <= rank_tol * sigma_max count as zero
        residual_tol: relative residual accepted for a candidate solution
    """
    zero_tol: float = DEFAULT_TOLERANCES['zero_tol']
    rank_tol: float = DEFAULT_TOLERANCES['rank_tol']
    residual_tol: float = DEFAULT_TOLERANCES['residual_tol']

    def __post_init__(self):
        for name in ('zero_tol', 'rank_tol', 'residual_tol'):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InvalidSpecError(f"{name} must lie in (0, 1), got {value!r}")

    @classmethod
    def resolve(cls, tol: Optional['Tolerance']) -> 'Tolerance':
        """Return `tol`, or the default policy when it is None."""
        return tol if tol is not None else cls()


def as_vector(values, name: str = "vector") -> DenseVector:
    """Validate and return a finite 1-D array."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"{name} has non-finite entries")
    return arr


def as_matrix(values, name: str = "matrix") -> DenseMatrix:
    """Validate and return a finite 2-D array."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"{name} has non-finite entries")
    return arr


def infinity_norm(v: DenseVector) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def zero_threshold(v: DenseVector, tol: Optional[Tolerance] = None) -> float:
    """Absolute threshold below which entries of `v` count as zero."""
    tol = Tolerance.resolve(tol)
    return tol.zero_tol * max(1.0, infinity_norm(v))


def hamming_weight(v: DenseVector, tol: Optional[Tolerance] = None) -> int:
    """Number of entries of `v` above the scale-aware zero threshold."""
    v = as_vector(v)
    if v.size == 0:
        return 0
    return int(np.count_nonzero(np.abs(v) > zero_threshold(v, tol)))


def support_of(v: DenseVector, tol: Optional[Tolerance] = None) -> Tuple[int, ...]:
    """Sorted indices of the entries counted by `hamming_weight`."""
    v = as_vector(v)
    if v.size == 0:
        return ()
    return tuple(int(i) for i in np.flatnonzero(np.abs(v) > zero_threshold(v, tol)))


def singular_values(M: DenseMatrix) -> np.ndarray:
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(M)


def rank_from_singular_values(sigma: np.ndarray, tol: Optional[Tolerance] = None) -> int:
    tol = Tolerance.resolve(tol)
    if sigma.size == 0:
        return 0
    sigma_max = float(np.max(sigma))
    if sigma_max == 0.0:
        return 0
    return int(np.count_nonzero(sigma > tol.rank_tol * sigma_max))


def numerical_rank(M: DenseMatrix, tol: Optional[Tolerance] = None) -> int:
    """Number of singular values above rank_tol * sigma_max (0 for the zero matrix)."""
    return rank_from_singular_values(singular_values(M), tol)


def batched_singular_values(stack: np.ndarray) -> np.ndarray:
    """Singular values of a stack of matrices with shape (batch, rows, cols)."""
    stack = np.asarray(stack)
    if stack.ndim != 3:
        raise DimensionMismatch(f"expected a (batch, rows, cols) stack, got shape {stack.shape}")
    return np.linalg.svd(stack, compute_uv=False)


def batched_rank(stack: np.ndarray, tol: Optional[Tolerance] = None) -> np.ndarray:
    """Numerical rank of every matrix in a stack, same rule as `numerical_rank`."""
    tol = Tolerance.resolve(tol)
    sigma = batched_singular_values(stack)
    if sigma.shape[-1] == 0:
        return np.zeros(sigma.shape[0], dtype=int)
    sigma_max = sigma.max(axis=-1, keepdims=True)
    above = sigma > tol.rank_tol * sigma_max
    above &= sigma_max > 0.0
    return above.sum(axis=-1)


def null_vector(M: DenseMatrix) -> DenseVector:
    """Unit vector minimising ||M v||_2 (right singular vector of sigma_min)."""
    M = as_matrix(M)
    _, _, vh = np.linalg.svd(M)
    return vh[-1].conj()


@dataclass(frozen=True)
class SupportSolution:
    """Least-squares fit of b against a column subset of M."""
    coefficients: np.ndarray
    residual: float
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == len(self.coefficients)


def solve_on_support(
    M: DenseMatrix,
    columns: Iterable[int],
    b: DenseVector,
    tol: Optional[Tolerance] = None,
) -> SupportSolution:
    """
    Least-squares coefficients of `b` against the selected columns of `M`.

    Args:
        M: r x n matrix
        columns: column indices (no duplicates, at most r of them)
        b: right-hand side of length r
        tol: tolerance policy (rank decision)

    Returns:
        SupportSolution: coefficients, relative residual
            ||b - M_S c||_2 / max(1, ||b||_2) and the numerical rank of M_S.
            Rank deficiency is reported through `rank`, never raised.
    """
    M = as_matrix(M)
    b = as_vector(b, "right-hand side")
    cols = [int(c) for c in columns]
    rows, n = M.shape
    if b.shape[0] != rows:
        raise DimensionMismatch(f"right-hand side has length {b.shape[0]}, matrix has {rows} rows")
    if len(set(cols)) != len(cols) or any(c < 0 or c >= n for c in cols):
        raise DimensionMismatch(f"invalid column selection {cols} for {n} columns")
    if len(cols) > rows:
        raise DimensionMismatch(f"{len(cols)} columns selected but only {rows} rows")

    dtype = np.result_type(M.dtype, b.dtype)
    b_norm = float(np.linalg.norm(b))
    if not cols:
        return SupportSolution(np.zeros(0, dtype=dtype), b_norm / max(1.0, b_norm), 0)

    sub = M[:, cols]
    rank = numerical_rank(sub, tol)
    if b_norm == 0.0:
        return SupportSolution(np.zeros(len(cols), dtype=dtype), 0.0, rank)

    coefficients, *_ = scipy.linalg.lstsq(sub, b)
    residual = float(np.linalg.norm(b - sub @ coefficients)) / max(1.0, b_norm)
    return SupportSolution(np.asarray(coefficients), residual, rank)


def wrap_frequency(m: int, n: int) -> int:
    """Representative of m mod n in {-floor((n-1)/2), ..., floor(n/2)}."""
    r = int(m) % n
    return r - n if r > n // 2 else r


def _check_frequencies(freqs: Sequence[int], n: int) -> np.ndarray:
    freqs = np.asarray(list(freqs), dtype=int)
    half = n // 2
    if freqs.size and (freqs.min() < -half or freqs.max() > half):
        raise DimensionMismatch(f"frequencies must lie in [-{half}, {half}] for n={n}")
    return freqs


def dft_at_frequencies(v: DenseVector, freqs: Sequence[int], n: int) -> np.ndarray:
    """
    Selected DFT components computed with a single FFT.

    Component for frequency m equals sum_p v_p * exp(-2 pi i m p / n).
    """
    v = as_vector(v)
    if v.shape[0] != n:
        raise DimensionMismatch(f"vector has length {v.shape[0]}, expected {n}")
    freqs = _check_frequencies(freqs, n)
    spectrum = np.fft.fft(v)
    return spectrum[np.mod(freqs, n)]


def fourier_rows(freqs: Sequence[int], n: int) -> DenseMatrix:
    """Matrix with rows exp(-2 pi i m p / n), p = 0..n-1, one per frequency m."""
    freqs = np.asarray(list(freqs), dtype=int)
    p = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(freqs, p) / n)


def naive_dft_at_frequencies(v: DenseVector, freqs: Sequence[int], n: int) -> np.ndarray:
    """O(n * len(freqs)) reference for `dft_at_frequencies`."""
    v = as_vector(v)
    if v.shape[0] != n:
        raise DimensionMismatch(f"vector has length {v.shape[0]}, expected {n}")
    freqs = _check_frequencies(freqs, n)
    return fourier_rows(freqs, n) @ v


@dataclass(frozen=True)
class SparseVector:
    """Support + values representation of a sparse signal or error vector.

    Values stored here are exactly nonzero; `from_dense` applies the
    tolerance policy when sparsifying a dense vector.
    """
    length: int
    support: Tuple[int, ...] = ()
    values: Tuple[Scalar, ...] = ()

    def __post_init__(self):
        if self.length < 1:
            raise InvalidSpecError(f"length must be positive, got {self.length}")
        support = tuple(int(i) for i in self.support)
        values = tuple(self.values)
        if len(support) != len(values):
            raise DimensionMismatch("support and values differ in length")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise InvalidSpecError(f"support must be strictly increasing: {support}")
        if support and (support[0] < 0 or support[-1] >= self.length):
            raise InvalidSpecError(f"support {support} out of range for length {self.length}")
        if any(v == 0 or not np.isfinite(v) for v in values):
            raise InvalidSpecError("sparse values must be finite and nonzero")
        object.__setattr__(self, 'support', support)
        object.__setattr__(self, 'values', values)

    @property
    def weight(self) -> int:
        return len(self.support)

    @classmethod
    def zeros(cls, length: int) -> 'SparseVector':
        return cls(length)

    @classmethod
    def from_dense(cls, v: DenseVector, tol: Optional[Tolerance] = None) -> 'SparseVector':
        v = as_vector(v)
        support = support_of(v, tol)
        values = tuple(v[i].item() for i in support)
        return cls(v.shape[0], support, values)

    def to_dense(self) -> DenseVector:
        dtype = complex if any(isinstance(v, complex) for v in self.values) else float
        dense = np.zeros(self.length, dtype=dtype)
        if self.support:
            dense[list(self.support)] = self.values
        return dense
