"""
Doubly Sparse CS - Sensing Matrix Module

Builds (t, l) compressed-sensing matrices by concatenation, H = G^T H_inner:
the columns of a t-error-correcting parity-check matrix H_inner are encoded
by an l-error-correcting outer code with systematic generator G.

Two variants:
    generic  Vandermonde inner matrix on Chebyshev nodes, outer RS code on a
             second Chebyshev grid; r = 2(t + l), the Singleton-type optimum.
    cyclic   real Fourier rows on the n-th roots of unity for both codes;
             r = 2(t + l + 1), decodable with FFTs.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple
import logging

import numpy as np

from .config import INNER_INTERVAL, OUTER_INTERVAL
from .exceptions import DimensionMismatch, InvalidSpecError
from .numerics import SparseVector, as_vector
from .rs_code import (
    Band,
    EvaluationPoints,
    RSCode,
    generator_matrix,
    systematic_generator,
)

logger = logging.getLogger(__name__)


class Variant(str, Enum):
    GENERIC = 'generic'
    CYCLIC = 'cyclic'


def singleton_bound(t: int, l: int) -> int:
    """Minimum number of rows 2(t + l) of any (t, l)-CS matrix."""
    if t < 1 or l < 0:
        raise InvalidSpecError(f"need t >= 1 and l >= 0, got t={t}, l={l}")
    return 2 * (t + l)


def redundancy(variant: Variant, t: int, l: int) -> Tuple[int, int]:
    """(r, r_inner) for a variant: generic (2(t+l), 2t), cyclic (2(t+l+1), 2t+1)."""
    if Variant(variant) == Variant.GENERIC:
        return singleton_bound(t, l), 2 * t
    return singleton_bound(t, l) + 2, 2 * t + 1


@dataclass(frozen=True)
class CSMatrixSpec:
    """Parameters of a (t, l)-CS matrix build."""
    n: int
    t: int
    l: int
    variant: Variant = Variant.GENERIC
    inner_points: Optional[Tuple[float, ...]] = None
    outer_points: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'variant', Variant(self.variant))
        if self.t < 1 or self.l < 0:
            raise InvalidSpecError(f"need t >= 1 and l >= 0, got t={self.t}, l={self.l}")
        if self.n < 2 * self.t:
            raise InvalidSpecError(f"need n >= 2t, got n={self.n}, t={self.t}")
        r, _ = redundancy(self.variant, self.t, self.l)
        if self.variant == Variant.CYCLIC:
            if self.n <= 2 * self.t:
                raise InvalidSpecError(f"cyclic variant needs n > 2t, got n={self.n}, t={self.t}")
            if self.inner_points is not None or self.outer_points is not None:
                raise InvalidSpecError("cyclic variant uses roots of unity; explicit points not allowed")
            return
        if self.inner_points is not None:
            object.__setattr__(self, 'inner_points', tuple(float(a) for a in self.inner_points))
            if len(self.inner_points) != self.n:
                raise InvalidSpecError(f"{len(self.inner_points)} inner points given, n={self.n}")
        if self.outer_points is not None:
            object.__setattr__(self, 'outer_points', tuple(float(b) for b in self.outer_points))
            if len(self.outer_points) != r:
                raise InvalidSpecError(f"{len(self.outer_points)} outer points given, r={r}")

    @property
    def r(self) -> int:
        return redundancy(self.variant, self.t, self.l)[0]

    @property
    def r_tilde(self) -> int:
        return redundancy(self.variant, self.t, self.l)[1]


@dataclass(frozen=True, eq=False)
class CSMatrix:
    """A built (t, l)-CS matrix with its factors.

    Attributes:
        spec: build parameters
        H: r x n measurement matrix, H = G^T inner
        inner: r_tilde x n inner parity-check matrix
        outer_generator: r_tilde x r systematic outer generator G
        inner_code: RS code whose generator matrix is `inner`
        outer_code: RS code generated by G
    """
    spec: CSMatrixSpec
    H: np.ndarray
    inner: np.ndarray
    outer_generator: np.ndarray
    inner_code: RSCode
    outer_code: RSCode

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def t(self) -> int:
        return self.spec.t

    @property
    def l(self) -> int:
        return self.spec.l

    @property
    def r(self) -> int:
        return self.H.shape[0]

    @property
    def r_tilde(self) -> int:
        return self.inner.shape[0]

    @property
    def variant(self) -> Variant:
        return self.spec.variant


@dataclass(frozen=True, eq=False)
class Measurement:
    """Measured vector s_hat = H x^T + e (+ noise) with optional provenance."""
    s_hat: np.ndarray
    x: Optional[SparseVector] = None
    e: Optional[SparseVector] = None
    noise: Optional[np.ndarray] = None


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _codes_for(spec: CSMatrixSpec) -> Tuple[RSCode, RSCode]:
    r, r_tilde = spec.r, spec.r_tilde
    if spec.variant == Variant.CYCLIC:
        inner = RSCode(EvaluationPoints.roots_of_unity(spec.n), r_tilde)
        outer = RSCode(EvaluationPoints.roots_of_unity(r), r_tilde, Band.HIGH)
        return inner, outer

    if spec.inner_points is not None:
        inner_points = EvaluationPoints.generic(spec.inner_points)
    else:
        inner_points = EvaluationPoints.chebyshev(spec.n, INNER_INTERVAL)
    if spec.outer_points is not None:
        outer_points = EvaluationPoints.generic(spec.outer_points)
    else:
        # interleaved so the systematic positions spread over the interval
        outer_points = EvaluationPoints.chebyshev(r, OUTER_INTERVAL, interleave=True)
    return RSCode(inner_points, r_tilde), RSCode(outer_points, r_tilde)


def build(spec: CSMatrixSpec) -> CSMatrix:
    """
    Build the (t, l)-CS matrix H = G^T H_inner for a spec.

    Args:
        spec: validated build parameters

    Returns:
        CSMatrix: H with its inner matrix, systematic outer generator and codes
    """
    inner_code, outer_code = _codes_for(spec)
    inner = generator_matrix(inner_code)
    G = systematic_generator(outer_code)
    H = G.T @ inner
    logger.info(f"Built {spec.variant.value} CS matrix: n={spec.n}, t={spec.t}, l={spec.l}, "
                f"r={H.shape[0]} (Singleton bound {singleton_bound(spec.t, spec.l)})")
    return CSMatrix(
        spec=spec,
        H=_frozen(H),
        inner=_frozen(inner),
        outer_generator=_frozen(G),
        inner_code=inner_code,
        outer_code=outer_code,
    )


def measure(
    m: CSMatrix,
    x: SparseVector,
    e: Optional[SparseVector] = None,
    noise=None,
) -> Measurement:
    """
    Simulated measurement s_hat = H x^T + e + noise.

    Sparsity budgets are not enforced here.
    """
    if x.length != m.n:
        raise DimensionMismatch(f"signal has length {x.length}, matrix has {m.n} columns")
    if e is None:
        e = SparseVector.zeros(m.r)
    if e.length != m.r:
        raise DimensionMismatch(f"error has length {e.length}, matrix has {m.r} rows")
    s_hat = m.H @ x.to_dense() + e.to_dense()
    if noise is not None:
        noise = as_vector(noise, "noise")
        if noise.shape[0] != m.r:
            raise DimensionMismatch(f"noise has length {noise.shape[0]}, matrix has {m.r} rows")
        s_hat = s_hat + noise
    return Measurement(s_hat=s_hat, x=x, e=e, noise=noise)


def assemble(spec: CSMatrixSpec, H, inner, outer_generator, tol: float = 1e-12) -> CSMatrix:
    """
    Wrap stored factors (e.g. loaded from a file) into a CSMatrix.

    The codes are rebuilt from the spec; H must equal G^T inner entrywise to
    `tol` relative to its largest entry.
    """
    inner_code, outer_code = _codes_for(spec)
    H = np.asarray(H, dtype=float)
    inner = np.asarray(inner, dtype=float)
    G = np.asarray(outer_generator, dtype=float)
    expected = {'H': (spec.r, spec.n), 'inner': (spec.r_tilde, spec.n), 'G': (spec.r_tilde, spec.r)}
    for name, arr in (('H', H), ('inner', inner), ('G', G)):
        if arr.shape != expected[name]:
            raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {expected[name]}")
    mismatch = float(np.max(np.abs(H - G.T @ inner)))
    if mismatch > tol * max(1.0, float(np.max(np.abs(H)))):
        raise InvalidSpecError(f"H differs from G^T inner by {mismatch:.3e}")
    return CSMatrix(
        spec=spec,
        H=_frozen(H),
        inner=_frozen(inner),
        outer_generator=_frozen(G),
        inner_code=inner_code,
        outer_code=outer_code,
    )
