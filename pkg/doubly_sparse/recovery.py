"""
Doubly Sparse CS - Recovery Module

Two-stage recovery of a t-sparse x from s_hat = H x^T + e with wt(e) <= l:

    1. outer stage: bounded-distance decoding of s_hat in the code generated
       by G removes the gross errors; the first r_tilde coordinates of the
       corrected codeword are the inner syndrome u = H_inner x^T (G is
       systematic).
    2. inner stage: syndrome decoding of u (Prony locator, root location,
       amplitudes by least squares) yields x_hat.

Every stage is residual-gated and the final answer is checked end to end
against s_hat; failures are returned as a status, never as a wrong x_hat.
"""

from dataclasses import dataclass, field
from enum import Enum
from time import perf_counter
from typing import Dict, Optional, Sequence, Tuple, Union
import logging

import numpy as np
import pandas as pd

from .exceptions import DecodingFailure, DimensionMismatch, InvalidSpecError
from .numerics import SparseVector, Tolerance, as_vector, infinity_norm, solve_on_support
from .rs_code import PointKind, bounded_distance_decode, locate_roots, prony_locator
from .sensing_matrix import CSMatrix, measure

logger = logging.getLogger(__name__)


class Stage(str, Enum):
    OUTER = 'outer'
    INNER = 'inner'
    RESIDUAL = 'residual'


class Status(str, Enum):
    SUCCESS = 'success'
    DECODING_FAILURE = 'decoding_failure'


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Outcome of `recover`.

    Attributes:
        x_hat: recovered signal (zero vector on failure)
        u: corrected inner syndrome
        outer_error_positions: measurement positions found corrupted
        status: SUCCESS or DECODING_FAILURE
        residual: relative residual of s_hat - H x_hat off the outer error
            positions (inf when no candidate was produced)
        stage: failing stage, None on success
        diagnostic: failure reason
        timings: wall time in seconds per stage ('outer', 'inner')
    """
    x_hat: SparseVector
    u: np.ndarray
    outer_error_positions: Tuple[int, ...]
    status: Status
    residual: float
    stage: Optional[Stage] = None
    diagnostic: str = ''
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == Status.SUCCESS


def _is_systematic(G: np.ndarray, tol: Tolerance) -> bool:
    k = G.shape[0]
    return bool(np.max(np.abs(G[:, :k] - np.eye(k))) <= tol.residual_tol)


def _fourier_syndromes(u: np.ndarray, t: int) -> np.ndarray:
    """
    Power sums S_i = sum_p x_p a_p^(i - t), i = 0..2t, from the real rows
    [1, cos 1, sin 1, ..., cos t, sin t] of the cyclic inner matrix.
    """
    coefficients = {0: complex(u[0])}
    for m in range(1, t + 1):
        c, s = u[2 * m - 1], u[2 * m]
        coefficients[m] = complex(c, -s)
        coefficients[-m] = complex(c, s)
    return np.array([coefficients[t - i] for i in range(2 * t + 1)])


def inner_syndrome_decode(
    m: CSMatrix,
    u,
    tol: Optional[Tolerance] = None,
    scale: Optional[float] = None,
) -> SparseVector:
    """
    Recover a t-sparse x from the inner syndrome u = H_inner x^T.

    Args:
        m: the CS matrix
        u: inner syndrome of length r_tilde
        tol: tolerance policy
        scale: magnitude of the data u came from (defaults to ||u||_inf)

    Returns:
        SparseVector: x_hat with wt(x_hat) <= t

    Raises:
        DecodingFailure: stage 'inner', on locator, root or residual gates.
    """
    tol = Tolerance.resolve(tol)
    u = as_vector(u, "inner syndrome")
    if u.shape[0] != m.r_tilde:
        raise DimensionMismatch(f"inner syndrome has length {u.shape[0]}, expected {m.r_tilde}")
    scale = max(1.0, infinity_norm(u) if scale is None else scale)

    code = m.inner_code
    if code.points.kind == PointKind.ROOTS_OF_UNITY:
        power_sums = _fourier_syndromes(u, m.t)
    else:
        power_sums = u

    try:
        locator = prony_locator(power_sums, m.t, tol, scale=scale)
        positions = locate_roots(locator, code.points, locator.degree, tol)
    except DecodingFailure as exc:
        raise DecodingFailure(Stage.INNER.value, f"{exc.stage}: {exc.diagnostic}") from exc
    if not positions:
        return SparseVector.zeros(m.n)

    fit = solve_on_support(m.inner, positions, u, tol)
    if not fit.full_rank or fit.residual > tol.residual_tol:
        raise DecodingFailure(
            Stage.INNER.value, f"amplitudes do not reproduce the syndrome (residual {fit.residual:.3e})")

    threshold = tol.zero_tol * scale
    kept = [(p, float(v)) for p, v in zip(positions, np.real(fit.coefficients)) if abs(v) > threshold]
    logger.debug(f"Inner stage located support {positions}")
    return SparseVector(m.n, tuple(p for p, _ in kept), tuple(v for _, v in kept))


def _failure(m: CSMatrix, stage: Stage, diagnostic: str, timings: Dict[str, float],
             u: Optional[np.ndarray] = None) -> RecoveryResult:
    logger.warning(f"Recovery failed at {stage.value} stage: {diagnostic}")
    return RecoveryResult(
        x_hat=SparseVector.zeros(m.n),
        u=np.zeros(m.r_tilde) if u is None else u,
        outer_error_positions=(),
        status=Status.DECODING_FAILURE,
        residual=float('inf'),
        stage=stage,
        diagnostic=diagnostic,
        timings=timings,
    )


def recover(m: CSMatrix, s_hat, tol: Optional[Tolerance] = None) -> RecoveryResult:
    """
    Recover x from s_hat = H x^T + e.

    Args:
        m: the CS matrix
        s_hat: measured vector of length r
        tol: tolerance policy

    Returns:
        RecoveryResult: x_hat, corrected inner syndrome, outer error
            positions and a status; a failing gate yields DECODING_FAILURE
            with the stage and diagnostic.
    """
    tol = Tolerance.resolve(tol)
    s_hat = as_vector(s_hat, "measurement")
    if s_hat.shape[0] != m.r:
        raise DimensionMismatch(f"measurement has length {s_hat.shape[0]}, matrix has {m.r} rows")
    scale = max(1.0, infinity_norm(s_hat))
    timings: Dict[str, float] = {}

    start = perf_counter()
    try:
        outer = bounded_distance_decode(m.outer_code, s_hat, m.l, tol, generator=m.outer_generator)
    except DecodingFailure as exc:
        timings['outer'] = perf_counter() - start
        return _failure(m, Stage.OUTER, f"{exc.stage}: {exc.diagnostic}", timings)
    timings['outer'] = perf_counter() - start

    if _is_systematic(m.outer_generator, tol):
        u = outer.codeword[:m.r_tilde]
    else:
        u = np.real(outer.message)

    start = perf_counter()
    try:
        x_hat = inner_syndrome_decode(m, u, tol, scale=scale)
    except DecodingFailure as exc:
        timings['inner'] = perf_counter() - start
        return _failure(m, Stage.INNER, exc.diagnostic, timings, u)
    timings['inner'] = perf_counter() - start

    mismatch = s_hat - m.H @ x_hat.to_dense()
    off_errors = np.ones(m.r, dtype=bool)
    off_errors[list(outer.error_positions)] = False
    residual = float(np.linalg.norm(mismatch[off_errors])) / max(1.0, float(np.linalg.norm(s_hat)))
    if residual > tol.residual_tol:
        return _failure(m, Stage.RESIDUAL, f"end-to-end residual {residual:.3e} exceeds tolerance", timings, u)

    return RecoveryResult(
        x_hat=x_hat,
        u=u,
        outer_error_positions=outer.error_positions,
        status=Status.SUCCESS,
        residual=residual,
        timings=timings,
    )


def decode_complexity_probe(
    matrices: Union[CSMatrix, Sequence[CSMatrix]],
    trials: int,
    rng_seed: int,
    tol: Optional[Tolerance] = None,
) -> pd.DataFrame:
    """
    Median wall time of `recover` over random in-budget instances.

    Args:
        matrices: one matrix or several (typically the same t, l and
            increasing n)
        trials: instances per matrix, >= 1
        rng_seed: base seed; trial i uses rng_seed + i

    Returns:
        pd.DataFrame: one row per distinct (n, t, l, variant) with columns
            n, t, l, variant, trials, median_seconds
    """
    from .simulate import random_sparse

    if trials < 1:
        raise InvalidSpecError(f"trials must be >= 1, got {trials}")
    if isinstance(matrices, CSMatrix):
        matrices = [matrices]

    rows = []
    for m in matrices:
        for i in range(trials):
            rng = np.random.default_rng(rng_seed + i)
            x = random_sparse(m.n, m.t, 'uniform', rng)
            e = random_sparse(m.r, m.l, 'uniform', rng)
            s_hat = measure(m, x, e).s_hat
            start = perf_counter()
            recover(m, s_hat, tol)
            rows.append({'n': m.n, 't': m.t, 'l': m.l, 'variant': m.variant.value,
                         'seconds': perf_counter() - start})

    frame = pd.DataFrame(rows)
    summary = (frame.groupby(['n', 't', 'l', 'variant'], sort=True)['seconds']
               .agg(['count', 'median']).reset_index())
    summary = summary.rename(columns={'count': 'trials', 'median': 'median_seconds'})
    logger.info(f"Complexity probe over n={summary['n'].tolist()}")
    return summary
