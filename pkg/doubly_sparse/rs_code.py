"""
Doubly Sparse CS - Reed-Solomon Codes over the Reals

Evaluation Reed-Solomon codes on distinct real points and their cyclic real
form on the n-th roots of unity: generator and parity-check builders, the
encoder, and a bounded-distance decoder.

The decoder follows the usual syndrome pipeline: power-sum syndromes, an
error-locator polynomial extracted from the syndrome Hankel system (the
Prony / Berlekamp-Massey step, solved as a total least squares problem),
root location by evaluating the locator at every evaluation point (a Chien
search; an FFT on the roots of unity), error values by least squares, and
message extraction against the generator.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple
import logging

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial

from .config import INNER_INTERVAL, ROOT_SEPARATION_FACTOR
from .exceptions import (
    DecodingFailure,
    DimensionMismatch,
    InconsistentSyndromes,
    InvalidSpecError,
    RootSeparationFailure,
)
from .numerics import (
    Tolerance,
    as_matrix,
    as_vector,
    dft_at_frequencies,
    infinity_norm,
    null_vector,
    numerical_rank,
    solve_on_support,
    wrap_frequency,
)

logger = logging.getLogger(__name__)

MIN_POINT_GAP = 1e-12


class PointKind(str, Enum):
    GENERIC = 'generic'
    ROOTS_OF_UNITY = 'roots_of_unity'


class Band(str, Enum):
    """Spectral band of a roots-of-unity code.

    LOW: message frequencies {-s..s}, k = 2s + 1.
    HIGH: spectral zeros at {-s..s}, k = n - 2s - 1.
    """
    LOW = 'low'
    HIGH = 'high'


@dataclass(frozen=True)
class EvaluationPoints:
    """Evaluation point set: distinct reals, or the n-th roots of unity."""
    kind: PointKind
    values: Tuple[float, ...] = ()
    count: int = 0

    def __post_init__(self):
        if self.kind == PointKind.GENERIC:
            values = tuple(float(v) for v in self.values)
            if not values:
                raise InvalidSpecError("a generic point set needs at least one point")
            if not all(np.isfinite(values)):
                raise InvalidSpecError("evaluation points must be finite")
            ordered = np.sort(np.asarray(values))
            if ordered.size > 1 and np.min(np.diff(ordered)) <= MIN_POINT_GAP:
                raise InvalidSpecError("evaluation points must be pairwise distinct")
            object.__setattr__(self, 'values', values)
            object.__setattr__(self, 'count', len(values))
        elif self.kind == PointKind.ROOTS_OF_UNITY:
            if self.count < 1:
                raise InvalidSpecError(f"roots of unity need n >= 1, got {self.count}")
        else:
            raise InvalidSpecError(f"unknown point kind {self.kind!r}")

    @classmethod
    def generic(cls, points: Sequence[float]) -> 'EvaluationPoints':
        return cls(PointKind.GENERIC, tuple(points))

    @classmethod
    def roots_of_unity(cls, n: int) -> 'EvaluationPoints':
        return cls(PointKind.ROOTS_OF_UNITY, count=n)

    @classmethod
    def chebyshev(
        cls,
        n: int,
        interval: Tuple[float, float] = INNER_INTERVAL,
        interleave: bool = False,
    ) -> 'EvaluationPoints':
        """
        Chebyshev nodes cos(pi (2j - 1) / (2n)), j = 1..n, mapped onto `interval`.

        With `interleave`, even-indexed nodes come first so that any prefix of
        the point list is spread over the whole interval.
        """
        if n < 1:
            raise InvalidSpecError(f"need at least one node, got {n}")
        lo, hi = interval
        if not hi > lo:
            raise InvalidSpecError(f"empty interval {interval}")
        j = np.arange(1, n + 1)
        nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (2 * j - 1) / (2 * n))
        if interleave:
            nodes = np.concatenate([nodes[0::2], nodes[1::2]])
        return cls.generic(nodes.tolist())

    @property
    def n(self) -> int:
        return self.count

    @property
    def nodes(self) -> np.ndarray:
        """Points as an array (complex for roots of unity)."""
        if self.kind == PointKind.ROOTS_OF_UNITY:
            return np.exp(2j * np.pi * np.arange(self.count) / self.count)
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class RSCode:
    """Evaluation Reed-Solomon code of length n and dimension k."""
    points: EvaluationPoints
    k: int
    band: Band = Band.LOW

    def __post_init__(self):
        n = self.points.n
        if not 1 <= self.k <= n:
            raise InvalidSpecError(f"dimension k={self.k} must satisfy 1 <= k <= n={n}")
        if self.points.kind == PointKind.GENERIC:
            if self.band != Band.LOW:
                raise InvalidSpecError("generic point sets only carry polynomial (LOW band) codes")
        elif self.band == Band.LOW and self.k % 2 == 0:
            raise InvalidSpecError(
                f"roots-of-unity code needs odd k for a symmetric frequency set, got k={self.k}")
        elif self.band == Band.HIGH and (n - self.k) % 2 == 0:
            raise InvalidSpecError(
                f"HIGH band code needs odd redundancy n-k, got {n - self.k}")

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def distance(self) -> int:
        return self.n - self.k + 1

    @property
    def correctable(self) -> int:
        return (self.n - self.k) // 2


@dataclass(frozen=True)
class Locator:
    """Monic error-locator polynomial, coefficients in increasing degree."""
    degree: int
    coefficients: np.ndarray
    residual: float = 0.0


@dataclass(frozen=True)
class LocatorResult:
    """Locator together with the candidate indices at its roots."""
    degree: int
    coefficients: np.ndarray
    located_positions: Tuple[int, ...]

    def __post_init__(self):
        if self.degree != len(self.located_positions):
            raise DimensionMismatch("locator degree differs from number of located positions")


@dataclass(frozen=True)
class DecodeResult:
    """Output of bounded-distance decoding."""
    message: np.ndarray
    codeword: np.ndarray
    error_positions: Tuple[int, ...]
    error_values: np.ndarray
    locator: Optional[LocatorResult] = None


def _real_fourier_rows(n: int, freqs: Sequence[int]) -> np.ndarray:
    """Rows 1 (m=0), cos(2 pi m p/n) and sin(2 pi m p/n) (sin dropped at m = n/2)."""
    p = np.arange(n)
    rows = []
    for m in freqs:
        if m == 0:
            rows.append(np.ones(n))
            continue
        rows.append(np.cos(2 * np.pi * m * p / n))
        if 2 * m != n:
            rows.append(np.sin(2 * np.pi * m * p / n))
    return np.array(rows).reshape(len(rows), n)


def _band_frequencies(code: RSCode) -> Tuple[range, range]:
    """(message frequencies, parity frequencies) of a roots-of-unity code, m >= 0."""
    n, k = code.n, code.k
    if code.band == Band.LOW:
        s = (k - 1) // 2
        return range(0, s + 1), range(s + 1, n // 2 + 1)
    s = (n - k - 1) // 2
    return range(s + 1, n // 2 + 1), range(0, s + 1)


def generator_matrix(code: RSCode) -> np.ndarray:
    """
    k x n generator matrix.

    Generic points: monomial evaluation, entry (i, j) = a_j^i.
    Roots of unity: real frequency rows of the message band.
    """
    if code.points.kind == PointKind.GENERIC:
        return np.vander(code.points.nodes, code.k, increasing=True).T
    message_freqs, _ = _band_frequencies(code)
    return _real_fourier_rows(code.n, message_freqs)


def dual_weights(points: EvaluationPoints) -> np.ndarray:
    """GRS dual weights eta_j = prod_{q != j} (a_j - a_q)^{-1}."""
    a = points.nodes
    diff = a[:, None] - a[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def parity_check_matrix(code: RSCode) -> np.ndarray:
    """
    (n - k) x n parity-check matrix P with P G^T = 0.

    Generic points: the generalized RS dual, P(i, j) = eta_j a_j^i.
    Roots of unity: real frequency rows outside the message band.
    """
    if code.k >= code.n:
        raise InvalidSpecError("a code with k = n has no parity checks")
    if code.points.kind == PointKind.GENERIC:
        eta = dual_weights(code.points)
        powers = np.vander(code.points.nodes, code.n - code.k, increasing=True).T
        return powers * eta[None, :]
    _, parity_freqs = _band_frequencies(code)
    return _real_fourier_rows(code.n, parity_freqs)


def systematic_generator(code: RSCode) -> np.ndarray:
    """Row-reduced generator whose first k columns form the identity."""
    G = generator_matrix(code)
    return scipy.linalg.solve(G[:, :code.k], G)


def encode(code: RSCode, message) -> np.ndarray:
    """Codeword message . G (linear in the message)."""
    message = as_vector(message, "message")
    if message.shape[0] != code.k:
        raise DimensionMismatch(f"message has length {message.shape[0]}, code dimension is {code.k}")
    return message @ generator_matrix(code)


def fourier_parity_check(n: int, frequencies: Sequence[int]) -> np.ndarray:
    """Complex Fourier parity-check rows h_{j,p} = exp(2 pi i j p / n), p = 0..n-1."""
    j = np.asarray(list(frequencies), dtype=int)
    p = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, p) / n)


def progression_frequencies(start: int, step: int, count: int) -> Tuple[int, ...]:
    """Frequencies start, start + step, ..., start + (count - 1) step."""
    return tuple(start + step * i for i in range(count))


def reversible_parity_check(n: int, f: int) -> np.ndarray:
    """Real (2f + 1) x n parity check spanning the frequencies {-f..f}."""
    return generator_matrix(RSCode(EvaluationPoints.roots_of_unity(n), 2 * f + 1))


def syndrome_frequencies(code: RSCode) -> Tuple[int, ...]:
    """
    DFT bins m_top, m_top - 1, ... of the spectral zeros of a roots-of-unity code.

    With these bins, S_i = DFT(y)[m_top - i] = sum_p (y_p a_p^{-m_top}) a_p^i,
    so the syndromes are power sums over the points a_p = exp(2 pi i p / n).
    """
    n, k = code.n, code.k
    if code.band == Band.LOW:
        top = -((k - 1) // 2 + 1)
    else:
        top = (n - k - 1) // 2
    return tuple(wrap_frequency(top - i, n) for i in range(n - k))


def syndromes(code: RSCode, received) -> np.ndarray:
    """Power-sum syndromes of `received` (FFT path on the roots of unity)."""
    y = as_vector(received, "received word")
    if y.shape[0] != code.n:
        raise DimensionMismatch(f"received word has length {y.shape[0]}, code length is {code.n}")
    if code.k == code.n:
        return np.zeros(0)
    if code.points.kind == PointKind.GENERIC:
        return parity_check_matrix(code) @ y
    return dft_at_frequencies(y, syndrome_frequencies(code), code.n)


def _hankel(values: np.ndarray, cols: int) -> np.ndarray:
    """Hankel matrix H[i, m] = values[i + m] with `cols` columns."""
    length = values.shape[0]
    return scipy.linalg.hankel(values[:length - cols + 1], values[length - cols:])


def prony_locator(
    syndromes,
    max_errors: int,
    tol: Optional[Tolerance] = None,
    scale: float = 1.0,
) -> Locator:
    """
    Monic locator annihilating a weighted power-sum sequence.

    Args:
        syndromes: S_i = sum_j c_j a_j^i, length 2 tau or 2 tau + 1
        max_errors: tau, the largest admissible degree
        tol: tolerance policy
        scale: magnitude of the data the syndromes were computed from; the
            whole sequence counts as zero below zero_tol * max(1, scale)

    Returns:
        Locator: degree nu (numerical rank of the syndrome Hankel matrix) and
            coefficients lambda_0..lambda_nu with lambda_nu = 1 such that
            sum_m lambda_m S_{i+m} ~ 0 for every valid i.

    Raises:
        InconsistentSyndromes: no degree <= tau annihilates the sequence.
    """
    tol = Tolerance.resolve(tol)
    S = as_vector(syndromes, "syndromes")
    tau = int(max_errors)
    length = S.shape[0]
    if tau < 0 or length not in (2 * tau, 2 * tau + 1):
        raise DimensionMismatch(f"need 2*tau or 2*tau+1 syndromes for tau={tau}, got {length}")

    if length == 0 or infinity_norm(S) <= tol.zero_tol * max(1.0, scale):
        return Locator(0, np.ones(1, dtype=S.dtype))
    if tau == 0:
        raise InconsistentSyndromes('locator', "nonzero syndromes with a zero error budget")

    rank = numerical_rank(_hankel(S, tau + 1), tol)
    if rank > tau:
        raise InconsistentSyndromes('locator', f"syndrome Hankel rank {rank} exceeds budget {tau}")
    logger.debug(f"Syndrome Hankel rank {rank} (budget {tau})")

    for degree in range(max(rank, 1), tau + 1):
        hankel = _hankel(S, degree + 1)
        v = null_vector(hankel)
        lead = v[-1]
        if abs(lead) <= tol.rank_tol * np.linalg.norm(v):
            continue
        coefficients = v / lead
        if not np.iscomplexobj(S):
            coefficients = coefficients.real
        denominator = np.linalg.norm(hankel, 2) * np.linalg.norm(coefficients)
        residual = float(np.linalg.norm(hankel @ coefficients) / max(denominator, np.finfo(float).tiny))
        if residual <= tol.residual_tol:
            return Locator(degree, coefficients, residual)
        logger.debug(f"Degree {degree} locator rejected, relative residual {residual:.3e}")

    raise InconsistentSyndromes('locator', f"no monic locator of degree <= {tau} annihilates the syndromes")


def evaluate_locator(coefficients, candidates: EvaluationPoints) -> np.ndarray:
    """Locator values at every candidate point (one FFT on the roots of unity)."""
    coefficients = np.asarray(coefficients)
    n = candidates.n
    if candidates.kind == PointKind.ROOTS_OF_UNITY:
        if coefficients.shape[0] > n:
            raise DimensionMismatch(f"locator of degree {coefficients.shape[0] - 1} on {n} roots")
        padded = np.zeros(n, dtype=complex)
        padded[:coefficients.shape[0]] = coefficients
        # Lambda(a_p) is the DFT of the coefficients at frequency -p
        freqs = [wrap_frequency(-p, n) for p in range(n)]
        return dft_at_frequencies(padded, freqs, n)
    return polynomial.polyval(candidates.nodes, coefficients)


def locate_roots(
    locator: Locator,
    candidates: EvaluationPoints,
    expected: int,
    tol: Optional[Tolerance] = None,
    separation: float = ROOT_SEPARATION_FACTOR,
) -> Tuple[int, ...]:
    """
    Indices of the `expected` candidates where the locator (nearly) vanishes.

    Raises:
        RootSeparationFailure: a chosen value is not small relative to the
            largest one, or the expected-th and next smallest magnitudes are
            not separated by `separation`.
    """
    tol = Tolerance.resolve(tol)
    nu = int(expected)
    if nu == 0:
        return ()
    n = candidates.n
    if nu > n:
        raise RootSeparationFailure('roots', f"{nu} roots requested among {n} candidates")

    magnitudes = np.abs(evaluate_locator(locator.coefficients, candidates))
    order = np.argsort(magnitudes, kind='stable')
    chosen = order[:nu]
    peak = float(magnitudes.max())
    worst = float(magnitudes[chosen].max())
    if worst > tol.residual_tol * peak:
        raise RootSeparationFailure(
            'roots', f"locator value {worst:.3e} at a chosen point exceeds {tol.residual_tol:.1e} x {peak:.3e}")
    if nu < n:
        runner_up = float(magnitudes[order[nu]])
        if runner_up < separation * worst:
            raise RootSeparationFailure(
                'roots', f"roots not separated: {worst:.3e} vs next candidate {runner_up:.3e}")
    return tuple(sorted(int(i) for i in chosen))


def bounded_distance_decode(
    code: RSCode,
    received,
    max_errors: int,
    tol: Optional[Tolerance] = None,
    generator: Optional[np.ndarray] = None,
) -> DecodeResult:
    """
    Decode up to `max_errors` symbol errors.

    Args:
        code: the code
        received: word of length n
        max_errors: tau with 2 tau <= n - k
        tol: tolerance policy
        generator: generator used for message extraction (defaults to
            `generator_matrix(code)`; any generator of the same code works)

    Returns:
        DecodeResult: message, corrected codeword and the error positions.

    Raises:
        DecodingFailure: a residual gate rejected the word (more than tau
            errors, or inconsistent input).
    """
    tol = Tolerance.resolve(tol)
    y = as_vector(received, "received word")
    n, k = code.n, code.k
    tau = int(max_errors)
    if y.shape[0] != n:
        raise DimensionMismatch(f"received word has length {y.shape[0]}, code length is {n}")
    if tau < 0 or 2 * tau > n - k:
        raise InvalidSpecError(f"code with n-k={n - k} cannot correct {tau} errors")

    G = generator_matrix(code) if generator is None else as_matrix(generator, "generator")
    if G.shape != (k, n):
        raise DimensionMismatch(f"generator has shape {G.shape}, expected {(k, n)}")

    error = np.zeros(n)
    located = LocatorResult(0, np.ones(1), ())
    if k < n:
        P = parity_check_matrix(code)
        scale = max(1.0, infinity_norm(y)) * max(1.0, float(np.abs(P).sum(axis=1).max()))
        S = syndromes(code, y)
        used = min(n - k, 2 * tau + 1)
        locator = prony_locator(S[:used], tau, tol, scale=scale)
        positions = locate_roots(locator, code.points, locator.degree, tol)
        located = LocatorResult(locator.degree, locator.coefficients, positions)
        logger.debug(f"Located {len(positions)} error position(s): {positions}")

        if positions:
            fit = solve_on_support(P, positions, P @ y, tol)
            if not fit.full_rank or fit.residual > tol.residual_tol:
                raise DecodingFailure(
                    'values', f"error values do not explain the syndromes (residual {fit.residual:.3e})")
            error[list(positions)] = np.real(fit.coefficients)

        leftover = infinity_norm(P @ (y - error))
        if leftover > tol.residual_tol * scale:
            raise DecodingFailure('syndrome', f"corrected word has syndrome {leftover:.3e}")

    codeword = y - error
    fit = solve_on_support(G.T, range(k), codeword, tol)
    if fit.residual > tol.residual_tol:
        raise DecodingFailure('message', f"codeword not in generator span (residual {fit.residual:.3e})")

    threshold = tol.zero_tol * max(1.0, infinity_norm(y))
    error_positions = tuple(int(p) for p in located.located_positions if abs(error[p]) > threshold)
    return DecodeResult(
        message=np.real_if_close(fit.coefficients),
        codeword=codeword,
        error_positions=error_positions,
        error_values=error[list(error_positions)],
        locator=located,
    )
