"""
Doubly Sparse CS - Oracle Module

Exhaustive, independent checks of the claims the construction rests on:
the (t, l)-CS property, the Singleton-type lower bound, uniqueness of sparse
solutions, and the extension / isometry constants of a matrix.

Every enumeration is counted up front and refused with
EnumerationCapExceeded when it would exceed the cap; results are exhaustive
or absent, never sampled (pairwise_cs_check is the one sampling check).

CS property reduction: H is (t, l)-CS iff ||H z||_0 >= 2l + 1 for every
nonzero 2t-sparse z. Such a z with ||H z||_0 <= 2l vanishes on some set R of
r - 2l rows, i.e. lies in the null space of H[R, S] with S = supp(z). So the
property fails exactly when some (r - 2l) x 2t submatrix H[R, S] is rank
deficient, and its null vector is the counterexample.

Isometry constant convention: delta_D is the smallest delta with
(1 - delta) ||x||_2 <= ||H x||_2 <= (1 + delta) ||x||_2 for all D-sparse x,
norms not squared.
"""

from dataclasses import dataclass, field
from itertools import combinations, islice
from math import comb
from typing import Any, Dict, Iterator, List, Optional, Tuple
import logging

import numpy as np
import scipy.linalg

from .config import ENUMERATION_CAP
from .exceptions import EnumerationCapExceeded, InvalidSpecError
from .numerics import (
    SparseVector,
    Tolerance,
    as_matrix,
    as_vector,
    batched_singular_values,
    hamming_weight,
    infinity_norm,
    null_vector,
    numerical_rank,
    solve_on_support,
)

logger = logging.getLogger(__name__)

# Subsets processed per batched SVD call
CHUNK_SIZE = 4096


@dataclass(frozen=True, eq=False)
class OracleReport:
    """Verdict of an oracle check.

    Attributes:
        check: name of the check ('cs', 'pairwise', 'singleton', ...)
        verdict: True when the checked property holds
        witness: counterexample, present exactly when verdict is False
            (a vector z, a pair of vectors or a column subset)
        statistic: headline number of the check (weight found, constant)
        enumeration_count: number of cases examined
        details: extra values worth reporting
    """
    check: str
    verdict: bool
    witness: Optional[Any] = None
    statistic: Optional[float] = None
    enumeration_count: int = 0
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == (self.witness is not None):
            raise InvalidSpecError("an oracle report carries a witness exactly when its verdict is false")


def _check_cap(required: int, cap: Optional[int]) -> None:
    cap = ENUMERATION_CAP if cap is None else cap
    if required > cap:
        raise EnumerationCapExceeded(required, cap)


def _chunks(items: Iterator[Tuple[int, ...]], size: int = CHUNK_SIZE) -> Iterator[np.ndarray]:
    while True:
        block = list(islice(items, size))
        if not block:
            return
        yield np.array(block, dtype=int)


def _relative_sigma_min(stack: np.ndarray) -> np.ndarray:
    """sigma_min / sigma_max per matrix; 0 when a matrix has more columns than rows."""
    rows, cols = stack.shape[1:]
    if rows < cols:
        return np.zeros(stack.shape[0])
    sigma = batched_singular_values(stack)
    top = sigma[:, 0]
    return np.where(top > 0.0, sigma[:, -1] / np.where(top > 0.0, top, 1.0), 0.0)


def _column_basis(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis Q of the column space of a full-column-rank block, block = Q R."""
    return np.linalg.qr(block)


def verify_cs_property(
    H,
    t: int,
    l: int,
    tol: Optional[Tolerance] = None,
    cap: Optional[int] = None,
) -> OracleReport:
    """
    Exhaustively decide whether H is a (t, l)-CS matrix.

    Every 2t-column support S is paired with every (r - 2l)-row subset R;
    the property holds iff all H[R, S] have numerical rank 2t. With
    H[:, S] = Q R of full column rank, rank H[R, S] = rank Q[R, :], so the
    decision is made on the orthonormal basis Q and does not depend on how
    the columns of H are scaled or conditioned.

    Returns:
        OracleReport: on failure the witness is a 2t-sparse z with unit
            inf-norm and hamming_weight(H z) <= 2l (statistic); on success
            details['min_relative_sigma'] is the smallest sigma_min/sigma_max
            seen.

    Raises:
        InvalidSpecError: when 2t > n or r - 2l < 1
        EnumerationCapExceeded: when C(n, 2t) * C(r, 2l) exceeds the cap
    """
    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    r, n = H.shape
    if t < 1 or l < 0 or 2 * t > n:
        raise InvalidSpecError(f"need 1 <= t and 2t <= n, got t={t}, n={n}")
    kept_rows = r - 2 * l
    if kept_rows < 1:
        raise InvalidSpecError(f"need r - 2l >= 1, got r={r}, l={l}")
    required = comb(n, 2 * t) * comb(r, kept_rows)
    _check_cap(required, cap)

    def failure(S: List[int], R: List[int], z_S: np.ndarray) -> OracleReport:
        z = np.zeros(n, dtype=np.result_type(H.dtype, z_S.dtype))
        z[S] = z_S
        z = z / infinity_norm(z)
        weight = hamming_weight(H @ z, tol)
        logger.info(f"CS property fails on columns {S}, rows {R} (weight {weight})")
        return OracleReport(check='cs', verdict=False, witness=z, statistic=float(weight),
                            enumeration_count=required, details={'columns': S, 'rows': R})

    row_sets = np.array(list(combinations(range(r), kept_rows)), dtype=int)
    worst = np.inf
    for S in combinations(range(n), 2 * t):
        S = list(S)
        block = H[:, S]
        if numerical_rank(block, tol) < 2 * t:
            # H z vanishes on every row
            return failure(S, list(range(r)), null_vector(block))
        Q, R_factor = _column_basis(block)
        # (row subsets, kept_rows, 2t)
        ratios = _relative_sigma_min(Q[row_sets])
        deficient = np.flatnonzero(ratios <= tol.rank_tol)
        if deficient.size:
            R = row_sets[deficient[0]]
            w = null_vector(Q[R])
            return failure(S, R.tolist(), scipy.linalg.solve_triangular(R_factor, w))
        worst = min(worst, float(ratios.min()))

    logger.info(f"CS property holds for t={t}, l={l} over {required:,} submatrices")
    return OracleReport(check='cs', verdict=True, enumeration_count=required,
                        details={'min_relative_sigma': worst})


def pairwise_cs_check(
    H,
    t: int,
    l: int,
    sample_count: int,
    rng_seed: int,
    tol: Optional[Tolerance] = None,
) -> OracleReport:
    """
    Sample pairs of distinct vectors of weight <= t and check that
    ||H x - H y||_0 >= 2l + 1 for each of them.

    A False verdict is always backed by the offending pair (x, y); a True
    verdict only says that no sampled pair failed.
    """
    from .simulate import random_sparse

    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    r, n = H.shape
    if t < 1 or l < 0 or t > n:
        raise InvalidSpecError(f"need 1 <= t <= n and l >= 0, got t={t}, l={l}, n={n}")
    rng = np.random.default_rng(rng_seed)
    least = r + 1
    for sample in range(sample_count):
        while True:
            x = random_sparse(n, int(rng.integers(0, t + 1)), seed=rng).to_dense()
            y = random_sparse(n, int(rng.integers(0, t + 1)), seed=rng).to_dense()
            if not np.array_equal(x, y):
                break
        weight = hamming_weight(H @ x - H @ y, tol)
        least = min(least, weight)
        if weight < 2 * l + 1:
            logger.info(f"Pair {sample} has ||Hx - Hy||_0 = {weight} < {2 * l + 1}")
            return OracleReport(check='pairwise', verdict=False, witness=(x, y),
                                statistic=float(weight), enumeration_count=sample + 1)
    return OracleReport(check='pairwise', verdict=True,
                        statistic=float(least) if sample_count else None,
                        enumeration_count=sample_count)


def singleton_witness(H, t: int, tol: Optional[Tolerance] = None) -> Tuple[np.ndarray, int]:
    """
    Nonzero z supported on the first 2t coordinates with H[:2t-1] z = 0.

    Hence ||H z||_0 <= r - (2t - 1); when r < 2(t + l) this is at most 2l,
    which certifies that H is not (t, l)-CS.

    Returns:
        (z, achieved_weight): z with unit inf-norm, hamming_weight(H z)
    """
    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    r, n = H.shape
    if t < 1 or n < 2 * t or r < 2 * t - 1:
        raise InvalidSpecError(f"need n >= 2t and r >= 2t - 1, got n={n}, r={r}, t={t}")
    z = np.zeros(n, dtype=H.dtype)
    z[:2 * t] = null_vector(H[:2 * t - 1, :2 * t])
    z = z / infinity_norm(z)
    weight = hamming_weight(H @ z, tol)
    logger.debug(f"Singleton witness image weight {weight} (r={r}, t={t})")
    return z, weight


def singleton_report(H, t: int, l: int, tol: Optional[Tolerance] = None) -> OracleReport:
    """singleton_witness as a report: False when the witness image has weight <= 2l."""
    z, weight = singleton_witness(H, t, tol)
    if weight <= 2 * l:
        return OracleReport(check='singleton', verdict=False, witness=z,
                            statistic=float(weight), enumeration_count=1)
    return OracleReport(check='singleton', verdict=True, statistic=float(weight),
                        enumeration_count=1, details={'z': z})


def _support_sizes(n: int, r: int, t: int, l: int) -> List[Tuple[int, int]]:
    """
    (|S|, |E|) pairs to enumerate. Supports of full size t + l cover every
    smaller one; when t + l > r the joint system is square at |S| + |E| = r,
    so those sizes cover every solution with wt(x) <= t and wt(e) <= l.
    """
    t, l = min(t, n), min(l, r)
    if t + l <= r:
        return [(t, l)]
    return [(s, r - s) for s in range(max(0, r - l), min(t, r) + 1)]


def _support_fits(
    H: np.ndarray,
    s_hat: np.ndarray,
    t: int,
    l: int,
    tol: Tolerance,
    cap: Optional[int],
    residual_budget: Optional[float],
) -> Iterator[Tuple[Tuple[int, ...], np.ndarray, np.ndarray]]:
    """
    Least-squares fits of s_hat on [H_S | I_E] over all supports of the sizes
    given by _support_sizes that pass the residual test; yields (S, x, e) as
    dense vectors.
    """
    r, n = H.shape
    sizes = _support_sizes(n, r, t, l)
    _check_cap(sum(comb(n, s) * comb(r, k) for s, k in sizes), cap)
    scale = max(1.0, float(np.linalg.norm(s_hat)))
    joint = np.hstack([H, np.eye(r)])

    for s, k in sizes:
        for S in combinations(range(n), s):
            for E in combinations(range(r), k):
                columns = list(S) + [n + i for i in E]
                fit = solve_on_support(joint, columns, s_hat, tol)
                if residual_budget is None:
                    accepted = fit.residual <= tol.residual_tol
                else:
                    accepted = fit.residual * scale <= residual_budget + tol.residual_tol * scale
                if not accepted:
                    continue
                x = np.zeros(n, dtype=fit.coefficients.dtype)
                e = np.zeros(r, dtype=fit.coefficients.dtype)
                x[list(S)] = fit.coefficients[:s]
                e[list(E)] = fit.coefficients[s:]
                yield S, x, e


def brute_force_recover(
    H,
    s_hat,
    t: int,
    l: int,
    tol: Optional[Tolerance] = None,
    cap: Optional[int] = None,
    residual_budget: Optional[float] = None,
) -> List[Tuple[SparseVector, SparseVector]]:
    """
    All structurally distinct (x, e) with wt(x) <= t, wt(e) <= l and
    s_hat = H x + e.

    Args:
        H: r x n matrix
        s_hat: measurement of length r
        t, l: sparsity budgets
        residual_budget: None for exact solutions (relative residual <=
            residual_tol); otherwise accept ||s_hat - H x - e||_2 <= budget

    Returns:
        List of (x, e) pairs in enumeration order; solutions whose x agree
        to residual_tol are merged.

    Raises:
        EnumerationCapExceeded: when the number of (S, E) pairs exceeds the
            cap (C(n, t) * C(r, l) when t + l <= r)
    """
    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    s_hat = as_vector(s_hat, "measurement")
    solutions: List[Tuple[SparseVector, SparseVector]] = []
    seen: List[np.ndarray] = []
    for _, x, e in _support_fits(H, s_hat, t, l, tol, cap, residual_budget):
        x_sparse = SparseVector.from_dense(x, tol)
        x_clean = x_sparse.to_dense()
        limit = tol.residual_tol * max(1.0, infinity_norm(x_clean))
        if any(infinity_norm(x_clean - other) <= limit for other in seen):
            continue
        seen.append(x_clean)
        solutions.append((x_sparse, SparseVector.from_dense(e, tol)))
    logger.debug(f"Brute force found {len(solutions)} solution(s)")
    return solutions


def _support_extremes(H: np.ndarray, D: int, cap: Optional[int]) -> Dict[str, Any]:
    """Smallest and largest singular values over all D-column submatrices."""
    r, n = H.shape
    if not 1 <= D <= n:
        raise InvalidSpecError(f"need 1 <= D <= n, got D={D}, n={n}")
    required = comb(n, D)
    _check_cap(required, cap)

    extremes = {'sigma_min': np.inf, 'sigma_max': 0.0, 'delta': -np.inf,
                'argmin': None, 'argdelta': None, 'count': required}
    for block in _chunks(combinations(range(n), D)):
        # H[:, block] has shape (r, B, D)
        stack = np.transpose(H[:, block], (1, 0, 2))
        sigma = batched_singular_values(stack)
        top = sigma[:, 0]
        low = sigma[:, -1] if D <= r else np.zeros(len(block))
        delta = np.maximum(1.0 - low, top - 1.0)
        i, j = int(np.argmin(low)), int(np.argmax(delta))
        if low[i] < extremes['sigma_min']:
            extremes['sigma_min'], extremes['argmin'] = float(low[i]), tuple(block[i].tolist())
        if delta[j] > extremes['delta']:
            extremes['delta'], extremes['argdelta'] = float(delta[j]), tuple(block[j].tolist())
        extremes['sigma_max'] = max(extremes['sigma_max'], float(top.max()))
    return extremes


def _extension_value(extremes: Dict[str, Any], tol: Tolerance) -> float:
    value = extremes['sigma_min']
    return 0.0 if value <= tol.rank_tol * extremes['sigma_max'] else value


def extension_constant(H, D: int, tol: Optional[Tolerance] = None, cap: Optional[int] = None) -> float:
    """
    Largest lambda with lambda ||x||_2 <= ||H x||_2 for every D-sparse x:
    the minimum over |S| = D of sigma_min(H[:, S]).

    Values at or below rank_tol * ||H||_2 are reported as 0.
    """
    H = as_matrix(H)
    value = _extension_value(_support_extremes(H, D, cap), Tolerance.resolve(tol))
    logger.debug(f"Extension constant lambda_{D} = {value:.6g}")
    return value


def isometry_constant(H, D: int, tol: Optional[Tolerance] = None, cap: Optional[int] = None) -> float:
    """
    Smallest delta with (1 - delta) ||x|| <= ||H x|| <= (1 + delta) ||x||
    for every D-sparse x (norms not squared).
    """
    H = as_matrix(H)
    return max(0.0, _support_extremes(H, D, cap)['delta'])


def proximity_bound_check(
    H,
    t: int,
    epsilon: float,
    trials: int,
    rng_seed: int,
    tol: Optional[Tolerance] = None,
    cap: Optional[int] = None,
) -> OracleReport:
    """
    Check ||x - x'||_2 <= 2 epsilon / lambda_2t for consistent sparse solutions.

    Each trial draws a t-sparse x and dense noise of norm <= epsilon. The
    consistent solutions examined per support S are the least-squares fit
    and the boundary points along each principal axis of
    {x' : ||H_S x' - s_hat||_2 <= epsilon}; every pair among them and the
    true x is tested.
    """
    from .simulate import random_dense_noise, random_sparse

    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    r, n = H.shape
    if epsilon < 0:
        raise InvalidSpecError(f"epsilon must be >= 0, got {epsilon}")
    lam = extension_constant(H, min(2 * t, n), tol, cap)
    if lam <= 0.0:
        raise InvalidSpecError("extension constant lambda_2t is zero; the bound is vacuous")
    bound = 2.0 * epsilon / lam
    slack = tol.residual_tol * max(1.0, bound)

    pairs = 0
    worst = 0.0
    for trial in range(trials):
        rng = np.random.default_rng(rng_seed + trial)
        x = random_sparse(n, t, seed=rng).to_dense()
        s_hat = H @ x + random_dense_noise(r, epsilon, rng)
        candidates = [x]
        for S, fit, _ in _support_fits(H, s_hat, t, 0, tol, cap, epsilon):
            used = float(np.linalg.norm(s_hat - H @ fit))
            if used > epsilon:
                continue
            candidates.append(fit)
            radius = np.sqrt(epsilon ** 2 - used ** 2)
            if radius == 0.0:
                continue
            _, sigma, vh = scipy.linalg.svd(H[:, list(S)], full_matrices=False)
            for sigma_i, v in zip(sigma, vh):
                step = np.zeros(n)
                step[list(S)] = np.real(v.conj()) * radius / sigma_i
                candidates.extend([fit + step, fit - step])
        for a, b in combinations(candidates, 2):
            pairs += 1
            gap = float(np.linalg.norm(a - b))
            worst = max(worst, gap)
            if gap > bound + slack:
                logger.info(f"Proximity bound violated in trial {trial}: {gap:.3e} > {bound:.3e}")
                return OracleReport(check='proximity', verdict=False, witness=(a, b), statistic=gap,
                                    enumeration_count=pairs, details={'bound': bound, 'lambda': lam})
    return OracleReport(check='proximity', verdict=True, statistic=worst, enumeration_count=pairs,
                        details={'bound': bound, 'lambda': lam})


def verify_mds(generator, tol: Optional[Tolerance] = None, cap: Optional[int] = None) -> OracleReport:
    """
    Certify that every k columns of a k x n generator are independent, i.e.
    the code has minimum distance n - k + 1. Witness: a singular column set.
    """
    tol = Tolerance.resolve(tol)
    G = as_matrix(generator)
    k, n = G.shape
    required = comb(n, k)
    _check_cap(required, cap)
    if numerical_rank(G, tol) < k:
        return OracleReport(check='mds', verdict=False, witness=tuple(range(k)), statistic=0.0,
                            enumeration_count=1)
    # G^T = Q R, so rank G[:, S] = rank Q[S, :]
    Q, _ = _column_basis(G.T)
    worst = np.inf
    for block in _chunks(combinations(range(n), k)):
        ratios = _relative_sigma_min(Q[block])
        bad = np.flatnonzero(ratios <= tol.rank_tol)
        if bad.size:
            columns = tuple(block[bad[0]].tolist())
            return OracleReport(check='mds', verdict=False, witness=columns,
                                statistic=float(ratios[bad[0]]), enumeration_count=required)
        worst = min(worst, float(ratios.min()))
    return OracleReport(check='mds', verdict=True, statistic=worst, enumeration_count=required,
                        details={'distance': n - k + 1})


def lp_recovery_condition(H, t: int, tol: Optional[Tolerance] = None,
                          cap: Optional[int] = None) -> OracleReport:
    """
    Evaluate the sufficient condition delta_3t + 3 delta_4t < 2 for
    l1-recovery of t-sparse vectors. Witness: the worst supports.
    """
    H = as_matrix(H)
    n = H.shape[1]
    if 4 * t > n:
        raise InvalidSpecError(f"need 4t <= n, got t={t}, n={n}")
    _check_cap(comb(n, 3 * t) + comb(n, 4 * t), cap)
    three = _support_extremes(H, 3 * t, cap)
    four = _support_extremes(H, 4 * t, cap)
    delta_3t, delta_4t = max(0.0, three['delta']), max(0.0, four['delta'])
    statistic = delta_3t + 3.0 * delta_4t
    details = {'delta_3t': delta_3t, 'delta_4t': delta_4t}
    count = three['count'] + four['count']
    if statistic < 2.0:
        return OracleReport(check='lp', verdict=True, statistic=statistic,
                            enumeration_count=count, details=details)
    witness = {'support_3t': three['argdelta'], 'support_4t': four['argdelta']}
    return OracleReport(check='lp', verdict=False, witness=witness, statistic=statistic,
                        enumeration_count=count, details=details)


def extension_report(H, D: int, tol: Optional[Tolerance] = None, cap: Optional[int] = None) -> OracleReport:
    """extension_constant as a report: False, with the worst support, when lambda_D is zero."""
    tol = Tolerance.resolve(tol)
    H = as_matrix(H)
    extremes = _support_extremes(H, D, cap)
    lam = _extension_value(extremes, tol)
    details = {'D': D, 'support': extremes['argmin']}
    if lam > 0.0:
        return OracleReport(check='lambda', verdict=True, statistic=lam,
                            enumeration_count=extremes['count'], details=details)
    return OracleReport(check='lambda', verdict=False, witness=extremes['argmin'], statistic=lam,
                        enumeration_count=extremes['count'], details=details)


def isometry_report(H, D: int, cap: Optional[int] = None) -> OracleReport:
    """isometry_constant as a report; the constant is a measurement, so the verdict is True."""
    H = as_matrix(H)
    extremes = _support_extremes(H, D, cap)
    return OracleReport(check='delta', verdict=True, statistic=max(0.0, extremes['delta']),
                        enumeration_count=extremes['count'],
                        details={'D': D, 'support': extremes['argdelta']})
