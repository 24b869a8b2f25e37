"""
Doubly Sparse CS - Simulation Module

Deterministic random instances for recovery trials: t-sparse signals,
l-sparse gross errors and optional bounded dense noise. Trial i of a batch
uses seed base_seed + i, so any single trial can be replayed on its own.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Union
import logging

import numpy as np
import pandas as pd

from .config import (
    DEFAULT_MAX_MAGNITUDE,
    DEFAULT_MIN_MAGNITUDE,
    DEFAULT_TOLERANCES,
    SUCCESS_RTOL,
    VALUE_DISTRIBUTIONS,
)
from .exceptions import InvalidSpecError
from .numerics import SparseVector, Tolerance, infinity_norm
from .recovery import recover
from .sensing_matrix import CSMatrix, CSMatrixSpec, Variant, measure

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator, None]

TIMING_COLUMNS = ['outer_micros', 'inner_micros', 'decode_micros']


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of a batch of recovery trials.

    `injected_errors` (default l) and `signal_weight` (default t) may exceed
    the matrix budgets to exercise failure reporting.
    """
    n: int
    t: int
    l: int
    variant: Variant = Variant.GENERIC
    value_distribution: str = 'uniform'
    dense_noise_eps: float = 0.0
    trials: int = 1
    base_seed: int = 0
    injected_errors: Optional[int] = None
    signal_weight: Optional[int] = None
    min_magnitude: float = DEFAULT_MIN_MAGNITUDE
    max_magnitude: float = DEFAULT_MAX_MAGNITUDE

    def __post_init__(self):
        object.__setattr__(self, 'variant', Variant(self.variant))
        if self.value_distribution not in VALUE_DISTRIBUTIONS:
            raise InvalidSpecError(f"unknown value distribution {self.value_distribution!r}")
        if self.trials < 1:
            raise InvalidSpecError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.base_seed < 2 ** 64:
            raise InvalidSpecError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")
        if self.dense_noise_eps < 0:
            raise InvalidSpecError(f"dense_noise_eps must be >= 0, got {self.dense_noise_eps}")
        if self.min_magnitude < 10 * DEFAULT_TOLERANCES['zero_tol'] or self.max_magnitude < self.min_magnitude:
            raise InvalidSpecError(
                f"magnitudes [{self.min_magnitude}, {self.max_magnitude}] must sit above 10 x zero_tol")

    @property
    def errors(self) -> int:
        return self.l if self.injected_errors is None else self.injected_errors

    @property
    def weight(self) -> int:
        return self.t if self.signal_weight is None else self.signal_weight

    def matrix_spec(self) -> CSMatrixSpec:
        return CSMatrixSpec(self.n, self.t, self.l, self.variant)


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial; timing fields are wall-clock measurements."""
    n: int
    t: int
    l: int
    variant: str
    trial: int
    seed: int
    success: bool
    residual: float
    outer_ok: bool
    status: str
    stage: str
    outer_micros: float
    inner_micros: float
    decode_micros: float

    def deterministic_fields(self) -> dict:
        row = asdict(self)
        for column in TIMING_COLUMNS:
            row.pop(column)
        return row


def random_sparse(
    length: int,
    weight: int,
    distribution: str = 'uniform',
    seed: Seed = None,
    min_magnitude: float = DEFAULT_MIN_MAGNITUDE,
    max_magnitude: float = DEFAULT_MAX_MAGNITUDE,
) -> SparseVector:
    """
    Random sparse vector with exactly `weight` nonzeros.

    Args:
        length: vector length
        weight: number of nonzeros, 0 <= weight <= length
        distribution: 'uniform' (magnitudes in [min, max], random sign) or
            'unit' (+-1)
        seed: integer seed or a numpy Generator to draw from

    Returns:
        SparseVector: uniformly random support, i.i.d. values
    """
    if not 0 <= weight <= length:
        raise InvalidSpecError(f"weight {weight} out of range for length {length}")
    if distribution not in VALUE_DISTRIBUTIONS:
        raise InvalidSpecError(f"unknown value distribution {distribution!r}")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(length, size=weight, replace=False))
    signs = rng.choice([-1.0, 1.0], size=weight)
    if distribution == 'unit':
        values = signs
    else:
        values = signs * rng.uniform(min_magnitude, max_magnitude, size=weight)
    return SparseVector(length, tuple(int(i) for i in support), tuple(float(v) for v in values))


def random_dense_noise(length: int, eps: float, seed: Seed = None) -> np.ndarray:
    """Dense noise with a uniformly random direction and l2-norm at most eps."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(length)
    norm = np.linalg.norm(direction)
    if eps == 0.0 or norm == 0.0:
        return np.zeros(length)
    return direction / norm * eps * rng.uniform()


def _check_consistent(config: TrialConfig, matrix: CSMatrix) -> None:
    if (config.n, config.t, config.l, config.variant) != (matrix.n, matrix.t, matrix.l, matrix.variant):
        raise InvalidSpecError(
            f"trial config (n={config.n}, t={config.t}, l={config.l}, {config.variant.value}) "
            f"does not match the matrix (n={matrix.n}, t={matrix.t}, l={matrix.l}, {matrix.variant.value})")
    if config.errors > matrix.r or config.weight > matrix.n:
        raise InvalidSpecError("injected weights exceed the vector lengths")


def run_trial(config: TrialConfig, matrix: CSMatrix, index: int,
              tol: Optional[Tolerance] = None) -> TrialRecord:
    """Run trial `index` of a batch (seed = base_seed + index)."""
    seed = config.base_seed + index
    rng = np.random.default_rng(seed)
    draw = dict(distribution=config.value_distribution,
                min_magnitude=config.min_magnitude, max_magnitude=config.max_magnitude)
    x = random_sparse(config.n, config.weight, seed=rng, **draw)
    e = random_sparse(matrix.r, config.errors, seed=rng, **draw)
    noise = random_dense_noise(matrix.r, config.dense_noise_eps, rng) if config.dense_noise_eps else None
    s_hat = measure(matrix, x, e, noise).s_hat

    result = recover(matrix, s_hat, tol)
    x_true = x.to_dense()
    error = infinity_norm(result.x_hat.to_dense() - x_true)
    success = result.ok and error <= SUCCESS_RTOL * infinity_norm(x_true)
    outer_ok = result.ok and set(result.outer_error_positions) == set(e.support)
    timings = {stage: seconds * 1e6 for stage, seconds in result.timings.items()}
    return TrialRecord(
        n=config.n, t=config.t, l=config.l, variant=config.variant.value,
        trial=index, seed=seed,
        success=bool(success),
        residual=float(result.residual),
        outer_ok=bool(outer_ok),
        status=result.status.value,
        stage=result.stage.value if result.stage else '',
        outer_micros=timings.get('outer', 0.0),
        inner_micros=timings.get('inner', 0.0),
        decode_micros=sum(timings.values()),
    )


def run_trials(config: TrialConfig, matrix: CSMatrix, tol: Optional[Tolerance] = None,
               workers: int = 1) -> List[TrialRecord]:
    """
    Run every trial of a config against a matrix.

    Trials are independent; with workers > 1 they run on a thread pool and
    the records are still returned in trial order.
    """
    _check_consistent(config, matrix)
    indices = range(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda i: run_trial(config, matrix, i, tol), indices))
    else:
        records = [run_trial(config, matrix, i, tol) for i in indices]
    failures = sum(not r.success for r in records)
    logger.info(f"Ran {len(records)} trials (n={config.n}, t={config.t}, l={config.l}, "
                f"{config.variant.value}): {failures} unsuccessful")
    return records


def records_to_frame(records: List[TrialRecord], include_timing: bool = True) -> pd.DataFrame:
    """Trial records as a DataFrame (timing columns optional)."""
    frame = pd.DataFrame([asdict(r) for r in records])
    if not include_timing and not frame.empty:
        frame = frame.drop(columns=TIMING_COLUMNS)
    return frame
