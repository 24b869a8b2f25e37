"""
Doubly Sparse CS - Configuration Module

Default tolerances, enumeration caps, interval choices and logging setup
shared by every module of the package.
"""

import logging

TOOL_VERSION = "1.0.0"

# Numeric tolerance policy (see numerics.Tolerance)
DEFAULT_TOLERANCES = {
    'zero_tol': 1e-8,
    'rank_tol': 1e-9,
    'residual_tol': 1e-7,
}

# Exhaustive oracles refuse to enumerate more subset pairs than this
ENUMERATION_CAP = 1_000_000

# Chebyshev node intervals for the inner and outer codes
INNER_INTERVAL = (-1.0, 1.0)
OUTER_INTERVAL = (-2.0, 2.0)

# Located roots must beat the next candidate by this factor
ROOT_SEPARATION_FACTOR = 10.0

# Simulated signal and error values
VALUE_DISTRIBUTIONS = ('uniform', 'unit')
DEFAULT_MIN_MAGNITUDE = 0.1
DEFAULT_MAX_MAGNITUDE = 10.0

# A trial succeeds when ||x_hat - x||_inf <= SUCCESS_RTOL * ||x||_inf
SUCCESS_RTOL = 1e-6

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: int = logging.INFO) -> None:
    """Configure root logging for command-line runs."""
    logging.basicConfig(level=level, format=LOG_FORMAT)
