"""
Shared pytest fixtures: built matrices and the default tolerance policy.
"""

import pytest

from doubly_sparse.numerics import Tolerance
from doubly_sparse.sensing_matrix import CSMatrixSpec, Variant, build


@pytest.fixture(scope="session")
def tol():
    return Tolerance()


@pytest.fixture(scope="session")
def generic_8_1_1():
    return build(CSMatrixSpec(8, 1, 1, Variant.GENERIC))


@pytest.fixture(scope="session")
def cyclic_8_1_1():
    return build(CSMatrixSpec(8, 1, 1, Variant.CYCLIC))


@pytest.fixture(scope="session")
def generic_16_2_2():
    return build(CSMatrixSpec(16, 2, 2, Variant.GENERIC))


@pytest.fixture(scope="session")
def cyclic_16_2_2():
    return build(CSMatrixSpec(16, 2, 2, Variant.CYCLIC))
