import numpy as np
import pytest

from precond_lab.sparse import CsrMatrix

TWO_BY_TWO = [[2.0, -1.0], [-1.0, 2.0]]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def a2():
    return CsrMatrix.from_dense(TWO_BY_TWO)


def random_sparse(n, density, seed):
    """Unstructured random sparse matrix (not necessarily factorizable)."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1, 1, size=(n, n)) * (rng.random((n, n)) < density)
    return CsrMatrix.from_dense(a)
