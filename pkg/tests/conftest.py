"""Shared fixtures.

The zero search and the boundary trace are the two expensive stages, so the
canonical single-site examples are computed once per session and reused by
the hardy/bounds/acceptance tests.
"""

import numpy as np
import pytest

from latspec.determinant import taylor_coeffs
from latspec.hardy import boundary_trace
from latspec.lattice import Potential
from latspec.zeros import find_zeros


@pytest.fixture(scope="session")
def v3():
    # strong attractive-site example: one eigenvalue above the band
    return Potential(3, [((0, 0, 0), 3.0 + 0.0j)])


@pytest.fixture(scope="session")
def mix3():
    # small complex 3-site potential, no symmetry
    return Potential(3, [
        ((0, 0, 0), 1.1 + 0.4j),
        ((1, 0, 0), -0.3 + 0.2j),
        ((0, 1, 0), 0.5 - 0.1j),
    ])


@pytest.fixture(scope="session")
def zeros_v3(v3):
    # tol tight enough that lambda(z1) carries ~1e-15 residual error
    return find_zeros(v3, tol=1e-12)


@pytest.fixture(scope="session")
def bt_v3(v3):
    return boundary_trace(v3, n_grid=1024)


@pytest.fixture(scope="session")
def tc_v3(v3):
    return taylor_coeffs(v3, 0.25, n_max=4, m_samples=64)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260814)
