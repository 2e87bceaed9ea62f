import math

import numpy as np
import pytest

from hardyforge import radial


@pytest.fixture(scope="session")
def classical_engine():
    """(op, psi, g0, verdict, W) for -Delta in R^3 on the default grid."""
    op = radial.RadialOperator(n=3)
    psi, g0, verdict, W = radial.optimal_pair(op)
    return op, psi, g0, verdict, W


@pytest.fixture(scope="session")
def yukawa_engine():
    """Same for -Delta + 1 in R^3 (psi = sinh r / r, g0 = e^-r / r)."""
    op = radial.RadialOperator(n=3, V=lambda r: np.ones_like(np.asarray(r, dtype=float)))
    psi, g0, verdict, W = radial.optimal_pair(op)
    return op, psi, g0, verdict, W


@pytest.fixture(scope="session")
def wide_classical_engine():
    """Classical pair on a grid covering the 20-pi oscillation window."""
    g = radial.make_log_grid(1e-2, math.exp(21 * math.pi), 8001)
    op = radial.RadialOperator(n=3, grid=g)
    psi, g0, verdict, W = radial.optimal_pair(op)
    return op, psi, g0, verdict, W
