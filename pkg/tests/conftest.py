"""
Pytest configuration and shared fixtures for the monodromy toolkit tests.

This module provides shared parameter sets, generators and tolerances for
all test modules.
"""

from fractions import Fraction as F

import numpy as np
import pytest
from mpmath import mp

from monodromy_core.params import FCParams, GHGParams


@pytest.fixture
def ghg_p2():
    """
    Rank-2 reference set a = (1/3, 1/5), b = (1/2).

    Returns:
        GHGParams: validated parameters with h ~ -0.79465
    """
    return GHGParams((F(1, 3), F(1, 5)), (F(1, 2),))


@pytest.fixture
def ghg_p3():
    """Rank-3 reference set a = (1/3, 1/5, 1/7), b = (1/2, 1/4)."""
    return GHGParams((F(1, 3), F(1, 5), F(1, 7)), (F(1, 2), F(1, 4)))


@pytest.fixture
def fc_m2():
    """Valid two-variable F_C set a = (1/3, 1/5), b = (1/2, 1/4)."""
    return FCParams(F(1, 3), F(1, 5), (F(1, 2), F(1, 4)))


@pytest.fixture
def fc_m3():
    """Valid three-variable F_C set."""
    return FCParams(F(1, 3), F(1, 5), (F(1, 2), F(1, 7), F(2, 11)))


@pytest.fixture
def fc_resonant():
    """a1 - (b1 + b2) = 0: violates the F_C non-integrality assumptions."""
    return FCParams(F(3, 4), F(1, 5), (F(1, 2), F(1, 4)))


@pytest.fixture
def rng():
    """
    Seeded numpy generator.

    Returns:
        np.random.Generator: deterministic across runs
    """
    return np.random.default_rng(20240611)


@pytest.fixture
def tight():
    """Identity tolerance used at 256 bits."""
    return mp.mpf("1e-40")


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks tests as integration tests"
    )
    config.addinivalue_line(
        "markers", "unit: marks tests as unit tests"
    )
