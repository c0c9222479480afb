"""
Pytest configuration and fixtures for the subdivision toolkit tests.
"""

import random
from fractions import Fraction
from pathlib import Path

import pytest

from services.construct import bspline_mask
from services.core import HermiteType, Mask, load_mask_file
from services.smoothness import SmoothnessEstimator

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory holding the mask and data JSON fixtures."""
    return FIXTURES


@pytest.fixture
def rng():
    """Seeded random source so property tests are deterministic."""
    return random.Random(20240517)


@pytest.fixture
def bspline():
    """Factory for the scalar B-spline masks a^B_n."""
    return bspline_mask


@pytest.fixture
def hermite_cubic() -> Mask:
    """Interpolatory Hermite cubic mask of type {0,1}."""
    return load_mask_file(FIXTURES / "hermite_cubic.json").mask


@pytest.fixture
def hermite_type() -> HermiteType:
    return HermiteType.univariate([0, 1])


@pytest.fixture
def estimator() -> SmoothnessEstimator:
    """Estimator with explicit settings, independent of the environment."""
    return SmoothnessEstimator(tol=1e-10, iters=200)


@pytest.fixture
def random_fraction(rng):
    """Small random rationals with power-of-two denominators."""
    def draw(bound: int = 64) -> Fraction:
        return Fraction(rng.randint(-bound, bound), 2 ** rng.randint(3, 9))
    return draw
