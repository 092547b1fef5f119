import numpy as np
import pytest

from inflap import BoundaryTrace, build_domain


@pytest.fixture(scope="session")
def ball2d():
    return build_domain({"kind": "ball", "center": [0.0, 0.0], "R": 1.0},
                        1.0 / 16.0)


@pytest.fixture(scope="session")
def small_ball():
    return build_domain({"kind": "ball", "center": [0.0, 0.0], "R": 0.5},
                        1.0 / 16.0)


@pytest.fixture
def zero_trace(ball2d):
    return BoundaryTrace.constant(ball2d, 0.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260826)


@pytest.fixture(scope="session")
def small_ball8():
    return build_domain({"kind": "ball", "center": [0.0, 0.0], "R": 0.5},
                        1.0 / 8)
