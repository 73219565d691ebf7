import numpy as np
import pytest

from srcube.geometry import BoundaryData
from srcube.pipeline import ProblemSpec, solve


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def hot_top():
    return BoundaryData.hot_face("z1")


@pytest.fixture(scope="session")
def hot_top_solution():
    """u = 1 on z = 1, 0 elsewhere; n = 5 uniform, MFS with alpha = 3, error estimate on."""
    return solve(ProblemSpec(BoundaryData.hot_face("z1"), n=5, alpha=3.0, threads=4))


@pytest.fixture(scope="session")
def small_hot_top_solution():
    """Coarse and quick; good enough for plumbing tests."""
    return solve(ProblemSpec(BoundaryData.hot_face("z1"), n=2, base_k=8, estimate_error=False))
