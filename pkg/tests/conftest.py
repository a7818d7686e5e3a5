import numpy as np
import pytest

from diffswitch import ThresholdPair, gen_brownian
from diffswitch.trajectory import TimeGrid


@pytest.fixture
def brownian_300():
    grid = TimeGrid(t0=0.0, delta=1.0, n_steps=300)
    return gen_brownian(grid, 2, 1.0, np.random.default_rng(12345))


@pytest.fixture
def relaxed_300_30():
    # Published relaxed cut-offs for n=300, k=30; avoids calibrating in
    # unit tests that only need plausible thresholds.
    return ThresholdPair(0.74, 3.26)


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("threshold-cache")
