import numpy as np
import pytest

from energy_missing.data import build_sample


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_incomplete(rng, n, d, p=0.3):
    """Random normal sample with MCAR holes (NaN marks missing)."""
    values = rng.standard_normal((n, d))
    values[rng.random((n, d)) < p] = np.nan
    return build_sample(values)
