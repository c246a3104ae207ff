import numpy as np
import pytest
from sklearn.base import clone

from energy_missing import EnergyTwoSampleTest
from energy_missing.exceptions import NoCompleteCasesError, ParameterError, ShapeError


@pytest.fixture
def pair(rng):
    x = rng.standard_normal((30, 3))
    y = rng.standard_normal((20, 3)) + 1.5
    x[rng.random(x.shape) < 0.1] = np.nan
    y[rng.random(y.shape) < 0.1] = np.nan
    return x, y


def test_params_round_trip():
    est = EnergyTwoSampleTest(statistic="cc", n_bootstrap=50)
    params = est.get_params()
    assert params["statistic"] == "cc" and params["n_bootstrap"] == 50
    assert clone(est).get_params() == params
    est.set_params(alpha=0.1)
    assert est.alpha == 0.1


@pytest.mark.parametrize("stat, boot, imp", [
    ("weighted", "split", "mean"), ("weighted", "pooled", "mean"),
    ("cc", "split", "mean"), ("impute", "split", "knn"), ("impute", "split", "median"),
])
def test_fit_detects_shift(pair, stat, boot, imp):
    est = EnergyTwoSampleTest(statistic=stat, bootstrap=boot, imputer=imp,
                              n_bootstrap=99, random_state=0).fit(*pair)
    assert est.reject_
    assert est.pvalue_ <= 0.05
    assert est.replicates_.shape == (99,)
    assert est.report()["procedure"] in ("w_alg1", "w_alg2", "cc_alg1", "6nn", "median")


def test_fit_is_reproducible(pair):
    a = EnergyTwoSampleTest(n_bootstrap=50, random_state=4).fit(*pair)
    b = EnergyTwoSampleTest(n_bootstrap=50, random_state=4).fit(*pair)
    assert np.array_equal(a.replicates_, b.replicates_)


def test_errors(pair):
    x, y = pair
    with pytest.raises(ParameterError):
        EnergyTwoSampleTest(statistic="nope").fit(x, y)
    with pytest.raises(ParameterError):
        EnergyTwoSampleTest(bootstrap="nope").fit(x, y)
    with pytest.raises(ParameterError):
        EnergyTwoSampleTest(n_bootstrap=0).fit(x, y)
    with pytest.raises(ShapeError):
        EnergyTwoSampleTest().fit(x, y[:, :2])
    empty = np.full((3, 3), np.nan)
    with pytest.raises(NoCompleteCasesError):
        EnergyTwoSampleTest(statistic="cc").fit(empty, y)
