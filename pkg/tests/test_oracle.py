import numpy as np
import pytest

from energy_missing.distributions import normal, student_t
from energy_missing.exceptions import ParameterError, ShapeError
from energy_missing.oracle import (
    CharacteristicFunction,
    cov_kernel,
    ecf,
    empirical_process_check,
    integral_oracle_1d,
)
from energy_missing.statistics import energy_statistic


def test_ecf_examples(rng):
    X = rng.standard_normal((5, 2))
    assert ecf(X, [0.0, 0.0]) == 1
    assert ecf([[0.3, -1.0]], [2.0, 1.0]) == pytest.approx(np.exp(1j * (0.6 - 1.0)))
    assert abs(ecf([[0.0], [np.pi]], 1.0)) < 1e-15
    with pytest.raises(ShapeError):
        ecf(X, [1.0, 2.0, 3.0])


def test_ecf_properties(rng):
    X = rng.standard_normal((20, 3))
    T = rng.standard_normal((10, 3))
    vals = ecf(X, T)
    assert np.all(np.abs(vals) <= 1 + 1e-12)
    assert np.allclose(ecf(X, -T), np.conj(vals), rtol=0, atol=1e-15)


def test_normal_cf_properties():
    phi = CharacteristicFunction.normal([0.5, 0.0], [[1.0, 0.3], [0.3, 2.0]])
    assert phi([0.0, 0.0]) == 1
    t = np.array([0.7, -1.2])
    assert phi(-t) == pytest.approx(np.conj(phi(t)))
    assert abs(phi(t)) <= 1
    with pytest.raises(ParameterError):
        CharacteristicFunction.from_dgp(student_t(5, [0.0], [[1.0]]))


def test_integral_oracle_examples(rng):
    x = rng.standard_normal((6, 1))
    assert abs(integral_oracle_1d(x, x)) < 1e-10
    assert integral_oracle_1d([[0.0]], [[2.0]]) == pytest.approx(4.0, rel=1e-9)
    with pytest.raises(ShapeError):
        integral_oracle_1d(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)))


def test_integral_oracle_matches_statistic(rng):
    for _ in range(10):
        x = rng.standard_normal((rng.integers(1, 21), 1)) * rng.uniform(0.1, 5)
        y = rng.standard_normal((rng.integers(1, 21), 1)) + rng.uniform(-2, 2)
        assert integral_oracle_1d(x, y) == pytest.approx(energy_statistic(x, y).raw, rel=1e-3)


def test_cov_kernel_examples():
    phi = CharacteristicFunction.normal([0.0], [[1.0]])
    assert cov_kernel(phi, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    for t in (0.3, 1.0, 2.5):
        assert cov_kernel(phi, t, t) == pytest.approx(1 - np.exp(-t * t), abs=1e-14)
        assert cov_kernel(phi, -t, t) == pytest.approx(np.exp(-2 * t * t) - np.exp(-t * t), abs=1e-14)


def test_cov_kernel_symmetry_and_diagonal(rng):
    phi = CharacteristicFunction.normal([0.4, -0.2], [[1.0, 0.5], [0.5, 1.5]])
    for _ in range(20):
        s, t = rng.standard_normal(2), rng.standard_normal(2)
        assert cov_kernel(phi, s, t) == pytest.approx(cov_kernel(phi, t, s), abs=1e-14)
        assert cov_kernel(phi, s, s) >= -1e-14
    with pytest.raises(ShapeError):
        cov_kernel(phi, [1.0], [1.0, 2.0])


def test_cov_kernel_matches_covariance_of_cos_plus_sin():
    # numerical covariance of g(t,X) = cos tX + sin tX for X ~ N(0.7, 1)
    nodes, weights = np.polynomial.hermite_e.hermegauss(80)
    x = 0.7 + nodes
    w = weights / weights.sum()
    phi = CharacteristicFunction.normal([0.7], [[1.0]])
    for s, t in ((0.5, 1.0), (1.3, -0.4), (2.0, 2.0)):
        gs = np.cos(s * x) + np.sin(s * x)
        gt = np.cos(t * x) + np.sin(t * x)
        direct = np.dot(w, gs * gt) - np.dot(w, gs) * np.dot(w, gt)
        assert cov_kernel(phi, s, t) == pytest.approx(direct, abs=1e-12)


def test_empirical_process_zero_grid():
    dev = empirical_process_check(normal([0.0], [[1.0]]), 0.5, [0.0], 50, 200, 1)
    assert dev == pytest.approx(0.0, abs=1e-12)


def test_empirical_process_small_run():
    dev = empirical_process_check(normal([0.0], [[1.0]]), 1.0, [0.5, 1.0], 100, 1000, 2)
    assert dev < 0.15


def test_empirical_process_preconditions():
    with pytest.raises(ParameterError):
        empirical_process_check(normal([0.0], [[1.0]]), 1.0, [1.0], 10, 99, 0)
    with pytest.raises(ParameterError):
        empirical_process_check(normal([0.0], [[1.0]]), 0.0, [1.0], 10, 100, 0)
