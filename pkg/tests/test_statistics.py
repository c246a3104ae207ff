import itertools

import numpy as np
import pytest

from energy_missing.data import build_sample
from energy_missing.exceptions import (
    EmptyInputError,
    IncompleteInputError,
    NoCompleteCasesError,
    ShapeError,
)
from energy_missing.statistics import (
    cc_statistic,
    energy_statistic,
    h_w_kernel,
    null_mean_identity_check,
    weighted_statistic,
)

from conftest import random_incomplete


def quadruple_sum(x, y):
    n, m = x.n_rows, y.n_rows
    px = [(x.filled[i], x.response[i]) for i in range(n)]
    py = [(y.filled[j], y.response[j]) for j in range(m)]
    total = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        for k, l in itertools.product(range(m), repeat=2):
            total += h_w_kernel(px[i], px[j], py[k], py[l])
    return total / (n * n * m * m)


def test_identical_samples_give_zero(rng):
    x = rng.standard_normal((7, 2))
    assert abs(energy_statistic(x, x[::-1]).raw) < 1e-12


def test_two_point_example():
    v = energy_statistic([[0.0]], [[2.0]])
    assert v.raw == 4.0
    assert v.scaled == 2.0


def test_argument_symmetry_and_row_permutation(rng):
    x = random_incomplete(rng, 8, 3)
    y = random_incomplete(rng, 5, 3)
    for stat in (weighted_statistic,):
        assert stat(x, y).raw == pytest.approx(stat(y, x).raw, rel=1e-14)
        perm = x.take(rng.permutation(8))
        assert stat(perm, y).raw == pytest.approx(stat(x, y).raw, rel=1e-13)
    xc = rng.standard_normal((6, 3))
    yc = rng.standard_normal((4, 3))
    assert energy_statistic(xc, yc).raw == pytest.approx(energy_statistic(yc, xc).raw, rel=1e-14)


def test_energy_needs_complete_nonempty():
    with pytest.raises(IncompleteInputError):
        energy_statistic([[1.0, None]], [[1.0, 2.0]])
    with pytest.raises(EmptyInputError):
        energy_statistic(np.zeros((0, 2)), [[1.0, 2.0]])


def test_cc_examples():
    x = build_sample([[0.0], [None]])
    y = build_sample([[2.0], [None], [None]])
    v = cc_statistic(x, y)
    assert v.raw == 4.0
    assert (v.n, v.m, v.n_hat, v.m_hat) == (2, 3, 1, 1)
    assert v.scaled == 2.0
    with pytest.raises(NoCompleteCasesError):
        cc_statistic(build_sample([[None, 1.0]]), build_sample([[1.0, 2.0]]))


def test_weighted_example():
    v = weighted_statistic(build_sample([[1, 2, None]]), build_sample([[4, None, 8]]))
    assert v.raw == pytest.approx(2.0, rel=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ShapeError):
        weighted_statistic([[1.0, 2.0]], [[1.0]])


def test_degeneracy_bit_identical(rng):
    for d in (1, 3, 10):
        x = rng.standard_normal((9, d))
        y = rng.standard_normal((4, d)) + 1
        t = energy_statistic(x, y).raw
        assert cc_statistic(x, y).raw == t
        assert weighted_statistic(x, y).raw == t


def test_nonnegative_on_complete_data(rng):
    for _ in range(50):
        x = rng.standard_normal((rng.integers(1, 10), 2))
        y = rng.standard_normal((rng.integers(1, 10), 2))
        assert energy_statistic(x, y).raw >= -1e-10


def test_h_w_kernel_examples(rng):
    a = (np.array([1.0, 2.0]), np.array([1, 0]))
    assert h_w_kernel(a, a, a, a) == 0.0
    p = [(rng.standard_normal(3), rng.random(3) < 0.7) for _ in range(4)]
    assert h_w_kernel(p[0], p[1], p[2], p[3]) == pytest.approx(h_w_kernel(p[1], p[0], p[3], p[2]))
    one = np.ones(1, bool)
    assert h_w_kernel((np.zeros(1), one), (np.zeros(1), one),
                      (np.full(1, 2.0), one), (np.full(1, 2.0), one)) == 4.0


def test_quadruple_sum_form(rng):
    for _ in range(20):
        x = random_incomplete(rng, rng.integers(1, 5), 3, p=0.4)
        y = random_incomplete(rng, rng.integers(1, 5), 3, p=0.4)
        t = weighted_statistic(x, y).raw
        assert t == pytest.approx(quadruple_sum(x, y), rel=1e-12, abs=1e-14)


def test_null_mean_identity_point_mass():
    sampler = lambda rng, size: np.zeros((size, 2))
    mc, eta, se = null_mean_identity_check(sampler, 3, 4, 10, seed=1, eta_pairs=100)
    assert mc == 0.0 and eta == 0.0 and se == 0.0


def test_null_mean_identity_classic():
    sampler = lambda rng, size: rng.standard_normal((size, 3))
    mc, eta, se = null_mean_identity_check(sampler, 10, 10, 2000, seed=3,
                                           statistic="classic", eta_pairs=200_000)
    assert abs(mc - eta) <= 3 * se


def test_null_mean_identity_needs_two_replicates():
    with pytest.raises(ValueError):
        null_mean_identity_check(lambda r, s: np.zeros((s, 1)), 2, 2, 1)
