import numpy as np
import pytest
from scipy.special import logit

from energy_missing.data import build_sample
from energy_missing.exceptions import (
    CalibrationError,
    IncompleteInputError,
    InfeasibleRateError,
    ParameterError,
)
from energy_missing.missingness import (
    MissingnessSpec,
    apply_mar_1to9,
    apply_mar_logistic,
    apply_mar_rank,
    apply_mcar,
    calibrate_logistic_intercept,
    logistic_probabilities,
    weighted_draw_without_replacement,
)


@pytest.fixture
def big(rng):
    return build_sample(rng.standard_normal((100_000, 3)))


def test_mcar_extremes(rng):
    s = build_sample(rng.standard_normal((20, 3)))
    assert apply_mcar(s, 0.0, rng).equals(s)
    assert not apply_mcar(s, 1.0, rng).response.any()
    with pytest.raises(ParameterError):
        apply_mcar(s, 1.2, rng)


def test_mcar_rate(big, rng):
    out = apply_mcar(big, [0.1, 0.1, 0.1], rng)
    rates = 1 - out.response.mean(axis=0)
    assert np.all(np.abs(rates - 0.1) <= 0.005)


def test_mcar_requires_complete_input(rng):
    with pytest.raises(IncompleteInputError):
        apply_mcar(build_sample([[1.0, None]]), 0.1, rng)


def test_mar_1to9_rates(big, rng):
    out = apply_mar_1to9(big, 0, [1, 2], 0.1, rng)
    assert out.response[:, 0].all()
    upper = big.values[:, 0] > np.median(big.values[:, 0])
    for t in (1, 2):
        miss = ~out.response[:, t]
        sd = np.sqrt(0.1 * 0.9 / big.n_rows)
        assert abs(miss.mean() - 0.1) <= 3 * sd
        ratio = miss[upper].mean() / miss[~upper].mean()
        assert 8 <= ratio <= 10


def test_mar_1to9_group_rates_at_04(big, rng):
    out = apply_mar_1to9(big, 0, [1], 0.4, rng)
    upper = big.values[:, 0] > np.median(big.values[:, 0])
    miss = ~out.response[:, 1]
    assert miss[~upper].mean() == pytest.approx(0.08, abs=0.01)
    assert miss[upper].mean() == pytest.approx(0.72, abs=0.01)


def test_mar_1to9_edge_cases(rng):
    s = build_sample(np.column_stack([np.ones(20_000), rng.standard_normal(20_000)]))
    assert apply_mar_1to9(s, 0, [1], 0.0, rng).equals(s)
    out = apply_mar_1to9(s, 0, [1], 0.3, rng)
    assert abs((~out.response[:, 1]).mean() - 0.3) < 0.015
    with pytest.raises(InfeasibleRateError):
        apply_mar_1to9(s, 0, [1], 0.6, rng)
    with pytest.raises(ParameterError):
        apply_mar_1to9(s, 0, [0], 0.1, rng)


def test_mar_rank_exact_counts(rng):
    s = build_sample(rng.standard_normal((101, 3)))
    out = apply_mar_rank(s, 0, [1, 2], 0.1, rng)
    assert out.response[:, 0].all()
    assert (~out.response[:, 1]).sum() == 10
    assert (~out.response[:, 2]).sum() == 10
    assert apply_mar_rank(s, 0, [1], 0.0, rng).equals(s)
    assert not apply_mar_rank(s, 0, [1], 1.0, rng).response[:, 1].any()


def test_mar_rank_two_rows_law():
    s = build_sample([[1.0, 0.0], [2.0, 0.0]])
    rng = np.random.default_rng(7)
    hits = sum(not apply_mar_rank(s, 0, [1], 0.5, rng).response[1, 1] for _ in range(20_000))
    sd = np.sqrt(2 / 9 / 20_000)
    assert abs(hits / 20_000 - 2 / 3) <= 4 * sd


def test_weighted_draw_first_item_law():
    rng = np.random.default_rng(3)
    w = np.array([1.0, 2.0, 3.0, 4.0])
    first = np.bincount([weighted_draw_without_replacement(w, 1, rng)[0] for _ in range(20_000)],
                        minlength=4) / 20_000
    assert np.allclose(first, w / w.sum(), atol=0.015)


def test_mar_logistic_limits(rng):
    s = build_sample(rng.standard_normal((500, 3)))
    out = apply_mar_logistic(s, [0], [1, 2], -50.0, [1.0], rng)
    assert out.equals(s)
    out = apply_mar_logistic(s, [0, 0], [1, 2], 50.0, [0.1, 0.1], rng)
    assert out.response[:, 0].all() and not out.response[:, 1:].any()
    with pytest.raises(ParameterError):
        apply_mar_logistic(s, [0], [0, 1], 0.0, [1.0], rng)
    with pytest.raises(ParameterError):
        apply_mar_logistic(s, [0], [1], 0.0, [1.0, 2.0], rng)


@pytest.mark.parametrize(
    "intercept, slopes, expected",
    [(-5.0, [-1.9, -1.5], 0.10), (-1.05, [-1.7, -0.6], 0.36)],
)
def test_logistic_presets_on_standard_normal(big, rng, intercept, slopes, expected):
    # both slopes act on the first variable; expected rates are the tabulated
    # N(0, I) missingness percentages
    out = apply_mar_logistic(big, [0, 0], [1, 2], intercept, slopes, rng)
    rate = (~out.response[:, 1:]).mean()
    assert rate == pytest.approx(expected, abs=0.01)


def test_calibration_zero_slopes_is_logit():
    b = calibrate_logistic_intercept(0.3, [0.0], rng=1, mc_size=1000, tol=1e-8)
    assert b == pytest.approx(logit(0.3), abs=1e-6)


@pytest.mark.parametrize("rate, slopes", [(0.10, [-1.9, -1.5]), (0.37, [-1.7, -0.6])])
def test_calibration_reaches_target(rate, slopes):
    b = calibrate_logistic_intercept(rate, slopes, rng=2)
    z = np.random.default_rng(99).standard_normal((200_000, 2))
    achieved = logistic_probabilities(z, b, slopes).mean()
    assert abs(achieved - rate) <= 0.01


def test_calibration_errors():
    with pytest.raises(ParameterError):
        calibrate_logistic_intercept(1.5, [0.0])
    with pytest.raises(CalibrationError):
        calibrate_logistic_intercept(0.2, [1.0], rng=0, mc_size=1000, tol=1e-14, max_iter=5)


def test_determinism(rng):
    s = build_sample(rng.standard_normal((50, 3)))
    a = apply_mcar(s, 0.3, np.random.default_rng(5))
    b = apply_mcar(s, 0.3, np.random.default_rng(5))
    assert a.equals(b)


def test_spec_validation_and_apply(rng):
    s = build_sample(rng.standard_normal((30, 3)))
    spec = MissingnessSpec("mar_rank", 0.2, control=0, targets=(1, 2))
    assert spec.incomplete_columns == [1, 2]
    assert (~spec.apply(s, rng).response).sum() == 12
    assert MissingnessSpec("mcar", 0.1).incomplete_columns is None
    with pytest.raises(ParameterError):
        MissingnessSpec("mnar")
    with pytest.raises(ParameterError):
        MissingnessSpec("mar_1to9", 0.1, control=1, targets=(1,))
    with pytest.raises(ParameterError):
        MissingnessSpec("mar_logistic", controls=(0,), targets=(1,), slopes=(1.0, 2.0))
