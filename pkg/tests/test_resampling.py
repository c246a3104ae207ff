from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare, hypergeom

from energy_missing.data import build_sample, concatenate
from energy_missing.exceptions import NoCompleteCasesError, ParameterError, ReplicateError
from energy_missing.imputation import ImputerKind
from energy_missing.missingness import MissingnessSpec
from energy_missing.resampling import (
    Procedure,
    bootstrap_test,
    critical_value,
    p_value,
    procedure_from_label,
    replicate_rng,
    resample_pooled,
    resample_split_preserving,
    study_procedures,
    warp_speed_study,
)
from energy_missing.simharness import CellGenerator
from energy_missing.distributions import from_alias
from energy_missing.statistics import cc_statistic, weighted_statistic

from conftest import random_incomplete


def rows(sample):
    return Counter(tuple(np.where(r, v, np.inf)) for v, r in zip(sample.values, sample.response))


def test_split_preserving_counts_and_partition(rng):
    x = random_incomplete(rng, 9, 3, p=0.25)
    y = random_incomplete(rng, 6, 3, p=0.25)
    for _ in range(200):
        xs, ys = resample_split_preserving(x, y, rng)
        assert (xs.n_rows, ys.n_rows) == (9, 6)
        assert (xs.complete_count, ys.complete_count) == (x.complete_count, y.complete_count)
        assert rows(concatenate(xs, ys)) == rows(concatenate(x, y))


def test_split_preserving_complete_data_is_a_random_partition(rng):
    x = build_sample(rng.standard_normal((3, 2)))
    y = build_sample(rng.standard_normal((2, 2)))
    seen = set()
    for _ in range(300):
        xs, _ = resample_split_preserving(x, y, rng)
        seen.add(frozenset(map(tuple, xs.values)))
    assert len(seen) == 10


def test_pooled_partition_property(rng):
    x = random_incomplete(rng, 7, 2)
    y = random_incomplete(rng, 4, 2)
    for _ in range(100):
        xs, ys = resample_pooled(x, y, rng)
        assert rows(concatenate(xs, ys)) == rows(concatenate(x, y))


def test_pooled_swaps_two_points_half_the_time():
    rng = np.random.default_rng(11)
    x = build_sample([[0.0]])
    y = build_sample([[1.0]])
    swaps = sum(resample_pooled(x, y, rng)[0].values[0, 0] == 1.0 for _ in range(10_000))
    assert abs(swaps / 10_000 - 0.5) < 4 * 0.005


def test_pooled_complete_count_is_hypergeometric():
    rng = np.random.default_rng(21)
    x = build_sample([[0.0], [1.0], [None], [2.0], [None]])
    y = build_sample([[None], [3.0], [4.0], [None], [None], [5.0], [None]])
    n, total, good = 5, 12, x.complete_count + y.complete_count
    draws = 10_000
    counts = np.bincount([resample_pooled(x, y, rng)[0].complete_count for _ in range(draws)],
                         minlength=n + 1)
    support = np.arange(n + 1)
    probs = hypergeom(total, good, n).pmf(support)
    keep = probs > 0
    assert counts[~keep].sum() == 0
    assert chisquare(counts[keep], probs[keep] * draws).pvalue > 0.01


def test_pooled_needs_two_cases():
    x = build_sample([[1.0]])
    with pytest.raises(ParameterError):
        resample_pooled(x, x.take([]), np.random.default_rng(0))


def test_critical_value_index_rule():
    reps = np.arange(1, 101, dtype=float)[::-1]
    # ceil(0.95 * 100) = 95th order statistic
    assert critical_value(reps, 0.05) == 95.0
    assert critical_value(np.arange(1.0, 21.0), 0.05) == 19.0
    assert critical_value([3.0], 0.05) == 3.0


def test_p_value_rule():
    reps = np.array([1.0, 2.0, 3.0, 4.0])
    assert p_value(2.0, reps) == 0.75
    assert p_value(10.0, reps) == 0.0
    assert p_value(0.0, reps) == 1.0


def test_procedure_validation():
    with pytest.raises(ParameterError):
        Procedure("weighted", "impute_bootstrap")
    with pytest.raises(ParameterError):
        Procedure("imputed", "pooled", ImputerKind("mean"))
    with pytest.raises(ParameterError):
        Procedure("imputed", "impute_bootstrap")
    with pytest.raises(ParameterError):
        Procedure("weighted", "pooled", B=0)
    with pytest.raises(ParameterError):
        Procedure("weighted", "pooled", alpha=1.0)
    labels = [p.label for p in study_procedures()]
    assert labels == ["cc_alg1", "cc_alg2", "w_alg1", "w_alg2", "mean", "median", "6nn"]
    assert procedure_from_label("knn", k=3).label == "3nn"
    with pytest.raises(ParameterError):
        procedure_from_label("missforest")


@pytest.mark.parametrize("label", ["cc_alg1", "cc_alg2", "w_alg1", "w_alg2", "mean", "median", "6nn"])
def test_bootstrap_test_contract(rng, label):
    x = random_incomplete(rng, 20, 2, p=0.15)
    y = random_incomplete(rng, 12, 2, p=0.15)
    proc = procedure_from_label(label, B=99)
    out = bootstrap_test(x, y, proc, 5)
    assert out.replicates.shape == (99,)
    assert 0 <= out.p_value <= 1
    assert out.reject == (out.observed.raw > critical_value(out.replicates, 0.05))
    assert out.p_value == np.mean(out.replicates >= out.observed.raw)
    again = bootstrap_test(x, y, proc, 5)
    assert np.array_equal(again.replicates, out.replicates)
    assert again.to_dict() == out.to_dict()


def test_bootstrap_replicates_match_direct_statistics(rng):
    # the pooled-matrix shortcut must agree with recomputing on resampled data
    x = random_incomplete(rng, 10, 3, p=0.2)
    y = random_incomplete(rng, 8, 3, p=0.2)
    for label, stat in (("cc_alg1", cc_statistic), ("w_alg2", weighted_statistic)):
        proc = procedure_from_label(label, B=20)
        out = bootstrap_test(x, y, proc, 3)
        rng2 = np.random.default_rng(3)
        resample = resample_split_preserving if label.endswith("1") else resample_pooled
        direct = [stat(*resample(x, y, rng2)).raw for _ in range(20)]
        assert np.allclose(out.replicates, direct, rtol=1e-12, atol=0)


def test_bootstrap_propagates_statistic_errors(rng):
    x = build_sample([[None, 1.0], [2.0, None]])
    y = build_sample([[1.0, 2.0]])
    with pytest.raises(NoCompleteCasesError):
        bootstrap_test(x, y, procedure_from_label("cc_alg1", B=10), 0)


def test_replicate_rng_is_schedule_independent():
    a = replicate_rng((7, 1, 2), 5).random(3)
    b = replicate_rng((7, 1, 2), 5).random(3)
    c = replicate_rng((7, 1, 2), 6).random(3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def _generator(p=0.1):
    dgp = from_alias("N(0,I)", 3)
    miss = MissingnessSpec("mcar", p)
    return CellGenerator(dgp, dgp, 30, 20, miss, miss)


def test_warp_speed_shapes_and_determinism():
    procs = study_procedures()
    res = warp_speed_study(_generator(), procs, 120, seed=4)
    assert res.observed.shape == (120, 7) and res.replicates.shape == (120, 7)
    assert np.all((0 <= res.rejection_rates) & (res.rejection_rates <= 1))
    for j in range(7):
        assert res.rejection_rates[j] == np.mean(res.observed[:, j] > res.critical_values[j])
    again = warp_speed_study(_generator(), procs, 120, seed=4)
    assert np.array_equal(again.observed, res.observed)
    assert res.missing_rates_x.shape == (3,)


def test_warp_speed_parallel_matches_serial():
    procs = study_procedures()[:4]
    serial = warp_speed_study(_generator(), procs, 100, seed=9, jobs=1)
    parallel = warp_speed_study(_generator(), procs, 100, seed=9, jobs=3)
    assert np.array_equal(serial.observed, parallel.observed)
    assert np.array_equal(serial.replicates, parallel.replicates)


def test_warp_speed_procedure_subset_gives_same_numbers():
    full = warp_speed_study(_generator(), study_procedures(), 100, seed=2)
    sub = warp_speed_study(_generator(), [procedure_from_label("w_alg2")], 100, seed=2)
    assert np.array_equal(sub.observed[:, 0], full.observed[:, 3])


def test_warp_speed_preconditions_and_failures():
    with pytest.raises(ParameterError):
        warp_speed_study(_generator(), study_procedures(), 99)
    with pytest.raises(ReplicateError) as info:
        warp_speed_study(_generator(p=0.9), [procedure_from_label("cc_alg1")], 100, seed=1)
    assert info.value.replicate is not None and info.value.seed == 1


def test_warp_speed_complete_null_is_calibrated():
    dgp = from_alias("N(0,I)", 2)
    gen = CellGenerator(dgp, dgp, 20, 15, MissingnessSpec("mcar", 0.0), MissingnessSpec("mcar", 0.0))
    res = warp_speed_study(gen, [procedure_from_label("w_alg2")], 2000, seed=13)
    assert 0.03 <= res.rejection_rates[0] <= 0.07
