"""Bootstrap procedures for the incomplete-data energy tests.

Three resampling schemes are provided:

* ``split_preserving``: pool complete and incomplete cases separately and
  split each pool so that both bootstrap samples keep their original numbers
  of complete cases;
* ``pooled``: split the pooled sample into sizes n and m;
* ``impute_bootstrap``: split the pooled incomplete sample and impute each
  half before computing the classic statistic.

Splits are random partitions without replacement. :func:`warp_speed_study`
draws a single bootstrap replicate per simulated data set and pools the
replicates across the study to form the null reference distribution.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .data import IncompleteSample, check_pair, concatenate
from .distance import DistanceKind, pairwise_matrix
from .exceptions import EnergyMissingError, NoCompleteCasesError, ParameterError, ReplicateError
from .imputation import ImputerKind, as_imputer_kind, impute
from .statistics import (
    StatisticValue,
    cc_statistic,
    energy_from_blocks,
    energy_statistic,
    scale_factor,
    weighted_statistic,
)

STATISTICS = ("complete_case", "weighted", "imputed")
ALGORITHMS = ("split_preserving", "pooled", "impute_bootstrap")


@dataclass(frozen=True)
class Procedure:
    """A test statistic paired with the resampling scheme that calibrates it."""

    statistic: str
    algorithm: str
    imputer: Optional[ImputerKind] = None
    B: int = 1000
    alpha: float = 0.05

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ParameterError(f"unknown statistic {self.statistic!r}")
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if (self.algorithm == "impute_bootstrap") != (self.statistic == "imputed"):
            raise ParameterError("impute_bootstrap goes with, and only with, imputed")
        if self.statistic == "imputed":
            if self.imputer is None:
                raise ParameterError("imputed statistic needs an imputer")
            object.__setattr__(self, "imputer", as_imputer_kind(self.imputer))
        elif self.imputer is not None:
            raise ParameterError("imputer only applies to the imputed statistic")
        if self.B < 1:
            raise ParameterError("B must be at least 1")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")

    @property
    def label(self):
        if self.statistic == "imputed":
            return self.imputer.label
        stat = "cc" if self.statistic == "complete_case" else "w"
        alg = "alg1" if self.algorithm == "split_preserving" else "alg2"
        return f"{stat}_{alg}"


def procedure_from_label(label, B=1000, alpha=0.05, k=6):
    """Build a procedure from ``cc_alg1``, ``w_alg2``, ``mean``, ``median``, ``knn``..."""
    table = {
        "cc_alg1": ("complete_case", "split_preserving"),
        "cc_alg2": ("complete_case", "pooled"),
        "w_alg1": ("weighted", "split_preserving"),
        "w_alg2": ("weighted", "pooled"),
    }
    if label in table:
        return Procedure(*table[label], B=B, alpha=alpha)
    if label in ("mean", "median"):
        return Procedure("imputed", "impute_bootstrap", ImputerKind(label), B=B, alpha=alpha)
    if label == "knn" or (label.endswith("nn") and label[:-2].isdigit()):
        k = k if label == "knn" else int(label[:-2])
        return Procedure("imputed", "impute_bootstrap", ImputerKind("knn", k), B=B, alpha=alpha)
    raise ParameterError(f"unknown procedure {label!r}")


STUDY_LABELS = ("cc_alg1", "cc_alg2", "w_alg1", "w_alg2", "mean", "median", "6nn")


def study_procedures(B=1000, alpha=0.05):
    """The seven implemented procedures of the comparison study, in legend order."""
    return [procedure_from_label(lbl, B=B, alpha=alpha) for lbl in STUDY_LABELS]


@dataclass(frozen=True)
class BootstrapOutcome:
    observed: StatisticValue
    replicates: np.ndarray
    p_value: float
    reject: bool
    alpha: float
    critical_value: float

    def to_dict(self):
        return {
            "statistic": self.observed.to_dict(),
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "critical_value": self.critical_value,
            "B": int(self.replicates.size),
        }


def critical_value(replicates, alpha):
    """Empirical (1 - alpha)-quantile: order statistic ceil((1 - alpha) B)."""
    replicates = np.sort(np.asarray(replicates, dtype=float))
    b = replicates.size
    # round() guards against (1 - alpha) * B landing just above an integer
    k = math.ceil(round((1.0 - alpha) * b, 9))
    k = min(max(k, 1), b)
    return float(replicates[k - 1])


def p_value(observed, replicates):
    replicates = np.asarray(replicates, dtype=float)
    return float(np.count_nonzero(replicates >= observed) / replicates.size)


# --- partitions --------------------------------------------------------------


def split_preserving_indices(complete_flags, n, rng):
    """Pooled-row indices of x* and y* keeping each side's complete-case count."""
    complete_flags = np.asarray(complete_flags, dtype=bool)
    n_hat = int(complete_flags[:n].sum())
    com = np.flatnonzero(complete_flags)
    inc = np.flatnonzero(~complete_flags)
    com = com[rng.permutation(com.size)]
    inc = inc[rng.permutation(inc.size)]
    ix = np.concatenate([com[:n_hat], inc[: n - n_hat]])
    iy = np.concatenate([com[n_hat:], inc[n - n_hat:]])
    return ix, iy


def pooled_indices(total, n, rng):
    perm = rng.permutation(total)
    return perm[:n], perm[n:]


def resample_split_preserving(x, y, rng):
    """Random split that keeps n̂ complete cases in x* and m̂ in y*."""
    x, y = check_pair(x, y)
    z = concatenate(x, y)
    ix, iy = split_preserving_indices(z.complete_flags, x.n_rows, rng)
    return z.take(ix), z.take(iy)


def resample_pooled(x, y, rng):
    """Uniform random split of the pooled cases into sizes n and m."""
    x, y = check_pair(x, y)
    if x.n_rows + y.n_rows < 2:
        raise ParameterError("need at least two cases in total")
    z = concatenate(x, y)
    ix, iy = pooled_indices(z.n_rows, x.n_rows, rng)
    return z.take(ix), z.take(iy)


# --- statistics on index sets of a pooled distance matrix --------------------


def _blocks_raw(D, ix, iy):
    return energy_from_blocks(
        D[np.ix_(ix, iy)], D[np.ix_(ix, ix)], D[np.ix_(iy, iy)]
    )


def _cc_from_pooled(D, flags, ix, iy):
    ixc = ix[flags[ix]]
    iyc = iy[flags[iy]]
    if ixc.size == 0 or iyc.size == 0:
        raise NoCompleteCasesError(
            f"no complete cases (x has {ixc.size}, y has {iyc.size})"
        )
    raw = _blocks_raw(D, ixc, iyc)
    return raw, raw * scale_factor(ixc.size, iyc.size)


def _w_from_pooled(D, ix, iy):
    raw = _blocks_raw(D, ix, iy)
    return raw, raw * scale_factor(ix.size, iy.size)


def _imputed(xs, ys, imputer):
    xi = impute(xs, imputer)
    yi = impute(ys, imputer)
    return energy_statistic(xi, yi, variant="imputed")


def _statistic(x, y, proc):
    if proc.statistic == "complete_case":
        return cc_statistic(x, y)
    if proc.statistic == "weighted":
        return weighted_statistic(x, y)
    return _imputed(x, y, proc.imputer)


def bootstrap_test(x, y, proc: Procedure, rng) -> BootstrapOutcome:
    """Observed statistic, B bootstrap replicates and the level-alpha decision."""
    x, y = check_pair(x, y)
    rng = np.random.default_rng(rng)
    observed = _statistic(x, y, proc)
    z = concatenate(x, y)
    n = x.n_rows
    reps = np.empty(proc.B)
    if proc.statistic == "imputed":
        for b in range(proc.B):
            ix, iy = pooled_indices(z.n_rows, n, rng)
            reps[b] = _imputed(z.take(ix), z.take(iy), proc.imputer).raw
    else:
        D = pairwise_matrix(z, z, DistanceKind.WEIGHTED)
        flags = z.complete_flags
        for b in range(proc.B):
            if proc.algorithm == "split_preserving":
                ix, iy = split_preserving_indices(flags, n, rng)
            else:
                ix, iy = pooled_indices(z.n_rows, n, rng)
            if proc.statistic == "complete_case":
                reps[b] = _cc_from_pooled(D, flags, ix, iy)[0]
            else:
                reps[b] = _w_from_pooled(D, ix, iy)[0]
    crit = critical_value(reps, proc.alpha)
    return BootstrapOutcome(
        observed=observed,
        replicates=reps,
        p_value=p_value(observed.raw, reps),
        reject=bool(observed.raw > crit),
        alpha=proc.alpha,
        critical_value=crit,
    )


# --- warp-speed Monte Carlo ----------------------------------------------------


def replicate_pair(x: IncompleteSample, y: IncompleteSample, procedures, rng):
    """Scaled observed statistic and one scaled bootstrap replicate per procedure.

    All procedures share the data; the split-preserving partition is shared
    by the complete-case and weighted procedures, and the pooled partition by
    everything else. Both partitions are always drawn, in a fixed order, so a
    procedure's numbers do not depend on which other procedures are present.
    """
    n = x.n_rows
    z = concatenate(x, y)
    flags = z.complete_flags
    ix0 = np.arange(n)
    iy0 = np.arange(n, z.n_rows)
    ix1, iy1 = split_preserving_indices(flags, n, rng)
    ix2, iy2 = pooled_indices(z.n_rows, n, rng)
    out = np.empty((len(procedures), 2))
    D = None
    if any(p.statistic != "imputed" for p in procedures):
        D = pairwise_matrix(z, z, DistanceKind.WEIGHTED)
    imputed_cache = {}
    for j, proc in enumerate(procedures):
        if proc.algorithm == "split_preserving":
            ixs, iys = ix1, iy1
        else:
            ixs, iys = ix2, iy2
        if proc.statistic == "complete_case":
            out[j, 0] = _cc_from_pooled(D, flags, ix0, iy0)[1]
            out[j, 1] = _cc_from_pooled(D, flags, ixs, iys)[1]
        elif proc.statistic == "weighted":
            out[j, 0] = _w_from_pooled(D, ix0, iy0)[1]
            out[j, 1] = _w_from_pooled(D, ixs, iys)[1]
        else:
            key = proc.imputer
            if key not in imputed_cache:
                obs = _imputed(x, y, key).scaled
                star = _imputed(z.take(ixs), z.take(iys), key).scaled
                imputed_cache[key] = (obs, star)
            out[j] = imputed_cache[key]
    return out


@dataclass
class WarpSpeedResult:
    labels: list
    observed: np.ndarray
    replicates: np.ndarray
    critical_values: np.ndarray
    rejection_rates: np.ndarray
    alpha: float
    missing_rates_x: np.ndarray = field(default=None)
    missing_rates_y: np.ndarray = field(default=None)

    def rate(self, label):
        return float(self.rejection_rates[self.labels.index(label)])

    def as_dict(self):
        return dict(zip(self.labels, self.rejection_rates.tolist()))


def replicate_rng(seed, index):
    """Child generator for replicate ``index``; independent of scheduling."""
    key = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return np.random.default_rng(np.random.SeedSequence(entropy=key[0], spawn_key=key[1:] + (index,)))


def _run_chunk(generate, procedures, seed, start, stop):
    obs = np.empty((stop - start, len(procedures)))
    star = np.empty_like(obs)
    miss_x = miss_y = None
    for r, b in enumerate(range(start, stop)):
        rng = replicate_rng(seed, b)
        try:
            x, y = generate(rng)
            if miss_x is None:
                miss_x = np.empty((stop - start, x.d))
                miss_y = np.empty((stop - start, y.d))
            miss_x[r] = 1.0 - x.response.mean(axis=0)
            miss_y[r] = 1.0 - y.response.mean(axis=0)
            res = replicate_pair(x, y, procedures, rng)
        except EnergyMissingError as exc:
            raise ReplicateError(
                f"replicate {b} failed: {type(exc).__name__}: {exc}", replicate=b, seed=seed
            ) from exc
        obs[r] = res[:, 0]
        star[r] = res[:, 1]
    return obs, star, miss_x, miss_y


def default_jobs():
    """Worker count from ENERGY_TEST_THREADS, else 1."""
    try:
        return max(1, int(os.environ.get("ENERGY_TEST_THREADS", "1")))
    except ValueError:
        return 1


def warp_speed_study(
    generate: Callable,
    procedures: Sequence[Procedure],
    N,
    alpha=0.05,
    seed=0,
    jobs=None,
) -> WarpSpeedResult:
    """Rejection rates of every procedure by the warp-speed bootstrap.

    ``generate(rng)`` returns one ``(x, y)`` pair of incomplete samples. For
    each of the ``N`` replicates the observed statistic and exactly one
    bootstrap statistic are computed (both scaled by their sample sizes, so
    complete-case statistics with varying n̂, m̂ share one reference scale).
    The critical value is the (1 - alpha)-quantile of the N bootstrap
    statistics and the rejection rate is the share of observed statistics
    above it. Replicate ``b`` uses a generator derived from ``(seed, b)``, so
    the result does not depend on ``jobs``.
    """
    if N < 100:
        raise ParameterError("warp-speed studies need N >= 100 replicates")
    procedures = list(procedures)
    if not procedures:
        raise ParameterError("no procedures given")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1:
        obs, star, mx, my = _run_chunk(generate, procedures, seed, 0, N)
    else:
        bounds = np.linspace(0, N, min(jobs, N) + 1).astype(int)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_chunk, generate, procedures, seed, lo, hi)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            parts = [f.result() for f in futures]
        obs, star, mx, my = (np.concatenate(p) for p in zip(*parts))
    crit = np.array([critical_value(star[:, j], alpha) for j in range(len(procedures))])
    rates = (obs > crit[None, :]).mean(axis=0)
    return WarpSpeedResult(
        labels=[p.label for p in procedures],
        observed=obs,
        replicates=star,
        critical_values=crit,
        rejection_rates=rates,
        alpha=alpha,
        missing_rates_x=mx.mean(axis=0),
        missing_rates_y=my.mean(axis=0),
    )
