"""Energy test statistics: classic, complete-case and weighted.

All statistics are V-statistics: the within-sample double sums include the
(zero) diagonal terms. Every variant reduces its three distance blocks with
:func:`energy_from_blocks`, so on fully observed data the complete-case and
weighted statistics coincide with the classic one exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .data import IncompleteSample, build_sample, check_pair, complete_subsample
from .distance import DistanceKind, paired_distances, pairwise_matrix, weighted_distance
from .exceptions import (
    EmptyInputError,
    IncompleteInputError,
    NoCompleteCasesError,
    ParameterError,
)

VARIANTS = ("classic", "complete_case", "weighted", "imputed")


@dataclass(frozen=True)
class StatisticValue:
    raw: float
    scaled: float
    n: int
    m: int
    variant: str
    n_hat: Optional[int] = None
    m_hat: Optional[int] = None

    def to_dict(self):
        return {
            "variant": self.variant,
            "raw": self.raw,
            "scaled": self.scaled,
            "n": self.n,
            "m": self.m,
            "n_hat": self.n_hat,
            "m_hat": self.m_hat,
        }


def scale_factor(n, m):
    return n * m / (n + m)


def energy_from_blocks(dxy, dxx, dyy):
    """Raw statistic from the cross and within-sample distance blocks."""
    n, m = dxy.shape
    return 2.0 / (n * m) * dxy.sum() - dxx.sum() / (n * n) - dyy.sum() / (m * m)


def _value(raw, n, m, variant, n_hat=None, m_hat=None):
    raw = float(raw)
    if variant == "complete_case":
        scaled = raw * scale_factor(n_hat, m_hat)
    else:
        scaled = raw * scale_factor(n, m)
    return StatisticValue(raw, scaled, n, m, variant, n_hat, m_hat)


def _euclidean_raw(x: IncompleteSample, y: IncompleteSample):
    return energy_from_blocks(
        pairwise_matrix(x, y, DistanceKind.EUCLIDEAN),
        pairwise_matrix(x, x, DistanceKind.EUCLIDEAN),
        pairwise_matrix(y, y, DistanceKind.EUCLIDEAN),
    )


def energy_statistic(x, y, variant="classic") -> StatisticValue:
    """Classic energy statistic of two fully observed samples."""
    x, y = check_pair(x, y)
    if x.n_rows == 0 or y.n_rows == 0:
        raise EmptyInputError("both samples need at least one row")
    if not (x.is_complete and y.is_complete):
        raise IncompleteInputError(
            "energy_statistic needs fully observed samples; use cc_statistic, "
            "weighted_statistic or impute first"
        )
    return _value(_euclidean_raw(x, y), x.n_rows, y.n_rows, variant)


def cc_statistic(x, y) -> StatisticValue:
    """Energy statistic restricted to the complete cases of both samples."""
    x, y = check_pair(x, y)
    n_hat, m_hat = x.complete_count, y.complete_count
    if n_hat == 0 or m_hat == 0:
        raise NoCompleteCasesError(
            f"no complete cases (x has {n_hat}, y has {m_hat})"
        )
    raw = _euclidean_raw(complete_subsample(x), complete_subsample(y))
    return _value(raw, x.n_rows, y.n_rows, "complete_case", n_hat, m_hat)


def weighted_statistic(x, y) -> StatisticValue:
    """Energy statistic built on the response-weighted distance, using every row."""
    x, y = check_pair(x, y)
    raw = energy_from_blocks(
        pairwise_matrix(x, y, DistanceKind.WEIGHTED),
        pairwise_matrix(x, x, DistanceKind.WEIGHTED),
        pairwise_matrix(y, y, DistanceKind.WEIGHTED),
    )
    return _value(raw, x.n_rows, y.n_rows, "weighted")


def h_w_kernel(p1, p2, q1, q2) -> float:
    """Four-point kernel whose double average over both samples equals T_W.

    Each argument is a ``(vector, response)`` pair; ``p1, p2`` come from the
    first sample and ``q1, q2`` from the second.
    """
    rho = weighted_distance
    return (
        rho(*p1, *q2)
        + rho(*p2, *q1)
        - rho(*p1, *p2)
        - rho(*q1, *q2)
    )


def null_mean_identity_check(
    sampler: Callable[[np.random.Generator, int], IncompleteSample],
    n,
    m,
    replicates,
    seed=None,
    statistic="weighted",
    eta_pairs=1_000_000,
):
    """Compare the Monte Carlo mean of the scaled statistic with E rho.

    Under the null the V-statistic satisfies E[nm/(n+m) T] = E rho(Z, Z')
    exactly, for any n and m, where Z, Z' are independent draws from the
    common law. ``sampler(rng, size)`` must return ``size`` IID rows
    (with their response pattern) from that law.

    Returns ``(mc_mean, eta_hat, se)``; ``se`` is the standard error of
    ``mc_mean - eta_hat``.
    """
    if replicates < 2:
        raise ParameterError("replicates must be at least 2")
    if statistic not in ("weighted", "classic"):
        raise ParameterError(f"unknown statistic {statistic!r}")
    stat = weighted_statistic if statistic == "weighted" else energy_statistic
    kind = DistanceKind.WEIGHTED if statistic == "weighted" else DistanceKind.EUCLIDEAN
    mc_seq, eta_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(mc_seq)
    draws = np.empty(replicates)
    for r in range(replicates):
        x = build_sample(sampler(rng, n))
        y = build_sample(sampler(rng, m))
        draws[r] = stat(x, y).scaled
    rng = np.random.default_rng(eta_seq)
    rho = paired_distances(
        build_sample(sampler(rng, eta_pairs)), build_sample(sampler(rng, eta_pairs)), kind
    )
    mc_mean = float(draws.mean())
    eta_hat = float(rho.mean())
    se = float(np.sqrt(draws.var(ddof=1) / replicates + rho.var(ddof=1) / eta_pairs))
    return mc_mean, eta_hat, se
