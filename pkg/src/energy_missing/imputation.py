"""Mean, median and k-nearest-neighbour median imputers.

The imputers follow the scikit-learn transformer protocol. Inputs are arrays
with NaN at missing cells or :class:`~energy_missing.data.IncompleteSample`
objects; outputs are complete float arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data import IncompleteSample, check_sample
from .distance import _accumulate
from .exceptions import ParameterError, ShapeError, UnimputableColumnError


def _observed_counts(sample):
    counts = sample.response.sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise UnimputableColumnError(
            f"column(s) {empty.tolist()} have no observed value"
        )
    return counts


def _column_medians(sample):
    _observed_counts(sample)
    return np.array(
        [np.median(sample.values[sample.response[:, k], k]) for k in range(sample.d)]
    )


def _fill(sample, fill_values):
    return np.where(sample.response, sample.filled, fill_values[None, :])


class _ColumnImputer(TransformerMixin, BaseEstimator):
    def _check_transform_input(self, X):
        check_is_fitted(self, "statistics_")
        sample = check_sample(X)
        if sample.d != self.statistics_.size:
            raise ShapeError(
                f"X has {sample.d} columns, imputer was fitted on {self.statistics_.size}"
            )
        return sample

    def transform(self, X):
        return _fill(self._check_transform_input(X), self.statistics_)


class MeanImputer(_ColumnImputer):
    """Replace missing cells by the observed column mean."""

    def fit(self, X, y=None):
        sample = check_sample(X)
        counts = _observed_counts(sample)
        self.statistics_ = sample.filled.sum(axis=0) / counts
        return self


class MedianImputer(_ColumnImputer):
    """Replace missing cells by the observed column median."""

    def fit(self, X, y=None):
        self.statistics_ = _column_medians(check_sample(X))
        return self


def normalized_truncated_distances(query: IncompleteSample, pool: IncompleteSample):
    """Truncated distance / sqrt(overlap) for all pairs; inf where nothing overlaps."""
    acc, overlap = _accumulate(query.filled, query.response, pool.filled, pool.response)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.sqrt(acc / overlap)
    dist[overlap == 0] = np.inf
    return dist


def _neighbors_from_row(dist_row, pool, target_column, k, exclude=None):
    candidates = pool.response[:, target_column] & np.isfinite(dist_row)
    if exclude is not None:
        candidates[exclude] = False
    idx = np.flatnonzero(candidates)
    order = np.argsort(dist_row[idx], kind="stable")
    return idx[order[:k]]


def knn_neighbors(sample, row, target_column, k):
    """Indices of the ``k`` nearest rows that observe ``target_column``.

    Candidates share at least one observed component with ``row``; distances
    are truncated Euclidean distances divided by sqrt(overlap); ties go to the
    lower index. Fewer than ``k`` candidates are all returned.
    """
    sample = check_sample(sample)
    if k < 1:
        raise ParameterError("k must be at least 1")
    dist = normalized_truncated_distances(sample.take([row]), sample)[0]
    return _neighbors_from_row(dist, sample, target_column, k, exclude=row).tolist()


class KNNMedianImputer(TransformerMixin, BaseEstimator):
    """Fill cell (i, k) with the median of column k over the nearest donors.

    Donors are the rows of the fitted data; see :func:`knn_neighbors` for the
    neighbour rule. Rows without any eligible donor get the column median.
    """

    def __init__(self, n_neighbors=6):
        self.n_neighbors = n_neighbors

    def fit(self, X, y=None):
        if self.n_neighbors < 1:
            raise ParameterError("n_neighbors must be at least 1")
        self.pool_ = check_sample(X)
        self.medians_ = _column_medians(self.pool_)
        return self

    def transform(self, X):
        check_is_fitted(self, "pool_")
        sample = check_sample(X)
        pool = self.pool_
        if sample.d != pool.d:
            raise ShapeError(f"X has {sample.d} columns, imputer was fitted on {pool.d}")
        out = sample.filled.copy()
        rows = np.flatnonzero(~sample.complete_flags)
        if rows.size == 0:
            return out
        dist = normalized_truncated_distances(sample.take(rows), pool)
        order = np.argsort(dist, axis=1, kind="stable")
        for q, i in enumerate(rows):
            ranked = order[q][np.isfinite(dist[q, order[q]])]
            for col in np.flatnonzero(~sample.response[i]):
                donors = ranked[pool.response[ranked, col]][: self.n_neighbors]
                if donors.size:
                    out[i, col] = _small_median(pool.values[donors, col])
                else:
                    out[i, col] = self.medians_[col]
        return out


def _small_median(values):
    s = sorted(values.tolist())
    h = len(s) // 2
    return s[h] if len(s) % 2 else 0.5 * (s[h - 1] + s[h])


@dataclass(frozen=True)
class ImputerKind:
    tag: str
    k: int = 6

    def __post_init__(self):
        if self.tag not in ("mean", "median", "knn"):
            raise ParameterError(f"unknown imputer {self.tag!r}")
        if self.k < 1:
            raise ParameterError("k must be at least 1")

    @property
    def label(self):
        return f"{self.k}nn" if self.tag == "knn" else self.tag

    def make(self):
        if self.tag == "mean":
            return MeanImputer()
        if self.tag == "median":
            return MedianImputer()
        return KNNMedianImputer(n_neighbors=self.k)


def as_imputer_kind(kind) -> ImputerKind:
    if isinstance(kind, ImputerKind):
        return kind
    return ImputerKind(str(kind))


def impute(sample, kind="mean") -> np.ndarray:
    """Complete ``sample`` from its own column statistics or donor rows."""
    sample = check_sample(sample)
    if sample.is_complete:
        return sample.filled.copy()
    return as_imputer_kind(kind).make().fit_transform(sample)
