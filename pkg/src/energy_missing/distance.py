"""Euclidean, truncated and response-weighted distances.

All three kinds share one kernel that accumulates squared component
differences left to right in component order. With every indicator equal to
one the truncated and weighted distances therefore reproduce the Euclidean
distance bit for bit, which the complete-data identities rely on.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .data import IncompleteSample
from .exceptions import IncompleteInputError, ShapeError


class DistanceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    TRUNCATED = "truncated"
    WEIGHTED = "weighted"


def _accumulate(a, ra, b, rb):
    """Squared truncated distances and overlap counts for all row pairs.

    ``ra``/``rb`` may be None for fully observed inputs.
    """
    na, d = a.shape
    nb = b.shape[0]
    acc = np.zeros((na, nb))
    overlap = None if ra is None else np.zeros((na, nb), dtype=np.int64)
    for k in range(d):
        diff = a[:, k, None] - b[None, :, k]
        sq = diff * diff
        if ra is None:
            acc += sq
        else:
            both = ra[:, k, None] & rb[None, :, k]
            acc += np.where(both, sq, 0.0)
            overlap += both
    return acc, overlap


def _distances(a, ra, b, rb, kind):
    acc, overlap = _accumulate(a, ra, b, rb)
    dist = np.sqrt(acc)
    if kind is DistanceKind.WEIGHTED and overlap is not None:
        dist *= overlap / a.shape[1]
    return dist


def _as_vectors(*vs):
    arrs = [np.atleast_1d(np.asarray(v)) for v in vs]
    shapes = {a.shape for a in arrs}
    if len(shapes) != 1 or arrs[0].ndim != 1:
        raise ShapeError(f"vectors must be 1-d with equal lengths, got {sorted(shapes)}")
    return arrs


def euclidean(u, v) -> float:
    u, v = _as_vectors(u, v)
    u = u.astype(float)[None, :]
    v = v.astype(float)[None, :]
    return float(_distances(u, None, v, None, DistanceKind.EUCLIDEAN)[0, 0])


def _masked_pair(x, rx, y, ry, kind):
    x, rx, y, ry = _as_vectors(x, rx, y, ry)
    rx = rx.astype(bool)
    ry = ry.astype(bool)
    x = np.where(rx, x.astype(float), 0.0)[None, :]
    y = np.where(ry, y.astype(float), 0.0)[None, :]
    return float(_distances(x, rx[None, :], y, ry[None, :], kind)[0, 0])


def truncated_distance(x, rx, y, ry) -> float:
    """Euclidean distance over the jointly observed components (0 if none)."""
    return _masked_pair(x, rx, y, ry, DistanceKind.TRUNCATED)


def weighted_distance(x, rx, y, ry) -> float:
    """Truncated distance times the fraction of jointly observed components."""
    return _masked_pair(x, rx, y, ry, DistanceKind.WEIGHTED)


def pairwise_matrix(a: IncompleteSample, b: IncompleteSample, kind="weighted"):
    """Matrix of distances between every row of ``a`` and every row of ``b``."""
    kind = DistanceKind(kind)
    if a.d != b.d:
        raise ShapeError(f"dimension mismatch: {a.d} vs {b.d}")
    if kind is DistanceKind.EUCLIDEAN:
        if not (a.is_complete and b.is_complete):
            raise IncompleteInputError("euclidean distances need fully observed rows")
        return _distances(a.filled, None, b.filled, None, kind)
    return _distances(a.filled, a.response, b.filled, b.response, kind)


def paired_distances(a: IncompleteSample, b: IncompleteSample, kind="weighted"):
    """Distances between row ``i`` of ``a`` and row ``i`` of ``b`` for every ``i``."""
    kind = DistanceKind(kind)
    if a.values.shape != b.values.shape:
        raise ShapeError(f"shape mismatch: {a.values.shape} vs {b.values.shape}")
    acc = np.zeros(a.n_rows)
    overlap = np.zeros(a.n_rows, dtype=np.int64)
    for k in range(a.d):
        diff = a.filled[:, k] - b.filled[:, k]
        both = a.response[:, k] & b.response[:, k]
        if kind is DistanceKind.EUCLIDEAN and not both.all():
            raise IncompleteInputError("euclidean distances need fully observed rows")
        acc += np.where(both, diff * diff, 0.0)
        overlap += both
    dist = np.sqrt(acc)
    if kind is DistanceKind.WEIGHTED:
        dist *= overlap / a.d
    return dist
