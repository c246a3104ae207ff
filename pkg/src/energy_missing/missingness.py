"""Generators that impose MCAR and MAR missingness on complete samples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit, logit
from scipy.stats import rankdata

from .data import IncompleteSample, build_sample
from .exceptions import (
    CalibrationError,
    IncompleteInputError,
    InfeasibleRateError,
    ParameterError,
    ShapeError,
)

MECHANISMS = ("mcar", "mar_1to9", "mar_rank", "mar_logistic")


def _complete_input(sample):
    sample = build_sample(sample)
    if not sample.is_complete:
        raise IncompleteInputError("missingness generators expect a complete sample")
    return sample


def _check_columns(d, controls, targets):
    controls = [int(c) for c in np.atleast_1d(controls)]
    targets = [int(t) for t in np.atleast_1d(targets)]
    for c in controls + targets:
        if not 0 <= c < d:
            raise ShapeError(f"column index {c} out of range for d={d}")
    if set(controls) & set(targets):
        raise ParameterError("control and target columns must be disjoint")
    if len(set(targets)) != len(targets):
        raise ParameterError("target columns must be distinct")
    return controls, targets


def _check_rate(p):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"missingness probability {p} outside [0, 1]")
    return float(p)


def apply_mcar(sample, p, rng) -> IncompleteSample:
    """Hide each cell (i, k) independently with probability ``p[k]``."""
    sample = _complete_input(sample)
    p = np.broadcast_to(np.asarray(p, dtype=float), (sample.d,))
    if ((p < 0) | (p > 1)).any():
        raise ParameterError(f"missingness probabilities {p} outside [0, 1]")
    hidden = rng.random(sample.values.shape) < p
    return sample.with_response(~hidden)


def apply_mar_1to9(sample, control, targets, p, rng) -> IncompleteSample:
    """Median split on ``control``; the upper half is 9 times likelier to be hidden.

    Rows at or below the median are hidden with probability p/5 in each target
    column, rows above it with 9p/5, so the expected rate is p. A degenerate
    split (constant control column) falls back to rate p for every row.
    """
    sample = _complete_input(sample)
    (control,), targets = _check_columns(sample.d, [control], targets)
    p = _check_rate(p)
    if 9 * p / 5 > 1:
        raise InfeasibleRateError(f"rate {p} needs an upper-group rate 9p/5 > 1")
    col = sample.values[:, control]
    upper = col > np.median(col)
    if upper.all() or not upper.any():
        rates = np.full(sample.n_rows, p)
    else:
        rates = np.where(upper, 9 * p / 5, p / 5)
    response = sample.response.copy()
    draws = rng.random((sample.n_rows, len(targets)))
    response[:, targets] &= ~(draws < rates[:, None])
    return sample.with_response(response)


def weighted_draw_without_replacement(weights, size, rng):
    """Indices of ``size`` items drawn one by one with probability ∝ weight.

    Uses exponential keys log(u)/w: the ``size`` largest keys have the law of
    successive weighted draws without replacement.
    """
    weights = np.asarray(weights, dtype=float)
    if size == 0:
        return np.zeros(0, dtype=np.intp)
    keys = np.log(rng.random(weights.size)) / weights
    return np.argsort(-keys, kind="stable")[:size]


def apply_mar_rank(sample, control, targets, p, rng) -> IncompleteSample:
    """Hide exactly round(p n) cells per target column, rank-weighted on ``control``.

    Selection weights are the (average) ranks of the control values.
    """
    sample = _complete_input(sample)
    (control,), targets = _check_columns(sample.d, [control], targets)
    p = _check_rate(p)
    n = sample.n_rows
    count = int(np.floor(p * n + 0.5))
    ranks = rankdata(sample.values[:, control], method="average")
    response = sample.response.copy()
    for t in targets:
        rows = weighted_draw_without_replacement(ranks, count, rng)
        response[rows, t] = False
    return sample.with_response(response)


def logistic_probabilities(covariates, intercept, slopes):
    covariates = np.asarray(covariates, dtype=float)
    return expit(intercept + covariates @ np.asarray(slopes, dtype=float))


def apply_mar_logistic(sample, controls, targets, intercept, slopes, rng) -> IncompleteSample:
    """Hide target cells with probability sigmoid(intercept + slopes . controls_i).

    ``controls`` may repeat a column: ``controls=[0, 0]`` with two slopes puts
    both slopes on column 0.
    """
    sample = _complete_input(sample)
    controls, targets = _check_columns(sample.d, controls, targets)
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    if slopes.size != len(controls):
        raise ParameterError(
            f"{slopes.size} slopes given for {len(controls)} control columns"
        )
    prob = logistic_probabilities(sample.values[:, controls], intercept, slopes)
    response = sample.response.copy()
    draws = rng.random((sample.n_rows, len(targets)))
    response[:, targets] &= ~(draws < prob[:, None])
    return sample.with_response(response)


def standard_normal_reference(controls):
    """Reference sampler: standard normal data, restricted to ``controls`` columns."""
    controls = [int(c) for c in controls]
    width = max(controls) + 1

    def draw(rng, size):
        return rng.standard_normal((size, width))[:, controls]

    return draw


def calibrate_logistic_intercept(
    target_rate,
    slopes,
    reference_sampler: Optional[Callable] = None,
    mc_size=200_000,
    tol=1e-4,
    rng=None,
    controls=None,
    max_iter=200,
):
    """Intercept whose average logistic missingness rate hits ``target_rate``.

    The rate is averaged over ``mc_size`` covariate rows from
    ``reference_sampler(rng, size)``; by default standard normal draws of the
    ``controls`` columns (one independent column per slope when ``controls``
    is None). The draws are fixed, which makes the rate monotone in the
    intercept, and bisection runs until both the rate error and the bracket
    width fall below ``tol``.
    """
    if not 0.001 < target_rate < 0.999:
        raise ParameterError(f"target rate {target_rate} outside (0.001, 0.999)")
    slopes = np.atleast_1d(np.asarray(slopes, dtype=float))
    if controls is None:
        controls = list(range(slopes.size))
    if len(controls) != slopes.size:
        raise ParameterError(f"{slopes.size} slopes given for {len(controls)} controls")
    if reference_sampler is None:
        reference_sampler = standard_normal_reference(controls)
    rng = np.random.default_rng(rng)
    lin = np.asarray(reference_sampler(rng, mc_size), dtype=float) @ slopes

    def rate(b):
        return float(expit(b + lin).mean())

    lo, hi = logit(target_rate) - 1.0, logit(target_rate) + 1.0
    for _ in range(64):
        if rate(lo) <= target_rate:
            break
        lo -= 2 * (hi - lo)
    for _ in range(64):
        if rate(hi) >= target_rate:
            break
        hi += 2 * (hi - lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        r = rate(mid)
        if abs(r - target_rate) <= tol and hi - lo <= tol:
            return mid
        if r < target_rate:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"bisection did not converge after {max_iter} iterations "
        f"(bracket [{lo:.6g}, {hi:.6g}], rate {rate(0.5 * (lo + hi)):.6g})"
    )


@dataclass(frozen=True)
class MissingnessSpec:
    """One missingness configuration, applicable to any complete sample."""

    mechanism: str
    p: object = 0.0
    control: Optional[int] = None
    controls: Sequence[int] = field(default_factory=tuple)
    targets: Sequence[int] = field(default_factory=tuple)
    intercept: float = 0.0
    slopes: Sequence[float] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ParameterError(f"unknown mechanism {self.mechanism!r}")
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if ((p < 0) | (p > 1)).any():
            raise ParameterError(f"missingness probabilities {self.p} outside [0, 1]")
        if self.mechanism in ("mar_1to9", "mar_rank"):
            if self.control is None or not self.targets:
                raise ParameterError(f"{self.mechanism} needs control and targets")
            if p.size != 1:
                raise ParameterError(f"{self.mechanism} takes a scalar p")
            if self.control in self.targets:
                raise ParameterError("control and target columns must be disjoint")
        if self.mechanism == "mar_logistic":
            if not self.controls or not self.targets:
                raise ParameterError("mar_logistic needs controls and targets")
            if len(self.slopes) != len(self.controls):
                raise ParameterError("mar_logistic needs one slope per control")
            if set(self.controls) & set(self.targets):
                raise ParameterError("control and target columns must be disjoint")

    @property
    def incomplete_columns(self):
        """Columns that may lose cells (None means all columns)."""
        if self.mechanism == "mcar":
            return None
        return list(self.targets)

    def apply(self, sample, rng) -> IncompleteSample:
        if self.mechanism == "mcar":
            return apply_mcar(sample, self.p, rng)
        if self.mechanism == "mar_1to9":
            return apply_mar_1to9(sample, self.control, self.targets, float(self.p), rng)
        if self.mechanism == "mar_rank":
            return apply_mar_rank(sample, self.control, self.targets, float(self.p), rng)
        return apply_mar_logistic(
            sample, self.controls, self.targets, self.intercept, self.slopes, rng
        )

    def to_dict(self):
        if self.mechanism == "mcar":
            p = np.atleast_1d(np.asarray(self.p, dtype=float))
            return {"mechanism": "mcar", "p": float(p[0]) if p.size == 1 else p.tolist()}
        if self.mechanism in ("mar_1to9", "mar_rank"):
            return {
                "mechanism": self.mechanism,
                "p": float(self.p),
                "control": int(self.control),
                "targets": [int(t) for t in self.targets],
            }
        return {
            "mechanism": "mar_logistic",
            "controls": [int(c) for c in self.controls],
            "targets": [int(t) for t in self.targets],
            "intercept": float(self.intercept),
            "slopes": [float(s) for s in self.slopes],
        }


NO_MISSINGNESS = MissingnessSpec("mcar", 0.0)
