"""Multivariate normal and Student t samplers plus the study presets.

Random numbers come from numpy's PCG64 bit generator; every stochastic
function takes an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import FactorizationError, ParameterError


def equicorrelated(d, rho=0.5):
    return np.full((d, d), rho) + (1.0 - rho) * np.eye(d)


PRESET_COVARIANCES = {
    "C1": 0.5 * np.eye(3),
    "C2": equicorrelated(3),
    "C3": 0.5 * np.eye(10),
    "C4": equicorrelated(10),
}
PRESET_MEANS = {
    "m1": np.full(3, 0.5),
    "m2": np.full(10, 0.5),
}


def cholesky(cov):
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise FactorizationError(f"covariance must be square, got {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12):
        raise FactorizationError("covariance is not symmetric")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise FactorizationError("covariance is not positive definite") from None


@dataclass(frozen=True)
class Dgp:
    """A data-generating process: multivariate normal or multivariate t."""

    kind: str
    mean: np.ndarray
    cov: np.ndarray
    df: Optional[float] = None
    label: str = ""
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("multivariate_normal", "multivariate_t"):
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ParameterError(
                f"mean of length {mean.size} does not match covariance {cov.shape}"
            )
        if self.kind == "multivariate_t" and not (self.df is not None and self.df > 0):
            raise ParameterError("multivariate t needs df > 0")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", cholesky(cov))

    @property
    def d(self):
        return self.mean.size

    def sample(self, n, rng):
        return sample(self, n, rng)


def sample(dgp: Dgp, n, rng) -> np.ndarray:
    """``n`` IID rows from ``dgp``."""
    if n < 1:
        raise ParameterError("n must be positive")
    z = rng.standard_normal((n, dgp.d))
    out = z @ dgp.chol.T
    if dgp.kind == "multivariate_t":
        w = rng.chisquare(dgp.df, size=n)
        out /= np.sqrt(w / dgp.df)[:, None]
    return out + dgp.mean


def normal(mean, cov, label=""):
    return Dgp("multivariate_normal", mean, cov, label=label)


def student_t(df, mean, scale, label=""):
    return Dgp("multivariate_t", mean, scale, df=df, label=label)


def _resolve_mean(token, d):
    if token == "0":
        return np.zeros(d)
    if token in PRESET_MEANS:
        return PRESET_MEANS[token]
    raise ParameterError(f"unknown mean preset {token!r}")


def _resolve_cov(token, d):
    if token == "I":
        return np.eye(d)
    if token in PRESET_COVARIANCES:
        return PRESET_COVARIANCES[token]
    raise ParameterError(f"unknown covariance preset {token!r}")


_ALIAS = re.compile(r"^\s*(N|t(\d+(?:\.\d+)?))\(\s*(\w+)\s*,\s*(\w+)\s*\)\s*$")


def from_alias(alias, d=None) -> Dgp:
    """Parse names such as ``"N(0,I)"``, ``"N(m1,C2)"`` or ``"t5(0,I)"``.

    ``d`` is only needed when neither the mean nor the covariance token fixes
    the dimension (e.g. ``"N(0,I)"``).
    """
    match = _ALIAS.match(alias)
    if match is None:
        raise ParameterError(f"cannot parse distribution alias {alias!r}")
    family, df, mean_tok, cov_tok = match.groups()
    for tok, table in ((mean_tok, PRESET_MEANS), (cov_tok, PRESET_COVARIANCES)):
        if tok in table:
            implied = table[tok].shape[0]
            if d is not None and d != implied:
                raise ParameterError(f"{alias!r} is {implied}-dimensional, not {d}")
            d = implied
    if d is None:
        raise ParameterError(f"dimension of {alias!r} is ambiguous; pass d")
    mean = _resolve_mean(mean_tok, d)
    cov = _resolve_cov(cov_tok, d)
    if family == "N":
        return normal(mean, cov, label=alias.replace(" ", ""))
    return student_t(float(df), mean, cov, label=alias.replace(" ", ""))
