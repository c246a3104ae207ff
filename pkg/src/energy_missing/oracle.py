"""Numerical cross-checks for the characteristic-function view of the statistic.

* :func:`integral_oracle_1d` integrates the weighted squared distance between
  two empirical characteristic functions; for d = 1 it must reproduce the
  classic energy statistic.
* :func:`cov_kernel` is the covariance of the limiting Gaussian process of
  the centred process ``cos(tX) + sin(tX)``, and
  :func:`empirical_process_check` compares it with a simulation.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import roots_legendre, sici

from .data import check_sample
from .distributions import Dgp
from .exceptions import IncompleteInputError, OracleError, ParameterError, ShapeError


class CharacteristicFunction:
    """A characteristic function ``phi(t)`` on R^d.

    ``evaluator`` maps an array of shape ``(k, d)`` to ``k`` complex values.
    """

    def __init__(self, evaluator: Callable, d: int, label=""):
        self.evaluator = evaluator
        self.d = d
        self.label = label

    def _points(self, t):
        t = np.asarray(t, dtype=float)
        if self.d == 1 and t.ndim <= 1:
            t = t.reshape(-1, 1)
        t = np.atleast_2d(t)
        if t.shape[1] != self.d:
            raise ShapeError(f"argument of length {t.shape[1]} for a {self.d}-d law")
        return t

    def __call__(self, t):
        scalar = np.ndim(t) == 0 or (np.ndim(t) == 1 and self.d > 1)
        val = np.asarray(self.evaluator(self._points(t)), dtype=complex)
        return complex(val[0]) if scalar else val

    @classmethod
    def normal(cls, mean, cov):
        """exp(i t'mu - t' Sigma t / 2)."""
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))

        def phi(t):
            quad = np.einsum("ki,ij,kj->k", t, cov, t)
            return np.exp(1j * (t @ mean) - 0.5 * quad)

        return cls(phi, mean.size, label="normal")

    @classmethod
    def from_dgp(cls, dgp: Dgp):
        if dgp.kind != "multivariate_normal":
            raise ParameterError("closed-form characteristic function only for normal laws")
        return cls.normal(dgp.mean, dgp.cov)


def _complete_matrix(sample, name):
    sample = check_sample(sample, name)
    if not sample.is_complete:
        raise IncompleteInputError(f"{name} must be fully observed")
    return sample.filled


def ecf(sample, t):
    """Empirical characteristic function (1/n) sum exp(i t'X_j).

    ``t`` is one point (length d) or a ``(k, d)`` array of points.
    """
    X = _complete_matrix(sample, "sample")
    t = np.asarray(t, dtype=float)
    d = X.shape[1]
    single = t.ndim == 0 if d == 1 else t.ndim == 1
    pts = t.reshape(-1, 1) if d == 1 and t.ndim <= 1 else np.atleast_2d(t)
    if pts.shape[1] != d:
        raise ShapeError(f"t has length {pts.shape[1]}, sample has {d} columns")
    val = np.exp(1j * (pts @ X.T)).mean(axis=1)
    return complex(val[0]) if single else val


def _ecf_gap_sq(x, y, t):
    """|phi_x(t) - phi_y(t)|^2 for 1-d samples and a vector of t."""
    tx = np.outer(t, x)
    ty = np.outer(t, y)
    re = np.cos(tx).mean(axis=1) - np.cos(ty).mean(axis=1)
    im = np.sin(tx).mean(axis=1) - np.sin(ty).mean(axis=1)
    return re * re + im * im


def _cos_tail(a, T):
    """Integral of cos(a t)/t^2 over [T, inf)."""
    a = np.abs(a)
    si, _ = sici(a * T)
    return np.cos(a * T) / T - a * (np.pi / 2 - si)


def _tail(x, y, T):
    # |phi_x - phi_y|^2 is a finite cosine sum over pairwise differences
    dxx = np.subtract.outer(x, x).ravel()
    dyy = np.subtract.outer(y, y).ravel()
    dxy = np.subtract.outer(x, y).ravel()
    n, m = x.size, y.size
    return (
        _cos_tail(dxx, T).sum() / (n * n)
        + _cos_tail(dyy, T).sum() / (m * m)
        - 2.0 * _cos_tail(dxy, T).sum() / (n * m)
    ) / np.pi


def _head(x, y, T, panels, order):
    nodes, weights = roots_legendre(order)
    edges = np.linspace(0.0, T, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    total = 0.0
    for chunk in range(0, t.size, 4096):
        tc = t[chunk:chunk + 4096]
        total += np.dot(w[chunk:chunk + 4096], _ecf_gap_sq(x, y, tc) / (np.pi * tc * tc))
    return total


def integral_oracle_1d(x, y, tol=1e-10, order=20, max_refinements=12):
    """Integral of |phi_n(t) - phi_m(t)|^2 / (pi t^2) over the real line.

    The integrand is even, so twice the integral over (0, inf) is returned.
    The range [0, T] is integrated by composite Gauss-Legendre quadrature and
    the remainder [T, inf) term by term through the sine integral. The panel
    count doubles until two successive values agree within ``tol`` (relative
    to ``max(1, |value|)``); otherwise :class:`OracleError` is raised.
    """
    x = _complete_matrix(x, "x")
    y = _complete_matrix(y, "y")
    if x.shape[1] != 1 or y.shape[1] != 1:
        raise ShapeError("integral_oracle_1d needs one-dimensional samples")
    x = x[:, 0]
    y = y[:, 0]
    spread = max(np.ptp(np.concatenate([x, y])), 1e-12)
    T = 20.0 / min(spread, 1.0) if spread < 1.0 else 20.0
    panels = max(8, int(np.ceil(T * spread / 2.0)))
    tail = _tail(x, y, T)
    prev = None
    for _ in range(max_refinements):
        value = 2.0 * (_head(x, y, T, panels, order) + tail)
        if prev is not None and abs(value - prev) <= tol * max(1.0, abs(value)):
            return float(value)
        prev = value
        panels *= 2
    raise OracleError(
        f"quadrature did not settle: last two values {prev!r}, {value!r} "
        f"with {panels // 2} panels on [0, {T}]"
    )


def cov_kernel(phi: CharacteristicFunction, s, t):
    """Covariance at (s, t) of the limit of the centred cos + sin process.

    Re phi(s - t) + Im phi(s + t) - (Re phi(t) + Im phi(t)) (Re phi(s) + Im phi(s)).
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if s.shape != t.shape or s.size != phi.d:
        raise ShapeError(f"s {s.shape} and t {t.shape} must both have length {phi.d}")
    ps, pt, pd, pp = phi(np.stack([s, t, s - t, s + t]))
    return float(
        pd.real
        + pp.imag
        - pt.real * ps.real
        - pt.imag * ps.real
        - pt.real * ps.imag
        - pt.imag * ps.imag
    )


def empirical_process_check(dgp: Dgp, q, t_grid, n, replicates, rng, phi=None):
    """Max |empirical covariance - cov_kernel| over a grid, by simulation.

    Each replicate draws ``n`` rows from ``dgp`` and complete-case flags S
    with P(S = 1) = q, and evaluates
    Z(t) = n^(-1/2) sum_j [cos(t'X_j) + sin(t'X_j) - Re phi(t) - Im phi(t)] S_j / sqrt(q)
    at every grid point. The returned deviation compares the sample
    covariance of Z over replicates with ``cov_kernel`` on the grid.
    """
    if replicates < 100:
        raise ParameterError("empirical_process_check needs at least 100 replicates")
    if not 0 < q <= 1:
        raise ParameterError("q must lie in (0, 1]")
    if n < 1:
        raise ParameterError("n must be positive")
    phi = CharacteristicFunction.from_dgp(dgp) if phi is None else phi
    grid = np.asarray(t_grid, dtype=float)
    grid = grid.reshape(-1, 1) if dgp.d == 1 and grid.ndim <= 1 else np.atleast_2d(grid)
    if grid.shape[1] != dgp.d:
        raise ShapeError(f"grid points of length {grid.shape[1]} for a {dgp.d}-d law")
    rng = np.random.default_rng(rng)
    ph = phi(grid)
    centre = ph.real + ph.imag
    Z = np.empty((replicates, grid.shape[0]))
    for r in range(replicates):
        X = dgp.sample(n, rng)
        S = rng.random(n) < q
        arg = X @ grid.T
        g = np.cos(arg) + np.sin(arg) - centre[None, :]
        Z[r] = (g * S[:, None]).sum(axis=0) / np.sqrt(n * q)
    emp = np.atleast_2d(np.cov(Z, rowvar=False))
    k = grid.shape[0]
    theory = np.array(
        [[cov_kernel(phi, grid[i], grid[j]) for j in range(k)] for i in range(k)]
    )
    return float(np.abs(emp - theory).max())
