"""Covariance kernels and Gaussian conditioning over planar sites.

Distances are Euclidean in km. The exponential kernel
``sigma2 * exp(-phi * d)`` is the only kernel shipped; further correlation
families register in ``CORRELATIONS``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.spatial.distance import cdist, pdist, squareform

from .circular import DUPLICATE_TOL_KM
from .errors import DomainError, SingularCovarianceError

__all__ = [
    "CORRELATIONS",
    "ConditionalGaussian",
    "CovMatrix",
    "Kernel",
    "build_cov",
    "distance_matrix",
    "predictive_conditional",
    "site_conditional",
]

log = logging.getLogger(__name__)


def _exponential(d, phi):
    return np.exp(-phi * d)


CORRELATIONS = {"exponential": _exponential}

# relative diagonal jitter tried once when Cholesky fails
JITTER = 1e-10


@dataclass(frozen=True)
class Kernel:
    """Stationary isotropic covariance ``sigma2 * rho(d; phi)``.

    ``phi`` is a decay rate in 1/km; for the exponential family the
    practical range (correlation ``exp(-3)``) is ``3 / phi``.
    """

    sigma2: float
    phi: float
    kind: str = "exponential"

    def __post_init__(self):
        if self.kind not in CORRELATIONS:
            raise DomainError(f"unknown kernel kind {self.kind!r}")
        if not (self.sigma2 > 0 and self.phi > 0):
            raise DomainError("kernel sigma2 and phi must be positive")

    def correlation(self, d: ArrayLike) -> NDArray:
        return CORRELATIONS[self.kind](np.asarray(d, dtype=float), self.phi)

    def __call__(self, d: ArrayLike) -> NDArray:
        return self.sigma2 * self.correlation(d)

    @property
    def practical_range(self) -> float:
        return 3.0 / self.phi


def distance_matrix(sites: ArrayLike) -> NDArray:
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(sites) == 1:
        return np.zeros((1, 1))
    return squareform(pdist(sites))


def _min_sep(dist: NDArray) -> float:
    n = dist.shape[0]
    if n < 2:
        return math.inf
    return float(dist[np.triu_indices(n, 1)].min())


def cholesky_lower(a: NDArray, scale: float, min_separation=None) -> NDArray:
    """Lower Cholesky factor, retrying once with a tiny diagonal jitter."""
    try:
        return linalg.cholesky(a, lower=True, check_finite=False)
    except linalg.LinAlgError:
        pass
    log.warning("Cholesky failed; retrying with diagonal jitter %.1e", JITTER * scale)
    try:
        return linalg.cholesky(
            a + JITTER * scale * np.eye(a.shape[0]), lower=True, check_finite=False
        )
    except linalg.LinAlgError as exc:
        raise SingularCovarianceError(
            f"covariance is not positive definite (min site separation "
            f"{min_separation} km)",
            min_separation=min_separation,
        ) from exc


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Covariance of a kernel over a fixed set of sites, with its factor."""

    sites: NDArray
    kernel: Kernel
    matrix: NDArray
    cholesky_factor: NDArray
    dist: NDArray = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def precision(self) -> NDArray:
        q = linalg.cho_solve((self.cholesky_factor, True), np.eye(self.n))
        return 0.5 * (q + q.T)

    def solve(self, b: ArrayLike) -> NDArray:
        return linalg.cho_solve((self.cholesky_factor, True), np.asarray(b, float))


def build_cov(sites: ArrayLike, kernel: Kernel) -> CovMatrix:
    """Covariance matrix ``sigma2 * R(phi)`` over ``sites`` (shape (n, 2)).

    Raises
    ------
    SingularCovarianceError
        For coincident sites, or if factorisation fails even after jitter.
    """
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    dist = distance_matrix(sites)
    sep = _min_sep(dist)
    if sep < DUPLICATE_TOL_KM:
        raise SingularCovarianceError(
            f"coincident sites (min separation {sep:.3g} km); no nugget in model",
            min_separation=sep,
        )
    mat = kernel(dist)
    mat = 0.5 * (mat + mat.T)
    chol = cholesky_lower(mat, kernel.sigma2, sep)
    return CovMatrix(sites, kernel, mat, chol, dist)


@dataclass(frozen=True)
class ConditionalGaussian:
    """Mean and variance of a Gaussian conditional (scalars or arrays)."""

    mean: float | NDArray
    variance: float | NDArray

    @property
    def sd(self):
        return np.sqrt(self.variance)


def site_conditional(i: int, y: ArrayLike, mu: float, cov: CovMatrix) -> ConditionalGaussian:
    """Law of ``Y_i`` given the other coordinates of ``Y ~ N(mu 1, cov)``.

    Uses the precision ``Q``: the mean is
    ``mu - sum_{j != i} Q_ij (y_j - mu) / Q_ii`` and the variance ``1 / Q_ii``.
    """
    y = np.asarray(y, dtype=float)
    n = cov.n
    if y.shape != (n,):
        raise DomainError(f"y must have length {n}")
    if n < 2:
        raise DomainError("site_conditional needs at least two sites")
    if not 0 <= i < n:
        raise IndexError(f"site index {i} out of range for {n} sites")
    q = cov.precision
    resid = y - mu
    qi = q[i]
    other = qi @ resid - qi[i] * resid[i]
    return ConditionalGaussian(mu - other / qi[i], 1.0 / qi[i])


def _coincident(s0: NDArray, sites: NDArray):
    d = cdist(s0, sites)
    hit = d < DUPLICATE_TOL_KM
    idx = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
    return d, idx


def predictive_conditional(
    s0: ArrayLike, y: ArrayLike, mu: float, cov: CovMatrix
) -> ConditionalGaussian:
    """Kriging law of ``Y(s0)`` given ``Y`` observed at ``cov.sites``.

    ``s0`` is one site ``(x, y)`` or an array of shape (T, 2). The mean is
    ``mu + c0' Sigma^-1 (y - mu)`` and the variance
    ``sigma2 - c0' Sigma^-1 c0`` with ``c0`` the cross-covariances. Targets
    coinciding with a data site return that value with variance 0.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (cov.n,):
        raise DomainError(f"y must have length {cov.n}")
    single = np.ndim(s0) == 1
    s0 = np.atleast_2d(np.asarray(s0, dtype=float))
    d, idx = _coincident(s0, cov.sites)
    c0 = cov.kernel(d).T  # (n, T)
    w = cov.solve(c0)
    mean = mu + w.T @ (y - mu)
    var = cov.kernel.sigma2 - np.einsum("ij,ij->j", c0, w)
    floor = -1e-10 * cov.kernel.sigma2
    if np.any(var < floor):
        log.warning("negative predictive variance %.3g clamped to 0", var.min())
    var = np.maximum(var, 0.0)
    exact = idx >= 0
    mean[exact] = y[idx[exact]]
    var[exact] = 0.0
    if single:
        return ConditionalGaussian(float(mean[0]), float(var[0]))
    return ConditionalGaussian(mean, var)
