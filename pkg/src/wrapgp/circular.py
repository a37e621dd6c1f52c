"""Circular arithmetic and descriptive statistics on [0, 2*pi).

Angles are radians throughout. Functions accept scalars or array-likes and
return the same shape; scalar inputs give Python floats back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import chi2

from .errors import DomainError, InsufficientDataError, UndefinedDirectionError

__all__ = [
    "TWO_PI",
    "CircularSample",
    "CircularSummary",
    "arctan_star",
    "circular_distance",
    "circular_mean",
    "concentration",
    "moments_estimate",
    "rayleigh_test",
    "wrap",
    "wrapped_correlation",
]

TWO_PI = 2.0 * math.pi

# sites closer than this (km) are treated as coincident
DUPLICATE_TOL_KM = 1e-9


def _out(x: NDArray) -> float | NDArray:
    return float(x) if np.ndim(x) == 0 else x


def wrap(y: ArrayLike) -> float | NDArray:
    """Reduce unwrapped values to angles in ``[0, 2*pi)``.

    Raises
    ------
    DomainError
        If any value is NaN or infinite.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("wrap() requires finite input")
    x = np.mod(y, TWO_PI)
    # np.mod can round up to exactly 2*pi for tiny negative inputs
    x = np.where(x >= TWO_PI, 0.0, x)
    return _out(x)


def arctan_star(s: ArrayLike, c: ArrayLike) -> float | NDArray:
    """Quadrant-correct direction of the vector ``(c, s)`` on ``[0, 2*pi)``.

    This is the five-case ``arctan*`` of Jammalamadaka & SenGupta; it agrees
    with ``atan2`` up to the shift into ``[0, 2*pi)``.

    Raises
    ------
    UndefinedDirectionError
        When ``s == c == 0`` for any element.
    """
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any((s == 0.0) & (c == 0.0)):
        raise UndefinedDirectionError("direction undefined for a zero resultant")
    return wrap(np.arctan2(s, c))


def circular_distance(a: ArrayLike, b: ArrayLike) -> float | NDArray:
    """``1 - cos(a - b)``, ranging over ``[0, 2]``."""
    d = 1.0 - np.cos(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return _out(np.clip(d, 0.0, 2.0))


def concentration(sigma2: ArrayLike) -> float | NDArray:
    """Wrapped-normal concentration ``exp(-sigma2 / 2)``."""
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 < 0) or not np.all(np.isfinite(sigma2)):
        raise DomainError("sigma2 must be finite and non-negative")
    return _out(np.exp(-0.5 * sigma2))


def wrapped_correlation(rho_lin: ArrayLike, sigma2: float) -> float | NDArray:
    """Circular correlation induced by wrapping a bivariate normal.

    For a linear correlation ``rho_lin`` between two normals with common
    variance ``sigma2`` the wrapped pair has circular correlation
    ``sinh(rho_lin * sigma2) / sinh(sigma2)``.
    """
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    rho = np.asarray(rho_lin, dtype=float)
    if np.any(np.abs(rho) > 1.0):
        raise DomainError("rho_lin must lie in [-1, 1]")
    if sigma2 > 700:
        # sinh overflows; use the exponential form of the ratio
        val = np.sign(rho) * np.exp(sigma2 * (np.abs(rho) - 1.0))
        val = val * (-np.expm1(-2 * sigma2 * np.abs(rho))) / (-np.expm1(-2 * sigma2))
    else:
        val = np.sinh(rho * sigma2) / math.sinh(sigma2)
    return _out(val)


@dataclass(frozen=True)
class CircularSample:
    """Angles observed at planar sites.

    Attributes
    ----------
    angles : ndarray, shape (n,)
        Radians, wrapped to ``[0, 2*pi)`` on construction.
    locations : ndarray, shape (n, 2)
        Site coordinates in km.
    """

    angles: NDArray[np.float64]
    locations: NDArray[np.float64]

    def __post_init__(self):
        angles = np.atleast_1d(np.asarray(self.angles, dtype=float))
        locs = np.asarray(self.locations, dtype=float)
        if angles.ndim != 1 or angles.size == 0:
            raise InsufficientDataError("a sample needs at least one angle")
        if locs.ndim != 2 or locs.shape != (angles.size, 2):
            raise DomainError(
                f"locations must have shape ({angles.size}, 2), got {locs.shape}"
            )
        if not np.all(np.isfinite(locs)):
            raise DomainError("locations must be finite")
        angles = np.asarray(wrap(angles), dtype=float).reshape(-1)
        angles.setflags(write=False)
        locs = locs.copy()
        locs.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "locations", locs)

    def __len__(self) -> int:
        return self.angles.size

    def min_separation(self) -> float:
        """Smallest pairwise site distance in km (``inf`` for one site)."""
        if len(self) < 2:
            return math.inf
        from scipy.spatial.distance import pdist

        return float(pdist(self.locations).min())

    def duplicate_pairs(self) -> list[tuple[int, int]]:
        """Index pairs of sites closer than ``DUPLICATE_TOL_KM``."""
        if len(self) < 2:
            return []
        from scipy.spatial.distance import squareform, pdist

        d = squareform(pdist(self.locations))
        i, j = np.nonzero(np.triu(d < DUPLICATE_TOL_KM, k=1))
        return list(zip(i.tolist(), j.tolist()))

    def subset(self, idx) -> "CircularSample":
        idx = np.asarray(idx)
        return CircularSample(self.angles[idx], self.locations[idx])


@dataclass(frozen=True)
class CircularSummary:
    mean_direction: float
    concentration: float
    variance_hat: float
    c_bar: float
    s_bar: float


def moments_estimate(sample: CircularSample | ArrayLike) -> CircularSummary:
    """Moment estimators of mean direction, concentration and variance.

    With ``C = mean(cos x)`` and ``S = mean(sin x)`` the concentration
    estimate is ``hypot(C, S)``, the mean direction ``arctan*(S, C)`` and
    the variance ``-2 log(concentration)``.
    """
    x = sample.angles if isinstance(sample, CircularSample) else np.asarray(sample, float)
    x = np.atleast_1d(x)
    if x.size == 0:
        raise InsufficientDataError("moments_estimate needs at least one angle")
    c_bar = float(np.mean(np.cos(x)))
    s_bar = float(np.mean(np.sin(x)))
    c_hat = math.hypot(c_bar, s_bar)
    if c_hat < 1e-15:
        raise UndefinedDirectionError("sample resultant is zero")
    c_hat = min(c_hat, 1.0)
    return CircularSummary(
        mean_direction=arctan_star(s_bar, c_bar),
        concentration=c_hat,
        variance_hat=max(-2.0 * math.log(c_hat), 0.0),
        c_bar=c_bar,
        s_bar=s_bar,
    )


def circular_mean(angles: ArrayLike, weights: ArrayLike | None = None) -> float:
    """Direction of the (weighted) mean resultant vector."""
    x = np.asarray(angles, dtype=float)
    w = None if weights is None else np.asarray(weights, dtype=float)
    c = np.average(np.cos(x), weights=w)
    s = np.average(np.sin(x), weights=w)
    if math.hypot(c, s) < 1e-15:
        raise UndefinedDirectionError("resultant is zero")
    return arctan_star(s, c)


def rayleigh_test(angles: ArrayLike) -> tuple[float, float]:
    """Rayleigh test of circular uniformity.

    Returns the statistic ``2 n R**2`` (``R`` the mean resultant length) and
    its large-sample chi-squared(2) p-value.
    """
    x = np.asarray(angles, dtype=float).reshape(-1)
    n = x.size
    if n < 2:
        raise InsufficientDataError("rayleigh_test needs at least two angles")
    r2 = np.mean(np.cos(x)) ** 2 + np.mean(np.sin(x)) ** 2
    stat = 2.0 * n * r2
    if stat < 1e-24:
        stat = 0.0
    return float(stat), float(chi2.sf(stat, df=2))
