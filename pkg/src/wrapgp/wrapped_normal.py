"""Univariate wrapped normal: density, sampling and winding numbers.

A wrapped normal ``WN(mu, sigma2)`` is the law of ``Y mod 2*pi`` for
``Y ~ N(mu, sigma2)``. Writing ``Y = X + 2*pi*K`` exposes the winding number
``K`` as a latent integer; its conditional law given ``X`` is what the MCMC
samplers draw from. Sums over ``K`` are truncated to a window of ``2m + 1``
consecutive integers, with ``m = 1 + floor(3 sigma / (2 pi))`` chosen so the
retained terms carry at least 99.7% of the normal mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .circular import TWO_PI, arctan_star, wrap
from .errors import DomainError, UndefinedDirectionError

__all__ = [
    "KDistribution",
    "TruncationWindow",
    "WnParams",
    "arc_contains",
    "credible_arc",
    "k_conditional",
    "truncation_window",
    "wn_density",
    "wn_sample",
]

_LOG_SQRT_2PI = 0.5 * math.log(TWO_PI)


@dataclass(frozen=True)
class WnParams:
    """Unwrapped mean ``mu`` (radians, any real) and variance ``sigma2``."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise DomainError("WnParams must be finite")
        if self.sigma2 <= 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def mean_direction(self) -> float:
        return wrap(self.mu)

    @property
    def concentration(self) -> float:
        return math.exp(-0.5 * self.sigma2)


@dataclass(frozen=True)
class TruncationWindow:
    """Half-width ``m`` of a winding-number window ``{c-m, ..., c+m}``.

    The centre ``c`` defaults to 0; callers working with an unwrapped mean
    far from ``[0, 2*pi)`` centre the window on the nearest winding.
    """

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise DomainError("window half-width must be non-negative")

    def support(self, center: int = 0) -> NDArray[np.int64]:
        return np.arange(center - self.m, center + self.m + 1)

    def __len__(self) -> int:
        return 2 * self.m + 1


def _trunc_m(sigma: float) -> int:
    # int() truncates toward zero, which is the rounding the bound needs
    return 1 + int(3.0 * sigma / TWO_PI)


def truncation_window(sigma: float) -> TruncationWindow:
    """Adaptive window for standard deviation ``sigma``.

    ``sigma < 2*pi/3`` gives ``{-1, 0, 1}``, ``2*pi/3 <= sigma < 4*pi/3``
    gives ``{-2, ..., 2}`` and so on.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    return TruncationWindow(_trunc_m(sigma))


def _nearest_winding(x, mu):
    return np.rint((np.asarray(mu) - np.asarray(x)) / TWO_PI).astype(np.int64)


def wn_density(
    x: ArrayLike, params: WnParams, window: TruncationWindow | None = None
) -> float | NDArray:
    """Truncated wrapped-normal density at angles ``x``.

    The sum runs over ``window`` centred at the winding that places
    ``x + 2*pi*k`` closest to ``mu``. Pass a wide window (e.g.
    ``TruncationWindow(200)``) for a reference evaluation.
    """
    if window is None:
        window = truncation_window(params.sigma)
    x = np.asarray(x, dtype=float)
    center = _nearest_winding(x, params.mu)
    offs = np.arange(-window.m, window.m + 1)
    k = center[..., None] + offs
    z = (x[..., None] + TWO_PI * k - params.mu) / params.sigma
    dens = np.exp(-0.5 * z * z).sum(axis=-1) / (params.sigma * math.sqrt(TWO_PI))
    return float(dens) if dens.ndim == 0 else dens


def wn_sample(params: WnParams, n: int, rng=None) -> NDArray[np.float64]:
    """Draw ``n`` angles by wrapping ``N(mu, sigma2)`` draws.

    ``rng`` is a seed or a ``numpy.random.Generator``.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = np.random.default_rng(rng)
    y = rng.normal(params.mu, params.sigma, size=n)
    return np.asarray(wrap(y), dtype=float)


@dataclass(frozen=True)
class KDistribution:
    """Discrete law of a winding number over a finite support."""

    support: NDArray[np.int64]
    probs: NDArray[np.float64]

    @property
    def mode(self) -> int:
        return int(self.support[np.argmax(self.probs)])

    def prob(self, k: int) -> float:
        hit = np.nonzero(self.support == k)[0]
        return float(self.probs[hit[0]]) if hit.size else 0.0

    def sample(self, rng=None, size=None):
        rng = np.random.default_rng(rng)
        return rng.choice(self.support, p=self.probs, size=size)


def k_conditional(
    x: float, mu: float, sigma: float, window: TruncationWindow | None = None
) -> KDistribution:
    """Conditional law of the winding number of ``x`` under ``N(mu, sigma**2)``.

    ``P(K = k | x) ~ phi((x + 2*pi*k - mu) / sigma)`` normalised over the
    window, which is centred on the winding nearest ``mu``.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if window is None:
        window = truncation_window(sigma)
    support = window.support(int(_nearest_winding(x, mu)))
    z = (x + TWO_PI * support - mu) / sigma
    logp = -0.5 * z * z
    p = np.exp(logp - logp.max())
    return KDistribution(support, p / p.sum())


def sample_winding(x: float, mean: float, sd: float, u: float) -> int:
    """Inverse-CDF draw of a winding number from uniform ``u``.

    Scalar fast path of :func:`k_conditional` used inside the samplers.
    """
    m = 1 + int(3.0 * sd / TWO_PI)
    c = round((mean - x) / TWO_PI)
    base = x - mean
    w = []
    for k in range(c - m, c + m + 1):
        z = (base + TWO_PI * k) / sd
        w.append(-0.5 * z * z)
    top = max(w)
    w = [math.exp(v - top) for v in w]
    target = u * sum(w)
    acc = 0.0
    for j, v in enumerate(w):
        acc += v
        if acc >= target:
            return c - m + j
    return c + m


def credible_arc(draws: ArrayLike, level: float = 0.95) -> tuple[float, float]:
    """Central credible arc of angular draws.

    Draws are rotated so their circular mean sits at zero, the equal-tail
    quantiles are taken on ``(-pi, pi]`` and the bounds rotated back. The
    arc runs counter-clockwise from ``lower`` to ``upper`` and may straddle
    zero.
    """
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    x = np.asarray(draws, dtype=float).reshape(-1)
    if x.size == 0:
        raise DomainError("credible_arc needs at least one draw")
    c, s = np.mean(np.cos(x)), np.mean(np.sin(x))
    if math.hypot(c, s) < 1e-15:
        raise UndefinedDirectionError("draws have zero resultant")
    center = arctan_star(s, c)
    dev = np.asarray(wrap(x - center + math.pi)) - math.pi
    alpha = 1.0 - level
    lo, hi = np.quantile(dev, [alpha / 2, 1 - alpha / 2])
    return wrap(center + lo), wrap(center + hi)


def arc_contains(arc: tuple[float, float], theta: float) -> bool:
    """Whether ``theta`` lies on the counter-clockwise arc ``lower -> upper``."""
    lower, upper = arc
    return wrap(theta - lower) <= wrap(upper - lower) + 1e-12
