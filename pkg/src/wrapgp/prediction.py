"""Kriging, circular-circular regression and predictive validation.

Kriging is a Monte Carlo average over posterior draws: for each draw the
unwrapped prediction at a new site is Gaussian, so the wrapped prediction
has ``E exp(iX) = exp(-v/2 + i m)``. Averaging these over draws gives the
vector ``(g_c, g_s)`` whose direction is the kriged mean direction and
whose length is the kriged concentration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.spatial.distance import cdist

from .circular import (
    DUPLICATE_TOL_KM,
    TWO_PI,
    CircularSample,
    arctan_star,
    circular_distance,
    circular_mean,
    wrap,
)
from .errors import ConfigurationError, DomainError, InsufficientDataError, WrapGPError
from .inference import McmcConfig, PosteriorDraws, Priors, fit_independent, fit_spatial
from .spatial_cov import CORRELATIONS, cholesky_lower, distance_matrix
from .wrapped_normal import TruncationWindow, k_conditional, truncation_window

__all__ = [
    "KrigeResult",
    "LooResult",
    "RegressionCurve",
    "average_prediction_error",
    "krige",
    "loo_validate",
    "nonspatial_loo",
    "nonspatial_predict_error",
    "regression_curve",
]


@dataclass(frozen=True)
class KrigeResult:
    target: tuple[float, float]
    mean_direction: float
    concentration: float
    g_c: float
    g_s: float

    @property
    def arrow_length(self) -> float:
        return 1.0 - self.concentration


def _assemble(targets, gc, gs):
    out = []
    for t, c, s in zip(targets, gc, gs):
        conc = math.hypot(c, s)
        direction = arctan_star(s, c) if conc > 0 else float("nan")
        out.append(KrigeResult((float(t[0]), float(t[1])), direction, conc, float(c), float(s)))
    return out


def _krige_sums(draws: PosteriorDraws, sites, targets):
    dist = distance_matrix(sites)
    d0 = cdist(sites, targets)  # (n, T)
    hit = d0 < DUPLICATE_TOL_KM
    exact_t = np.nonzero(hit.any(axis=0))[0]
    exact_site = hit[:, exact_t].argmax(axis=0)
    corr_fn = CORRELATIONS[draws.kernel_kind]
    ys = draws.unwrapped()
    T = targets.shape[0]
    gc = np.zeros(T)
    gs = np.zeros(T)
    cache = {}
    for b in range(len(draws)):
        phi, s2, mu = float(draws.phi[b]), float(draws.sigma2[b]), float(draws.mu[b])
        if phi not in cache:
            chol = cholesky_lower(corr_fn(dist, phi), 1.0)
            rho0 = corr_fn(d0, phi)
            w = linalg.cho_solve((chol, True), rho0, check_finite=False)
            red = 1.0 - np.einsum("ij,ij->j", rho0, w)
            cache = {phi: (w, np.maximum(red, 0.0))}
        w, red = cache[phi]
        y = ys[b]
        mean = mu + w.T @ (y - mu)
        var = s2 * red
        mean[exact_t] = y[exact_site]
        var[exact_t] = 0.0
        amp = np.exp(-0.5 * var)
        gc += amp * np.cos(mean)
        gs += amp * np.sin(mean)
    B = len(draws)
    return gc / B, gs / B


def krige(
    draws: PosteriorDraws,
    sample: CircularSample,
    targets: ArrayLike,
    threads: int = 1,
) -> list[KrigeResult]:
    """Posterior mean kriged direction and concentration at ``targets``.

    Parameters
    ----------
    draws : PosteriorDraws
        Output of :func:`fit_spatial` on ``sample``.
    sample : CircularSample
        The data the draws were fitted to.
    targets : array_like, shape (T, 2) or (2,)
        Prediction sites in km.
    threads : int
        Targets are split into this many chunks and processed concurrently.
    """
    if draws.model != "spatial":
        raise ConfigurationError("kriging needs draws from the spatial model")
    if len(draws) == 0:
        raise InsufficientDataError("no posterior draws")
    if draws.sites is None or draws.sites.shape != sample.locations.shape or not np.allclose(
        draws.sites, sample.locations
    ):
        raise DomainError("sample sites do not match the sites used for fitting")
    if not np.allclose(wrap(draws.x - sample.angles + math.pi), math.pi, atol=1e-12):
        raise DomainError("sample angles do not match the angles used for fitting")
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[1] != 2:
        raise DomainError("targets must have shape (T, 2)")
    chunks = np.array_split(np.arange(targets.shape[0]), max(1, min(threads, targets.shape[0])))
    if len(chunks) == 1:
        gc, gs = _krige_sums(draws, sample.locations, targets)
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(
                pool.map(lambda idx: _krige_sums(draws, sample.locations, targets[idx]), chunks)
            )
        gc = np.concatenate([p[0] for p in parts])
        gs = np.concatenate([p[1] for p in parts])
    return _assemble(targets, gc, gs)


def average_prediction_error(predicted: ArrayLike, observed: ArrayLike) -> float:
    """Mean of ``1 - cos(predicted - observed)``."""
    return float(np.mean(circular_distance(predicted, observed)))


@dataclass(frozen=True)
class RegressionCurve:
    """Conditional mean direction of ``X2`` given ``X1`` under a wrapped
    bivariate normal with means ``mu1, mu2``, common variance ``sigma2``
    and linear correlation ``rho``.
    """

    mu1: float
    mu2: float
    sigma2: float
    rho: float
    window: TruncationWindow | None = None

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")
        if not abs(self.rho) < 1:
            raise DomainError("|rho| must be < 1 for a non-degenerate conditional")

    @property
    def concentration(self) -> float:
        return math.exp(-0.5 * self.sigma2 * (1.0 - self.rho**2))

    def resultant(self, x1: float) -> complex:
        """``E(exp(i X2) | X1 = x1)`` with truncated winding sum."""
        kd = k_conditional(x1, self.mu1, math.sqrt(self.sigma2), self.window)
        cond_mean = self.mu2 + self.rho * (x1 + TWO_PI * kd.support - self.mu1)
        z = np.sum(kd.probs * np.exp(1j * cond_mean))
        return complex(self.concentration * z)

    def __call__(self, x1: float) -> tuple[float, float]:
        z = self.resultant(x1)
        return arctan_star(z.imag, z.real), self.concentration


def regression_curve(params, x1: float, k_truncation: int | None = None):
    """Conditional mean direction and concentration of ``X2`` at ``x1``.

    ``params`` is ``(mu1, mu2, sigma2, rho)``. The concentration
    ``exp(-sigma2 (1 - rho**2) / 2)`` does not depend on ``x1``.
    ``k_truncation`` widens the winding window beyond the default.
    """
    mu1, mu2, sigma2, rho = params
    window = None if k_truncation is None else TruncationWindow(int(k_truncation))
    return RegressionCurve(mu1, mu2, sigma2, rho, window)(x1)


def nonspatial_predict_error(sample_train, sample_validate, draws_independent) -> float:
    """Validation error of predicting every site by the posterior mean direction."""
    mu_hat = circular_mean(draws_independent.mean_direction)
    obs = sample_validate.angles if isinstance(sample_validate, CircularSample) else sample_validate
    return average_prediction_error(mu_hat, obs)


@dataclass(frozen=True)
class LooResult:
    predicted: NDArray[np.float64]
    concentration: NDArray[np.float64]
    per_site_errors: NDArray[np.float64]
    average_prediction_error: float
    mode: str

    def __iter__(self):
        yield self.per_site_errors
        yield self.average_prediction_error


def _loo_from_draws(draws: PosteriorDraws, sites):
    """Leave-one-out kriging reusing full-data draws.

    For each draw the law of ``Y_j`` given the remaining sites comes straight
    from the precision matrix: mean ``y_j - (Q e)_j / Q_jj``, variance
    ``sigma2 / Q_jj`` with ``Q = R(phi)^-1``.
    """
    dist = distance_matrix(sites)
    corr_fn = CORRELATIONS[draws.kernel_kind]
    ys = draws.unwrapped()
    n = dist.shape[0]
    gc = np.zeros(n)
    gs = np.zeros(n)
    cache = {}
    for b in range(len(draws)):
        phi = float(draws.phi[b])
        if phi not in cache:
            chol = cholesky_lower(corr_fn(dist, phi), 1.0)
            q = linalg.cho_solve((chol, True), np.eye(n), check_finite=False)
            cache = {phi: (q, np.diag(q).copy())}
        q, qd = cache[phi]
        e = ys[b] - draws.mu[b]
        mean = ys[b] - (q @ e) / qd
        amp = np.exp(-0.5 * draws.sigma2[b] / qd)
        gc += amp * np.cos(mean)
        gs += amp * np.sin(mean)
    gc /= len(draws)
    gs /= len(draws)
    return np.asarray(arctan_star(gs, gc)), np.hypot(gc, gs)


def loo_validate(
    sample: CircularSample,
    kernel_kind: str = "exponential",
    priors: Priors | None = None,
    config: McmcConfig | None = None,
    *,
    fast: bool | None = None,
    draws: PosteriorDraws | None = None,
) -> LooResult:
    """Leave-one-out validation of the spatial model.

    ``fast=True`` fits once (or reuses ``draws``) and removes each site
    only from the conditioning set; ``fast=False`` refits the model with
    each site held out. The default is fast for 40 or more sites. Fast
    mode conditions on draws that have seen the held-out site, so its
    errors run slightly optimistic.
    """
    n = len(sample)
    if n < 4:
        raise InsufficientDataError("loo_validate needs at least four sites")
    if fast is None:
        fast = n >= 40
    if fast:
        if draws is None:
            draws = fit_spatial(sample, kernel_kind, priors, config)
        pred, conc = _loo_from_draws(draws, sample.locations)
    else:
        pred = np.empty(n)
        conc = np.empty(n)
        for j in range(n):
            rest = sample.subset(np.delete(np.arange(n), j))
            try:
                dj = fit_spatial(rest, kernel_kind, priors, config)
            except WrapGPError as exc:
                raise type(exc)(f"leave-one-out fit without site {j} failed: {exc}") from exc
            res = krige(dj, rest, sample.locations[j])[0]
            pred[j], conc[j] = res.mean_direction, res.concentration
    errs = np.asarray(circular_distance(pred, sample.angles))
    return LooResult(pred, conc, errs, float(errs.mean()), "fast" if fast else "refit")


def nonspatial_loo(
    sample,
    priors: Priors | None = None,
    config: McmcConfig | None = None,
    *,
    fast: bool | None = None,
    draws: PosteriorDraws | None = None,
) -> LooResult:
    """Leave-one-out error of the independence model's mean direction."""
    x = sample.angles if isinstance(sample, CircularSample) else np.asarray(sample, float)
    n = x.size
    if fast is None:
        fast = n >= 40
    if fast:
        if draws is None:
            draws = fit_independent(x, priors, config)
        mu_hat = circular_mean(draws.mean_direction)
        pred = np.full(n, mu_hat)
        conc = np.full(n, float(draws.concentration.mean()))
    else:
        pred = np.empty(n)
        conc = np.empty(n)
        for j in range(n):
            dj = fit_independent(np.delete(x, j), priors, config)
            pred[j] = circular_mean(dj.mean_direction)
            conc[j] = dj.concentration.mean()
    errs = np.asarray(circular_distance(pred, x))
    return LooResult(pred, conc, errs, float(errs.mean()), "fast" if fast else "refit")
