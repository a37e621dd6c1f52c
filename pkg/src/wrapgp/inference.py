"""MCMC for wrapped-normal models with latent winding numbers.

Two samplers share the same state layout ``(mu, sigma2, phi, K)``:

``fit_independent``
    Gibbs sampler for i.i.d. ``WN(mu, sigma2)`` angles. ``mu`` has a conjugate
    normal update, ``sigma2`` a (right-truncated) inverse-gamma update and
    each winding number is drawn from its adaptive-window conditional.

``fit_spatial``
    Wrapped Gaussian process with exponential correlation. ``mu`` is
    updated conjugately, ``(log sigma2, log phi)`` by a joint random-walk
    Metropolis-Hastings step and the winding numbers by a sequential sweep
    using each site's conditional given the rest.

Only ``wrap(mu)``, ``sigma2``, ``phi`` and ``mu + 2*pi*K`` are identified;
summaries never look at ``mu`` or ``K`` alone.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg, stats

from .circular import TWO_PI, CircularSample, circular_mean, moments_estimate, wrap
from .errors import (
    ConfigurationError,
    InsufficientDataError,
    SingularCovarianceError,
    UndefinedDirectionError,
)
from .spatial_cov import CORRELATIONS, cholesky_lower, distance_matrix
from .wrapped_normal import credible_arc, sample_winding

__all__ = [
    "ChainState",
    "McmcConfig",
    "PosteriorDraws",
    "PosteriorSummary",
    "Priors",
    "effective_sample_size",
    "fit_independent",
    "fit_spatial",
    "sample_truncated_invgamma",
    "summarize",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Priors:
    """Independent priors on ``mu``, ``sigma2`` and ``phi``.

    ``mu ~ N(mu0, sigma0_sq)``; ``sigma2 ~ IG(alpha0, beta0)`` with density
    proportional to ``x**(-alpha0-1) exp(-beta0/x)``, optionally truncated
    to ``(0, right_trunc]``; ``phi ~ Uniform(phi_lo, phi_hi)`` (spatial model
    only).
    """

    mu0: float = 0.0
    sigma0_sq: float = 100.0
    alpha0: float = 9.0
    beta0: float = 4.0
    right_trunc: float = math.inf
    phi_lo: float = 0.001
    phi_hi: float = 1.0

    def __post_init__(self):
        if not self.sigma0_sq > 0:
            raise ConfigurationError("priors.sigma0_sq must be positive")
        if not (self.alpha0 > 0 and self.beta0 > 0):
            raise ConfigurationError("priors.alpha0 and priors.beta0 must be positive")
        if not self.right_trunc > 0:
            raise ConfigurationError("priors.right_trunc must be positive")
        if not (0 <= self.phi_lo < self.phi_hi):
            raise ConfigurationError("priors need 0 <= phi_lo < phi_hi")

    @classmethod
    def centered(cls, sigma2_mean: float, sigma2_var: float, **kw) -> "Priors":
        """Inverse-gamma prior with the given mean and variance for ``sigma2``."""
        alpha = sigma2_mean**2 / sigma2_var + 2.0
        return cls(alpha0=alpha, beta0=sigma2_mean * (alpha - 1.0), **kw)

    def log_sigma2_density(self, s2: float) -> float:
        if s2 <= 0 or s2 > self.right_trunc:
            return -math.inf
        return -(self.alpha0 + 1.0) * math.log(s2) - self.beta0 / s2


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 30_000
    burn_in: int = 6_000
    thin: int = 10
    proposal_cov: tuple = ((0.01, 0.0), (0.0, 0.01))
    adapt_during_burnin: bool = True
    target_acceptance: float = 0.25
    seed: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError("mcmc.iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigurationError("mcmc.burn_in must lie in [0, iterations)")
        if self.thin < 1:
            raise ConfigurationError("mcmc.thin must be at least 1")
        cov = np.asarray(self.proposal_cov, dtype=float)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T):
            raise ConfigurationError("mcmc.proposal_cov must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(cov).min() <= 0:
            raise ConfigurationError("mcmc.proposal_cov must be positive definite")

    @property
    def n_retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def retained(self, t: int) -> bool:
        return t >= self.burn_in and (t - self.burn_in + 1) % self.thin == 0


@dataclass(frozen=True)
class ChainState:
    mu: float
    sigma2: float
    phi: float | None
    k: NDArray[np.int64]


@dataclass
class PosteriorDraws:
    """Retained (post burn-in, thinned) draws of one chain.

    Arrays are aligned on the first axis. ``phi`` is NaN for the
    independence model. ``x`` and ``sites`` record the data the chain was
    fitted to so that kriging can rebuild ``X + 2*pi*K``.
    """

    model: str
    iteration: NDArray[np.int64]
    mu: NDArray[np.float64]
    sigma2: NDArray[np.float64]
    phi: NDArray[np.float64]
    k: NDArray[np.int64]
    accepted: NDArray[np.bool_]
    acceptance_rate: float
    x: NDArray[np.float64]
    sites: NDArray[np.float64] | None = None
    kernel_kind: str = "exponential"
    phi_bounds: tuple[float, float] | None = None
    proposal_scale: float = 1.0

    def __len__(self) -> int:
        return self.mu.size

    @property
    def mean_direction(self) -> NDArray:
        return np.asarray(wrap(self.mu))

    @property
    def concentration(self) -> NDArray:
        return np.exp(-0.5 * self.sigma2)

    @property
    def draws(self) -> list[ChainState]:
        phi = [None if np.isnan(p) else float(p) for p in self.phi]
        return [
            ChainState(float(m), float(s), p, kk)
            for m, s, p, kk in zip(self.mu, self.sigma2, phi, self.k)
        ]

    def unwrapped(self) -> NDArray:
        """``X + 2*pi*K`` for every draw, shape (B, n)."""
        return self.x[None, :] + TWO_PI * self.k

    def rows(self) -> Iterator[tuple]:
        """Chain rows ``(iteration, mu, mu_tilde, sigma2, c, phi, accepted)``."""
        mt, c = self.mean_direction, self.concentration
        for b in range(len(self)):
            yield (
                int(self.iteration[b]),
                float(self.mu[b]),
                float(mt[b]),
                float(self.sigma2[b]),
                float(c[b]),
                float(self.phi[b]),
                bool(self.accepted[b]),
            )


def sample_truncated_invgamma(shape: float, scale: float, upper: float, rng) -> float:
    """One draw from ``IG(shape, scale)`` restricted to ``(0, upper]``.

    Samples the precision ``1/x ~ Gamma(shape, rate=scale)`` conditioned on
    ``1/x >= 1/upper`` by inverting the upper tail.
    """
    if math.isinf(upper):
        return scale / rng.gamma(shape)
    lo = 1.0 / upper
    tail = stats.gamma.sf(lo, shape, scale=1.0 / scale)
    if tail <= 0.0:
        return upper
    v = rng.uniform(0.0, tail)
    prec = stats.gamma.isf(v, shape, scale=1.0 / scale) if v > 0 else math.inf
    if not prec >= lo:
        prec = lo
    return min(1.0 / prec, upper)


def _sample_windings_vec(x, mean, sd, u):
    """Vectorised winding draws for independent sites (common ``sd``)."""
    m = 1 + int(3.0 * sd / TWO_PI)
    center = np.rint((mean - x) / TWO_PI)
    offs = np.arange(-m, m + 1)
    k = center[:, None] + offs
    z = (x[:, None] + TWO_PI * k - mean) / sd
    logp = -0.5 * z * z
    p = np.exp(logp - logp.max(axis=1, keepdims=True))
    cdf = np.cumsum(p, axis=1)
    j = (cdf < (u * cdf[:, -1])[:, None]).sum(axis=1)
    return (center + offs[np.minimum(j, 2 * m)]).astype(np.int64)


def _as_angles(data) -> NDArray:
    if isinstance(data, CircularSample):
        return data.angles
    return np.asarray(wrap(np.asarray(data, dtype=float)), dtype=float).reshape(-1)


def _initial_moments(x, upper):
    try:
        summ = moments_estimate(x)
        mu, s2 = summ.mean_direction, summ.variance_hat
    except UndefinedDirectionError:
        mu, s2 = 0.0, 1.0
    s2 = min(max(s2, 1e-3), 0.99 * upper)
    return mu, s2


def fit_independent(
    angles, priors: Priors | None = None, config: McmcConfig | None = None
) -> PosteriorDraws:
    """Gibbs sampler for ``x_i ~ WN(mu, sigma2)`` independently.

    Parameters
    ----------
    angles : CircularSample or array_like
        Observed angles in radians.
    priors, config : optional
        Defaults are ``Priors()`` and ``McmcConfig()``.
    """
    priors = priors or Priors()
    config = config or McmcConfig()
    x = _as_angles(angles)
    n = x.size
    if n < 2:
        raise InsufficientDataError("fit_independent needs at least two angles")
    rng = np.random.default_rng(config.seed)

    mu, s2 = _initial_moments(x, priors.right_trunc)
    k = np.zeros(n, dtype=np.int64)
    mu0, v0 = priors.mu0, priors.sigma0_sq

    keep = config.n_retained
    out_it = np.empty(keep, dtype=np.int64)
    out_mu = np.empty(keep)
    out_s2 = np.empty(keep)
    out_k = np.empty((keep, n), dtype=np.int64)
    b = 0
    for t in range(config.iterations):
        y = x + TWO_PI * k
        mean = (v0 * y.sum() + s2 * mu0) / (n * v0 + s2)
        var = s2 * v0 / (s2 + n * v0)
        mu = rng.normal(mean, math.sqrt(var))

        ss = float(np.sum((y - mu) ** 2))
        s2 = sample_truncated_invgamma(
            priors.alpha0 + 0.5 * n, priors.beta0 + 0.5 * ss, priors.right_trunc, rng
        )

        k = _sample_windings_vec(x, mu, math.sqrt(s2), rng.random(n))

        if config.retained(t):
            out_it[b], out_mu[b], out_s2[b] = t, mu, s2
            out_k[b] = k
            b += 1

    return PosteriorDraws(
        model="independent",
        iteration=out_it,
        mu=out_mu,
        sigma2=out_s2,
        phi=np.full(keep, np.nan),
        k=out_k,
        accepted=np.ones(keep, dtype=bool),
        acceptance_rate=1.0,
        x=x.copy(),
    )


class _CorrState:
    """Correlation matrix ``R(phi)`` with its factor and precision."""

    __slots__ = ("phi", "chol", "logdet", "prec", "prec_diag", "q1", "s11")

    def __init__(self, phi, dist, kind, min_sep):
        corr = CORRELATIONS[kind](dist, phi)
        chol = cholesky_lower(corr, 1.0, min_sep)
        self.phi = phi
        self.chol = chol
        self.logdet = 2.0 * float(np.log(np.diag(chol)).sum())
        self.prec = None

    def finish(self):
        n = self.chol.shape[0]
        q = linalg.cho_solve((self.chol, True), np.eye(n), check_finite=False)
        self.prec = 0.5 * (q + q.T)
        self.prec_diag = np.diag(self.prec).copy()
        self.q1 = self.prec.sum(axis=1)
        self.s11 = float(self.q1.sum())
        return self

    def quad(self, e):
        z = linalg.solve_triangular(self.chol, e, lower=True, check_finite=False)
        return float(z @ z)


def _log_target(s2, quad, corr: _CorrState, n, priors: Priors):
    # (log sigma2, log phi) scale: the Jacobian adds log sigma2 + log phi
    lp = priors.log_sigma2_density(s2)
    if not math.isfinite(lp):
        return -math.inf
    loglik = -0.5 * n * math.log(s2) - 0.5 * corr.logdet - 0.5 * quad / s2
    return loglik + lp + math.log(s2) + math.log(corr.phi)


def fit_spatial(
    sample: CircularSample,
    kernel_kind: str = "exponential",
    priors: Priors | None = None,
    config: McmcConfig | None = None,
    *,
    fix_cov: bool = False,
    init: dict | None = None,
) -> PosteriorDraws:
    """MCMC for the wrapped Gaussian process ``X ~ WN(mu 1, sigma2 R(phi))``.

    Each iteration updates ``mu`` (conjugate normal), then
    ``(log sigma2, log phi)`` jointly by random-walk Metropolis-Hastings,
    then sweeps the winding numbers in site order. During burn-in the
    proposal scale is tuned towards ``config.target_acceptance``.

    Parameters
    ----------
    sample : CircularSample
        At least three angles at pairwise-distinct sites.
    fix_cov : bool
        Hold ``sigma2`` and ``phi`` at their initial values; only ``mu`` and
        the winding numbers move.
    init : dict, optional
        Starting values for any of ``mu``, ``sigma2``, ``phi``, ``k``.
        Defaults are the moment estimates, the midpoint of the ``phi``
        prior support and zero winding numbers.

    Raises
    ------
    SingularCovarianceError
        If two sites coincide or the correlation matrix cannot be factored.
    """
    priors = priors or Priors()
    config = config or McmcConfig()
    if kernel_kind not in CORRELATIONS:
        raise ConfigurationError(f"unknown kernel kind {kernel_kind!r}")
    if not isinstance(sample, CircularSample):
        raise TypeError("fit_spatial needs a CircularSample")
    n = len(sample)
    if n < 3:
        raise InsufficientDataError("fit_spatial needs at least three sites")
    dupes = sample.duplicate_pairs()
    if dupes:
        raise SingularCovarianceError(
            f"coincident sites {dupes[:5]}; the model has no nugget",
            min_separation=sample.min_separation(),
        )
    x = sample.angles
    dist = distance_matrix(sample.locations)
    min_sep = sample.min_separation()
    rng = np.random.default_rng(config.seed)

    init = dict(init or {})
    mu0_, s20_ = _initial_moments(x, priors.right_trunc)
    mu = float(init.get("mu", mu0_))
    s2 = float(init.get("sigma2", s20_))
    phi = float(init.get("phi", 0.5 * (priors.phi_lo + priors.phi_hi)))
    k = np.array(init.get("k", np.zeros(n)), dtype=np.int64)
    if not priors.phi_lo <= phi <= priors.phi_hi:
        raise ConfigurationError("initial phi outside its prior support")

    corr = _CorrState(phi, dist, kernel_kind, min_sep).finish()
    y = x + TWO_PI * k
    prop_chol = np.linalg.cholesky(np.asarray(config.proposal_cov, dtype=float))
    log_scale = 0.0

    mu0, v0 = priors.mu0, priors.sigma0_sq
    keep = config.n_retained
    out_it = np.empty(keep, dtype=np.int64)
    out_mu = np.empty(keep)
    out_s2 = np.empty(keep)
    out_phi = np.empty(keep)
    out_k = np.empty((keep, n), dtype=np.int64)
    out_acc = np.zeros(keep, dtype=bool)
    n_acc = n_prop = 0
    b = 0

    for t in range(config.iterations):
        # mu | Y, sigma2, phi
        prec = corr.s11 / s2 + 1.0 / v0
        mean = (float(corr.q1 @ y) / s2 + mu0 / v0) / prec
        mu = rng.normal(mean, math.sqrt(1.0 / prec))

        # (log sigma2, log phi) | Y, mu
        accepted = False
        if not fix_cov:
            e = y - mu
            quad = float(e @ corr.prec @ e)
            step = math.exp(log_scale) * (prop_chol @ rng.standard_normal(2))
            s2_new = s2 * math.exp(step[0])
            phi_new = phi * math.exp(step[1])
            log_u = math.log(rng.random())
            alpha = 0.0
            if priors.phi_lo <= phi_new < priors.phi_hi and s2_new <= priors.right_trunc:
                try:
                    corr_new = _CorrState(phi_new, dist, kernel_kind, min_sep)
                except SingularCovarianceError:
                    corr_new = None
                if corr_new is not None:
                    quad_new = corr_new.quad(e)
                    log_ratio = _log_target(s2_new, quad_new, corr_new, n, priors) - _log_target(
                        s2, quad, corr, n, priors
                    )
                    alpha = math.exp(min(0.0, log_ratio))
                    if log_u < log_ratio:
                        accepted = True
                        s2, phi = s2_new, phi_new
                        corr = corr_new.finish()
            if t < config.burn_in:
                if config.adapt_during_burnin:
                    log_scale += (alpha - config.target_acceptance) / (t + 1) ** 0.6
            else:
                n_prop += 1
                n_acc += accepted

        # K_i | Y_-i, theta, swept in site order
        prec_diag = corr.prec_diag
        qmat = corr.prec
        resid = qmat @ (y - mu)
        sds = np.sqrt(s2 / prec_diag)
        u = rng.random(n)
        for i in range(n):
            cond_mean = y[i] - resid[i] / prec_diag[i]
            knew = sample_winding(x[i], cond_mean, sds[i], u[i])
            if knew != k[i]:
                delta = TWO_PI * (knew - k[i])
                y[i] += delta
                resid += qmat[:, i] * delta
                k[i] = knew

        if config.retained(t):
            out_it[b], out_mu[b], out_s2[b], out_phi[b] = t, mu, s2, phi
            out_k[b] = k
            out_acc[b] = accepted
            b += 1

    rate = n_acc / n_prop if n_prop else (1.0 if fix_cov else 0.0)
    if not fix_cov and not 0.05 <= rate <= 0.6:
        warnings.warn(
            f"Metropolis acceptance rate {rate:.3f} outside [0.05, 0.6]; "
            "consider retuning mcmc.proposal_cov",
            RuntimeWarning,
            stacklevel=2,
        )
    if not fix_cov and keep:
        top = priors.phi_hi - 0.05 * (priors.phi_hi - priors.phi_lo)
        if np.mean(out_phi >= top) > 0.2:
            warnings.warn(
                "posterior for phi piles up at the upper prior bound "
                f"{priors.phi_hi}; the data favour shorter ranges",
                RuntimeWarning,
                stacklevel=2,
            )

    return PosteriorDraws(
        model="spatial",
        iteration=out_it,
        mu=out_mu,
        sigma2=out_s2,
        phi=out_phi,
        k=out_k,
        accepted=out_acc,
        acceptance_rate=float(rate),
        x=x.copy(),
        sites=sample.locations.copy(),
        kernel_kind=kernel_kind,
        phi_bounds=(priors.phi_lo, priors.phi_hi),
        proposal_scale=math.exp(log_scale),
    )


def effective_sample_size(chain: ArrayLike) -> float:
    """Effective sample size from Geyer's initial positive sequence."""
    x = np.asarray(chain, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0:
        return float(n)
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    tau = -1.0
    for j in range(0, n - 1, 2):
        pair = acf[j] + acf[j + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1e-12))


def _equal_tail(x, level):
    a = 1.0 - level
    lo, hi = np.quantile(x, [a / 2, 1 - a / 2])
    return float(lo), float(hi)


def _hist_mode(x, bounds, bins=50):
    if np.ptp(x) == 0:
        return float(x[0])
    lo, hi = bounds if bounds else (x.min(), x.max())
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    j = int(np.argmax(counts))
    inside = x[(x >= edges[j]) & (x <= edges[j + 1])]
    return float(inside.mean())


@dataclass(frozen=True)
class PosteriorSummary:
    model: str
    n_draws: int
    level: float
    mean_direction: float
    mean_direction_arc: tuple[float, float]
    concentration: float
    concentration_interval: tuple[float, float]
    sigma2: float
    sigma2_interval: tuple[float, float]
    phi_mode: float | None
    phi_interval: tuple[float, float] | None
    acceptance_rate: float
    ess: dict = field(default_factory=dict)

    def table(self) -> str:
        """Rows in the layout point estimate / (lower, upper)."""
        lines = [
            f"mean direction  {self.mean_direction:.3f}  "
            f"({self.mean_direction_arc[0]:.3f}, {self.mean_direction_arc[1]:.3f})",
            f"concentration   {self.concentration:.3f}  "
            f"({self.concentration_interval[0]:.3f}, {self.concentration_interval[1]:.3f})",
        ]
        if self.phi_mode is not None:
            lines.append(
                f"decay (mode)    {self.phi_mode:.3f}  "
                f"({self.phi_interval[0]:.3f}, {self.phi_interval[1]:.3f})"
            )
        lines.append(f"acceptance rate {self.acceptance_rate:.3f}")
        return "\n".join(lines)


def summarize(draws: PosteriorDraws, level: float = 0.95) -> PosteriorSummary:
    """Posterior summaries on the identified scale.

    The mean direction is the circular mean of ``wrap(mu)`` with a central
    credible arc; the concentration is the mean of ``exp(-sigma2/2)`` with
    an equal-tail interval; ``phi`` is summarised by the mode of a 50-bin
    histogram over its prior support (refined to the mean of the draws in
    the modal bin).
    """
    if len(draws) == 0:
        raise InsufficientDataError("no retained draws to summarise")
    mt = draws.mean_direction
    c = draws.concentration
    phi_mode = phi_int = None
    ess = {
        "sigma2": effective_sample_size(draws.sigma2),
        "cos_mu": effective_sample_size(np.cos(mt)),
    }
    if draws.model == "spatial":
        phi_mode = _hist_mode(draws.phi, draws.phi_bounds)
        phi_int = _equal_tail(draws.phi, level)
        ess["phi"] = effective_sample_size(draws.phi)
    return PosteriorSummary(
        model=draws.model,
        n_draws=len(draws),
        level=level,
        mean_direction=circular_mean(mt),
        mean_direction_arc=credible_arc(mt, level),
        concentration=float(c.mean()),
        concentration_interval=_equal_tail(c, level),
        sigma2=float(draws.sigma2.mean()),
        sigma2_interval=_equal_tail(draws.sigma2, level),
        phi_mode=phi_mode,
        phi_interval=phi_int,
        acceptance_rate=draws.acceptance_rate,
        ess=ess,
    )
