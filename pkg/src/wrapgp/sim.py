"""Synthetic wrapped Gaussian process data.

A linear GP with constant mean and exponential covariance is drawn at
random sites, wrapped onto the circle and split into estimation and
validation sets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .circular import CircularSample, wrap
from .errors import ConfigurationError, SingularCovarianceError
from .spatial_cov import Kernel, build_cov

__all__ = ["DEFAULT_REGION", "SimResult", "SimSpec", "SpatialParams", "regular_grid", "simulate"]

log = logging.getLogger(__name__)

# Stand-in study box (km); its diagonal is about 290 km.
DEFAULT_REGION = ((0.0, 250.0), (0.0, 147.0))


@dataclass(frozen=True)
class SpatialParams:
    mu: float
    sigma2: float
    phi: float
    kernel: str = "exponential"

    @property
    def concentration(self) -> float:
        return math.exp(-0.5 * self.sigma2)

    @property
    def practical_range(self) -> float:
        return 3.0 / self.phi


@dataclass(frozen=True)
class SimSpec:
    n_total: int = 100
    mu: float = math.pi
    sigma2: float = 0.1
    phi: float = 0.021
    n_estimation: int = 70
    region: tuple = DEFAULT_REGION
    sites: NDArray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.sites is not None:
            sites = np.asarray(self.sites, dtype=float)
            if sites.ndim != 2 or sites.shape[1] != 2:
                raise ConfigurationError("sim.sites must have shape (n, 2)")
            object.__setattr__(self, "n_total", sites.shape[0])
        if not self.sigma2 > 0:
            raise ConfigurationError("sim.sigma2 must be positive")
        if not self.phi > 0:
            raise ConfigurationError("sim.phi must be positive")
        if not 0 < self.n_estimation < self.n_total:
            raise ConfigurationError("sim.n_estimation must lie in (0, n_total)")
        (x0, x1), (y0, y1) = self.region
        if not (x1 > x0 and y1 > y0):
            raise ConfigurationError("sim.region must be ((xmin, xmax), (ymin, ymax))")


@dataclass(frozen=True)
class SimResult:
    estimation: CircularSample
    validation: CircularSample
    truth: SpatialParams
    estimation_idx: NDArray
    validation_idx: NDArray
    # unwrapped field at all sites; not observable in real data
    unwrapped: NDArray = field(repr=False)
    locations: NDArray = field(repr=False)

    def __iter__(self):
        yield self.estimation
        yield self.validation
        yield self.truth


def _uniform_sites(rng, n, region):
    (x0, x1), (y0, y1) = region
    return np.column_stack([rng.uniform(x0, x1, n), rng.uniform(y0, y1, n)])


def simulate(spec: SimSpec) -> SimResult:
    """Draw one wrapped GP realisation according to ``spec``."""
    rng = np.random.default_rng(spec.seed)
    kernel = Kernel(spec.sigma2, spec.phi)
    fixed = spec.sites is not None
    sites = np.asarray(spec.sites, float) if fixed else _uniform_sites(rng, spec.n_total, spec.region)
    for attempt in range(10):
        try:
            cov = build_cov(sites, kernel)
            break
        except SingularCovarianceError:
            if fixed:
                raise
            log.warning("coincident simulated sites; redrawing (attempt %d)", attempt + 1)
            sites = _uniform_sites(rng, spec.n_total, spec.region)
    else:
        raise SingularCovarianceError("could not draw a non-singular site design")
    y = spec.mu + cov.cholesky_factor @ rng.standard_normal(spec.n_total)
    x = np.asarray(wrap(y), dtype=float)
    perm = rng.permutation(spec.n_total)
    est = np.sort(perm[: spec.n_estimation])
    val = np.sort(perm[spec.n_estimation :])
    return SimResult(
        estimation=CircularSample(x[est], sites[est]),
        validation=CircularSample(x[val], sites[val]),
        truth=SpatialParams(spec.mu, spec.sigma2, spec.phi),
        estimation_idx=est,
        validation_idx=val,
        unwrapped=y,
        locations=sites,
    )


def regular_grid(region=DEFAULT_REGION, resolution: float = 10.0) -> NDArray:
    """Cell centres of a regular grid covering ``region`` (km)."""
    if not resolution > 0:
        raise ConfigurationError("grid resolution must be positive")
    (x0, x1), (y0, y1) = region
    xs = np.arange(x0 + resolution / 2, x1, resolution)
    ys = np.arange(y0 + resolution / 2, y1, resolution)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])
