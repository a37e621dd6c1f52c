import math

import numpy as np
import pytest

from wrapgp.circular import TWO_PI, moments_estimate, wrap, wrapped_correlation
from wrapgp.errors import ConfigurationError, SingularCovarianceError
from wrapgp.sim import DEFAULT_REGION, SimSpec, SpatialParams, regular_grid, simulate


def test_defaults():
    spec = SimSpec()
    assert (spec.n_total, spec.n_estimation, spec.mu, spec.sigma2) == (100, 70, math.pi, 0.1)
    assert SpatialParams(math.pi, 0.1, 0.021).concentration == pytest.approx(0.951, abs=1e-3)
    (x0, x1), (y0, y1) = DEFAULT_REGION
    assert math.hypot(x1 - x0, y1 - y0) == pytest.approx(290, abs=1)


def test_split_sizes_and_disjoint():
    sim = simulate(SimSpec(seed=0))
    assert len(sim.estimation) == 70 and len(sim.validation) == 30
    assert not set(sim.estimation_idx) & set(sim.validation_idx)
    est, val, truth = sim
    assert truth.phi == 0.021


def test_seed_determinism():
    a, b = simulate(SimSpec(seed=11)), simulate(SimSpec(seed=11))
    assert np.array_equal(a.estimation.angles, b.estimation.angles)
    assert np.array_equal(a.locations, b.locations)
    c = simulate(SimSpec(seed=12))
    assert not np.array_equal(a.estimation.angles, c.estimation.angles)


def test_emitted_angles_are_wrapped_field():
    sim = simulate(SimSpec(sigma2=3.0, seed=4))
    x = np.empty(100)
    x[sim.estimation_idx] = sim.estimation.angles
    x[sim.validation_idx] = sim.validation.angles
    assert np.array_equal(x, wrap(sim.unwrapped))
    assert np.all((x >= 0) & (x < TWO_PI))


def test_tiny_variance_is_constant():
    sim = simulate(SimSpec(mu=1.0, sigma2=1e-10, seed=1))
    assert np.allclose(sim.estimation.angles, 1.0, atol=1e-4)


def test_concentration_recovered_on_average():
    est = [moments_estimate(simulate(SimSpec(seed=s)).estimation.angles).concentration for s in range(30)]
    # spatial correlation inflates the spread between replicates
    assert np.mean(est) == pytest.approx(0.951, abs=0.02)


def test_field_mean_within_three_sd():
    spec = SimSpec(seed=3, sigma2=0.5)
    sim = simulate(spec)
    d = np.linalg.norm(sim.locations[:, None] - sim.locations[None], axis=-1)
    sd = math.sqrt(spec.sigma2 * np.exp(-spec.phi * d).sum()) / spec.n_total
    assert abs(sim.unwrapped.mean() - spec.mu) < 3 * sd


def test_correlogram_matches_induced_correlation():
    sites = np.array([[0.0, 0.0], [10.0, 0.0], [40.0, 0.0], [150.0, 0.0]])
    sigma2, phi, mu, reps = 1.0, 0.02, 2.0, 4000
    x = np.array([simulate(SimSpec(n_total=4, n_estimation=2, mu=mu, sigma2=sigma2, phi=phi,
                                   sites=sites, seed=s)).unwrapped for s in range(reps)])
    x = np.asarray(wrap(x))
    s = np.sin(x - mu)
    for j, dist in zip((1, 2, 3), (10.0, 40.0, 150.0)):
        rho = math.exp(-phi * dist)
        # sample circular correlation with known mean direction
        est = np.mean(s[:, 0] * s[:, j]) / math.sqrt(np.mean(s[:, 0] ** 2) * np.mean(s[:, j] ** 2))
        assert est == pytest.approx(wrapped_correlation(rho, sigma2), abs=0.05)
        # E cos(X_i - X_j) = exp(-sigma2 (1 - rho))
        c = np.cos(x[:, 0] - x[:, j])
        se = c.std() / math.sqrt(reps)
        assert c.mean() == pytest.approx(math.exp(-sigma2 * (1 - rho)), abs=4 * se)


def test_marginal_is_wrapped_normal():
    from scipy import stats

    from wrapgp.wrapped_normal import WnParams, wn_density

    x = np.concatenate([simulate(SimSpec(sigma2=2.0, phi=5.0, seed=s)).estimation.angles
                        for s in range(20)])
    params = WnParams(math.pi, 2.0)
    grid = np.linspace(0, TWO_PI, 4001)
    cdf_vals = np.cumsum(wn_density(grid, params)) * (grid[1] - grid[0])
    cdf = lambda v: np.interp(v, grid, cdf_vals / cdf_vals[-1])
    assert stats.kstest(x, cdf).pvalue > 0.001


@pytest.mark.parametrize(
    "kw,field",
    [
        (dict(sigma2=0.0), "sim.sigma2"),
        (dict(phi=-1.0), "sim.phi"),
        (dict(n_estimation=100), "sim.n_estimation"),
        (dict(region=((0, 0), (0, 1))), "sim.region"),
    ],
)
def test_invalid_spec_names_field(kw, field):
    with pytest.raises(ConfigurationError, match=field):
        SimSpec(**kw)


def test_fixed_coincident_sites_raise():
    with pytest.raises(SingularCovarianceError):
        simulate(SimSpec(sites=[[0, 0], [0, 0], [1, 1]], n_estimation=2, seed=0))


def test_regular_grid():
    g = regular_grid()
    assert g.shape == (375, 2)
    assert g[:, 0].min() == 5.0 and g[:, 1].max() < 147
    with pytest.raises(ConfigurationError):
        regular_grid(resolution=0)
