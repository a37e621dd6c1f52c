import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from wrapgp.errors import DomainError, SingularCovarianceError
from wrapgp.spatial_cov import (
    Kernel,
    build_cov,
    predictive_conditional,
    site_conditional,
)


def schur_site(i, y, mu, sigma):
    """Conditional of coordinate i by explicit (n-1)-block inversion."""
    rest = [j for j in range(len(y)) if j != i]
    s_ir = sigma[i, rest]
    s_rr = sigma[np.ix_(rest, rest)]
    mean = mu + s_ir @ np.linalg.solve(s_rr, y[rest] - mu)
    var = sigma[i, i] - s_ir @ np.linalg.solve(s_rr, s_ir)
    return mean, var


def augmented_predict(s0, sites, y, mu, kernel):
    """Conditional of a new site from the (n+1)-site joint covariance."""
    allsites = np.vstack([sites, s0])
    d = np.linalg.norm(allsites[:, None] - allsites[None], axis=-1)
    big = kernel(d)
    n = len(y)
    c0 = big[:n, n]
    mean = mu + c0 @ np.linalg.solve(big[:n, :n], y - mu)
    var = big[n, n] - c0 @ np.linalg.solve(big[:n, :n], c0)
    return mean, var


class TestKernel:
    def test_practical_range(self):
        k = Kernel(1.0, 0.021)
        assert k.practical_range == pytest.approx(142.857, abs=1e-3)
        assert k.correlation(142.86) == pytest.approx(math.exp(-3), abs=1e-5)
        assert k.correlation(142.86) == pytest.approx(0.0498, abs=1e-4)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            Kernel(1.0, 0.1, kind="matern")

    def test_invalid(self):
        with pytest.raises(DomainError):
            Kernel(0.0, 0.1)


class TestBuildCov:
    def test_single_site(self):
        cov = build_cov([[3.0, 4.0]], Kernel(0.7, 0.1))
        assert cov.matrix.tolist() == [[0.7]]

    def test_two_sites(self):
        cov = build_cov([[0, 0], [3, 4]], Kernel(2.0, 0.1))
        assert cov.matrix[0, 1] == pytest.approx(2.0 * math.exp(-0.5))
        assert_allclose(np.diag(cov.matrix), 2.0)

    def test_duplicate_sites(self):
        with pytest.raises(SingularCovarianceError) as info:
            build_cov([[0, 0], [1, 1], [0, 0]], Kernel(1.0, 0.1))
        assert info.value.min_separation == 0.0

    @pytest.mark.parametrize("n", [5, 50, 200])
    def test_symmetric_and_factored(self, rng, n):
        sites = rng.uniform(0, 250, (n, 2))
        cov = build_cov(sites, Kernel(0.5, 0.021))
        assert np.abs(cov.matrix - cov.matrix.T).max() < 1e-12
        recon = cov.cholesky_factor @ cov.cholesky_factor.T
        assert np.linalg.norm(recon - cov.matrix) < 1e-8


class TestSiteConditional:
    def test_two_sites(self):
        r = math.exp(-0.2)
        cov = build_cov([[0, 0], [2, 0]], Kernel(1.5, 0.1))
        y = np.array([0.4, 1.3])
        cg = site_conditional(0, y, 0.5, cov)
        assert cg.mean == pytest.approx(0.5 + r * (1.3 - 0.5))
        assert cg.variance == pytest.approx(1.5 * (1 - r * r))

    def test_independent_limit(self):
        cov = build_cov([[0, 0], [1000, 0]], Kernel(1.5, 0.5))
        cg = site_conditional(1, np.array([3.0, 9.0]), 2.0, cov)
        assert cg.mean == pytest.approx(2.0)
        assert cg.variance == pytest.approx(1.5)

    def test_matches_schur(self, rng):
        for _ in range(20):
            sites = rng.uniform(0, 100, (5, 2))
            cov = build_cov(sites, Kernel(rng.uniform(0.1, 2), rng.uniform(0.01, 0.3)))
            y = rng.normal(1, 1, 5)
            for i in range(5):
                cg = site_conditional(i, y, 1.0, cov)
                m, v = schur_site(i, y, 1.0, cov.matrix)
                assert cg.mean == pytest.approx(m, abs=1e-10)
                assert cg.variance == pytest.approx(v, abs=1e-10)
                assert cg.variance == pytest.approx(1 / cov.precision[i, i], abs=1e-12)
                assert cg.variance <= cov.kernel.sigma2

    def test_index_errors(self):
        cov = build_cov([[0, 0], [1, 0]], Kernel(1.0, 0.1))
        with pytest.raises(IndexError):
            site_conditional(2, np.zeros(2), 0.0, cov)
        with pytest.raises(DomainError):
            site_conditional(0, np.zeros(3), 0.0, cov)


class TestPredictiveConditional:
    def test_at_data_site(self):
        sites = np.array([[0, 0], [10, 0], [0, 10]], float)
        cov = build_cov(sites, Kernel(1.0, 0.05))
        y = np.array([0.3, 1.0, -0.4])
        cg = predictive_conditional(sites[1], y, 0.2, cov)
        assert cg.mean == 1.0
        assert cg.variance == 0.0

    def test_far_away(self):
        cov = build_cov([[0, 0], [10, 0]], Kernel(0.8, 0.05))
        cg = predictive_conditional([5000.0, 0.0], np.array([4.0, 5.0]), 1.0, cov)
        assert cg.mean == pytest.approx(1.0)
        assert cg.variance == pytest.approx(0.8)

    def test_matches_augmented(self, rng):
        for _ in range(20):
            sites = rng.uniform(0, 100, (6, 2))
            kernel = Kernel(rng.uniform(0.1, 2), rng.uniform(0.01, 0.3))
            cov = build_cov(sites, kernel)
            y = rng.normal(0, 1, 6)
            s0 = rng.uniform(0, 100, 2)
            cg = predictive_conditional(s0, y, -0.3, cov)
            m, v = augmented_predict(s0, sites, y, -0.3, kernel)
            assert cg.mean == pytest.approx(m, abs=1e-10)
            assert cg.variance == pytest.approx(v, abs=1e-10)

    def test_vectorised_targets(self, rng):
        sites = rng.uniform(0, 50, (4, 2))
        cov = build_cov(sites, Kernel(1.0, 0.1))
        y = rng.normal(size=4)
        targets = rng.uniform(0, 50, (7, 2))
        cg = predictive_conditional(targets, y, 0.0, cov)
        for t, m, v in zip(targets, cg.mean, cg.variance):
            single = predictive_conditional(t, y, 0.0, cov)
            assert (m, v) == (pytest.approx(single.mean), pytest.approx(single.variance))

    def test_variance_shrinks_with_more_sites(self, rng):
        kernel = Kernel(1.0, 0.05)
        for _ in range(10):
            sites = rng.uniform(0, 60, (8, 2))
            s0 = rng.uniform(0, 60, 2)
            y = rng.normal(size=8)
            prev = math.inf
            for n in range(2, 9):
                v = predictive_conditional(s0, y[:n], 0.0, build_cov(sites[:n], kernel)).variance
                assert v <= prev + 1e-12
                prev = v
