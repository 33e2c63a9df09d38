import numpy as np
import pytest
from scipy.stats import multivariate_normal

from gaussian_pgm.ensembles import GaussianEnsemble, average_state, prior_density, sample_prior, state_at
from gaussian_pgm.errors import FaithfulnessError, SingularityError, ValidationError
from gaussian_pgm.instances import random_ensemble
from gaussian_pgm.states import GaussianState


def _scalar_ensemble():
    return GaussianEnsemble(
        rho0=GaussianState(np.zeros(2), 2.0 * np.eye(2)),
        L=np.eye(2),
        mu=np.zeros(2),
        Sigma=np.eye(2),
    )


def test_validation():
    good = _scalar_ensemble()
    with pytest.raises(FaithfulnessError):
        GaussianEnsemble(GaussianState(np.zeros(2), np.eye(2)), np.eye(2), np.zeros(2), np.eye(2))
    with pytest.raises(SingularityError):
        GaussianEnsemble(good.rho0, np.zeros((2, 2)), np.zeros(2), np.eye(2))
    with pytest.raises(ValidationError):
        GaussianEnsemble(good.rho0, np.eye(2), np.zeros(3), np.eye(2))
    with pytest.raises(ValidationError):
        GaussianEnsemble(good.rho0, np.eye(2), np.zeros(2), np.diag([1.0, -1.0]))


def test_state_at_shifts_mean():
    e = _scalar_ensemble()
    x = np.array([0.4, -0.2])
    s = state_at(e, x)
    assert np.allclose(s.mean, e.rho0.mean + e.L @ x)
    assert np.allclose(s.cov, e.rho0.cov)


def test_average_state_covariance():
    for seed in range(5):
        e = random_ensemble(2, np.random.default_rng(seed))
        bar = average_state(e)
        assert np.allclose(bar.mean, e.rho0.mean + e.L @ e.mu)
        assert np.allclose(bar.cov, e.rho0.cov + 2.0 * e.L @ e.Sigma @ e.L.T)


def test_prior_density_matches_scipy():
    e = random_ensemble(2, np.random.default_rng(10))
    ref = multivariate_normal(mean=e.mu, cov=e.Sigma)
    pts = np.random.default_rng(1).normal(size=(6, 4))
    for x in pts:
        assert np.isclose(prior_density(e, x), ref.pdf(x), rtol=1e-12)


def test_sample_prior_moments():
    e = _scalar_ensemble()
    xs = sample_prior(e, 200_000, np.random.default_rng(5))
    assert xs.shape == (200_000, 2)
    assert np.allclose(xs.mean(axis=0), e.mu, atol=0.02)
    assert np.allclose(np.cov(xs.T), e.Sigma, atol=0.03)
