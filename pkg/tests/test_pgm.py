import numpy as np
import pytest

from gaussian_pgm.ensembles import average_state
from gaussian_pgm.instances import random_ensemble
from gaussian_pgm.states import normalization_constant
from gaussian_pgm.pgm import (
    conditional_outcome,
    identity_checks,
    mse_closed_form,
    mse_monte_carlo,
    outcome_from_parameter,
    parameter_from_outcome,
    pgm_description,
)

SCALAR_MSE = 4.0 * (1.0 - 2.0 / np.sqrt(15.0))


def test_scalar_closed_forms(scalar):
    e, _ = scalar
    d = pgm_description(e)
    assert np.allclose(d.Q, np.sqrt(15.0) / 4.0 * np.eye(2), atol=1e-12)
    assert np.allclose(d.sigma.cov, 3.5 * np.eye(2), atol=1e-12)
    assert np.allclose(d.J, np.sqrt(15.0) / 2.0 * np.eye(2), atol=1e-12)
    assert np.isclose(d.prefactor, 3.75 / (2.0 * np.pi), rtol=1e-12)
    c = conditional_outcome(e, d)
    assert np.allclose(c.matrix, 2.0 / np.sqrt(15.0) * np.eye(2), atol=1e-12)
    assert np.allclose(c.cov, 11.0 / 15.0 * np.eye(2), atol=1e-12)
    assert np.isclose(mse_closed_form(e, d), SCALAR_MSE, rtol=1e-12)


def test_outcome_parameter_roundtrip():
    e = random_ensemble(2, np.random.default_rng(3))
    d = pgm_description(e)
    x = np.array([0.2, -0.4, 0.1, 0.3])
    y = outcome_from_parameter(d, e, x)
    assert np.allclose(parameter_from_outcome(d, e, y), x, atol=1e-10)


def test_determinant_identity():
    for seed in range(10):
        n = 1 + seed % 3
        e = random_ensemble(n, np.random.default_rng(seed))
        d = pgm_description(e)
        Z2 = normalization_constant(average_state(e)) ** 2
        lhs = np.linalg.det(d.J) * np.linalg.det(e.L) ** 2 * np.linalg.det(e.Sigma)
        assert np.isclose(lhs, Z2, rtol=1e-9)


def test_mse_forms_agree():
    for seed in range(10):
        n = 1 + seed % 3
        e = random_ensemble(n, np.random.default_rng(100 + seed))
        d = pgm_description(e)
        c = conditional_outcome(e, d)
        direct = 2.0 * np.trace((np.eye(2 * n) - c.matrix) @ e.Sigma)
        A = c.matrix
        other = np.trace((A - np.eye(2 * n)) @ e.Sigma @ (A - np.eye(2 * n)).T) + np.trace(c.cov)
        assert np.isclose(direct, other, rtol=1e-10)
        assert np.isclose(mse_closed_form(e, d), direct, rtol=1e-12)
        assert np.linalg.eigvalsh(c.cov)[0] > 0.0


def test_monte_carlo_deterministic(scalar):
    e, _ = scalar
    a = mse_monte_carlo(e, 50_000, np.random.default_rng(42))
    b = mse_monte_carlo(e, 50_000, np.random.default_rng(42))
    assert a.estimate == b.estimate
    assert a.stderr == b.stderr
    assert a.trials == 50_000


def test_monte_carlo_matches_closed_form(scalar):
    e, _ = scalar
    r = mse_monte_carlo(e, 100_000, np.random.default_rng(7))
    assert abs(r.estimate - SCALAR_MSE) <= 3.0 * r.stderr


def test_identity_checks_random():
    for seed in range(20):
        n = 1 + seed % 3
        e = random_ensemble(n, np.random.default_rng(200 + seed))
        rep = identity_checks(e, fock_cutoff=None)
        assert rep.det_residual <= 1e-9
        assert rep.contraction_max_eig < 0.0
        assert rep.born_residual is None
