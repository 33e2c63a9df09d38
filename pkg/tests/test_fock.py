import numpy as np
import pytest

from gaussian_pgm.errors import CutoffError, ValidationError
from gaussian_pgm.fock import (
    born_rule_residual,
    completeness_check,
    displacement_matrix,
    fock_moments,
    gaussian_density_matrix,
    gaussian_matrix_sqrt,
    inverse_sqrt_psd,
    ladder,
    mean_photon_number,
    pgm_operator_closed,
    pgm_operator_direct,
    quadratures,
    require_cutoff,
    tail_estimate,
    trace_distance,
)
from gaussian_pgm.states import GaussianState


def test_commutator_on_interior():
    x, p = quadratures(1, 30)
    comm = x @ p - p @ x
    assert np.allclose(comm[:29, :29], 1j * np.eye(29))


def test_mode_and_dimension_guards():
    with pytest.raises(ValidationError):
        quadratures(3, 8)
    with pytest.raises(ValidationError):
        quadratures(2, 70)
    with pytest.raises(ValidationError):
        ladder(1)


def test_mean_photon_number():
    assert mean_photon_number(GaussianState(np.zeros(2), np.eye(2))) == 0.0
    assert np.isclose(mean_photon_number(GaussianState(np.zeros(2), 3.0 * np.eye(2))), 1.0)


def test_moments_roundtrip_single_mode():
    s = GaussianState(np.array([0.3, -0.2]), np.array([[2.2, 0.3], [0.3, 1.8]]))
    rho = gaussian_density_matrix(s, 40)
    r, V = fock_moments(rho, 1)
    assert np.allclose(r, s.mean, atol=1e-7)
    assert np.allclose(V, s.cov, atol=1e-6)


def test_moments_roundtrip_two_modes():
    cov = np.diag([1.2, 1.2, 1.35, 1.35])
    cov[0, 2] = cov[2, 0] = 0.1
    cov[1, 3] = cov[3, 1] = -0.1
    s = GaussianState(np.array([0.2, 0.0, -0.1, 0.1]), cov)
    rho = gaussian_density_matrix(s, 14)
    assert np.isclose(np.trace(rho).real, 1.0, atol=1e-8)
    r, V = fock_moments(rho, 2)
    assert np.allclose(r, s.mean, atol=1e-6)
    assert np.allclose(V, s.cov, atol=1e-5)


def test_displacement_unitary_and_shift():
    r = np.array([0.3, -0.4])
    D = displacement_matrix(r, 40)
    assert np.allclose(D @ D.conj().T, np.eye(40), atol=1e-12)
    base = gaussian_density_matrix(GaussianState(np.zeros(2), 1.2 * np.eye(2)), 40)
    moved, _ = fock_moments(D @ base @ D.conj().T, 1)
    assert np.allclose(moved, r, atol=1e-8)


def test_matrix_sqrt_squares_to_state():
    s = GaussianState(np.array([0.1, 0.2]), 3.0 * np.eye(2))
    rho = gaussian_density_matrix(s, 40)
    sq = gaussian_matrix_sqrt(s, 40)
    assert np.linalg.norm(sq @ sq - rho) <= 1e-7


def test_tail_estimate_conservative_for_thermal():
    for v, cutoff in ((3.0, 20), (6.0, 30)):
        s = GaussianState(np.zeros(2), v * np.eye(2))
        q = (v - 1.0) / (v + 1.0)
        exact = q ** (cutoff + 1)
        est = tail_estimate(s, cutoff)
        assert exact <= est <= 100.0 * exact


def test_require_cutoff_raises_and_suggests():
    hot = GaussianState(np.zeros(2), 30.0 * np.eye(2))
    with pytest.raises(CutoffError) as exc:
        require_cutoff(hot, 10)
    assert exc.value.suggested_cutoff > 10
    require_cutoff(hot, exc.value.suggested_cutoff)  # suggested size is enough
    require_cutoff(hot, 10, tail_tol=np.inf)  # guard off


def test_inverse_sqrt_psd():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(12, 12))
    A = B @ B.T + 0.5 * np.eye(12)
    isq = inverse_sqrt_psd(A)
    assert np.allclose(isq @ A @ isq, np.eye(12), atol=1e-10)
    # floored direction is dropped, not inverted
    A2 = np.diag([1.0, 1e-16])
    isq2 = inverse_sqrt_psd(A2)
    assert np.allclose(isq2 @ A2 @ isq2, np.diag([1.0, 0.0]), atol=1e-12)
    with pytest.raises(CutoffError):
        inverse_sqrt_psd(np.diag([1.0, 0.3]), floor=0.5, mass_tol=0.01)


def test_pgm_routes_agree_scalar(scalar):
    e, _ = scalar
    x = np.array([0.5, 0.0])
    direct = pgm_operator_direct(e, x, 40)
    closed = pgm_operator_closed(e, x, 40)
    assert trace_distance(direct, closed) <= 1e-6


def test_born_rule_scalar(scalar):
    e, _ = scalar
    assert born_rule_residual(e, np.array([0.0, 0.0]), 40) <= 1e-6
    assert born_rule_residual(e, np.array([0.5, 0.0]), 40) <= 1e-6


def test_completeness_residual_grows_at_small_cutoff(scalar):
    e, _ = scalar
    fine = completeness_check(e, cutoff=40, grid=64)
    assert fine.residual <= 1e-3
    coarse = completeness_check(e, cutoff=12, grid=64, tail_tol=np.inf)
    assert coarse.residual > 100.0 * fine.residual
