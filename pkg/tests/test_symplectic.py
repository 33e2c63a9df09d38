import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from gaussian_pgm.errors import DefinitenessError, FaithfulnessError, SingularityError, ValidationError
from gaussian_pgm.instances import random_faithful_cov
from gaussian_pgm.symplectic import (
    cayley_exp,
    cayley_w,
    check_uncertainty,
    covariance_from_hamiltonian,
    hamiltonian_from_covariance,
    omega,
    require_symmetric,
    sqrt_I_plus_VOmega_inv2,
    sqrt_factorization_residual,
    symplectic_inverse,
    symplectic_spectrum,
    w_matrix,
    williamson,
)


def _random_cov(seed, n):
    return random_faithful_cov(n, np.random.default_rng(seed), nu_range=(1.05, 4.0), scale=0.4)


def test_omega_structure():
    for n in (1, 2, 3):
        Om = omega(n)
        assert np.array_equal(Om.T, -Om)
        assert np.allclose(Om @ Om, -np.eye(2 * n))
    assert np.array_equal(omega(1), [[0.0, 1.0], [-1.0, 0.0]])


def test_require_symmetric_rejects():
    with pytest.raises(ValidationError):
        require_symmetric(np.array([[1.0, 0.5], [0.0, 1.0]]), "V")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 4))
def test_williamson_reconstructs(seed, n):
    V = _random_cov(seed, n)
    dec = williamson(V)
    assert np.linalg.norm(dec.S.T @ dec.D @ dec.S - V) <= 1e-10 * np.linalg.norm(V)
    assert np.linalg.norm(dec.S.T @ omega(n) @ dec.S - omega(n)) <= 1e-10
    assert np.all(np.diff(dec.nu) <= 1e-12)  # sorted descending
    # independent oracle: moduli of the eigenvalues of i Omega V
    mods = np.sort(np.abs(np.linalg.eigvals(1j * omega(n) @ V)))[::-1]
    assert np.allclose(np.repeat(dec.nu, 2), mods, rtol=1e-9)


def test_williamson_known_diagonal():
    V = np.diag([3.0, 3.0, 1.5, 1.5])
    dec = williamson(V)
    assert np.allclose(dec.nu, [3.0, 1.5])


def test_williamson_rejects_odd_and_nonpd():
    with pytest.raises(ValidationError):
        williamson(np.eye(3))
    with pytest.raises(DefinitenessError):
        williamson(np.diag([1.0, -0.5]))


def test_symplectic_inverse():
    dec = williamson(_random_cov(3, 2))
    assert np.allclose(symplectic_inverse(dec.S) @ dec.S, np.eye(4), atol=1e-12)


def test_symplectic_spectrum_scalar():
    assert np.allclose(symplectic_spectrum(2.0 * np.eye(2)), [2.0])


def test_check_uncertainty_classes():
    assert check_uncertainty(2.0 * np.eye(2)).classification == "faithful"
    assert check_uncertainty(np.eye(2)).classification == "boundary"
    rep = check_uncertainty(0.5 * np.eye(2))
    assert rep.classification == "invalid"
    assert rep.margin < 0.0
    # agreement with the direct test on V + i Omega
    for seed in range(6):
        V = _random_cov(seed, 2)
        w = np.linalg.eigvalsh(V + 1j * omega(2))
        assert (check_uncertainty(V).classification == "faithful") == (w[0] > 0)


def test_sqrt_factor_squares_correctly():
    for seed, n in ((0, 1), (1, 2), (2, 3)):
        V = _random_cov(seed, n)
        Q = sqrt_I_plus_VOmega_inv2(V)
        VOm = V @ omega(n)
        target = np.eye(2 * n) + np.linalg.inv(VOm @ VOm)
        assert np.allclose(Q @ Q, target, atol=1e-10)
        Qi = sqrt_I_plus_VOmega_inv2(V, inverse=True)
        assert np.allclose(Q @ Qi, np.eye(2 * n), atol=1e-10)


def test_sqrt_factor_scalar_value():
    Q = sqrt_I_plus_VOmega_inv2(4.0 * np.eye(2))
    assert np.allclose(Q, np.sqrt(15.0) / 4.0 * np.eye(2))


def test_sqrt_factor_rejects_boundary():
    with pytest.raises(FaithfulnessError):
        sqrt_I_plus_VOmega_inv2(np.eye(2))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 3))
def test_sqrt_factorization_residual_small(seed, n):
    assert sqrt_factorization_residual(_random_cov(seed, n)) <= 1e-9


def test_hamiltonian_roundtrip_and_scalar():
    H = hamiltonian_from_covariance(2.0 * np.eye(2))
    assert np.allclose(H, np.log(3.0) * np.eye(2))
    for seed, n in ((0, 1), (5, 2), (9, 3)):
        V = _random_cov(seed, n)
        back = covariance_from_hamiltonian(hamiltonian_from_covariance(V))
        assert np.linalg.norm(back - V) <= 1e-10 * np.linalg.norm(V)


def test_cayley_matches_exponential():
    for seed, n in ((1, 1), (4, 2)):
        V = _random_cov(seed, n)
        H = hamiltonian_from_covariance(V)
        E = cayley_exp(w_matrix(V))
        assert np.allclose(E, expm(1j * omega(n) @ H), atol=1e-11)
        assert np.allclose(cayley_w(E), w_matrix(V), atol=1e-11)


def test_cayley_scalar_eigenvalues():
    E = cayley_exp(w_matrix(2.0 * np.eye(2)))
    assert np.allclose(np.sort(np.linalg.eigvals(E).real), [1.0 / 3.0, 3.0])


def test_cayley_singular_guard():
    # E = I corresponds to W at infinity; the resolvent must refuse
    with pytest.raises(SingularityError):
        cayley_w(np.eye(2, dtype=complex))
