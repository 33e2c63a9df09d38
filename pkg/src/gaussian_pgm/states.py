"""Gaussian states as mean vectors and covariance matrices."""

from dataclasses import dataclass

import numpy as np

from . import symplectic
from .errors import DefinitenessError, ValidationError
from .symplectic import FAITHFUL_MARGIN, require_symmetric, require_faithful


@dataclass(frozen=True)
class GaussianState:
    """A Gaussian state of n modes.

    mean is the length-2n vector of quadrature expectations in xpxp order;
    cov is the 2n x 2n covariance in the anticommutator convention, so the
    vacuum has cov equal to the identity.  States must satisfy the uncertainty
    principle cov + i Omega >= 0; boundary (pure) states are representable,
    operations that need faithfulness check it themselves.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = require_symmetric(self.cov, "cov")
        n = symplectic.require_even_dim(cov, "cov")
        if mean.shape != (2 * n,):
            raise ValidationError(
                f"mean has shape {mean.shape}, expected ({2 * n},) to match cov"
            )
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ValidationError("state parameters must be finite")
        rep = symplectic.check_uncertainty(cov)
        if rep.classification == "invalid":
            raise DefinitenessError(
                f"covariance violates the uncertainty principle: "
                f"min symplectic eigenvalue exceeds 1 by {rep.margin:.6g}"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n(self) -> int:
        return self.mean.shape[0] // 2


def displace(state: GaussianState, d: np.ndarray) -> GaussianState:
    """Displace a state in phase space: the mean shifts by d, the covariance is unchanged."""
    d = np.asarray(d, dtype=float)
    if d.shape != state.mean.shape:
        raise ValidationError(f"displacement has shape {d.shape}, expected {state.mean.shape}")
    return GaussianState(mean=state.mean + d, cov=state.cov)


def normalization_constant(state: GaussianState, margin: float = FAITHFUL_MARGIN) -> float:
    """Partition function Z of the Gaussian exponential, prod_j sqrt(nu_j^2 - 1) / 2.

    Equals sqrt(det[(V + i Omega) / 2]).  Requires a faithful state.
    """
    nu = symplectic.symplectic_spectrum(state.cov)
    require_faithful(nu, margin)
    return float(np.prod(np.sqrt(nu ** 2 - 1.0) / 2.0))


def overlap(a: GaussianState, b: GaussianState) -> float:
    """Hilbert-Schmidt overlap Tr[rho_a rho_b] of two Gaussian states.

    Uses det([Va + Vb]/2)^(-1/2) exp[-1/2 delta^T ([Va + Vb]/2)^-1 delta]
    with delta the mean difference.  The average covariance of two valid
    states is positive definite, so the Cholesky route is safe.
    """
    if a.n != b.n:
        raise ValidationError(f"mode mismatch: {a.n} vs {b.n}")
    M = 0.5 * (a.cov + b.cov)
    delta = a.mean - b.mean
    try:
        C = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise DefinitenessError("average covariance is not positive definite")
    half_logdet = float(np.sum(np.log(np.diag(C))))
    y = np.linalg.solve(C, delta)
    return float(np.exp(-half_logdet - 0.5 * y @ y))


def purity(state: GaussianState) -> float:
    """Tr[rho^2] = prod_j 1/nu_j."""
    return overlap(state, state)


def classical_mix(
    state: GaussianState, noise_mean: np.ndarray, noise_cov: np.ndarray
) -> GaussianState:
    """Average the state over classical Gaussian displacement noise.

    Mixing D(-z) rho D(z) over z ~ N(noise_mean, noise_cov) shifts the mean by
    noise_mean and adds twice the classical covariance (the factor of two
    converts ordinary covariance to the anticommutator convention).
    """
    noise_mean = np.asarray(noise_mean, dtype=float)
    noise_cov = require_symmetric(noise_cov, "noise_cov")
    w = np.linalg.eigvalsh(noise_cov)
    if w[0] < -1e-12 * max(1.0, w[-1]):
        raise DefinitenessError(
            f"noise covariance must be positive semidefinite, min eigenvalue {w[0]:.6g}"
        )
    return GaussianState(mean=state.mean + noise_mean, cov=state.cov + 2.0 * noise_cov)
