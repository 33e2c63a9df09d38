"""Ensembles of displaced Gaussian states with a Gaussian prior.

The parameter x in R^2n is distributed as N(mu, Sigma); the state prepared at
x is the fiducial state displaced by L x, so its mean is r0 + L x and its
covariance stays V0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DefinitenessError, SingularityError, ValidationError
from .states import GaussianState
from .symplectic import (
    FAITHFUL_MARGIN,
    require_faithful,
    require_symmetric,
    symplectic_spectrum,
)

# Relative determinant floor below which L counts as singular.
DET_L_FLOOR = 1e-12


@dataclass(frozen=True)
class GaussianEnsemble:
    """Displacement ensemble {p(x), rho_x} with Gaussian prior.

    rho0 must be faithful, L invertible, Sigma symmetric positive definite.
    """

    rho0: GaussianState
    L: np.ndarray
    mu: np.ndarray
    Sigma: np.ndarray

    def __post_init__(self):
        n = self.rho0.n
        require_faithful(symplectic_spectrum(self.rho0.cov), FAITHFUL_MARGIN, "rho0")
        L = np.asarray(self.L, dtype=float)
        if L.shape != (2 * n, 2 * n):
            raise ValidationError(f"L has shape {L.shape}, expected ({2 * n}, {2 * n})")
        norm = np.linalg.norm(L, 2)
        if abs(np.linalg.det(L)) <= DET_L_FLOOR * max(norm, 1e-300) ** (2 * n):
            raise SingularityError("L is singular or too close to singular")
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.shape != (2 * n,):
            raise ValidationError(f"mu has shape {mu.shape}, expected ({2 * n},)")
        Sigma = require_symmetric(self.Sigma, "Sigma")
        w = np.linalg.eigvalsh(Sigma)
        if w[0] <= 0.0:
            raise DefinitenessError(
                f"Sigma must be positive definite, min eigenvalue {w[0]:.6g}"
            )
        for arr in (L, mu, Sigma):
            arr.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Sigma", Sigma)

    @property
    def n(self) -> int:
        return self.rho0.n


def state_at(e: GaussianEnsemble, x: np.ndarray) -> GaussianState:
    """The ensemble member at parameter x: mean r0 + L x, covariance V0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != e.mu.shape:
        raise ValidationError(f"x has shape {x.shape}, expected {e.mu.shape}")
    return GaussianState(mean=e.rho0.mean + e.L @ x, cov=e.rho0.cov)


def prior_density(e: GaussianEnsemble, x: np.ndarray) -> float:
    """Prior probability density p(x) = N(x; mu, Sigma)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = e.n
    C = np.linalg.cholesky(e.Sigma)
    y = np.linalg.solve(C, x - e.mu)
    logdet = 2.0 * float(np.sum(np.log(np.diag(C))))
    return float(np.exp(-0.5 * (y @ y) - 0.5 * logdet - n * np.log(2.0 * np.pi)))


def average_state(e: GaussianEnsemble) -> GaussianState:
    """Prior-averaged state: mean r0 + L mu, covariance V0 + 2 L Sigma L^T.

    The factor of two converts the ordinary prior covariance of the mean
    displacement into the anticommutator convention.
    """
    cov = e.rho0.cov + 2.0 * e.L @ e.Sigma @ e.L.T
    return GaussianState(mean=e.rho0.mean + e.L @ e.mu, cov=0.5 * (cov + cov.T))


def sample_prior(e: GaussianEnsemble, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw size parameter vectors from the prior; shape (size, 2n)."""
    C = np.linalg.cholesky(e.Sigma)
    z = rng.standard_normal((size, 2 * e.n))
    return e.mu + z @ C.T
