"""Closed-form pretty good measurement for Gaussian displacement ensembles.

The PGM of a displaced-state ensemble with Gaussian prior is itself Gaussian:
every POVM element is a common seed state sigma displaced to an outcome point
y(x), scaled by a constant density.  This module computes the seed, the
outcome map, the conditional distribution of the estimate, and the resulting
mean squared error, all in closed form.
"""

from dataclasses import dataclass

import numpy as np

from .ensembles import GaussianEnsemble, average_state
from .errors import ConsistencyError, SingularityError, ValidationError
from .states import GaussianState, normalization_constant
from .symplectic import (
    FAITHFUL_MARGIN,
    sqrt_I_plus_VOmega_inv2,
    symplectic_spectrum,
    williamson,
)

# Agreement required between the two closed forms of the mean squared error.
MSE_FORM_TOL = 1e-10
# Monte Carlo batching bound; fixed so that a given seed yields a fixed stream.
_MC_BATCH = 250_000


@dataclass(frozen=True)
class PGMDescription:
    """Gaussian data of the pretty good measurement.

    The POVM element at parameter x is
    prefactor * D(-y) sigma D(y) with y = anchor + J L (x - mu),
    where sigma is the zero-mean seed state below and D the phase-space
    displacement.  Q and rho_bar are kept for reuse by the instrument layer.
    """

    sigma: GaussianState
    J: np.ndarray
    anchor: np.ndarray
    prefactor: float
    Q: np.ndarray
    rho_bar: GaussianState


def pgm_description(e: GaussianEnsemble, margin: float = FAITHFUL_MARGIN) -> PGMDescription:
    """Compute the closed-form PGM of a Gaussian displacement ensemble.

    The seed covariance is -V + Q V (2 L Sigma L^T)^-1 V Q^T with V the
    average-state covariance and Q = sqrt(I + (V Omega)^-2); the outcome
    Jacobian is J = Q V (2 L Sigma L^T)^-1.

    Raises:
        ConsistencyError: if the computed seed state fails faithfulness,
            which would contradict the closed form.
    """
    rho_bar = average_state(e)
    V = rho_bar.cov
    dec = williamson(V)
    Q = sqrt_I_plus_VOmega_inv2(V, margin=margin, dec=dec)
    A = 2.0 * e.L @ e.Sigma @ e.L.T  # equals V - V0 by construction
    QV = Q @ V
    V_sigma = -V + QV @ np.linalg.solve(A, V @ Q.T)
    V_sigma = 0.5 * (V_sigma + V_sigma.T)
    J = np.linalg.solve(A, QV.T).T

    nu_sigma = symplectic_spectrum(V_sigma)
    if nu_sigma[-1] <= 1.0 + margin:
        raise ConsistencyError(
            f"PGM seed state lost faithfulness: min symplectic eigenvalue "
            f"{nu_sigma[-1]:.12g}"
        )
    prefactor = abs(np.linalg.det(J @ e.L)) / (2.0 * np.pi) ** e.n
    sigma = GaussianState(mean=np.zeros(2 * e.n), cov=V_sigma)
    return PGMDescription(
        sigma=sigma, J=J, anchor=rho_bar.mean, prefactor=prefactor, Q=Q, rho_bar=rho_bar
    )


def outcome_from_parameter(
    d: PGMDescription, e: GaussianEnsemble, x: np.ndarray
) -> np.ndarray:
    """Outcome point y = anchor + J L (x - mu) labeling the POVM element at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return d.anchor + d.J @ e.L @ (x - e.mu)


def parameter_from_outcome(
    d: PGMDescription, e: GaussianEnsemble, y: np.ndarray
) -> np.ndarray:
    """Invert the outcome map; the estimate x for a measured point y."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    JL = d.J @ e.L
    try:
        return e.mu + np.linalg.solve(JL, y - d.anchor)
    except np.linalg.LinAlgError:
        raise SingularityError("outcome map J L is singular")


@dataclass(frozen=True)
class ConditionalOutcome:
    """Law of the estimate given the true parameter.

    Conditioned on x, the measured estimate is Gaussian with mean
    mu + matrix (x - mu) and fixed covariance cov; matrix is the contraction
    A = L^-1 J^-1 L and cov equals Sigma - A Sigma A^T.
    """

    matrix: np.ndarray
    mu: np.ndarray
    cov: np.ndarray

    def mean(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.mu + self.matrix @ (x - self.mu)


def conditional_outcome(
    e: GaussianEnsemble, d: PGMDescription | None = None
) -> ConditionalOutcome:
    """Conditional outcome distribution of the PGM estimate.

    Raises ConsistencyError if the conditional covariance loses positive
    definiteness, which the closed form forbids.
    """
    if d is None:
        d = pgm_description(e)
    A = np.linalg.solve(e.L, np.linalg.solve(d.J, e.L))
    cov = e.Sigma - A @ e.Sigma @ A.T
    cov = 0.5 * (cov + cov.T)
    w = np.linalg.eigvalsh(cov)
    if w[0] <= 0.0:
        raise ConsistencyError(
            f"conditional covariance lost positive definiteness: "
            f"min eigenvalue {w[0]:.6g}"
        )
    return ConditionalOutcome(matrix=A, mu=e.mu, cov=cov)


def mse_closed_form(
    e: GaussianEnsemble, d: PGMDescription | None = None, tol: float = MSE_FORM_TOL
) -> float:
    """Mean squared error of the PGM estimate, 2 Tr[(I - 2 Sigma L^T V^-1 Q^-1 L) Sigma].

    Evaluates the equivalent contraction form 2 Tr[(I - L^-1 J^-1 L) Sigma] as
    well and insists the two agree to relative tolerance tol.
    """
    if d is None:
        d = pgm_description(e)
    V = d.rho_bar.cov
    K = np.linalg.solve(V, np.linalg.solve(d.Q, e.L))
    direct = 2.0 * np.trace((np.eye(2 * e.n) - 2.0 * e.Sigma @ e.L.T @ K) @ e.Sigma)
    A = np.linalg.solve(e.L, np.linalg.solve(d.J, e.L))
    via_j = 2.0 * np.trace((np.eye(2 * e.n) - A) @ e.Sigma)
    if abs(direct - via_j) > tol * max(1.0, abs(via_j)):
        raise ConsistencyError(
            f"MSE forms disagree: {direct!r} vs {via_j!r}"
        )
    return float(direct)


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    stderr: float
    trials: int


def mse_monte_carlo(
    e: GaussianEnsemble, trials: int, rng: np.random.Generator
) -> MonteCarloResult:
    """Estimate the MSE by sampling the conditional outcome law.

    Draws x from the prior and the estimate from N(mean(x), cov), accumulating
    the squared error in fixed-size batches so a given generator state always
    produces the same result.
    """
    if trials < 1:
        raise ValidationError(f"trials must be positive, got {trials}")
    co = conditional_outcome(e)
    C_prior = np.linalg.cholesky(e.Sigma)
    C_cond = np.linalg.cholesky(co.cov)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        m = min(_MC_BATCH, trials - done)
        x = e.mu + rng.standard_normal((m, 2 * e.n)) @ C_prior.T
        est = co.mu + (x - e.mu) @ co.matrix.T + rng.standard_normal((m, 2 * e.n)) @ C_cond.T
        sq = np.sum((x - est) ** 2, axis=1)
        total += float(np.sum(sq))
        total_sq += float(np.sum(sq ** 2))
        done += m
    mean = total / trials
    var = max(total_sq / trials - mean ** 2, 0.0)
    stderr = np.sqrt(var / trials)
    return MonteCarloResult(estimate=mean, stderr=float(stderr), trials=trials)


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the structural identities of the closed-form PGM."""

    det_residual: float  # |det J det(L)^2 det Sigma - Z^2| / Z^2
    contraction_max_eig: float  # max eig of symmetrized (I - J)(V - V0); negative
    born_residual: float | None  # n = 1 only; relative Born-rule error


def identity_checks(
    e: GaussianEnsemble,
    x: np.ndarray | None = None,
    fock_cutoff: int | None = 40,
) -> IdentityReport:
    """Evaluate the determinant identity, the contraction sign, and the Born rule.

    det J must equal Z^2 / (det(L)^2 det Sigma) with Z the normalization
    constant of the average state, and (I - J)(V - V0) is negative definite.
    For single-mode ensembles with fock_cutoff set, also compares
    Tr[E_x rho_bar] against the prior density at x (default x = mu).
    """
    d = pgm_description(e)
    Z = normalization_constant(d.rho_bar)
    target = Z ** 2 / (np.linalg.det(e.L) ** 2 * np.linalg.det(e.Sigma))
    det_residual = abs(np.linalg.det(d.J) - target) / abs(target)

    M = (np.eye(2 * e.n) - d.J) @ (d.rho_bar.cov - e.rho0.cov)
    contraction_max_eig = float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])

    born = None
    if e.n == 1 and fock_cutoff is not None:
        from .fock import born_rule_residual  # deferred: fock depends on this module

        born = born_rule_residual(e, e.mu if x is None else x, cutoff=fock_cutoff)
    return IdentityReport(
        det_residual=float(det_residual),
        contraction_max_eig=contraction_max_eig,
        born_residual=born,
    )
