"""Gaussian instrument describing the post-measurement states of the PGM.

Replacing the rank-one back-projection of the measurement with a chosen
recycling state tau (strictly below the average state in covariance) yields a
Gaussian instrument: the outcome density over x is a Gaussian times a constant
Jacobian, and the post-measurement state is a fixed faithful state displaced
linearly in the outcome.
"""

from dataclasses import dataclass

import numpy as np

from .ensembles import GaussianEnsemble
from .errors import ConsistencyError, DefinitenessError, ValidationError
from .pgm import PGMDescription, pgm_description
from .states import GaussianState, classical_mix
from .symplectic import (
    FAITHFUL_MARGIN,
    sqrt_I_plus_VOmega_inv2,
    symplectic_spectrum,
    williamson,
)

# V_rho - V_tau must exceed this margin in its smallest eigenvalue.
GAP_MARGIN = 1e-9


@dataclass(frozen=True)
class InstrumentDescription:
    """Closed-form data of the Gaussian instrument.

    The post-measurement state at parameter x is rho7 displaced by
    z = z_matrix (x - mu); the outcome density over x is
    t(x) = det_jl * N(y(x); tau.mean, outcome_cov) with
    y(x) = pgm.anchor + y_matrix (x - mu) the PGM outcome map.
    """

    tau: GaussianState
    V5: np.ndarray
    J5: np.ndarray
    J6: np.ndarray
    J7: np.ndarray
    rho7: GaussianState
    z_matrix: np.ndarray
    y_matrix: np.ndarray
    outcome_cov: np.ndarray
    det_jl: float
    pgm: PGMDescription
    mu: np.ndarray


def _require_strict_gap(V: np.ndarray, V_tau: np.ndarray, margin: float) -> None:
    w = np.linalg.eigvalsh(V - V_tau)
    if w[0] <= margin:
        raise DefinitenessError(
            f"tau must sit strictly below the average state: min eigenvalue of "
            f"V_rho - V_tau is {w[0]:.6g}, needs more than {margin:g}"
        )


def instrument_description(
    e: GaussianEnsemble,
    tau: GaussianState,
    gap_margin: float = GAP_MARGIN,
    margin: float = FAITHFUL_MARGIN,
) -> InstrumentDescription:
    """Compute the Gaussian instrument induced by recycling state tau.

    Args:
        e: the displacement ensemble.
        tau: faithful recycling state with covariance strictly below the
            average-state covariance (margin gap_margin on the eigenvalues).
        gap_margin: strictness margin for V_rho - V_tau.
        margin: faithfulness margin used on derived states.

    Raises:
        DefinitenessError: if tau is not faithful or the covariance gap fails.
        ConsistencyError: if a derived state loses faithfulness, which the
            closed form rules out.
    """
    if tau.n != e.n:
        raise ValidationError(f"mode mismatch: tau has {tau.n}, ensemble has {e.n}")
    nu_tau = symplectic_spectrum(tau.cov)
    if nu_tau[-1] <= 1.0 + margin:
        raise DefinitenessError(
            f"tau must be faithful: min symplectic eigenvalue {nu_tau[-1]:.12g}"
        )
    d = pgm_description(e, margin=margin)
    V = d.rho_bar.cov
    r = d.rho_bar.mean
    _require_strict_gap(V, tau.cov, gap_margin)

    gap = V - tau.cov
    QV = d.Q @ V
    J5 = np.linalg.solve(gap, QV.T).T
    V5 = -V + QV @ np.linalg.solve(gap, V @ d.Q.T)
    V5 = 0.5 * (V5 + V5.T)
    nu5 = symplectic_spectrum(V5)
    if nu5[-1] <= 1.0 + margin:
        raise ConsistencyError(
            f"intermediate state V5 lost faithfulness: min symplectic "
            f"eigenvalue {nu5[-1]:.12g}"
        )

    V0 = e.rho0.cov
    dec0 = williamson(V0)
    Q0 = sqrt_I_plus_VOmega_inv2(V0, margin=margin, dec=dec0)
    total = V5 + V0
    Q0V0 = Q0 @ V0
    J6 = np.linalg.solve(total, Q0V0.T).T
    V7 = V0 - Q0V0 @ np.linalg.solve(total, V0 @ Q0.T)
    V7 = 0.5 * (V7 + V7.T)
    nu7 = symplectic_spectrum(V7)
    if nu7[-1] <= 1.0 + margin:
        raise ConsistencyError(
            f"post-measurement state lost faithfulness: min symplectic "
            f"eigenvalue {nu7[-1]:.12g}"
        )
    r7 = r + J6 @ (J5 @ (tau.mean - r))
    rho7 = GaussianState(mean=r7, cov=V7)

    I = np.eye(2 * e.n)
    J7 = np.linalg.solve(d.J.T, (I - J6).T).T  # (I - J6) J^-1
    z_matrix = (I - J6) @ e.L  # equals J7 J L
    y_matrix = d.J @ e.L
    outcome_cov = 0.5 * (tau.cov + d.sigma.cov)
    det_jl = abs(np.linalg.det(y_matrix))
    return InstrumentDescription(
        tau=tau,
        V5=V5,
        J5=J5,
        J6=J6,
        J7=J7,
        rho7=rho7,
        z_matrix=z_matrix,
        y_matrix=y_matrix,
        outcome_cov=outcome_cov,
        det_jl=det_jl,
        pgm=d,
        mu=e.mu,
    )


def post_measurement_state(d: InstrumentDescription, x: np.ndarray) -> GaussianState:
    """State left behind when the instrument reports parameter x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return GaussianState(mean=d.rho7.mean + d.z_matrix @ (x - d.mu), cov=d.rho7.cov)


def _normal_density(delta: np.ndarray, cov: np.ndarray) -> float:
    C = np.linalg.cholesky(cov)
    v = np.linalg.solve(C, delta)
    logdet = 2.0 * float(np.sum(np.log(np.diag(C))))
    k = delta.shape[0]
    return float(np.exp(-0.5 * (v @ v) - 0.5 * logdet - 0.5 * k * np.log(2.0 * np.pi)))


def outcome_density(d: InstrumentDescription, x: np.ndarray) -> float:
    """Probability density t(x) of the instrument reporting x on the average state.

    t(x) = |det(J L)| * N(y(x); r_tau, (V_tau + V_sigma)/2), which integrates
    to one over x because y is an affine bijection.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = d.pgm.anchor + d.y_matrix @ (x - d.mu)
    return d.det_jl * _normal_density(y - d.tau.mean, d.outcome_cov)


def expected_output_state(d: InstrumentDescription) -> GaussianState:
    """Average post-measurement state over the outcome distribution.

    Classically mixes rho7 over the Gaussian of z = J7 (y - r_rho) with y
    distributed per the outcome density; faithfulness is inherited from rho7.
    """
    shift = d.J7 @ (d.tau.mean - d.pgm.rho_bar.mean)
    noise = d.J7 @ d.outcome_cov @ d.J7.T
    return classical_mix(d.rho7, shift, noise)


@dataclass(frozen=True)
class DefinitenessReport:
    """Signed eigenvalue margins the closed forms guarantee.

    pgm_contraction_max_eig must be negative, post_mix_min_eig positive, and
    every *_margin field positive (symplectic eigenvalue minus one).
    """

    pgm_contraction_max_eig: float
    post_mix_min_eig: float
    sigma_margin: float
    v5_margin: float
    rho7_margin: float
    tau_tilde_margin: float


def definiteness_report(e: GaussianEnsemble, tau: GaussianState) -> DefinitenessReport:
    """Evaluate the sign conditions proved for the PGM and instrument data."""
    d = instrument_description(e, tau)
    I = np.eye(2 * e.n)
    M = (I - d.pgm.J) @ (d.pgm.rho_bar.cov - e.rho0.cov)
    pgm_eig = float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])
    P = (I - d.J6) @ (d.V5 + e.rho0.cov)
    post_eig = float(np.linalg.eigvalsh(0.5 * (P + P.T))[0])
    tt = expected_output_state(d)
    return DefinitenessReport(
        pgm_contraction_max_eig=pgm_eig,
        post_mix_min_eig=post_eig,
        sigma_margin=float(symplectic_spectrum(d.pgm.sigma.cov)[-1] - 1.0),
        v5_margin=float(symplectic_spectrum(d.V5)[-1] - 1.0),
        rho7_margin=float(symplectic_spectrum(d.rho7.cov)[-1] - 1.0),
        tau_tilde_margin=float(symplectic_spectrum(tt.cov)[-1] - 1.0),
    )
