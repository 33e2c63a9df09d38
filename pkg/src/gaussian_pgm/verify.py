"""Verification battery: every structural identity, one named check each.

Used by the CLI verify command and reused by the test suite.  The fast level
exercises the closed-form identities only; the full level adds the truncated
Fock-space comparisons for single-mode ensembles.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .config import DEFAULT_TOLERANCES, Tolerances
from .ensembles import GaussianEnsemble, average_state, state_at
from .golden import compose_chain, embed, exp_embedded, gaussian_exponent
from .instrument import (
    InstrumentDescription,
    expected_output_state,
    instrument_description,
)
from .pgm import (
    conditional_outcome,
    mse_closed_form,
    outcome_from_parameter,
    pgm_description,
)
from .states import GaussianState, normalization_constant
from .symplectic import (
    cayley_exp,
    cayley_w,
    covariance_from_hamiltonian,
    hamiltonian_from_covariance,
    omega,
    symplectic_spectrum,
    w_matrix,
    williamson,
)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    skipped: bool = False


def _below(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold), bool(value <= threshold))


def _above(name: str, value: float, threshold: float) -> Check:
    return Check(name, float(value), float(threshold), bool(value > threshold))


def _skipped(name: str) -> Check:
    return Check(name, float("nan"), float("nan"), True, skipped=True)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def measurement_composition_residuals(e: GaussianEnsemble, x: np.ndarray) -> dict:
    """Golden-rule residuals for the POVM element at x.

    Composing exp[H_rho/2] exp[-H_rho_x] exp[H_rho/2] must reproduce the
    Hamiltonian of the seed covariance, center the linear part at the outcome
    point, and carry the prior quadratic form in its scalar.
    """
    d = pgm_description(e)
    q = compose_chain(
        gaussian_exponent(d.rho_bar, 0.5),
        gaussian_exponent(state_at(e, x), -1.0),
        gaussian_exponent(d.rho_bar, 0.5),
    )
    H4 = hamiltonian_from_covariance(d.sigma.cov)
    X_target = -1j * omega(e.n) @ H4
    y = outcome_from_parameter(d, e, x)
    quad = float((x - e.mu) @ np.linalg.solve(e.Sigma, x - e.mu))
    xi = 1j * q.a + y @ H4 @ y
    return {
        "X": _rel(q.X, X_target),
        "s": float(np.linalg.norm(q.s - q.X @ y) / max(1.0, np.linalg.norm(q.X @ y))),
        "xi": abs(xi - quad) / max(1.0, abs(quad)),
    }


def instrument_composition_residuals(
    e: GaussianEnsemble, tau: GaussianState, x: np.ndarray, di: InstrumentDescription | None = None
) -> dict:
    """Golden-rule residuals for the instrument data at x.

    The chain exp[H_rho/2] exp[-H_tau] exp[H_rho/2] must carry the
    intermediate covariance V5 centered at y5, and sandwiching its quadratic
    part between exp[-H_rho_x/2] factors must carry the post-measurement
    covariance centered at y6.
    """
    if di is None:
        di = instrument_description(e, tau)
    rho_bar = di.pgm.rho_bar
    q5 = compose_chain(
        gaussian_exponent(rho_bar, 0.5),
        gaussian_exponent(tau, -1.0),
        gaussian_exponent(rho_bar, 0.5),
    )
    H5 = hamiltonian_from_covariance(di.V5)
    X5_target = -1j * omega(e.n) @ H5
    y5 = rho_bar.mean + di.J5 @ (tau.mean - rho_bar.mean)

    rho_x = state_at(e, x)
    q6 = compose_chain(
        gaussian_exponent(rho_x, -0.5),
        gaussian_exponent(GaussianState(mean=y5, cov=di.V5), -1.0),
        gaussian_exponent(rho_x, -0.5),
    )
    H6 = hamiltonian_from_covariance(di.rho7.cov)
    X6_target = -1j * omega(e.n) @ H6
    y6 = rho_x.mean + di.J6 @ (y5 - rho_x.mean)
    return {
        "X5": _rel(q5.X, X5_target),
        "s5": float(np.linalg.norm(q5.s - q5.X @ y5) / max(1.0, np.linalg.norm(q5.X @ y5))),
        "X6": _rel(q6.X, X6_target),
        "s6": float(np.linalg.norm(q6.s - q6.X @ y6) / max(1.0, np.linalg.norm(q6.X @ y6))),
    }


def _state_checks(label: str, V: np.ndarray, tol: Tolerances) -> list[Check]:
    dec = williamson(V)
    out = [
        _above(f"{label}_faithful_margin", dec.nu[-1] - 1.0, tol.faithful_margin),
        _below(
            f"{label}_williamson_reconstruction",
            np.linalg.norm(dec.S.T @ dec.D @ dec.S - V) / max(1.0, np.linalg.norm(V)),
            tol.williamson,
        ),
        _below(
            f"{label}_williamson_symplectic",
            np.linalg.norm(dec.S.T @ omega(len(dec.nu)) @ dec.S - omega(len(dec.nu))),
            tol.williamson,
        ),
    ]
    if dec.nu[-1] > 1.0 + tol.faithful_margin:
        from .symplectic import sqrt_factorization_residual

        H = hamiltonian_from_covariance(V, dec=dec)
        out.append(
            _below(
                f"{label}_sqrt_factorization",
                sqrt_factorization_residual(V),
                tol.sqrt_factorization,
            )
        )
        out.append(
            _below(
                f"{label}_hv_roundtrip",
                np.linalg.norm(covariance_from_hamiltonian(H) - V) / max(1.0, np.linalg.norm(V)),
                tol.roundtrip,
            )
        )
        W = w_matrix(V)
        E = cayley_exp(W)
        out.append(
            _below(
                f"{label}_cayley_identity",
                np.linalg.norm(E - expm(1j * omega(len(dec.nu)) @ H))
                / max(1.0, np.linalg.norm(E)),
                tol.roundtrip,
            )
        )
        out.append(
            _below(
                f"{label}_cayley_roundtrip",
                np.linalg.norm(cayley_w(E) - W) / max(1.0, np.linalg.norm(W)),
                tol.roundtrip,
            )
        )
    return out


def run_checks(
    e: GaussianEnsemble,
    tau: GaussianState | None = None,
    level: str = "fast",
    cutoff: int = 40,
    grid: int = 64,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[Check]:
    """Run the verification battery and return one Check per identity."""
    if level not in ("fast", "full"):
        raise ValueError(f"level must be fast or full, got {level!r}")
    checks: list[Check] = []
    d = pgm_description(e)
    rho_bar = d.rho_bar
    I = np.eye(2 * e.n)

    checks += _state_checks("rho0", e.rho0.cov, tol)
    checks += _state_checks("average", rho_bar.cov, tol)
    checks.append(
        _above("sigma_faithful_margin", symplectic_spectrum(d.sigma.cov)[-1] - 1.0, tol.faithful_margin)
    )

    Z = normalization_constant(rho_bar)
    target = Z ** 2 / (np.linalg.det(e.L) ** 2 * np.linalg.det(e.Sigma))
    checks.append(
        _below("determinant_identity", abs(np.linalg.det(d.J) - target) / abs(target), tol.det_identity)
    )
    M = (I - d.J) @ (rho_bar.cov - e.rho0.cov)
    checks.append(
        _below("pgm_contraction_max_eig", np.linalg.eigvalsh(0.5 * (M + M.T))[-1], 0.0)
    )

    co = conditional_outcome(e, d)
    checks.append(_above("conditional_cov_min_eig", np.linalg.eigvalsh(co.cov)[0], 0.0))
    mse = mse_closed_form(e, d)
    K = np.linalg.solve(rho_bar.cov, np.linalg.solve(d.Q, e.L))
    direct = 2.0 * np.trace((I - 2.0 * e.Sigma @ e.L.T @ K) @ e.Sigma)
    via_j = 2.0 * np.trace((I - co.matrix) @ e.Sigma)
    checks.append(
        _below("mse_two_forms", abs(direct - via_j) / max(1.0, abs(via_j)), tol.mse_forms)
    )
    B = co.matrix - I
    decomposition = float(np.trace(B @ e.Sigma @ B.T) + np.trace(co.cov))
    checks.append(
        _below("mse_decomposition", abs(decomposition - mse) / max(1.0, abs(mse)), tol.mse_forms * 10)
    )

    x_probe = e.mu.copy()
    x_probe[0] += 0.5
    res1 = measurement_composition_residuals(e, x_probe)
    checks.append(_below("compose_measurement", max(res1.values()), tol.compose))
    q = gaussian_exponent(rho_bar, 0.5)
    checks.append(
        _below(
            "embedded_exponential",
            np.linalg.norm(exp_embedded(q) - expm(embed(q)))
            / max(1.0, np.linalg.norm(exp_embedded(q))),
            tol.compose,
        )
    )

    di = None
    if tau is not None:
        di = instrument_description(e, tau, gap_margin=tol.gap_margin)
        checks.append(
            _above("gap_min_eig", np.linalg.eigvalsh(rho_bar.cov - tau.cov)[0], tol.gap_margin)
        )
        for label, V in (
            ("v5", di.V5),
            ("rho7", di.rho7.cov),
            ("tau_tilde", expected_output_state(di).cov),
        ):
            checks.append(
                _above(f"{label}_faithful_margin", symplectic_spectrum(V)[-1] - 1.0, tol.faithful_margin)
            )
        P = (I - di.J6) @ (di.V5 + e.rho0.cov)
        checks.append(
            _above("post_mix_min_eig", np.linalg.eigvalsh(0.5 * (P + P.T))[0], 0.0)
        )
        J7_alt = (
            2.0 * (I - di.J6) @ e.L @ e.Sigma @ e.L.T
            @ np.linalg.inv(rho_bar.cov) @ np.linalg.inv(d.Q)
        )
        checks.append(
            _below(
                "recycling_jacobian_two_forms",
                np.linalg.norm(di.J7 - J7_alt) / max(1.0, np.linalg.norm(di.J7)),
                tol.det_identity,
            )
        )
        res3 = instrument_composition_residuals(e, tau, x_probe, di)
        checks.append(_below("compose_instrument", max(res3.values()), tol.compose))

    if level == "full":
        if e.n != 1:
            checks.append(_skipped("fock_oracle_requires_single_mode"))
            return checks
        from . import fock
        from .instances import sweep_points
        from .instrument import outcome_density, post_measurement_state

        born = 0.0
        dist = 0.0
        for x in sweep_points(e):
            born = max(born, fock.born_rule_residual(e, x, cutoff))
            direct_op = fock.pgm_operator_direct(e, x, cutoff)
            closed_op = fock.pgm_operator_closed(e, x, cutoff)
            dist = max(dist, fock.trace_distance(direct_op, closed_op))
        checks.append(_below("born_rule", born, tol.born))
        checks.append(_below("povm_element_distance", dist, tol.trace_distance))
        rep = fock.completeness_check(e, cutoff=cutoff, grid=grid)
        checks.append(_below("povm_completeness", rep.residual, tol.completeness))

        if tau is not None:
            t_res = 0.0
            p_res = 0.0
            for x in sweep_points(e):
                t_direct, post_direct = fock.instrument_direct(e, tau, x, cutoff)
                t_closed = outcome_density(di, x)
                t_res = max(t_res, abs(t_direct - t_closed) / t_closed)
                post_closed = fock.gaussian_density_matrix(
                    post_measurement_state(di, x), cutoff
                )
                p_res = max(p_res, fock.trace_distance(post_direct, post_closed))
            checks.append(_below("outcome_density", t_res, tol.born))
            checks.append(_below("post_state_distance", p_res, tol.trace_distance))
            integrated, total = fock.expected_output_direct(e, tau, cutoff=cutoff, grid=grid)
            closed_avg = fock.gaussian_density_matrix(expected_output_state(di), cutoff)
            checks.append(
                _below(
                    "expected_output_distance",
                    fock.trace_distance(integrated, closed_avg),
                    tol.grid_distance,
                )
            )
            checks.append(_below("outcome_density_mass", abs(total - 1.0), tol.grid_distance))
    return checks
