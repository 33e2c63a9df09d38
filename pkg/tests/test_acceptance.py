"""End-to-end acceptance battery.

Each test covers one headline guarantee, with explicit tolerances and a
runtime budget, and prints a one-line scorecard entry on the real stdout so a
full run reads as a summary even under pytest capture.
"""

import json
import sys
import time

import numpy as np
import pytest
from scipy.linalg import expm

from gaussian_pgm.cli import ensemble_to_spec, main
from gaussian_pgm.ensembles import average_state
from gaussian_pgm.fock import (
    born_rule_residual,
    completeness_check,
    expected_output_direct,
    gaussian_density_matrix,
    instrument_direct,
    pgm_operator_closed,
    pgm_operator_direct,
    trace_distance,
)
from gaussian_pgm.instances import (
    fock_friendly_ensemble,
    random_admissible_tau,
    random_ensemble,
    scalar_instance,
    sweep_points,
)
from gaussian_pgm.instrument import (
    definiteness_report,
    expected_output_state,
    instrument_description,
    outcome_density,
    post_measurement_state,
)
from gaussian_pgm.pgm import (
    conditional_outcome,
    mse_closed_form,
    mse_monte_carlo,
    pgm_description,
)
from gaussian_pgm.states import normalization_constant
from gaussian_pgm.symplectic import (
    cayley_exp,
    cayley_w,
    covariance_from_hamiltonian,
    hamiltonian_from_covariance,
    omega,
    sqrt_factorization_residual,
    w_matrix,
    williamson,
)
from gaussian_pgm.verify import measurement_composition_residuals

CUTOFF = 40
SCALAR_MSE = 4.0 * (1.0 - 2.0 / np.sqrt(15.0))


@pytest.fixture()
def scorecard(request):
    """One pass/fail line per criterion, written past the output capture."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def write(num: int, label: str, ok: bool, detail: str):
        line = f"criterion {num} [{label}]: {'PASS' if ok else 'FAIL'} ({detail})\n"
        if capman is not None:
            with capman.global_and_fixture_disabled():
                sys.stdout.write(line)
                sys.stdout.flush()
        else:
            sys.stdout.write(line)

    return write


@pytest.fixture(scope="module")
def povm_sweep():
    """Scalar instance plus 20 random single-mode ensembles, both POVM routes
    and the Born rule evaluated at every sweep point."""
    start = time.perf_counter()
    rng = np.random.default_rng(0)
    ensembles = [scalar_instance()[0]] + [fock_friendly_ensemble(rng) for _ in range(20)]
    max_dist = 0.0
    max_born = 0.0
    for e in ensembles:
        for x in sweep_points(e):
            direct = pgm_operator_direct(e, x, CUTOFF)
            closed = pgm_operator_closed(e, x, CUTOFF)
            max_dist = max(max_dist, trace_distance(direct, closed))
            max_born = max(max_born, born_rule_residual(e, x, CUTOFF))
    return {"dist": max_dist, "born": max_born, "elapsed": time.perf_counter() - start}


def test_criterion_1_povm_closed_form_matches_direct(povm_sweep, scorecard):
    ok = povm_sweep["dist"] <= 1e-6 and povm_sweep["elapsed"] < 30.0
    scorecard(
        1,
        "POVM closed form vs direct sandwich",
        ok,
        f"max trace distance {povm_sweep['dist']:.3e} <= 1e-06, "
        f"elapsed {povm_sweep['elapsed']:.1f}s < 30s",
    )
    assert povm_sweep["dist"] <= 1e-6
    assert povm_sweep["elapsed"] < 30.0


def test_criterion_2_born_rule(povm_sweep, scorecard):
    ok = povm_sweep["born"] <= 1e-6
    scorecard(
        2,
        "Born rule on closed-form elements",
        ok,
        f"max relative error {povm_sweep['born']:.3e} <= 1e-06",
    )
    assert ok


def test_criterion_3_mse_forms_and_monte_carlo(scorecard):
    start = time.perf_counter()
    gen = np.random.default_rng(1)
    cases = [scalar_instance()[0]] + [random_ensemble(1 + k % 3, gen) for k in range(10)]
    worst_dev = 0.0
    worst_forms = 0.0
    for k, e in enumerate(cases):
        d = pgm_description(e)
        co = conditional_outcome(e, d)
        mse = mse_closed_form(e, d)
        B = co.matrix - np.eye(2 * e.n)
        second = float(np.trace(B @ e.Sigma @ B.T) + np.trace(co.cov))
        worst_forms = max(worst_forms, abs(mse - second) / abs(second))
        mc = mse_monte_carlo(e, 1_000_000, np.random.default_rng(1000 + k))
        worst_dev = max(worst_dev, abs(mc.estimate - mse) / mc.stderr)
    scalar_err = abs(mse_closed_form(cases[0]) - SCALAR_MSE) / SCALAR_MSE
    elapsed = time.perf_counter() - start
    ok = worst_forms <= 1e-10 and worst_dev <= 3.0 and scalar_err <= 1e-12 and elapsed < 60.0
    scorecard(
        3,
        "MSE closed forms and Monte Carlo",
        ok,
        f"forms residual {worst_forms:.2e} <= 1e-10, worst deviation "
        f"{worst_dev:.2f} <= 3 stderr, elapsed {elapsed:.1f}s < 60s",
    )
    assert worst_forms <= 1e-10
    assert worst_dev <= 3.0
    assert scalar_err <= 1e-12
    assert elapsed < 60.0


def test_criterion_4_instrument_direct_matches_closed_form(scorecard):
    start = time.perf_counter()
    e, tau = scalar_instance()
    di = instrument_description(e, tau)
    t_res = 0.0
    p_res = 0.0
    for x in sweep_points(e):
        t_direct, post_direct = instrument_direct(e, tau, x, CUTOFF)
        t_closed = outcome_density(di, x)
        t_res = max(t_res, abs(t_direct - t_closed) / t_closed)
        post_closed = gaussian_density_matrix(post_measurement_state(di, x), CUTOFF)
        p_res = max(p_res, trace_distance(post_direct, post_closed))
    integrated, total = expected_output_direct(e, tau, cutoff=CUTOFF, grid=64)
    closed_avg = gaussian_density_matrix(expected_output_state(di), CUTOFF)
    avg_dist = trace_distance(integrated, closed_avg)
    elapsed = time.perf_counter() - start
    ok = p_res <= 1e-6 and t_res <= 1e-6 and avg_dist <= 1e-3 and elapsed < 120.0
    scorecard(
        4,
        "instrument direct vs closed form",
        ok,
        f"post distance {p_res:.2e} <= 1e-06, density residual {t_res:.2e} <= 1e-06, "
        f"averaged output distance {avg_dist:.2e} <= 1e-03, elapsed {elapsed:.1f}s < 120s",
    )
    assert p_res <= 1e-6
    assert t_res <= 1e-6
    assert avg_dist <= 1e-3
    assert abs(total - 1.0) <= 1e-3
    assert elapsed < 120.0


def test_criterion_5_matrix_identity_suite(scorecard):
    start = time.perf_counter()
    gen = np.random.default_rng(5)
    worst = dict.fromkeys(
        ("factorization", "williamson", "symplectic", "roundtrip", "cayley", "determinant", "composition"),
        0.0,
    )
    for k in range(100):
        n = 1 + k % 4
        e = random_ensemble(n, gen)
        rho_bar = average_state(e)
        for V in (e.rho0.cov, rho_bar.cov):
            dec = williamson(V)
            scale = max(1.0, np.linalg.norm(V))
            worst["williamson"] = max(
                worst["williamson"], np.linalg.norm(dec.S.T @ dec.D @ dec.S - V) / scale
            )
            worst["symplectic"] = max(
                worst["symplectic"], np.linalg.norm(dec.S.T @ omega(n) @ dec.S - omega(n))
            )
            worst["factorization"] = max(worst["factorization"], sqrt_factorization_residual(V))
            H = hamiltonian_from_covariance(V, dec=dec)
            worst["roundtrip"] = max(
                worst["roundtrip"],
                np.linalg.norm(covariance_from_hamiltonian(H) - V) / scale,
            )
            W = w_matrix(V)
            E = cayley_exp(W)
            worst["cayley"] = max(
                worst["cayley"],
                np.linalg.norm(E - expm(1j * omega(n) @ H)) / max(1.0, np.linalg.norm(E)),
                np.linalg.norm(cayley_w(E) - W) / max(1.0, np.linalg.norm(W)),
            )
        d = pgm_description(e)
        Z2 = normalization_constant(rho_bar) ** 2
        det_lhs = np.linalg.det(d.J) * np.linalg.det(e.L) ** 2 * np.linalg.det(e.Sigma)
        worst["determinant"] = max(worst["determinant"], abs(det_lhs - Z2) / Z2)
        x = e.mu.copy()
        x[0] += 0.5
        worst["composition"] = max(
            worst["composition"], max(measurement_composition_residuals(e, x).values())
        )
    elapsed = time.perf_counter() - start
    ok = (
        worst["factorization"] <= 1e-9
        and worst["williamson"] <= 1e-10
        and worst["symplectic"] <= 1e-10
        and worst["roundtrip"] <= 1e-10
        and worst["cayley"] <= 1e-10
        and worst["determinant"] <= 1e-9
        and worst["composition"] <= 1e-8
        and elapsed < 30.0
    )
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    scorecard(5, "matrix identity suite, 100 instances", ok, f"{detail}, elapsed {elapsed:.1f}s < 30s")
    assert worst["factorization"] <= 1e-9
    assert worst["williamson"] <= 1e-10
    assert worst["symplectic"] <= 1e-10
    assert worst["roundtrip"] <= 1e-10
    assert worst["cayley"] <= 1e-10
    assert worst["determinant"] <= 1e-9
    assert worst["composition"] <= 1e-8
    assert elapsed < 30.0


def test_criterion_6_definiteness_suite(scorecard):
    gen = np.random.default_rng(6)
    worst_contraction = -np.inf
    worst_mix = np.inf
    worst_margin = np.inf
    for k in range(100):
        n = 1 + k % 4
        e = random_ensemble(n, gen)
        tau = random_admissible_tau(e, gen)
        rep = definiteness_report(e, tau)
        worst_contraction = max(worst_contraction, rep.pgm_contraction_max_eig)
        worst_mix = min(worst_mix, rep.post_mix_min_eig)
        worst_margin = min(
            worst_margin, rep.sigma_margin, rep.v5_margin, rep.rho7_margin, rep.tau_tilde_margin
        )
    ok = worst_contraction < 0.0 and worst_mix > 0.0 and worst_margin > 0.0
    scorecard(
        6,
        "definiteness suite, 100 instances",
        ok,
        f"contraction max eig {worst_contraction:.2e} < 0, mix min eig {worst_mix:.2e} > 0, "
        f"faithfulness margin {worst_margin:.2e} > 0",
    )
    assert worst_contraction < 0.0
    assert worst_mix > 0.0
    assert worst_margin > 0.0


def test_criterion_7_povm_completeness(scalar, scorecard):
    e, _ = scalar
    fine = completeness_check(e, cutoff=CUTOFF, grid=64)
    coarse = completeness_check(e, cutoff=CUTOFF, grid=32)
    ok = fine.residual <= 1e-3 and coarse.residual > fine.residual
    scorecard(
        7,
        "POVM completeness quadrature",
        ok,
        f"residual {fine.residual:.2e} <= 1e-03 at grid 64, "
        f"{coarse.residual:.2e} at grid 32 shrinks under refinement",
    )
    assert fine.residual <= 1e-3
    assert coarse.residual > fine.residual


def test_criterion_8_deterministic_reports(tmp_path, scalar, scorecard):
    e, tau = scalar
    spec = tmp_path / "ensemble.json"
    spec.write_text(json.dumps(ensemble_to_spec(e, tau)))
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        code = main(["mse", str(spec), "--trials", "200000", "--seed", "7", "--out", str(out)])
        assert code == 0
    same = outs[0].read_bytes() == outs[1].read_bytes()
    scorecard(8, "fixed-seed reports are bit-identical", same, "two runs compared byte for byte")
    assert same
