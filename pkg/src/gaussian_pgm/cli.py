"""Command line interface.

Subcommands take an ensemble description file (JSON) and print a JSON report
to stdout or --out.  Reports are deterministic for a fixed input and flags;
wall-clock timing goes to stderr only.  Exit codes: 0 on success, 2 when the
input fails validation, 1 when a computed consistency condition fails.
"""

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .ensembles import GaussianEnsemble, sample_prior
from .errors import BranchError, ConsistencyError, ValidationError
from .instrument import (
    definiteness_report,
    expected_output_state,
    instrument_description,
    outcome_density,
    post_measurement_state,
)
from .pgm import (
    conditional_outcome,
    mse_closed_form,
    mse_monte_carlo,
    outcome_from_parameter,
    pgm_description,
)
from .states import GaussianState, normalization_constant
from .symplectic import symplectic_spectrum
from .verify import run_checks

REPORT_VERSION = 1
SPEC_VERSION = 1


def _spec_array(obj: dict, key: str, shape: tuple, where: str = "spec") -> np.ndarray:
    if key not in obj:
        raise ValidationError(f"{where} is missing required key {key!r}")
    try:
        a = np.asarray(obj[key], dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}.{key} is not a numeric array")
    if a.shape != shape:
        raise ValidationError(f"{where}.{key} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{where}.{key} contains non-finite entries")
    return a


def _load_state(obj, n: int, label: str) -> GaussianState:
    if not isinstance(obj, dict):
        raise ValidationError(f"{label} must be an object with mean and cov")
    mean = _spec_array(obj, "mean", (2 * n,), label)
    cov = _spec_array(obj, "cov", (2 * n, 2 * n), label)
    return GaussianState(mean=mean, cov=cov)


def load_spec(path: str):
    """Parse an ensemble description file into (raw dict, ensemble, tau or None)."""
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}")
    if not isinstance(spec, dict):
        raise ValidationError("ensemble description must be a JSON object")
    if spec.get("version") != SPEC_VERSION:
        raise ValidationError(
            f"unsupported description version {spec.get('version')!r}, expected {SPEC_VERSION}"
        )
    n = spec.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    rho0 = _load_state(spec.get("rho0"), n, "rho0")
    L = _spec_array(spec, "L", (2 * n, 2 * n))
    mu = _spec_array(spec, "mu", (2 * n,))
    Sigma = _spec_array(spec, "Sigma", (2 * n, 2 * n))
    e = GaussianEnsemble(rho0=rho0, L=L, mu=mu, Sigma=Sigma)
    tau = _load_state(spec["tau"], n, "tau") if "tau" in spec else None
    return spec, e, tau


def ensemble_to_spec(e: GaussianEnsemble, tau: GaussianState | None = None) -> dict:
    """Serialize an ensemble (and optional recycling state) to the JSON layout."""
    spec = {
        "version": SPEC_VERSION,
        "n": e.n,
        "rho0": {"mean": e.rho0.mean.tolist(), "cov": e.rho0.cov.tolist()},
        "L": e.L.tolist(),
        "mu": e.mu.tolist(),
        "Sigma": e.Sigma.tolist(),
    }
    if tau is not None:
        spec["tau"] = {"mean": tau.mean.tolist(), "cov": tau.cov.tolist()}
    return spec


def _vec(a) -> list:
    return [float(v) for v in np.asarray(a).ravel()]


def _mat(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a)]


def _state_json(s: GaussianState) -> dict:
    return {"mean": _vec(s.mean), "cov": _mat(s.cov)}


def _digest(spec: dict) -> str:
    canonical = json.dumps(spec, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _tolerances(args) -> Tolerances:
    overrides = {}
    for item in getattr(args, "tol_override", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"tolerance override must look like name=value, got {item!r}")
        try:
            overrides[key] = float(value)
        except ValueError:
            raise ValidationError(f"tolerance {key!r} needs a numeric value, got {value!r}")
    return DEFAULT_TOLERANCES.override(**overrides)


def _report(command: str, spec: dict, tol: Tolerances, flags: dict, results: dict) -> dict:
    return {
        "version": REPORT_VERSION,
        "command": command,
        "flags": flags,
        "input": spec,
        "input_digest": _digest(spec),
        "tolerances": tol.as_dict(),
        "results": results,
    }


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_describe_pgm(args) -> int:
    spec, e, _ = load_spec(args.spec)
    tol = _tolerances(args)
    d = pgm_description(e)
    co = conditional_outcome(e, d)
    results = {
        "modes": e.n,
        "average_state": _state_json(d.rho_bar),
        "normalization_constant": float(normalization_constant(d.rho_bar)),
        "seed_state": _state_json(d.sigma),
        "jacobian": _mat(d.J),
        "outcome_matrix": _mat(d.J @ e.L),
        "anchor": _vec(d.anchor),
        "prefactor": float(d.prefactor),
        "q_matrix": _mat(d.Q),
        "conditional_matrix": _mat(co.matrix),
        "conditional_cov": _mat(co.cov),
        "mse": float(mse_closed_form(e, d)),
        "faithfulness_margins": {
            "rho0": float(symplectic_spectrum(e.rho0.cov)[-1] - 1.0),
            "average": float(symplectic_spectrum(d.rho_bar.cov)[-1] - 1.0),
            "seed": float(symplectic_spectrum(d.sigma.cov)[-1] - 1.0),
        },
    }
    _emit(_report("describe-pgm", spec, tol, {}, results), args)
    return 0


def cmd_mse(args) -> int:
    spec, e, _ = load_spec(args.spec)
    tol = _tolerances(args)
    d = pgm_description(e)
    co = conditional_outcome(e, d)
    results = {
        "closed_form": float(mse_closed_form(e, d)),
        "conditional_matrix": _mat(co.matrix),
        "conditional_cov": _mat(co.cov),
        "prior_trace": float(2.0 * np.trace(e.Sigma)),
    }
    flags = {"trials": args.trials, "seed": args.seed}
    if args.trials > 0:
        mc = mse_monte_carlo(e, args.trials, np.random.default_rng(args.seed))
        results["monte_carlo"] = {
            "estimate": mc.estimate,
            "stderr": mc.stderr,
            "trials": mc.trials,
            "z_score": (mc.estimate - results["closed_form"]) / mc.stderr,
        }
    _emit(_report("mse", spec, tol, flags, results), args)
    return 0


def _parse_point(text: str, n: int) -> np.ndarray:
    try:
        x = np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise ValidationError(f"--x must be comma-separated numbers, got {text!r}")
    if x.shape != (2 * n,):
        raise ValidationError(f"--x needs {2 * n} components for {n} mode(s), got {x.shape[0]}")
    return x


def cmd_instrument(args) -> int:
    spec, e, tau = load_spec(args.spec)
    tol = _tolerances(args)
    if tau is None:
        raise ValidationError("instrument command needs a tau block in the description")
    di = instrument_description(e, tau, gap_margin=tol.gap_margin)
    x = e.mu if args.x is None else _parse_point(args.x, e.n)
    post = post_measurement_state(di, x)
    rep = definiteness_report(e, tau)
    results = {
        "x": _vec(x),
        "outcome_density": float(outcome_density(di, x)),
        "post_state": _state_json(post),
        "base_post_state": _state_json(di.rho7),
        "intermediate_cov": _mat(di.V5),
        "retrodiction_jacobian": _mat(di.J5),
        "update_jacobian": _mat(di.J6),
        "recycling_jacobian": _mat(di.J7),
        "parameter_response": _mat(di.z_matrix),
        "expected_output": _state_json(expected_output_state(di)),
        "definiteness": {
            "pgm_contraction_max_eig": rep.pgm_contraction_max_eig,
            "post_mix_min_eig": rep.post_mix_min_eig,
            "sigma_margin": rep.sigma_margin,
            "v5_margin": rep.v5_margin,
            "rho7_margin": rep.rho7_margin,
            "tau_tilde_margin": rep.tau_tilde_margin,
        },
    }
    flags = {"x": args.x}
    _emit(_report("instrument", spec, tol, flags, results), args)
    return 0


def _check_json(c) -> dict:
    return {
        "name": c.name,
        "value": None if c.skipped else c.value,
        "threshold": None if c.skipped else c.threshold,
        "passed": c.passed,
        "skipped": c.skipped,
    }


def cmd_verify(args) -> int:
    spec, e, tau = load_spec(args.spec)
    tol = _tolerances(args)
    checks = run_checks(e, tau, level=args.level, cutoff=args.cutoff, grid=args.grid, tol=tol)
    failed = [c for c in checks if not c.passed]
    results = {
        "level": args.level,
        "cutoff": args.cutoff,
        "grid": args.grid,
        "checks": [_check_json(c) for c in checks],
        "failed": len(failed),
        "all_passed": not failed,
    }
    flags = {"level": args.level, "cutoff": args.cutoff, "grid": args.grid}
    _emit(_report("verify", spec, tol, flags, results), args)
    return 0 if not failed else 1


def cmd_sample(args) -> int:
    spec, e, _ = load_spec(args.spec)
    tol = _tolerances(args)
    if args.trials < 1:
        raise ValidationError(f"--trials must be positive, got {args.trials}")
    d = pgm_description(e)
    co = conditional_outcome(e, d)
    rng = np.random.default_rng(args.seed)
    xs = sample_prior(e, args.trials, rng)
    noise = rng.standard_normal((args.trials, 2 * e.n)) @ np.linalg.cholesky(co.cov).T
    samples = []
    err = 0.0
    for x, w in zip(xs, noise):
        est = co.mean(x) + w
        samples.append(
            {
                "x": _vec(x),
                "outcome": _vec(outcome_from_parameter(d, e, x)),
                "estimate": _vec(est),
            }
        )
        err += float(np.sum((est - x) ** 2))
    results = {
        "samples": samples,
        "empirical_mse": err / args.trials,
        "closed_form_mse": float(mse_closed_form(e, d)),
    }
    flags = {"trials": args.trials, "seed": args.seed}
    _emit(_report("sample", spec, tol, flags, results), args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussian-pgm",
        description="Closed-form pretty good measurement for Gaussian shift ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="path to an ensemble description JSON file")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument(
            "--tol-override",
            action="append",
            metavar="NAME=VALUE",
            help="override a named tolerance (repeatable)",
        )

    p = sub.add_parser("describe-pgm", help="closed-form POVM data and outcome law")
    common(p)
    p.set_defaults(func=cmd_describe_pgm)

    p = sub.add_parser("mse", help="mean squared error, closed form and optional Monte Carlo")
    common(p)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0 = closed form only)")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p.set_defaults(func=cmd_mse)

    p = sub.add_parser("instrument", help="post-measurement state and outcome density")
    common(p)
    p.add_argument("--x", default=None, help="parameter point, comma-separated (default: prior mean)")
    p.set_defaults(func=cmd_instrument)

    p = sub.add_parser("verify", help="run the verification battery")
    common(p)
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--cutoff", type=int, default=40, help="Fock cutoff for full level")
    p.add_argument("--grid", type=int, default=64, help="quadrature nodes per axis for full level")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="draw parameters and simulated estimates")
    common(p)
    p.add_argument("--trials", type=int, default=100, help="number of draws")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConsistencyError, BranchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        print(f"elapsed_s={time.perf_counter() - start:.3f}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
