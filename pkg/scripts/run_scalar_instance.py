#!/usr/bin/env python3
"""Walk the worked single-mode example end to end.

Prints the closed-form measurement data, the estimation error with an
optional Monte Carlo cross-check, the instrument induced by a recycling
state of covariance 2I, and finally the verification battery.
"""

import argparse
import sys

import numpy as np

from gaussian_pgm.instances import scalar_instance
from gaussian_pgm.instrument import expected_output_state, instrument_description
from gaussian_pgm.pgm import conditional_outcome, mse_closed_form, mse_monte_carlo, pgm_description
from gaussian_pgm.verify import run_checks


def show(label, value):
    with np.printoptions(precision=8, suppress=True):
        text = str(value)
    if "\n" in text:
        pad = " " * 4
        text = "\n" + pad + text.replace("\n", "\n" + pad)
    print(f"{label}: {text}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200_000, help="Monte Carlo trials (0 to skip)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full", action="store_true", help="include the Fock-space comparisons")
    args = parser.parse_args(argv)

    e, tau = scalar_instance()
    d = pgm_description(e)
    print("== measurement ==")
    show("average covariance", d.rho_bar.cov)
    show("seed covariance", d.sigma.cov)
    show("outcome jacobian", d.J)
    show("prefactor", d.prefactor)

    co = conditional_outcome(e, d)
    print("\n== estimate ==")
    show("conditional matrix", co.matrix)
    show("conditional covariance", co.cov)
    mse = mse_closed_form(e, d)
    show("mean squared error", mse)
    if args.trials > 0:
        mc = mse_monte_carlo(e, args.trials, np.random.default_rng(args.seed))
        show("monte carlo", f"{mc.estimate:.6f} +- {mc.stderr:.6f} ({mc.trials} trials)")
        show("deviation", f"{abs(mc.estimate - mse) / mc.stderr:.2f} stderr")

    di = instrument_description(e, tau)
    print("\n== instrument ==")
    show("recycling covariance", tau.cov)
    show("intermediate covariance", di.V5)
    show("post-measurement covariance", di.rho7.cov)
    show("parameter response", di.z_matrix)
    show("averaged output covariance", expected_output_state(di).cov)

    level = "full" if args.full else "fast"
    checks = run_checks(e, tau, level=level)
    failed = [c for c in checks if not c.passed]
    print(f"\n== verification ({level}) ==")
    for c in checks:
        status = "skip" if c.skipped else ("ok" if c.passed else "FAIL")
        print(f"  {status:4s} {c.name}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
