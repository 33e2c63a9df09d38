"""Problem instance generators: the canonical worked example and random draws.

The random generators produce admissible inputs for property sweeps; the
Fock-friendly variant additionally rejection-samples until the truncation
guard passes at the standard cutoff, so oracle comparisons never trip it.
"""

import numpy as np
from scipy.linalg import expm

from .ensembles import GaussianEnsemble, average_state, state_at
from .errors import GaussianPGMError
from .pgm import outcome_from_parameter, pgm_description
from .states import GaussianState
from .symplectic import omega, symplectic_spectrum


def scalar_instance():
    """The single-mode worked example: thermal fiducial, identity everything.

    V0 = 2I, L = I, mu = 0, Sigma = I, and the recycling state tau equal to
    the fiducial state.  Returns (ensemble, tau).
    """
    rho0 = GaussianState(mean=np.zeros(2), cov=2.0 * np.eye(2))
    e = GaussianEnsemble(rho0=rho0, L=np.eye(2), mu=np.zeros(2), Sigma=np.eye(2))
    tau = GaussianState(mean=np.zeros(2), cov=2.0 * np.eye(2))
    return e, tau


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.3) -> np.ndarray:
    """Random symplectic matrix exp(Omega A) with A symmetric Gaussian."""
    A = rng.standard_normal((2 * n, 2 * n))
    A = 0.5 * scale * (A + A.T)
    return expm(omega(n) @ A)


def random_faithful_cov(
    n: int,
    rng: np.random.Generator,
    nu_range: tuple[float, float] = (1.05, 10.0),
    scale: float = 0.3,
) -> np.ndarray:
    """Random faithful covariance S^T (diag(nu) tensor I_2) S."""
    nu = np.sort(rng.uniform(*nu_range, size=n))[::-1]
    S = random_symplectic(n, rng, scale)
    V = S.T @ (np.repeat(nu, 2)[:, None] * S)
    return 0.5 * (V + V.T)


def random_state(
    n: int,
    rng: np.random.Generator,
    nu_range: tuple[float, float] = (1.05, 10.0),
    mean_scale: float = 0.5,
    scale: float = 0.3,
) -> GaussianState:
    return GaussianState(
        mean=mean_scale * rng.standard_normal(2 * n),
        cov=random_faithful_cov(n, rng, nu_range, scale),
    )


def random_spd(
    n: int, rng: np.random.Generator, eig_range: tuple[float, float] = (0.2, 0.9)
) -> np.ndarray:
    """Random symmetric positive definite matrix with eigenvalues in eig_range."""
    G = rng.standard_normal((2 * n, 2 * n))
    O, _ = np.linalg.qr(G)
    w = rng.uniform(*eig_range, size=2 * n)
    return O @ (w[:, None] * O.T)


def random_ensemble(
    n: int,
    rng: np.random.Generator,
    nu_range: tuple[float, float] = (1.05, 4.0),
    mean_scale: float = 0.4,
    l_jitter: float = 0.3,
    sigma_range: tuple[float, float] = (0.2, 0.9),
    mu_scale: float = 0.4,
    scale: float = 0.3,
) -> GaussianEnsemble:
    """Random admissible ensemble with invertible L and SPD prior covariance."""
    rho0 = random_state(n, rng, nu_range, mean_scale, scale)
    while True:
        L = np.eye(2 * n) + l_jitter * rng.standard_normal((2 * n, 2 * n))
        if abs(np.linalg.det(L)) > 1e-6:
            break
    Sigma = random_spd(n, rng, sigma_range)
    mu = mu_scale * rng.standard_normal(2 * n)
    return GaussianEnsemble(rho0=rho0, L=L, mu=mu, Sigma=Sigma)


def random_admissible_tau(
    e: GaussianEnsemble, rng: np.random.Generator, mean_scale: float = 0.3
) -> GaussianState:
    """Random faithful recycling state strictly below the average covariance.

    Tries a few fully random faithful covariances first; falls back to the
    always-admissible convex family V0 + t L Sigma L^T with t < 1.
    """
    V = average_state(e).cov
    margin = 1e-6
    for _ in range(20):
        W = random_faithful_cov(e.n, rng, nu_range=(1.05, 2.0), scale=0.2)
        if np.linalg.eigvalsh(V - W)[0] > margin:
            return GaussianState(mean=mean_scale * rng.standard_normal(2 * e.n), cov=W)
    t = rng.uniform(0.2, 0.8)
    W = e.rho0.cov + t * e.L @ e.Sigma @ e.L.T
    return GaussianState(mean=mean_scale * rng.standard_normal(2 * e.n), cov=W)


def sweep_points(e: GaussianEnsemble) -> list[np.ndarray]:
    """The five-point parameter sweep mu, mu +- e1/2, mu +- e2/2."""
    pts = [e.mu.copy()]
    for axis in range(2):
        for sign in (1.0, -1.0):
            v = e.mu.copy()
            v[axis] += 0.5 * sign
            pts.append(v)
    return pts


def seed_leak(e: GaussianEnsemble, cutoff: int = 40, delta: float = 1e-11) -> float:
    """Closed-form POVM weight outside the representable subspace of the average.

    Directions of the truncated average state below delta cannot survive the
    inverse square root in double precision.  This measures, over the sweep
    points, how much trace norm the closed-form element keeps in those
    directions; when it is small the direct sandwich is numerically faithful.
    """
    from .fock import gaussian_density_matrix  # deferred: fock imports this module's peers

    d = pgm_description(e)
    rho_bar = gaussian_density_matrix(average_state(e), cutoff, tail_tol=np.inf)
    w, U = np.linalg.eigh(rho_bar)
    kept = U[:, w >= delta]
    P = kept @ kept.conj().T
    leak = 0.0
    for x in sweep_points(e):
        y = outcome_from_parameter(d, e, x)
        sig = gaussian_density_matrix(GaussianState(mean=y, cov=d.sigma.cov), cutoff, tail_tol=np.inf)
        diff = sig - P @ sig @ P
        diff = 0.5 * (diff + diff.conj().T)
        leak = max(leak, float(np.sum(np.abs(np.linalg.eigvalsh(diff)))))
    return float(d.prefactor * leak)


def fock_friendly_ensemble(
    rng: np.random.Generator, cutoff: int = 40, max_tries: int = 500, leak_tol: float = 2e-6
) -> GaussianEnsemble:
    """Random single-mode ensemble that the Fock oracle accepts at the cutoff.

    Rejection-samples moderate draws until the truncation guard passes for
    the average state, every sweep state, and every sweep POVM seed, the
    seed stays cool enough that truncated comparisons are meaningful, and
    the seed leak outside the representable average-state subspace is small.
    """
    from .fock import require_cutoff  # deferred: fock imports this module's peers

    for _ in range(max_tries):
        e = random_ensemble(
            1,
            rng,
            nu_range=(1.15, 1.6),
            mean_scale=0.25,
            l_jitter=0.15,
            sigma_range=(0.3, 0.5),
            mu_scale=0.25,
            scale=0.1,
        )
        try:
            d = pgm_description(e)
            if symplectic_spectrum(d.sigma.cov)[0] > 3.4:
                continue
            require_cutoff(average_state(e), cutoff)
            for x in sweep_points(e):
                require_cutoff(state_at(e, x), cutoff)
                y = outcome_from_parameter(d, e, x)
                require_cutoff(GaussianState(mean=y, cov=d.sigma.cov), cutoff)
            if seed_leak(e, cutoff) > leak_tol:
                continue
            return e
        except GaussianPGMError:
            continue
    raise RuntimeError(f"no Fock-friendly ensemble found in {max_tries} tries")
