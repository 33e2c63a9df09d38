"""Brute-force truncated Fock-space oracle.

Every closed-form object in this package (POVM elements, outcome densities,
post-measurement states) can be rebuilt the slow way from truncated matrices
of the quadrature operators.  This module does exactly that for one or two
modes so the formulas can be compared against first principles.
"""

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import GaussianEnsemble, average_state, prior_density, state_at
from .errors import CutoffError, ValidationError
from .instrument import instrument_description
from .pgm import outcome_from_parameter, pgm_description
from .states import GaussianState
from .symplectic import hamiltonian_from_covariance, omega

MAX_MODES = 2
MAX_DIM = 4096
# Truncating the quadratic generator corrupts its top rows, so Gaussian
# matrices are built on a space padded by this many levels per mode and cut
# back to the requested block afterwards.
CUTOFF_PAD = 24
# Estimated probability mass beyond the cutoff must stay below this.
DEFAULT_TAIL_TOL = 1e-7
# Eigenvalues of the average state below this are excluded from the inverse root.
EIG_FLOOR = 1e-13
# Excluded eigenvalues may carry at most this fraction of the trace.
FLOORED_MASS_TOL = 1e-8


def ladder(cutoff: int) -> np.ndarray:
    """Single-mode annihilation operator on the first cutoff levels."""
    if cutoff < 2:
        raise ValidationError(f"cutoff must be at least 2, got {cutoff}")
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), 1)


def quadratures(n: int, cutoff: int) -> list[np.ndarray]:
    """Truncated quadrature operators (x1, p1, ..., xn, pn).

    x = (a + a^dag)/sqrt(2) and p = i(a^dag - a)/sqrt(2), so the vacuum has
    unit diagonal covariance in the anticommutator convention.
    """
    if n > MAX_MODES:
        raise ValidationError(f"Fock oracle supports up to {MAX_MODES} modes, got {n}")
    if cutoff ** n > MAX_DIM:
        raise ValidationError(f"truncated dimension {cutoff ** n} exceeds {MAX_DIM}")
    a = ladder(cutoff)
    x1 = (a + a.T) / np.sqrt(2.0)
    p1 = 1j * (a.T - a) / np.sqrt(2.0)
    ops = []
    eye = np.eye(cutoff)
    for mode in range(n):
        for op in (x1, p1):
            factors = [eye] * n
            factors[mode] = op
            full = factors[0]
            for f in factors[1:]:
                full = np.kron(full, f)
            ops.append(full)
    return ops


def mean_photon_number(state: GaussianState) -> float:
    """Total expected photon number Tr V / 4 + |r|^2 / 2 - n/2."""
    return float(np.trace(state.cov) / 4.0 + state.mean @ state.mean / 2.0 - state.n / 2.0)


def _ln_tail(q: float, alpha2: float, cutoff: int) -> float:
    """Log of an upper estimate for the mass above the cutoff.

    Displaced thermal occupation numbers follow (1-q) q^k times a Laguerre
    polynomial of negative argument; the exponential part of its asymptotics
    gives ln P(k > N) <~ N ln q + 2 sqrt(N z) - alpha2 (1 - q) - ln(1 - q)
    with z = alpha2 (1-q)^2 / q.  Nearly pure states fall back to the Poisson
    tail of the displacement alone.
    """
    if q < 1e-6:
        if alpha2 <= 0.0:
            return -np.inf
        return -alpha2 + (cutoff + 1) * math.log(alpha2) - math.lgamma(cutoff + 2) + math.log(2.0)
    z = alpha2 * (1.0 - q) ** 2 / q
    return (
        cutoff * math.log(q)
        + 2.0 * math.sqrt(cutoff * z)
        - alpha2 * (1.0 - q)
        - math.log(1.0 - q)
    )


def tail_estimate(state: GaussianState, cutoff: int) -> float:
    """Estimated probability mass of the state above the cutoff, capped at 1."""
    lam = float(np.linalg.eigvalsh(state.cov)[-1])
    q = max((lam - 1.0) / (lam + 1.0), 0.0)
    alpha2 = float(state.mean @ state.mean / 2.0)
    return float(np.exp(min(_ln_tail(q, alpha2, cutoff), 0.0)))


def require_cutoff(state: GaussianState, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL):
    """Raise CutoffError when the truncation tail is too heavy for the cutoff."""
    if not np.isfinite(tail_tol):
        return
    est = tail_estimate(state, cutoff)
    if est <= tail_tol:
        return
    lam = float(np.linalg.eigvalsh(state.cov)[-1])
    q = max((lam - 1.0) / (lam + 1.0), 0.0)
    alpha2 = float(state.mean @ state.mean / 2.0)
    suggested = cutoff
    while suggested < 100_000 and _ln_tail(q, alpha2, suggested) > math.log(tail_tol / 10.0):
        suggested += max(4, suggested // 5)
    raise CutoffError(
        f"cutoff {cutoff} too small: estimated tail mass {est:.3g} exceeds "
        f"{tail_tol:g}; try cutoff >= {suggested}",
        suggested_cutoff=suggested,
    )


def _gaussian_eigensystem(state: GaussianState, cutoff: int):
    H = hamiltonian_from_covariance(state.cov)
    R = quadratures(state.n, cutoff)
    dim = cutoff ** state.n
    shifted = [R[j] - state.mean[j] * np.eye(dim) for j in range(2 * state.n)]
    Hop = np.zeros((dim, dim), dtype=complex)
    for j in range(2 * state.n):
        acc = np.zeros_like(Hop)
        for k in range(2 * state.n):
            if H[j, k] != 0.0:
                acc += H[j, k] * shifted[k]
        Hop += 0.5 * shifted[j] @ acc
    Hop = 0.5 * (Hop + Hop.conj().T)
    return np.linalg.eigh(Hop)


def _block_indices(n: int, cutoff: int, work: int) -> np.ndarray:
    """Indices of the work-space basis states with every mode below cutoff."""
    if n == 1:
        return np.arange(cutoff)
    keep = []
    for i in range(work ** n):
        j = i
        ok = True
        for _ in range(n):
            if j % work >= cutoff:
                ok = False
                break
            j //= work
        if ok:
            keep.append(i)
    return np.array(keep)


def _cut_block(A: np.ndarray, n: int, cutoff: int, work: int) -> np.ndarray:
    if work == cutoff:
        return A
    idx = _block_indices(n, cutoff, work)
    return A[np.ix_(idx, idx)]


def gaussian_density_matrix(
    state: GaussianState, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL, pad: int = CUTOFF_PAD
) -> np.ndarray:
    """Truncated density matrix of a faithful Gaussian state.

    Exponentiates the quadratic Hamiltonian on the padded space, normalizes
    there, and cuts back to the cutoff block; the trace deficit of the block
    is the true tail mass.  Pass tail_tol=np.inf to skip the cutoff guard
    (only sensible when downstream weighting suppresses the edges).
    """
    require_cutoff(state, cutoff, tail_tol)
    work = cutoff + pad
    w, U = _gaussian_eigensystem(state, work)
    p = np.exp(-(w - w[0]))
    p /= p.sum()
    rho = (U * p) @ U.conj().T
    return _cut_block(0.5 * (rho + rho.conj().T), state.n, cutoff, work)


def gaussian_matrix_sqrt(
    state: GaussianState, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL, pad: int = CUTOFF_PAD
) -> np.ndarray:
    """Cutoff block of the positive square root of the Gaussian density matrix."""
    require_cutoff(state, cutoff, tail_tol)
    work = cutoff + pad
    w, U = _gaussian_eigensystem(state, work)
    p = np.exp(-(w - w[0]))
    p /= p.sum()
    sq = (U * np.sqrt(p)) @ U.conj().T
    return _cut_block(0.5 * (sq + sq.conj().T), state.n, cutoff, work)


def displacement_matrix(r: np.ndarray, cutoff: int) -> np.ndarray:
    """Truncated displacement unitary D(r) with D rho D^dag shifting the mean by r.

    D(r) = exp[-i r^T Omega rhat], built by exact exponentiation of the
    truncated Hermitian generator, so the result is exactly unitary on the
    truncated space.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = r.shape[0] // 2
    if r.shape[0] != 2 * n or n < 1:
        raise ValidationError(f"displacement must have even length, got {r.shape}")
    R = quadratures(n, cutoff)
    c = omega(n).T @ r
    G = np.zeros_like(R[0], dtype=complex)
    for j in range(2 * n):
        G += c[j] * R[j]
    w, U = np.linalg.eigh(0.5 * (G + G.conj().T))
    return (U * np.exp(-1j * w)) @ U.conj().T


def fock_moments(rho: np.ndarray, n: int):
    """Mean vector and covariance matrix read back from a truncated density matrix."""
    cutoff = round(rho.shape[0] ** (1.0 / n))
    R = quadratures(n, cutoff)
    r = np.array([float(np.trace(R[j] @ rho).real) for j in range(2 * n)])
    V = np.empty((2 * n, 2 * n))
    for j in range(2 * n):
        for k in range(2 * n):
            anti = R[j] @ R[k] + R[k] @ R[j]
            V[j, k] = float(np.trace(anti @ rho).real) - 2.0 * r[j] * r[k]
    return r, V


def trace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Half the trace norm of the Hermitized difference."""
    D = A - B
    D = 0.5 * (D + D.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(D))))


def inverse_sqrt_psd(
    rho: np.ndarray, floor: float = EIG_FLOOR, mass_tol: float = FLOORED_MASS_TOL
) -> np.ndarray:
    """Pseudo-inverse square root of a positive matrix with an eigenvalue floor.

    Eigenvalues below floor are dropped from the inverse.  If the dropped
    eigenvalues carry more than mass_tol of the trace, the truncation cannot
    support the sandwich and a CutoffError is raised.
    """
    w, U = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    pos = np.clip(w, 0.0, None)
    floored = pos < floor
    mass = float(pos[floored].sum())
    total = float(pos.sum())
    if mass > mass_tol * total:
        raise CutoffError(
            f"floored eigenvalue mass {mass:.3g} exceeds {mass_tol:g} of the "
            f"trace; increase the cutoff"
        )
    inv = np.where(floored, 0.0, 1.0 / np.sqrt(np.where(floored, 1.0, pos)))
    return (U * inv) @ U.conj().T


def _require_single_mode(e: GaussianEnsemble):
    if e.n != 1:
        raise ValidationError(f"this oracle requires n = 1, got n = {e.n}")


def pgm_operator_direct(
    e: GaussianEnsemble, x: np.ndarray, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> np.ndarray:
    """POVM density at x from the defining sandwich p(x) rho^-1/2 rho_x rho^-1/2."""
    _require_single_mode(e)
    rho_bar = gaussian_density_matrix(average_state(e), cutoff, tail_tol)
    irb = inverse_sqrt_psd(rho_bar)
    rho_x = gaussian_density_matrix(state_at(e, x), cutoff, tail_tol)
    return prior_density(e, x) * (irb @ rho_x @ irb)


def pgm_operator_closed(
    e: GaussianEnsemble, x: np.ndarray, cutoff: int, tail_tol: float = DEFAULT_TAIL_TOL
) -> np.ndarray:
    """POVM density at x from the closed form, prefactor times the displaced seed."""
    _require_single_mode(e)
    d = pgm_description(e)
    y = outcome_from_parameter(d, e, x)
    sigma_y = gaussian_density_matrix(GaussianState(mean=y, cov=d.sigma.cov), cutoff, tail_tol)
    return d.prefactor * sigma_y


def born_rule_residual(e: GaussianEnsemble, x: np.ndarray, cutoff: int) -> float:
    """Relative error of Tr[E_x rho_bar] against the prior density at x.

    E_x is the closed-form element and rho_bar is built directly, so the two
    routes only meet when the closed form is right.
    """
    _require_single_mode(e)
    rho_bar = gaussian_density_matrix(average_state(e), cutoff)
    E = pgm_operator_closed(e, x, cutoff)
    p = prior_density(e, x)
    val = float(np.trace(E @ rho_bar).real)
    return abs(val - p) / p


def instrument_direct(
    e: GaussianEnsemble,
    tau: GaussianState,
    x: np.ndarray,
    cutoff: int,
    tail_tol: float = DEFAULT_TAIL_TOL,
):
    """Outcome density and post-measurement state at x, the slow way.

    Builds A_x = rho_x^1/2 rho_bar^-1/2 and returns
    (t(x), normalized p(x) A_x tau A_x^dag).
    """
    _require_single_mode(e)
    rho_bar = gaussian_density_matrix(average_state(e), cutoff, tail_tol)
    irb = inverse_sqrt_psd(rho_bar)
    sq_x = gaussian_matrix_sqrt(state_at(e, x), cutoff, tail_tol)
    tau_m = gaussian_density_matrix(tau, cutoff, tail_tol)
    A = sq_x @ irb
    out = prior_density(e, x) * (A @ tau_m @ A.conj().T)
    t = float(np.trace(out).real)
    post = out / t
    return t, 0.5 * (post + post.conj().T)


def expected_output_direct(
    e: GaussianEnsemble,
    tau: GaussianState,
    cutoff: int = 40,
    grid: int = 64,
    box_sigmas: float = 6.5,
):
    """Grid-integrated average post-measurement state from the direct route.

    Integrates t(x) times the direct post-state over a Gauss-Legendre grid
    covering box_sigmas standard deviations of the outcome distribution in x.
    Edge states are built without the tail guard; their weights are
    negligible by construction of the box.

    Returns:
        (matrix, total): the integrated state matrix and the integrated
        outcome density, which should be close to one.
    """
    _require_single_mode(e)
    d = instrument_description(e, tau)
    JL = d.y_matrix
    cov_x = np.linalg.solve(JL, np.linalg.solve(JL, d.outcome_cov.T).T)
    center = e.mu + np.linalg.solve(JL, d.tau.mean - d.pgm.anchor)
    half = box_sigmas * np.sqrt(np.diag(cov_x))

    nodes, weights = np.polynomial.legendre.leggauss(grid)
    xs = [center[k] + half[k] * nodes for k in range(2)]
    ws = [half[k] * weights for k in range(2)]

    rho_bar = gaussian_density_matrix(average_state(e), cutoff)
    irb = inverse_sqrt_psd(rho_bar)
    tau_m = gaussian_density_matrix(tau, cutoff)

    dim = cutoff
    acc = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    for i in range(grid):
        for j in range(grid):
            x = np.array([xs[0][i], xs[1][j]])
            w2 = ws[0][i] * ws[1][j]
            sq_x = gaussian_matrix_sqrt(state_at(e, x), cutoff, tail_tol=np.inf)
            A = sq_x @ irb
            term = prior_density(e, x) * (A @ tau_m @ A.conj().T)
            acc += w2 * term
            total += w2 * float(np.trace(term).real)
    return 0.5 * (acc + acc.conj().T), total


@dataclass(frozen=True)
class CompletenessReport:
    """Outcome of the POVM completeness quadrature."""

    residual: float
    interior: int
    box: float
    grid: int
    cutoff: int


def completeness_check(
    e: GaussianEnsemble,
    cutoff: int = 40,
    grid: int = 64,
    interior: int | None = None,
    box: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> CompletenessReport:
    """Integrate the POVM over outcomes and compare with the identity.

    The integral (2 pi)^-1 int D(y) sigma D(y)^dag dy is evaluated on a
    Gauss-Legendre grid over a square box and compared with the identity on
    an interior Fock block.  D(y) splits into one shift per axis up to a
    phase that cancels in the conjugation, so the double integral reduces to
    two nested single sums.  The shifts are exact operators on a work space
    reaching past the turning point of the largest displacement, and only
    the final conjugation is projected; restricted to the block the shifts
    are not unitary, which is what lets probability leave the truncated
    space instead of folding back in.  The interior block is sized so the
    box both covers the displacements that feed it and stays resolvable at
    the default grid.
    """
    _require_single_mode(e)
    d = pgm_description(e)
    sigma0 = gaussian_density_matrix(d.sigma, cutoff, tail_tol)
    M = interior if interior is not None else max(4, (2 * cutoff) // 5)
    if not 0 < M <= cutoff:
        raise ValidationError(f"interior block {M} out of range for cutoff {cutoff}")
    smax = float(np.sqrt(np.linalg.eigvalsh(d.sigma.cov)[-1] / 2.0))
    K = box if box is not None else float(np.sqrt(2.0 * M + 1.0) + 8.0 * smax)

    nodes, weights = np.polynomial.legendre.leggauss(grid)
    ys = K * nodes
    ws = K * weights

    # Shifted seeds reach position sqrt(2 cutoff) + K, so the work space must
    # extend past that turning point for the shift matrices to be faithful.
    reach = np.sqrt(2.0 * cutoff + 1.0) + K
    work = int(np.ceil(0.675 * reach ** 2)) + 16
    a = ladder(work)
    wx, Ux = np.linalg.eigh((a + a.T) / np.sqrt(2.0))
    wp, Up = np.linalg.eigh(1j * (a.T - a) / np.sqrt(2.0))

    # D(y) = exp[i y2 x] exp[-i y1 p] up to a phase that cancels in D sigma D^dag.
    # The position-shift sweep accumulates at full work dimension; projecting
    # earlier would discard intermediate support the momentum sweep feeds on.
    Ap = Up[:cutoff, :].conj().T
    inner = np.zeros((work, work), dtype=complex)
    for i in range(grid):
        cols = (Up * np.exp(-1j * ys[i] * wp)) @ Ap
        T = cols @ sigma0
        inner += ws[i] * (T @ cols.conj().T)
    acc = np.zeros((M, M), dtype=complex)
    for j in range(grid):
        rows = (Ux[:M, :] * np.exp(1j * ys[j] * wx)) @ Ux.conj().T
        acc += ws[j] * (rows @ inner @ rows.conj().T)
    acc /= 2.0 * np.pi

    residual = float(np.linalg.norm(acc - np.eye(M), 2))
    return CompletenessReport(residual=residual, interior=M, box=float(K), grid=grid, cutoff=cutoff)
