"""Symplectic linear algebra for covariance matrices.

Conventions: n modes, quadratures ordered (x1, p1, ..., xn, pn), hbar = 1,
vacuum covariance equal to the identity.  The symplectic form is
Omega = I_n tensor [[0, 1], [-1, 0]].
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import DefinitenessError, FaithfulnessError, SingularityError, ValidationError

# Symplectic eigenvalues must exceed 1 by this much before a state counts as faithful.
FAITHFUL_MARGIN = 1e-9
# Relative asymmetry allowed in matrices that are symmetric by contract.
SYMMETRY_TOL = 1e-8


def omega(n: int) -> np.ndarray:
    """Symplectic form on n modes in xpxp ordering."""
    if n < 1:
        raise ValidationError(f"need at least one mode, got n={n}")
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(n), J)


def require_symmetric(M: np.ndarray, name: str = "matrix", tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate symmetry up to relative tolerance and return the symmetrized matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    scale = max(1.0, np.linalg.norm(M))
    if np.linalg.norm(M - M.T) > tol * scale:
        raise ValidationError(f"{name} is not symmetric within relative tolerance {tol}")
    return 0.5 * (M + M.T)


def require_even_dim(M: np.ndarray, name: str = "matrix") -> int:
    """Return the mode count n for a 2n x 2n matrix."""
    d = M.shape[0]
    if d % 2 != 0:
        raise ValidationError(f"{name} must be 2n x 2n, got dimension {d}")
    return d // 2


def require_faithful(nu: np.ndarray, margin: float = FAITHFUL_MARGIN, what: str = "state"):
    """Raise unless every symplectic eigenvalue exceeds 1 + margin."""
    nu_min = float(np.min(nu))
    if nu_min <= 1.0 + margin:
        raise FaithfulnessError(
            f"non-faithful {what}: min symplectic eigenvalue {nu_min:.12g} "
            f"<= 1 + {margin:g}"
        )


@dataclass(frozen=True)
class WilliamsonDecomposition:
    """Normal form V = S^T D S with S symplectic and D = diag(nu) tensor I_2.

    nu is sorted in descending order.
    """

    S: np.ndarray
    nu: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(np.repeat(self.nu, 2))


def _sym_sqrt(V: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric positive definite matrix via eigh."""
    w, U = np.linalg.eigh(V)
    if w[0] <= 0.0:
        raise DefinitenessError(
            f"matrix is not positive definite: min eigenvalue {w[0]:.6g}"
        )
    return (U * np.sqrt(w)) @ U.T


def williamson(V: np.ndarray, name: str = "V") -> WilliamsonDecomposition:
    """Williamson normal form of a positive definite covariance matrix.

    Uses the real Schur form of V^(1/2) Omega V^(1/2), which is exactly
    antisymmetric, so the Schur T is block diagonal with 2x2 antisymmetric
    blocks holding the symplectic eigenvalues.

    Args:
        V: symmetric positive definite 2n x 2n matrix.
        name: label used in error messages.

    Returns:
        WilliamsonDecomposition with S symplectic and nu descending.
    """
    V = require_symmetric(V, name)
    n = require_even_dim(V, name)
    Om = omega(n)
    Vh = _sym_sqrt(V)
    A = Vh @ Om @ Vh
    A = 0.5 * (A - A.T)  # exactly antisymmetric input keeps T block diagonal
    T, U = schur(A, output="real")

    nu = np.empty(n)
    U = U.copy()
    for j in range(n):
        c = T[2 * j, 2 * j + 1]
        if c < 0.0:
            # swapping the two Schur columns flips the block sign
            U[:, [2 * j, 2 * j + 1]] = U[:, [2 * j + 1, 2 * j]]
            c = -c
        nu[j] = c

    order = np.argsort(-nu)
    nu = nu[order]
    cols = np.ravel(np.column_stack((2 * order, 2 * order + 1)))
    U = U[:, cols]

    S = np.diag(1.0 / np.sqrt(np.repeat(nu, 2))) @ U.T @ Vh
    return WilliamsonDecomposition(S=S, nu=nu)


def symplectic_spectrum(V: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of V, descending."""
    return williamson(V).nu


def symplectic_inverse(S: np.ndarray) -> np.ndarray:
    """Inverse of a symplectic matrix, S^-1 = -Omega S^T Omega."""
    n = require_even_dim(np.asarray(S), "S")
    Om = omega(n)
    return -Om @ S.T @ Om


def _nu_sandwich(dec: WilliamsonDecomposition, vals: np.ndarray) -> np.ndarray:
    """S^T diag(vals) S^-T with vals given per mode."""
    SmT = symplectic_inverse(dec.S).T
    return dec.S.T @ (np.repeat(vals, 2)[:, None] * SmT)


def sqrt_I_plus_VOmega_inv2(
    V: np.ndarray,
    inverse: bool = False,
    margin: float = FAITHFUL_MARGIN,
    dec: WilliamsonDecomposition | None = None,
) -> np.ndarray:
    """Principal square root of I + (V Omega)^-2 for a faithful covariance.

    In the Williamson basis (V Omega)^2 has spectrum -nu_j^2, so the result is
    S^T [diag(sqrt(1 - nu^-2)) tensor I_2] S^-T, real with eigenvalues in (0, 1).

    Args:
        V: faithful covariance matrix.
        inverse: return the matrix inverse of the square root instead.
        margin: faithfulness margin on the symplectic eigenvalues.
        dec: optional precomputed Williamson decomposition of V.

    Returns:
        The (generally nonsymmetric) matrix square root factor.
    """
    if dec is None:
        dec = williamson(V)
    require_faithful(dec.nu, margin)
    vals = np.sqrt(1.0 - dec.nu ** -2)
    if inverse:
        vals = 1.0 / vals
    return _nu_sandwich(dec, vals)


@dataclass(frozen=True)
class UncertaintyReport:
    """Outcome of the uncertainty-principle test for a covariance matrix."""

    classification: str  # "faithful" | "boundary" | "invalid"
    margin: float  # min symplectic eigenvalue minus 1


def check_uncertainty(V: np.ndarray, margin: float = FAITHFUL_MARGIN) -> UncertaintyReport:
    """Classify V by the uncertainty principle V + i Omega >= 0.

    Faithful means all symplectic eigenvalues exceed 1 + margin, boundary means
    the smallest sits within margin of 1, invalid means it is below.
    """
    V = require_symmetric(V, "V")
    require_even_dim(V, "V")
    w = np.linalg.eigvalsh(V)
    if w[0] <= 0.0:
        # V + i Omega >= 0 requires V > 0, so no symplectic spectrum is needed
        return UncertaintyReport("invalid", float(w[0] - 1.0))
    m = float(symplectic_spectrum(V).min() - 1.0)
    if m > margin:
        return UncertaintyReport("faithful", m)
    if m < -margin:
        return UncertaintyReport("invalid", m)
    return UncertaintyReport("boundary", m)


def sqrt_factorization_residual(V: np.ndarray, margin: float = FAITHFUL_MARGIN) -> float:
    """Residual of the factorization V - i Omega = Q V (V + i Omega)^-1 V Q^T.

    Here Q = sqrt(I + (V Omega)^-2).  Returns the spectral norm of the
    difference; zero for every faithful V.
    """
    V = require_symmetric(V, "V")
    n = require_even_dim(V, "V")
    dec = williamson(V)
    require_faithful(dec.nu, margin)
    Q = sqrt_I_plus_VOmega_inv2(V, dec=dec)
    Om = omega(n)
    mid = np.linalg.solve(V + 1j * Om, V)
    rhs = Q @ V @ mid @ Q.T
    return float(np.linalg.norm((V - 1j * Om) - rhs, 2))


def hamiltonian_from_covariance(
    V: np.ndarray,
    margin: float = FAITHFUL_MARGIN,
    dec: WilliamsonDecomposition | None = None,
) -> np.ndarray:
    """Quadratic Hamiltonian matrix H with V = coth(i Omega H / 2) i Omega.

    Computed as H = S^-1 [diag(2 arcoth nu) tensor I_2] S^-T from the
    Williamson form of V, which makes positivity manifest.
    """
    if dec is None:
        V = require_symmetric(V, "V")
        dec = williamson(V)
    require_faithful(dec.nu, margin)
    beta = 2.0 * np.arctanh(1.0 / dec.nu)  # arcoth(nu) for nu > 1
    Sm1 = symplectic_inverse(dec.S)
    H = Sm1 @ (np.repeat(beta, 2)[:, None] * Sm1.T)
    return 0.5 * (H + H.T)


def covariance_from_hamiltonian(H: np.ndarray) -> np.ndarray:
    """Covariance matrix of the Gaussian state with Hamiltonian matrix H.

    Inverts hamiltonian_from_covariance: Williamson-decompose H = S^T B S with
    B = diag(beta) tensor I_2, then V = S^-1 [diag(coth(beta/2)) tensor I_2] S^-T.

    Raises DefinitenessError if H is not positive definite.
    """
    H = require_symmetric(H, "H")
    dec = williamson(H, name="H")
    if dec.nu[-1] <= 0.0:
        raise DefinitenessError(
            f"Hamiltonian matrix must be positive definite, min symplectic "
            f"eigenvalue {dec.nu[-1]:.6g}"
        )
    vals = 1.0 / np.tanh(0.5 * dec.nu)
    Sm1 = symplectic_inverse(dec.S)
    V = Sm1 @ (np.repeat(vals, 2)[:, None] * Sm1.T)
    return 0.5 * (V + V.T)


def w_matrix(V: np.ndarray) -> np.ndarray:
    """W = -V i Omega, the matrix whose Cayley transform is exp[i Omega H]."""
    V = require_symmetric(V, "V")
    n = require_even_dim(V, "V")
    return -1j * V @ omega(n)


def _checked_inverse_apply(num: np.ndarray, den: np.ndarray, label: str) -> np.ndarray:
    """num @ den^-1 with an explicit near-singularity guard on den."""
    ev = np.linalg.eigvals(den)
    if np.min(np.abs(ev)) < 1e-12 * max(1.0, np.max(np.abs(ev))):
        raise SingularityError(f"{label} is numerically singular")
    return np.linalg.solve(den.T, num.T).T


def cayley_exp(W: np.ndarray) -> np.ndarray:
    """Cayley transform (W - I)(W + I)^-1, equal to exp[i Omega H] when W = -V i Omega."""
    W = np.asarray(W, dtype=complex)
    I = np.eye(W.shape[0])
    return _checked_inverse_apply(W - I, W + I, "W + I")


def cayley_w(E: np.ndarray) -> np.ndarray:
    """Inverse Cayley transform (I + E)(I - E)^-1 recovering W from exp[i Omega H].

    Raises SingularityError when E has an eigenvalue at 1 (the H -> 0 limit).
    """
    E = np.asarray(E, dtype=complex)
    I = np.eye(E.shape[0])
    return _checked_inverse_apply(I + E, I - E, "I - exp[i Omega H]")
