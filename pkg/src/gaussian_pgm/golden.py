"""Exponentials of inhomogeneous quadratic operators via (2n+2)-dimensional embedding.

An operator exponent (i/2) rhat^T Omega X rhat + i s^T Omega rhat + (i/2) a is
stored as the triple (X, s, a).  Products of exponentials of such operators
reduce to products of small embedded matrices, which is how the closed-form
measurement and instrument data are cross-checked operator-side.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .errors import BranchError, ValidationError
from .states import GaussianState
from .symplectic import hamiltonian_from_covariance, omega, require_even_dim

# Below this norm the divided-difference functions switch to truncated series.
SERIES_NORM = 1e-4
_SERIES_TERMS = 12
# Relative tolerance for the symmetry invariant of Omega X.
EXPONENT_SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class QuadraticExponent:
    """Exponent data (X, s, a) with Omega X symmetric.

    X is 2n x 2n complex, s a length-2n complex vector, a a complex scalar.
    """

    X: np.ndarray
    s: np.ndarray
    a: complex

    def __post_init__(self):
        X = np.asarray(self.X, dtype=complex)
        s = np.atleast_1d(np.asarray(self.s, dtype=complex))
        n = require_even_dim(X, "X")
        if s.shape != (2 * n,):
            raise ValidationError(f"s has shape {s.shape}, expected ({2 * n},)")
        OX = omega(n) @ X
        scale = max(1.0, np.linalg.norm(OX))
        if np.linalg.norm(OX - OX.T) > EXPONENT_SYMMETRY_TOL * scale:
            raise ValidationError("Omega X must be symmetric for a quadratic exponent")
        X.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "a", complex(self.a))

    @property
    def n(self) -> int:
        return self.X.shape[0] // 2


def _phi_series(X: np.ndarray, coeffs) -> np.ndarray:
    """Evaluate sum_k coeffs[k] X^k by Horner's scheme."""
    d = X.shape[0]
    out = np.zeros((d, d), dtype=complex)
    for c in reversed(coeffs):
        out = out @ X + c * np.eye(d)
    return out


def phi_left(X: np.ndarray) -> np.ndarray:
    """(I - exp(-X)) X^-1, extended continuously through X = 0."""
    X = np.asarray(X, dtype=complex)
    if np.linalg.norm(X) < SERIES_NORM:
        coeffs = [(-1.0) ** k / math.factorial(k + 1) for k in range(_SERIES_TERMS)]
        return _phi_series(X, coeffs)
    return np.linalg.solve(X, np.eye(X.shape[0]) - expm(-X))


def phi_right(X: np.ndarray) -> np.ndarray:
    """(exp(X) - I) X^-1, extended continuously through X = 0."""
    X = np.asarray(X, dtype=complex)
    if np.linalg.norm(X) < SERIES_NORM:
        coeffs = [1.0 / math.factorial(k + 1) for k in range(_SERIES_TERMS)]
        return _phi_series(X, coeffs)
    return np.linalg.solve(X, expm(X) - np.eye(X.shape[0]))


def phi_sinh(X: np.ndarray) -> np.ndarray:
    """(X - sinh X) X^-2, extended continuously through X = 0."""
    X = np.asarray(X, dtype=complex)
    if np.linalg.norm(X) < SERIES_NORM:
        coeffs = [0.0] * _SERIES_TERMS
        for m in range(1, _SERIES_TERMS // 2):
            coeffs[2 * m - 1] = -1.0 / math.factorial(2 * m + 1)
        return _phi_series(X, coeffs)
    sinh = 0.5 * (expm(X) - expm(-X))
    return np.linalg.solve(X @ X, X - sinh)


def embed(q: QuadraticExponent) -> np.ndarray:
    """Embedded (2n+2) x (2n+2) matrix with first column and last row zero."""
    d = 2 * q.n
    Om = omega(q.n)
    M = np.zeros((d + 2, d + 2), dtype=complex)
    M[0, 1:-1] = Om @ q.s  # row s^T Omega^T
    M[0, -1] = q.a
    M[1:-1, 1:-1] = q.X
    M[1:-1, -1] = q.s
    return M


def extract(M: np.ndarray) -> QuadraticExponent:
    """Inverse of embed."""
    M = np.asarray(M, dtype=complex)
    return QuadraticExponent(X=M[1:-1, 1:-1], s=M[1:-1, -1], a=M[0, -1])


def exp_embedded(q: QuadraticExponent) -> np.ndarray:
    """Closed-form exponential of the embedded matrix.

    exp[M] has middle block exp(X), last column built from (exp(X) - I) X^-1 s,
    top row from (I - exp(-X)) X^-1 s, and corner a + s^T Omega (X - sinh X) X^-2 s.
    Agrees with a generic matrix exponential but stays exact for singular X.
    """
    d = 2 * q.n
    Om = omega(q.n)
    E = np.eye(d + 2, dtype=complex)
    E[1:-1, 1:-1] = expm(q.X)
    E[1:-1, -1] = phi_right(q.X) @ q.s
    E[0, 1:-1] = Om @ (phi_left(q.X) @ q.s)
    E[0, -1] = q.a + q.s @ (Om @ (phi_sinh(q.X) @ q.s))
    return E


def _principal_log(mid: np.ndarray) -> np.ndarray:
    """Principal matrix log with an explicit branch-cut guard."""
    lam = np.linalg.eigvals(mid)
    scale = max(1.0, float(np.max(np.abs(lam))))
    on_cut = (np.abs(lam.imag) <= 1e-12 * scale) & (lam.real <= 1e-12 * scale)
    if np.any(on_cut):
        bad = lam[on_cut][0]
        raise BranchError(
            f"middle block has eigenvalue {bad:.6g} on the closed negative real "
            f"axis; principal logarithm undefined"
        )
    L, _ = logm(mid, disp=False)
    return np.asarray(L, dtype=complex)


def compose(q1: QuadraticExponent, q2: QuadraticExponent) -> QuadraticExponent:
    """Exponent q3 with exp[q3] = exp[q1] exp[q2] as operators.

    Multiplies the embedded exponentials and reads the combined (X, s, a) back
    off, taking the principal logarithm of the middle block.  Raises
    BranchError when that block has an eigenvalue on the closed negative real
    axis; no other branch is ever substituted.
    """
    if q1.n != q2.n:
        raise ValidationError(f"mode mismatch: {q1.n} vs {q2.n}")
    Om = omega(q1.n)
    P = exp_embedded(q1) @ exp_embedded(q2)
    X3 = _principal_log(P[1:-1, 1:-1])
    s3 = np.linalg.solve(phi_right(X3), P[1:-1, -1])
    a3 = P[0, -1] - s3 @ (Om @ (phi_sinh(X3) @ s3))
    return QuadraticExponent(X=X3, s=s3, a=a3)


def compose_chain(*qs: QuadraticExponent) -> QuadraticExponent:
    """Fold compose over several exponents, left to right."""
    if not qs:
        raise ValidationError("need at least one exponent")
    out = qs[0]
    for q in qs[1:]:
        out = compose(out, q)
    return out


def gaussian_exponent(state: GaussianState, scale: float) -> QuadraticExponent:
    """Exponent of scale * Hhat for the quadratic Hamiltonian of a faithful state.

    Hhat = (1/2)(rhat - r)^T H (rhat - r) with H the Hamiltonian matrix of the
    state's covariance, so exp of the result equals (Z rho)^(-scale).

    Args:
        state: faithful Gaussian state.
        scale: real multiple of the Hamiltonian, e.g. -1 for Z rho itself.

    Returns:
        QuadraticExponent with X = scale * i Omega H, s = X r, and the matching
        scalar term.
    """
    H = hamiltonian_from_covariance(state.cov)
    iOH = 1j * omega(state.n) @ H
    X = scale * iOH
    s = X @ state.mean
    a = -1j * scale * float(state.mean @ H @ state.mean)
    return QuadraticExponent(X=X, s=s, a=a)
