"""Exception types shared across the package."""


class GaussianPGMError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GaussianPGMError, ValueError):
    """Invalid input: wrong shape, asymmetry, bad schema, violated precondition."""


class DefinitenessError(ValidationError):
    """A matrix required to be positive (semi)definite is not.

    The message names the offending eigenvalue so callers can see how far
    the input is from admissible.
    """


class FaithfulnessError(ValidationError):
    """A state required to be faithful has a symplectic eigenvalue at or below 1."""


class SingularityError(ValidationError):
    """A matrix that must be inverted is singular or numerically near-singular."""


class BranchError(GaussianPGMError, ArithmeticError):
    """Principal matrix logarithm undefined: eigenvalue on the closed negative axis."""


class CutoffError(ValidationError):
    """Requested Fock cutoff cannot represent the state to the required accuracy."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class ConsistencyError(GaussianPGMError, RuntimeError):
    """An internal cross-check failed; derived quantities disagree beyond tolerance."""
