"""Closed-form pretty good measurement for Gaussian shift ensembles."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .ensembles import GaussianEnsemble, average_state, prior_density, sample_prior, state_at
from .errors import (
    BranchError,
    ConsistencyError,
    CutoffError,
    DefinitenessError,
    FaithfulnessError,
    GaussianPGMError,
    SingularityError,
    ValidationError,
)
from .golden import QuadraticExponent, compose, compose_chain, gaussian_exponent
from .instrument import (
    DefinitenessReport,
    InstrumentDescription,
    definiteness_report,
    expected_output_state,
    instrument_description,
    outcome_density,
    post_measurement_state,
)
from .pgm import (
    ConditionalOutcome,
    IdentityReport,
    MonteCarloResult,
    PGMDescription,
    conditional_outcome,
    identity_checks,
    mse_closed_form,
    mse_monte_carlo,
    outcome_from_parameter,
    parameter_from_outcome,
    pgm_description,
)
from .states import (
    GaussianState,
    classical_mix,
    displace,
    normalization_constant,
    overlap,
    purity,
)
from .symplectic import (
    WilliamsonDecomposition,
    check_uncertainty,
    covariance_from_hamiltonian,
    hamiltonian_from_covariance,
    omega,
    symplectic_inverse,
    symplectic_spectrum,
    williamson,
)
from .verify import Check, run_checks

__version__ = "0.1.0"

__all__ = [
    "BranchError",
    "Check",
    "ConditionalOutcome",
    "ConsistencyError",
    "CutoffError",
    "DEFAULT_TOLERANCES",
    "DefinitenessError",
    "DefinitenessReport",
    "FaithfulnessError",
    "GaussianEnsemble",
    "GaussianPGMError",
    "GaussianState",
    "IdentityReport",
    "InstrumentDescription",
    "MonteCarloResult",
    "PGMDescription",
    "QuadraticExponent",
    "SingularityError",
    "Tolerances",
    "ValidationError",
    "WilliamsonDecomposition",
    "average_state",
    "check_uncertainty",
    "classical_mix",
    "compose",
    "compose_chain",
    "conditional_outcome",
    "covariance_from_hamiltonian",
    "definiteness_report",
    "displace",
    "expected_output_state",
    "gaussian_exponent",
    "hamiltonian_from_covariance",
    "identity_checks",
    "instrument_description",
    "mse_closed_form",
    "mse_monte_carlo",
    "normalization_constant",
    "omega",
    "outcome_density",
    "outcome_from_parameter",
    "overlap",
    "parameter_from_outcome",
    "pgm_description",
    "post_measurement_state",
    "prior_density",
    "purity",
    "run_checks",
    "sample_prior",
    "state_at",
    "symplectic_inverse",
    "symplectic_spectrum",
    "williamson",
]
