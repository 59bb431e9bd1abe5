"""Matrix-variate Gaussian mechanism for differentially private matrix queries.

The package provides the privacy-budget formulas, directional noise designs,
a seeded matrix-Gaussian sampler, i.i.d. Gaussian and Laplace baselines,
worst-case sensitivity helpers for bounded data, utility metrics, and a
benchmark harness with a command-line front end.
"""

from .budget import (
    BudgetMode,
    BudgetReport,
    ConditionCheck,
    PrivacyParams,
    QueryKind,
    QuerySpec,
    alpha_beta,
    check_condition,
    harmonic_numbers,
    phi_bound,
    precision_budget_equimodal,
    precision_budget_unimodal,
    zeta,
)
from .design import NoiseDesign, factor_design
from .errors import (
    AllocationError,
    ConditionCheckError,
    ConfigError,
    ContractViolationError,
    DegenerateDesignError,
    DomainError,
    FormatError,
    MvgdpError,
    ShapeError,
)
from .harness import (
    Experiment,
    ExperimentConfig,
    MechanismKind,
    ReportFormat,
    emit_report,
    format_significant,
    load_csv_matrix,
    load_dense_csv,
    parse_directions_source,
    parse_theta_spec,
    run_experiment,
)
from .mechanisms import (
    PerturbResult,
    PrecisionAllocation,
    derive_directions_dp,
    gaussian_iid_baseline,
    gaussian_noise_scale,
    laplace_iid_baseline,
    mvg_equimodal,
    mvg_unimodal,
    mvg_verify_characteristic,
)
from .metrics import (
    EvalReport,
    captured_variance,
    delta_rho,
    mean_ci95,
    ridge_regression_rmse,
    rss,
)
from .sampling import RandomStream, sample_mvg, sample_standard_matrix
from .sensitivity import (
    DataBounds,
    covariance_sensitivity,
    covariance_sensitivity_l1,
    gamma_covariance,
    gamma_identity,
    identity_sensitivity,
    identity_sensitivity_l1,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationError",
    "BudgetMode",
    "BudgetReport",
    "ConditionCheck",
    "ConditionCheckError",
    "ConfigError",
    "ContractViolationError",
    "DataBounds",
    "DegenerateDesignError",
    "DomainError",
    "EvalReport",
    "Experiment",
    "ExperimentConfig",
    "FormatError",
    "MechanismKind",
    "MvgdpError",
    "NoiseDesign",
    "PerturbResult",
    "PrecisionAllocation",
    "PrivacyParams",
    "QueryKind",
    "QuerySpec",
    "RandomStream",
    "ReportFormat",
    "ShapeError",
    "alpha_beta",
    "captured_variance",
    "check_condition",
    "covariance_sensitivity",
    "covariance_sensitivity_l1",
    "delta_rho",
    "derive_directions_dp",
    "emit_report",
    "factor_design",
    "format_significant",
    "gamma_covariance",
    "gamma_identity",
    "gaussian_iid_baseline",
    "gaussian_noise_scale",
    "harmonic_numbers",
    "identity_sensitivity",
    "identity_sensitivity_l1",
    "laplace_iid_baseline",
    "load_csv_matrix",
    "load_dense_csv",
    "mean_ci95",
    "mvg_equimodal",
    "mvg_unimodal",
    "mvg_verify_characteristic",
    "parse_directions_source",
    "parse_theta_spec",
    "phi_bound",
    "precision_budget_equimodal",
    "precision_budget_unimodal",
    "ridge_regression_rmse",
    "rss",
    "run_experiment",
    "sample_mvg",
    "sample_standard_matrix",
    "zeta",
]
