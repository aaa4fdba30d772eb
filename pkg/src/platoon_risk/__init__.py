"""Distributionally robust risk of cascading soft failures in delayed vehicle platoons."""

__version__ = "0.1.0"

from .errors import (
    InsufficientConditioningMassError,
    InsufficientSamplesError,
    InvalidParameterError,
    NotConnectedError,
    OutOfDomainError,
    PlatoonError,
    UnstableParametersError,
)
from .graph import (
    Graph,
    SpectralData,
    build_complete,
    build_p_cycle,
    build_path,
    from_edges,
    laplacian,
    spectral,
)
from .risk import (
    MatrixAmbiguity,
    RiskEntry,
    RiskResult,
    ScalarAmbiguity,
    SystemicLevelSet,
    conditional_expectation,
    dr_cascading_risk,
    h_eps,
    loewner_within,
    risk_lower_bound,
    risk_profile,
    systemic_threshold,
)
from .simulate import (
    SimConfig,
    SnapshotEnsemble,
    diffusion_from_covariance,
    empirical_conditional_expectation,
    empirical_covariance,
    simulate_platoon,
    time_averaged_covariance,
    truncated_bivariate_oracle,
)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .stability import (
    StabilityQuery,
    in_stability_region,
    mode_table,
    platoon_stable,
    solve_a,
    stability_margin,
)
from .statistics import (
    DistanceStatistics,
    PlatoonParams,
    correlation_from_covariance,
    difference_matrix,
    distance_covariance,
    f_integral,
    modal_variances,
)

__all__ = [
    "__version__",
    "InsufficientConditioningMassError",
    "InsufficientSamplesError",
    "InvalidParameterError",
    "NotConnectedError",
    "OutOfDomainError",
    "PlatoonError",
    "UnstableParametersError",
    "Graph",
    "SpectralData",
    "build_complete",
    "build_p_cycle",
    "build_path",
    "from_edges",
    "laplacian",
    "spectral",
    "MatrixAmbiguity",
    "RiskEntry",
    "RiskResult",
    "ScalarAmbiguity",
    "SystemicLevelSet",
    "conditional_expectation",
    "dr_cascading_risk",
    "h_eps",
    "loewner_within",
    "risk_lower_bound",
    "risk_profile",
    "systemic_threshold",
    "SimConfig",
    "SnapshotEnsemble",
    "diffusion_from_covariance",
    "empirical_conditional_expectation",
    "empirical_covariance",
    "simulate_platoon",
    "time_averaged_covariance",
    "truncated_bivariate_oracle",
    "StabilityQuery",
    "in_stability_region",
    "mode_table",
    "platoon_stable",
    "solve_a",
    "stability_margin",
    "DistanceStatistics",
    "PlatoonParams",
    "correlation_from_covariance",
    "difference_matrix",
    "distance_covariance",
    "f_integral",
    "modal_variances",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
]
