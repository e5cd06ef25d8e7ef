"""Simulation and least-squares drift estimation for a square-root
stochastic volatility model, with a seeded Monte Carlo laboratory that
checks the estimator's consistency and asymptotic normality against
closed-form limit covariances.
"""

from .errors import (
    AllReplicatesFailed,
    ConfigParseError,
    CsvFormatError,
    DegeneratePath,
    DegenerateSample,
    FellerViolated,
    HestonLabError,
    InsufficientData,
    InvalidParams,
    LengthMismatch,
    NegativeInput,
    NonPositiveA,
    NonPositiveScalingDiscriminant,
    NonPositiveSigma,
    NonPositiveY0,
    NonPositiveZ,
    NotSubcritical,
    PathTooShort,
    RhoOutOfRange,
    TiesDegenerate,
)
from .model import (
    AsymptoticCovariance,
    ModelParams,
    Regime,
    StationaryMoments,
    asymptotic_covariance,
    classify_regime,
    conditional_mean_x,
    conditional_mean_y,
    covariance_sandwich,
    kron,
    stationary_laplace,
    stationary_moments,
    validate_params,
)
from .simulate import (
    GaussianDraws,
    Scheme,
    SeedLineage,
    TimeGrid,
    XYPath,
    read_path_csv,
    simulate_x,
    simulate_xy,
    simulate_y,
    step_ave,
    step_desre,
    step_disre,
    step_se,
    step_te,
    write_path_csv,
)
from .estimate import (
    IntegralDiagnostic,
    LseEstimate,
    PathFunctionals,
    ScalingStatistic,
    estimate_record,
    ito_cross_check,
    lse_discrete_ab,
    lse_discrete_alphabeta,
    lse_from_functionals,
    ls_objective,
    normalized_error,
    path_functionals,
    random_scaling_transform,
)
from .montecarlo import (
    DeviationReport,
    ExperimentConfig,
    HistogramOverlay,
    McRun,
    McSummary,
    PARAM_NAMES,
    ParamStats,
    ReplicateFailure,
    ReplicateResult,
    anderson_darling,
    anderson_darling_pvalue,
    canonical_params,
    covariance_check,
    histogram_overlay,
    jarque_bera,
    jarque_bera_pvalue,
    preset_config,
    run_replicates,
    summarize,
)
from .reports import regenerate_report, report_payload, write_report

__version__ = "0.1.0"
