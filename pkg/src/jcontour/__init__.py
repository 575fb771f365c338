"""Sequential design for joint contour location.

Locate the single input at which several deterministic black-box responses
simultaneously attain their target values, using Gaussian process or deep
Gaussian process surrogates and an adaptive within-tolerance probability
criterion.
"""

from .acquisition import (
    AcquisitionDecision,
    JclConfig,
    McmcSettings,
    Mode,
    ToleranceState,
    compute_tolerance,
    decide,
    joint_log_probability,
    joint_log_probability_batch,
    maximize_joint_probability,
    multistart_maximize,
)
from .benchmarks import (
    BENCHMARK_NAMES,
    BenchmarkSpec,
    CampaignResult,
    campaign_seed,
    default_config,
    from_native,
    get_spec,
    grid_min_sum_squares,
    make_problem,
    run_campaign,
    to_native,
)
from .data import Dataset
from .design import (
    METHODS,
    JclDesigner,
    Problem,
    RunRecord,
    RunRow,
    best_distance,
    classification_entropy,
    run_alternating_entropy,
    run_alternating_pareto,
    run_jcl,
    run_lhs,
    run_method,
)
from .dgp import DgpPosterior, DgpSample, ess_step, fit_dgp, interval_probability_dgp, predict_dgp
from .errors import (
    InvalidArgumentError,
    InvalidStateError,
    JcontourError,
    NumericalFailureError,
)
from .geometry import (
    CandidateSet,
    Triangulation,
    candidate_criteria,
    delaunay,
    pareto_front,
    select_exploration,
    tricands,
)
from .gp import (
    FittedGp,
    GpHyperparameters,
    PosteriorSummary,
    fit_gp,
    gaussian_interval,
    interval_probability,
    kernel_matrix,
    log_gaussian_interval,
    log_interval_probability,
    predict,
)
from .sampling import lhs, maximin_lhs
from .session import load_session, new_session, save_session, session_lock

__version__ = "0.1.0"

__all__ = [
    "AcquisitionDecision",
    "BENCHMARK_NAMES",
    "BenchmarkSpec",
    "CampaignResult",
    "CandidateSet",
    "Dataset",
    "DgpPosterior",
    "DgpSample",
    "FittedGp",
    "GpHyperparameters",
    "InvalidArgumentError",
    "InvalidStateError",
    "JclConfig",
    "JclDesigner",
    "JcontourError",
    "METHODS",
    "McmcSettings",
    "Mode",
    "NumericalFailureError",
    "PosteriorSummary",
    "Problem",
    "RunRecord",
    "RunRow",
    "ToleranceState",
    "Triangulation",
    "best_distance",
    "campaign_seed",
    "candidate_criteria",
    "classification_entropy",
    "compute_tolerance",
    "decide",
    "default_config",
    "delaunay",
    "ess_step",
    "fit_dgp",
    "fit_gp",
    "from_native",
    "gaussian_interval",
    "get_spec",
    "grid_min_sum_squares",
    "interval_probability",
    "interval_probability_dgp",
    "joint_log_probability",
    "joint_log_probability_batch",
    "kernel_matrix",
    "lhs",
    "load_session",
    "log_gaussian_interval",
    "log_interval_probability",
    "make_problem",
    "maximin_lhs",
    "maximize_joint_probability",
    "multistart_maximize",
    "new_session",
    "pareto_front",
    "predict",
    "predict_dgp",
    "run_alternating_entropy",
    "run_alternating_pareto",
    "run_campaign",
    "run_jcl",
    "run_lhs",
    "run_method",
    "save_session",
    "select_exploration",
    "session_lock",
    "tricands",
]
