"""Deterministic federated minimax optimization: simulators, oracles, bounds."""

from .algorithms import (
    ALGORITHMS,
    FEDGDA_GT,
    GDA,
    LOCAL_SGDA,
    AlgoConfig,
    DivergenceError,
    EtaSelection,
    RoundRecord,
    RunTrace,
    auto_eta_fedgda,
    conservative_eta,
    fedgda_gt,
    fedgda_round_map,
    fedgda_round_map_norm,
    gda_step,
    local_sgda,
    local_sgda_residual,
    operator_compose,
    run_algorithm,
    run_gda,
)
from .analysis import (
    ContractionReport,
    FixedPointReport,
    MonotonicityReport,
    RobustLossResult,
    UnstableStepsizeError,
    check_contraction,
    check_strong_monotonicity,
    fixed_point_report,
    local_sgda_fixed_point_closed_form,
    local_sgda_limit,
    optimality_gap,
    robust_loss,
)
from .core import (
    DimensionMismatchError,
    FeasibleSet,
    Iterate,
    ProductSet,
    add,
    average_iterates,
    average_vectors,
    dot,
    norm,
    norm2,
    project,
    scale,
    sub,
)
from .datagen import (
    QuadraticGenSpec,
    RlrGenSpec,
    gen_quadratic,
    gen_rlr,
    load_dataset,
    save_dataset,
    substream,
)
from .genbounds import (
    BoundInputs,
    FiniteHypothesisSample,
    RademacherEstimate,
    bound_terms,
    estimate_rademacher,
    massart_bound,
    population_risk_bound,
    vc_rademacher_bound,
    worst_case_risk_bound,
)
from .problems import (
    LocalObjective,
    MinimaxProblem,
    QuadraticAgent,
    RlrAgent,
    RobustLinearRegression,
    ScalarSaddleAgent,
    ScalarTwoAgent,
    SingularProblemError,
    UncoupledQuadratic,
    UnsupportedProblemError,
    closed_form_minimax,
    estimate_constants,
    finite_difference_gradients,
    global_grad,
)

__version__ = "0.1.0"
