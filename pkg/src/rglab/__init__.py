"""Gene-list robustness laboratory.

Generative models, mass correlation ranking, the straightforward and
empirical-Bayes estimators of correct-selection proportion, and the closed-form
asymptotic-independence machinery for Fisher-transformed correlations.
"""

from rglab.asymptotics import (
    CubicRoots,
    PairwiseMoments,
    QuadraticCondition,
    asymptotic_fisher_covariance,
    char_poly_roots,
    gaussian_condition,
    independence_lhs,
    is_valid_correlation_structure,
    isserlis_pair_moments,
    solve_cubic,
)
from rglab.correlation import (
    CorrelationVector,
    Dataset,
    FisherVector,
    correlate_all,
    fisher,
    fisher_inverse,
    pairwise_moments,
    pearson,
)
from rglab.diagnostics import (
    HistogramData,
    NormalitySummary,
    histogram,
    normality_summary,
    qq_normal,
)
from rglab.estimators import CorrelationSelector, EmpiricalBayesOverlap
from rglab.exceptions import (
    DegenerateVarianceError,
    DomainError,
    ParameterError,
    RglabError,
    ShapeError,
    ValidityError,
)
from rglab.models import (
    GaussianSpec,
    PriorSpec,
    SparseLinearSpec,
    sample_gaussian_dataset,
    sample_prior_fisher,
    sample_sparse_dataset,
    sample_support,
    synthetic_correlation_noise,
    true_correlations_sparse,
)
from rglab.random import substream
from rglab.selection import (
    ExperimentSummary,
    RobustnessCriterion,
    SampleSizeResult,
    SelectionOutcome,
    SigmaQEstimate,
    approximated_replicate,
    estimate_sigma_q,
    minimal_sample_size,
    run_experiment,
    straightforward_replicate,
    top_u_indices,
)

__all__ = [
    "approximated_replicate",
    "asymptotic_fisher_covariance",
    "char_poly_roots",
    "correlate_all",
    "CorrelationSelector",
    "CorrelationVector",
    "CubicRoots",
    "Dataset",
    "DegenerateVarianceError",
    "DomainError",
    "EmpiricalBayesOverlap",
    "estimate_sigma_q",
    "ExperimentSummary",
    "fisher",
    "fisher_inverse",
    "FisherVector",
    "gaussian_condition",
    "GaussianSpec",
    "histogram",
    "HistogramData",
    "independence_lhs",
    "is_valid_correlation_structure",
    "isserlis_pair_moments",
    "minimal_sample_size",
    "normality_summary",
    "NormalitySummary",
    "pairwise_moments",
    "PairwiseMoments",
    "ParameterError",
    "pearson",
    "PriorSpec",
    "qq_normal",
    "QuadraticCondition",
    "RglabError",
    "RobustnessCriterion",
    "run_experiment",
    "sample_gaussian_dataset",
    "sample_prior_fisher",
    "sample_sparse_dataset",
    "sample_support",
    "SampleSizeResult",
    "SelectionOutcome",
    "ShapeError",
    "SigmaQEstimate",
    "solve_cubic",
    "SparseLinearSpec",
    "straightforward_replicate",
    "substream",
    "synthetic_correlation_noise",
    "top_u_indices",
    "true_correlations_sparse",
    "ValidityError",
]

__version__ = "0.1.0"
