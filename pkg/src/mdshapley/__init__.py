"""Shapley-based explanation and cellwise repair of multivariate outliers.

The squared Mahalanobis distance of an observation is decomposed exactly
into per-variable Shapley contributions and a pairwise interaction matrix.
On top of the decomposition, two iterative detectors flag and impute the
individual cells that make an observation outlying, and a deterministic
simulation harness measures their precision and recall under controlled
contamination.
"""

from .cellwise import (
    CellFlagResult,
    ReplacementSolution,
    Snapshot,
    beta_hat,
    explain_given_cells,
    moe,
    reference_point,
    scd,
)
from .distributions import (
    Cutoff,
    chi2_cdf,
    chi2_quantile,
    cutoff,
    noncentral_chi2_cdf,
    noncentral_chi2_quantile,
)
from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    DimensionTooLarge,
    EmptySubset,
    IndexOutOfRange,
    IndexOverlap,
    InsufficientRows,
    InvalidLevel,
    MdShapleyError,
    MissingResults,
    NegativeLambda,
    NonFinite,
    NotPositiveDefinite,
    ParseError,
    SchemaVersionMismatch,
    ShapeMismatch,
    SingularSubproblem,
)
from .estimation import (
    StandardizationPlan,
    load_model,
    robust_standardize,
    sample_covariance,
    unstandardize,
)
from .linmodel import (
    LocationScatter,
    MaskedVector,
    build_model,
    masked_md2,
    masked_vector,
    md2,
)
from .shapley import (
    InteractionMatrix,
    ShapleyExplanation,
    interaction_bruteforce,
    interaction_matrix,
    scaled_contributions,
    set_derivative3,
    shapley_bruteforce,
    shapley_value,
)
from .simulation import (
    GridConfig,
    MetricRow,
    SimulationCase,
    aggregate,
    contaminate,
    detect_cells,
    evaluate,
    expand_cases,
    generate_clean,
    inject_shift,
    inject_structured,
    make_covariance,
    run_case,
    run_grid,
)

__version__ = "0.1.0"

__all__ = [
    "CellFlagResult",
    "Cutoff",
    "DegenerateColumn",
    "DimensionMismatch",
    "DimensionTooLarge",
    "EmptySubset",
    "GridConfig",
    "IndexOutOfRange",
    "IndexOverlap",
    "InsufficientRows",
    "InteractionMatrix",
    "InvalidLevel",
    "LocationScatter",
    "MaskedVector",
    "MdShapleyError",
    "MetricRow",
    "MissingResults",
    "NegativeLambda",
    "NonFinite",
    "NotPositiveDefinite",
    "ParseError",
    "ReplacementSolution",
    "SchemaVersionMismatch",
    "ShapeMismatch",
    "ShapleyExplanation",
    "SimulationCase",
    "SingularSubproblem",
    "Snapshot",
    "StandardizationPlan",
    "aggregate",
    "beta_hat",
    "build_model",
    "chi2_cdf",
    "chi2_quantile",
    "contaminate",
    "cutoff",
    "detect_cells",
    "evaluate",
    "expand_cases",
    "explain_given_cells",
    "generate_clean",
    "inject_shift",
    "inject_structured",
    "interaction_bruteforce",
    "interaction_matrix",
    "load_model",
    "make_covariance",
    "masked_md2",
    "masked_vector",
    "md2",
    "moe",
    "noncentral_chi2_cdf",
    "noncentral_chi2_quantile",
    "reference_point",
    "robust_standardize",
    "run_case",
    "run_grid",
    "sample_covariance",
    "scaled_contributions",
    "scd",
    "set_derivative3",
    "shapley_bruteforce",
    "shapley_value",
    "unstandardize",
    "__version__",
]
