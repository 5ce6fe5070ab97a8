"""Signed Takagi-Landsberg functions for any Hurst index H in (0, 1).

Construction on the tent-function basis, exact dyadic-grid kernels, p-th
variation along the dyadic partitions and its limit slope, moments of the
associated infinite Bernoulli convolution, closed-form extremes, and the
sharp modulus of continuity.
"""

from .basis import FSIndex, eval_e00, eval_emk
from .bernoulli import (
    BernoulliConvolution,
    bernoulli_numbers,
    even_moment,
    normalized_even_moment,
    partitions,
    sample_abs_moment,
    signed_moment,
)
from .coeffs import (
    ALL_PLUS,
    HALF_NEGATED,
    AllPlus,
    CoefficientSource,
    Explicit,
    HalfNegated,
    Seeded,
    explicit_from_json,
    load_explicit,
)
from .dyadic import (
    IncrementTable,
    grid_values,
    increment_table,
    iter_increment_chunks,
    refine,
    sign_matrix,
)
from .errors import (
    GuardExceededError,
    LevelOverflowError,
    MissingLevelError,
    TakagiLabError,
)
from .extremal import (
    ModulusProfile,
    max_value,
    modulus_check,
    nu,
    omega,
    sharpness_sequence,
    truncated_max,
    uniform_oscillation,
)
from .tl_function import (
    Hurst,
    SignedTLFunction,
    classic,
    evaluate,
    evaluate_truncated,
    oscillation_extremal,
    symmetry_partner,
    tail_bound,
    truncation_level,
)
from .variation import (
    Regime,
    classify_regime,
    convergence_report,
    predicted_slope,
    slope_curve,
    truncated_slope,
    vn,
    vn_signed,
)

__version__ = "0.1.0"

__all__ = [
    "FSIndex", "eval_e00", "eval_emk",
    "CoefficientSource", "AllPlus", "HalfNegated", "Seeded", "Explicit",
    "ALL_PLUS", "HALF_NEGATED", "explicit_from_json", "load_explicit",
    "Hurst", "SignedTLFunction", "classic", "oscillation_extremal",
    "evaluate", "evaluate_truncated", "symmetry_partner",
    "tail_bound", "truncation_level",
    "IncrementTable", "refine", "increment_table", "iter_increment_chunks",
    "grid_values", "sign_matrix",
    "Regime", "vn", "vn_signed", "classify_regime",
    "truncated_slope", "predicted_slope", "convergence_report", "slope_curve",
    "BernoulliConvolution", "even_moment", "signed_moment",
    "normalized_even_moment", "bernoulli_numbers", "partitions",
    "sample_abs_moment",
    "max_value", "truncated_max", "uniform_oscillation",
    "nu", "omega", "ModulusProfile", "modulus_check", "sharpness_sequence",
    "TakagiLabError", "LevelOverflowError", "GuardExceededError",
    "MissingLevelError",
]
