"""Cost allocation: exact and approximate Shapley values."""

from .approx import marginal_contribution_alloc, normalize_to_total, sev_alloc
from .exact import exact_shapley_kclass, exact_shapley_naive
from .game import (
    AllocationResult,
    ClassStructure,
    CoalitionCostTable,
    CountingCost,
    build_cost_table,
    multivariate_hypergeometric_pmf,
)
from .metrics import average_relative_difference, relative_difference
from .sampling import adaptive_sampling_alloc, exploration_weight, stratum_probabilities

__all__ = [
    "AllocationResult",
    "ClassStructure",
    "CoalitionCostTable",
    "CountingCost",
    "adaptive_sampling_alloc",
    "average_relative_difference",
    "build_cost_table",
    "exact_shapley_kclass",
    "exact_shapley_naive",
    "exploration_weight",
    "marginal_contribution_alloc",
    "multivariate_hypergeometric_pmf",
    "normalize_to_total",
    "relative_difference",
    "sev_alloc",
    "stratum_probabilities",
]
