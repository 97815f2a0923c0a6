"""Strip entropies of Markov hom tree-shifts on Markov-Cayley trees.

A library and CLI for computing topological entropies of Markov hom
tree-shifts and their strip-entropy approximations along eventually periodic
rays, via per-step transfer matrices and Perron data in log domain, with an
independent brute-force oracle and a convergence-rate experiment harness.
"""

from .counting import (
    MODE_AUTO,
    MODE_EXACT,
    MODE_LOG,
    CountVector,
    block_count_total,
    block_counts,
    full_row_counts_match,
    subtree_counts,
)
from .entropy import (
    EntropyReport,
    RateFit,
    TopologicalEntropy,
    fit_rate,
    strip_convergence,
    topological_entropy,
)
from .errors import SizeGuardError
from .matrices import (
    BinaryMatrix,
    LogNonnegMatrix,
    PerronData,
    PrimitivityResult,
    ZeroSpectralRadiusError,
    hadamard,
    is_primitive,
    perron_sandwich_check,
    product,
    spectral_radius,
)
from .oracle import (
    Region,
    block_region,
    brute_block_counts,
    brute_strip_counts,
    count_labelings,
    path_strip_region,
)
from .ray import (
    Ray,
    StripProfile,
    check_strip_periodicity,
    lambda_strip,
    period_sites,
    step_profile,
    strip_region,
    validate_ray,
)
from .transfer import (
    PeriodMatrix,
    StripEntropyResult,
    TransferStep,
    classify_golden_step,
    initial_strip_counts,
    period_matrix,
    step_matrix,
    strip_counts,
    strip_entropy_closed,
    strip_entropy_iterative,
)
from .tree import (
    CompleteRecursiveWitness,
    MarkovTree,
    cps_from_witness,
    crt_preset,
    delta_size,
    follower_is_full,
    is_complete_recursive,
    is_cps,
    subtree_nodes,
    validate_tree,
    words_of_length,
    words_up_to,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMatrix",
    "CompleteRecursiveWitness",
    "CountVector",
    "EntropyReport",
    "LogNonnegMatrix",
    "MarkovTree",
    "PeriodMatrix",
    "PerronData",
    "PrimitivityResult",
    "RateFit",
    "Ray",
    "Region",
    "SizeGuardError",
    "StripEntropyResult",
    "StripProfile",
    "TopologicalEntropy",
    "TransferStep",
    "ZeroSpectralRadiusError",
    "MODE_AUTO",
    "MODE_EXACT",
    "MODE_LOG",
    "block_count_total",
    "block_counts",
    "block_region",
    "brute_block_counts",
    "brute_strip_counts",
    "check_strip_periodicity",
    "classify_golden_step",
    "count_labelings",
    "cps_from_witness",
    "crt_preset",
    "delta_size",
    "fit_rate",
    "follower_is_full",
    "full_row_counts_match",
    "hadamard",
    "initial_strip_counts",
    "is_complete_recursive",
    "is_cps",
    "is_primitive",
    "lambda_strip",
    "path_strip_region",
    "period_matrix",
    "period_sites",
    "perron_sandwich_check",
    "product",
    "spectral_radius",
    "step_matrix",
    "step_profile",
    "strip_convergence",
    "strip_counts",
    "strip_entropy_closed",
    "strip_entropy_iterative",
    "strip_region",
    "subtree_counts",
    "subtree_nodes",
    "topological_entropy",
    "validate_ray",
    "validate_tree",
    "words_of_length",
    "words_up_to",
]
