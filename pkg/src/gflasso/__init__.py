"""Block-sparse smooth signal reconstruction from compressed measurements.

ADMM solvers for LASSO formulations that combine element-wise sparsity,
disjoint or overlapping (latent) group sparsity, and a fusion penalty on
consecutive differences, plus the sensing model and benchmark harness to
evaluate them.
"""

__version__ = "0.1.0"

from .problem import (
    AdmmConfig,
    DifferenceOperator,
    GroupPartition,
    LatentGroupLayout,
    PenaltyConfig,
    build_difference_operator,
    build_latent_layout,
    build_partition,
    fusion_penalty,
    lgf_objective,
    mse,
    sgf_objective,
)
from .prox import block_shrink, soft_threshold, sparse_group_shrink
from .sensing import (
    BlockSpec,
    Segment,
    SensingConfig,
    default_block_spec,
    derive_seed,
    gaussian_orthonormal_matrix,
    generate_measurement_matrix,
    make_test_signal,
    sense,
)
from .solvers import (
    LinearSystemFactor,
    SolveReport,
    SolverDivergenceError,
    factorize_lgf,
    factorize_sgf,
    least_squares_init,
    lgf_admm_solve,
    sgf_admm_solve,
    variant_config,
)
from .bench import (
    ConfigError,
    ExperimentSpec,
    SolverEntry,
    TrialResult,
    emit_outputs,
    load_config,
    run_mse_sweep,
    run_reconstruction,
    spec_from_dict,
)

__all__ = [
    "__version__",
    "AdmmConfig",
    "BlockSpec",
    "ConfigError",
    "DifferenceOperator",
    "ExperimentSpec",
    "GroupPartition",
    "LatentGroupLayout",
    "LinearSystemFactor",
    "PenaltyConfig",
    "Segment",
    "SensingConfig",
    "SolveReport",
    "SolverDivergenceError",
    "SolverEntry",
    "TrialResult",
    "block_shrink",
    "build_difference_operator",
    "build_latent_layout",
    "build_partition",
    "default_block_spec",
    "derive_seed",
    "emit_outputs",
    "factorize_lgf",
    "factorize_sgf",
    "fusion_penalty",
    "gaussian_orthonormal_matrix",
    "generate_measurement_matrix",
    "least_squares_init",
    "lgf_admm_solve",
    "lgf_objective",
    "load_config",
    "make_test_signal",
    "mse",
    "run_mse_sweep",
    "run_reconstruction",
    "sense",
    "sgf_admm_solve",
    "sgf_objective",
    "soft_threshold",
    "sparse_group_shrink",
    "spec_from_dict",
    "variant_config",
]
