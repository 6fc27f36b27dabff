"""Quasi-Monte Carlo permutation sampling for Shapley value estimation.

The package provides permutation kernels with closed-form uniform
expectations, an RKHS discrepancy for weighted permutation sample sets,
seven sample generators (Monte Carlo, antithetic pairs, kernel herding,
sequential Bayesian quadrature, orthogonal spherical codes, Sobol points on
the sphere, and uniform sphere sampling), Shapley value estimators with
exact brute-force oracles, and a benchmark harness with a CLI.
"""

from .attribution import ShapleyAttributor
from .discrepancy import SampleMeta, WeightedSampleSet, discrepancy
from .errors import NumericalError, PredictorError
from .estimators import (
    ShapleyEstimate,
    exact_shapley_permutations,
    exact_shapley_subsets,
    mse,
    owen_multilinear,
    shapley_from_permutations,
    stratified_castro,
)
from .games import (
    Game,
    external_predictor,
    glove_game,
    interaction_game,
    linear_game,
    marginalization_game,
)
from .harness import ExperimentConfig, estimate_once, run_convergence, run_discrepancy_table, run_sweep
from .kernels import KernelSpec, expected_kernel_uniform, kendall, kernel_matrix, mallows, spearman
from .permutations import (
    Permutation,
    argsort,
    identity,
    inverse,
    n_discordant,
    random_permutation,
    reverse,
)
from .samplers import (
    SamplerConfig,
    antithetic,
    kernel_herding,
    monte_carlo,
    orthogonal_codes,
    sbq,
    sobol_permutations,
    sphere_mc,
)
from .sobol import SobolSequence
from .sphere import (
    lift_to_hyperplane,
    nearest_permutation,
    polar_inverse_cdf,
    polar_to_cartesian,
    projection_matrix,
    uniform_sphere_point,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "Game",
    "KernelSpec",
    "NumericalError",
    "Permutation",
    "PredictorError",
    "SampleMeta",
    "SamplerConfig",
    "ShapleyAttributor",
    "ShapleyEstimate",
    "SobolSequence",
    "WeightedSampleSet",
    "antithetic",
    "argsort",
    "discrepancy",
    "estimate_once",
    "exact_shapley_permutations",
    "exact_shapley_subsets",
    "expected_kernel_uniform",
    "external_predictor",
    "glove_game",
    "identity",
    "interaction_game",
    "inverse",
    "kendall",
    "kernel_herding",
    "kernel_matrix",
    "lift_to_hyperplane",
    "linear_game",
    "mallows",
    "marginalization_game",
    "monte_carlo",
    "mse",
    "n_discordant",
    "nearest_permutation",
    "orthogonal_codes",
    "owen_multilinear",
    "polar_inverse_cdf",
    "polar_to_cartesian",
    "projection_matrix",
    "random_permutation",
    "reverse",
    "run_convergence",
    "run_discrepancy_table",
    "run_sweep",
    "sbq",
    "shapley_from_permutations",
    "sobol_permutations",
    "spearman",
    "sphere_mc",
    "stratified_castro",
    "uniform_sphere_point",
]
