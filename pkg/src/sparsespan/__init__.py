"""Recovering the sparsest vector planted in a random subspace.

The method: given a basis W of a subspace of R^n, solve the n linear
programs that pin each coordinate to 1 while minimizing the l1 norm over
the subspace, then keep the output a sparsity measure ranks sparsest.
This package provides the programs, the selectors, deterministic
recovery certificates, the diagonal-thresholding baseline, and seeded
Monte-Carlo experiment drivers with replayable on-disk results.

All coordinate indices in this package are 0-based.
"""

__version__ = "0.1.0"

from .estimator import DiagonalThresholding, SparsestVectorLP
from .exceptions import FaceLimitError, NumericalFailureError, SelectionError
from .lp import (
    K_MAX,
    L1ProgramSolution,
    SolveStatus,
    min_l1_gain,
    min_l1_gain_lower_bound,
    solve_l1_program,
)
from .recovery import (
    CandidateSolution,
    SelectorSpec,
    TrialOutcome,
    certify_exact,
    certify_stable,
    diagonal_threshold_support,
    evaluate_success,
    evaluate_trial,
    necessary_condition_value,
    recover_all,
    select,
    sparsity_score,
)
from .rng import RngStream
from .subspaces import (
    PlantedInstance,
    TestVectorSpec,
    bernoulli_gaussian,
    make_test_vector,
    planted_random,
    projector_diagonal,
    pure_random_basis,
    top_support,
)

__all__ = [
    "__version__",
    "CandidateSolution",
    "DiagonalThresholding",
    "FaceLimitError",
    "K_MAX",
    "L1ProgramSolution",
    "NumericalFailureError",
    "PlantedInstance",
    "RngStream",
    "SelectionError",
    "SelectorSpec",
    "SolveStatus",
    "SparsestVectorLP",
    "TestVectorSpec",
    "TrialOutcome",
    "bernoulli_gaussian",
    "certify_exact",
    "certify_stable",
    "diagonal_threshold_support",
    "evaluate_success",
    "evaluate_trial",
    "make_test_vector",
    "min_l1_gain",
    "min_l1_gain_lower_bound",
    "necessary_condition_value",
    "planted_random",
    "projector_diagonal",
    "pure_random_basis",
    "recover_all",
    "select",
    "solve_l1_program",
    "sparsity_score",
    "top_support",
]
