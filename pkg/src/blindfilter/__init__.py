"""Structure-blind denoising with filters whose spectrum is l1-constrained or penalized."""

from .baseline import GridDictionary, lasso_denoise, lasso_lambda
from .oracle import (
    CharPoly,
    NotShiftInvariantError,
    SimplicityWitness,
    SubspaceModel,
    compose_and_bound,
    poly_from_subspace,
    projector_column_filter,
    subspace_from_poly,
    unit_circle_filter,
)
from .recovery import (
    RecoveryConfig,
    RecoveryReport,
    lambda_rule,
    recover,
    recover_blockwise,
    recover_constrained,
    recover_interpolating,
    recover_penalized,
)
from .signals import NoiseModel, ScenarioSpec, generate, observe
from .solver import LeastSquaresSpec, SolverOptions, solve_constrained, solve_penalized
from .spectrum import ConvolutionOperator, Filter, MissingDataError, Signal, convolve, dft, idft

__version__ = "0.1.0"
