"""Generalized linear models with low-rank effects for network data."""

from .errors import AUCUndefinedError, DivergenceError, InputError, NumericalError
from .families import BERNOULLI, POISSON, Family, get_family
from .glm import (
    AdjacencyMatrix,
    CovariateTensor,
    ModelParams,
    grad_beta,
    grad_theta,
    linear_predictor,
    lipschitz_bound,
    log_likelihood,
    mean_matrix,
)
from .spectral import SvdFactors, project_nuclear, project_nuclear_rank, soft_threshold_level, svd
from .fit import FitConfig, FitResult, fit, fit_glm_baseline
from .simulate import SimDesign, generate_truth, orthonormal_covariate, sample_network
from .evaluate import TuningGrid, grid_search, holdout_split, predictive_auc, rmse

__version__ = "0.1.0"
