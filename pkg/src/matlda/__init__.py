"""Penalized matrix-variate linear discriminant analysis with Kronecker precision."""

__version__ = "0.1.0"

from .bcd import FitResult, PenaltyConfig, fit, normalize_pair, penalized_objective_f
from .classifier import predict_batch, score, score_batch
from .glasso import GlassoSolution, glasso_solve, kkt_residual
from .matnorm import LabeledMatrixDataset, ModelParameters, flipflop_mle
from .meansolver import MeanProblem, solve_mean_subproblem
from .metrics import misclassification_rate, support_metrics
from .simulation import SimulationSpec, generate_replicate
from .tuning import TuningGrid, grid_search, kfold_cv

__all__ = [
    "FitResult", "PenaltyConfig", "fit", "normalize_pair", "penalized_objective_f",
    "predict_batch", "score", "score_batch",
    "GlassoSolution", "glasso_solve", "kkt_residual",
    "LabeledMatrixDataset", "ModelParameters", "flipflop_mle",
    "MeanProblem", "solve_mean_subproblem",
    "misclassification_rate", "support_metrics",
    "SimulationSpec", "generate_replicate",
    "TuningGrid", "grid_search", "kfold_cv",
]
