from .kernels import matern52, matern52_cross
from .gp import GPModel, fit_gp_mle, fit_hetgp, log_marginal_likelihood, log_marginal_likelihood_grad
from .gbm import RegressionTree, TreeEnsemble, fit_gbm
from .two_stage import (
    Prediction,
    OutcomeEmulator,
    EmulatorModel,
    summarize_replicates,
    fit_outcome_emulator,
    validate_emulator,
    Z90,
)

__all__ = [
    "matern52", "matern52_cross",
    "GPModel", "fit_gp_mle", "fit_hetgp",
    "log_marginal_likelihood", "log_marginal_likelihood_grad",
    "RegressionTree", "TreeEnsemble", "fit_gbm",
    "Prediction", "OutcomeEmulator", "EmulatorModel",
    "summarize_replicates", "fit_outcome_emulator", "validate_emulator",
    "Z90",
]
