"""Physics-informed network laboratory for a nonlinear PDE on the unit square."""
from .autodiff import Activation, HyperDual2, activation_eval, grad_params, hd_var
from .hypertune import SearchReport, SearchSpace, TrialRecord, run_search
from .network import ConfigError, LayerSpec, Params, forward, init_params, param_count, zero_params
from .problem import exact_psi, residual, trial_psi, validate_mae
from .training import Adam, SGD, TrainConfig, TrainingDiverged, TrainReport, loss, train

__version__ = "0.1.0"
