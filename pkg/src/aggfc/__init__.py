"""Online aggregation of recursive forecasters for time varying AR processes.

The package simulates time varying autoregressive (TVAR) data, runs banks of
normalized least mean squares predictors whose step sizes cover a smoothness
grid, combines them with exponential weights (gradient- or loss-based), and
ships the Monte Carlo and inequality-certification harness around them.
"""

from ._accel import NUMBA_ENABLED, backend_name
from .aggregation import (
    Aggregator,
    ModelConstants,
    Strategy,
    batch_weight_trajectory,
    batch_weights,
    eta_adaptive,
    eta_corollary,
)
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .evaluation import (
    LossReport,
    estimate_model_constants,
    exp_concavity_gap,
    exp_concavity_holds,
    fit_decay_constant,
    load_params,
    regret_margin,
    resolve_eta,
    run_experiment,
    shifted_loss,
    stream_forecast,
)
from .predictors import (
    FrozenArPredictor,
    NlmsPredictor,
    PredictorBankSpec,
    ZeroPredictor,
    bank_size,
    build_nlms_bank,
    smoothness_grid,
    step_sizes,
)
from .tvar import (
    InnovationSpec,
    PacfPath,
    TvarParams,
    TvarRealization,
    burn_in_length,
    check_stability,
    impulse_coefficients,
    iter_tvar,
    levinson_durbin,
    pacf_from_ar,
    sample_pacf_paths,
    simulate_tvar,
    spectral_radius,
    synthesize_params,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "backend_name",
    "Aggregator",
    "ModelConstants",
    "Strategy",
    "batch_weight_trajectory",
    "batch_weights",
    "eta_adaptive",
    "eta_corollary",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "LossReport",
    "estimate_model_constants",
    "exp_concavity_gap",
    "exp_concavity_holds",
    "fit_decay_constant",
    "load_params",
    "regret_margin",
    "resolve_eta",
    "run_experiment",
    "shifted_loss",
    "stream_forecast",
    "FrozenArPredictor",
    "NlmsPredictor",
    "PredictorBankSpec",
    "ZeroPredictor",
    "bank_size",
    "build_nlms_bank",
    "smoothness_grid",
    "step_sizes",
    "InnovationSpec",
    "PacfPath",
    "TvarParams",
    "TvarRealization",
    "burn_in_length",
    "check_stability",
    "impulse_coefficients",
    "iter_tvar",
    "levinson_durbin",
    "pacf_from_ar",
    "sample_pacf_paths",
    "simulate_tvar",
    "spectral_radius",
    "synthesize_params",
    "__version__",
]
