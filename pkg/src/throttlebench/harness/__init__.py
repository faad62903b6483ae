from .config import (
    ConfigError,
    ExperimentConfig,
    InstanceSpec,
    StrategySpec,
    derive_episode_seed,
    load_experiment_config,
    parse_experiment_config,
)
from .experiment import (
    CellResult,
    CellRow,
    RatioStats,
    Report,
    competitive_ratio_cell,
    run_cell,
    run_experiment,
)
from .fastpath import BatchRealization, realize_batch, run_ogdcb_batch, run_pacing_batch, run_static_batch
from .slope import SlopeFit, fit_slope

__all__ = [
    "BatchRealization", "CellResult", "CellRow", "ConfigError", "ExperimentConfig",
    "InstanceSpec", "RatioStats", "Report", "SlopeFit", "StrategySpec",
    "competitive_ratio_cell", "derive_episode_seed", "fit_slope",
    "load_experiment_config", "parse_experiment_config", "realize_batch",
    "run_cell", "run_experiment", "run_ogdcb_batch", "run_pacing_batch",
    "run_static_batch",
]
