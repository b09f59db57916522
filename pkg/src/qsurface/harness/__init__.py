from .config import PRESETS, ExperimentConfig, preset
from .experiment import EvaluationReport, StageError, evaluate, run_experiment, train_models

__all__ = [
    "PRESETS",
    "EvaluationReport",
    "ExperimentConfig",
    "StageError",
    "evaluate",
    "preset",
    "run_experiment",
    "train_models",
]
