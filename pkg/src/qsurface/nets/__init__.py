from .losses import pinball_grad, pinball_loss
from .mlp import MlpModel
from .optim import Adam, TrainConfig, TrainingDivergedError, adam_step
from .point import PointModel, fit_point_model
from .qsnn import (
    NoTrainableDirectionsError,
    QsnnModel,
    predict_radius,
    predict_surface,
    qsnn_objective,
    train_qsnn,
)

__all__ = [
    "Adam",
    "MlpModel",
    "NoTrainableDirectionsError",
    "PointModel",
    "QsnnModel",
    "TrainConfig",
    "TrainingDivergedError",
    "adam_step",
    "fit_point_model",
    "pinball_grad",
    "pinball_loss",
    "predict_radius",
    "predict_surface",
    "qsnn_objective",
    "train_qsnn",
]
