"""Quantile surface neural network (QSNN).

One shared network maps (direction, features) to L radii, one output per
quantile level, trained with the sum of the L pinball losses on the length of
the forecast-adjusted observation. At prediction time the heads are clamped
at zero and sorted so levels never cross.
"""
from __future__ import annotations

import numpy as np

from .. import kernels
from ..directional import (
    QuantileSurfaceForecast,
    check_levels,
    decompose_many,
    forecast_adjust,
)
from ..numkit import Rng
from .losses import pinball_grad
from .mlp import MlpModel
from .optim import Adam, TrainConfig, TrainingDivergedError, batches
from .point import PointModel, as_features


class NoTrainableDirectionsError(ValueError):
    """Every observation coincides with its point estimate."""


class QsnnModel:
    def __init__(self, mlp: MlpModel, levels, n_dims: int, n_features: int,
                 loss_curve=None):
        self.mlp = mlp
        self.levels = check_levels(levels)
        self.n_dims = int(n_dims)
        self.n_features = int(n_features)
        if mlp.n_out != len(self.levels):
            raise ValueError("network output count must equal the number of levels")
        if mlp.n_in != self.n_dims + self.n_features:
            raise ValueError("network input must be direction components plus features")
        self.loss_curve = [] if loss_curve is None else list(loss_curve)

    def inputs(self, directions, features=None) -> np.ndarray:
        d = np.atleast_2d(np.asarray(directions, dtype=float))
        f = as_features(features, d.shape[0]) if self.n_features else np.zeros((d.shape[0], 0))
        if f.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {f.shape[1]}")
        return np.hstack([d, f])

    def raw_heads(self, directions, features=None) -> np.ndarray:
        return self.mlp.forward(self.inputs(directions, features))

    def predict_radii(self, directions, features=None) -> np.ndarray:
        """Clamped, ascending-sorted radii, shape (n, L)."""
        heads = self.raw_heads(directions, features)
        return np.sort(np.maximum(heads, 0.0), axis=1)

    def to_dict(self) -> dict:
        return {
            "levels": [float(t) for t in self.levels],
            "n_dims": self.n_dims,
            "n_features": self.n_features,
            "mlp": self.mlp.to_dict(),
        }

    @classmethod
    def from_dict(cls, d) -> "QsnnModel":
        return cls(MlpModel.from_dict(d["mlp"]), d["levels"], d["n_dims"], d["n_features"])


def qsnn_objective(mlp: MlpModel, inputs, lengths, levels, l2: float, buffer=None):
    """Summed pinball loss over samples and levels plus ``l2 * ||weights||^2``.

    Returns (loss, flat gradient). Single-hidden-layer nets go through the
    compiled kernel when available. ``buffer`` is an optional MlpModel of the
    same shape whose parameter vector receives the gradient.
    """
    levels = np.asarray(levels, dtype=float)
    if len(mlp.weights) == 2:
        probe = buffer if buffer is not None else MlpModel(mlp.sizes, mlp.activation)
        grad = probe.params
        loss = kernels.qsnn_loss_grad(
            np.ascontiguousarray(inputs, dtype=float), np.ascontiguousarray(lengths, dtype=float),
            levels, mlp.weights[0], mlp.biases[0], mlp.weights[1], mlp.biases[1],
            float(l2), mlp.activation == "relu",
            probe.weights[0], probe.biases[0], probe.weights[1], probe.biases[1],
        )
        return loss, grad
    out, cache = mlp.forward_cache(inputs)
    diff = out - lengths[:, None]
    g = pinball_grad(lengths[:, None], out, levels)
    loss = float(np.sum(diff * g)) + mlp.l2_penalty(l2)
    return loss, mlp.backward(cache, g) + mlp.l2_grad(l2)


def training_set(features, observations, point_model: PointModel):
    """Directions, lengths and features of the nonzero forecast-adjusted observations."""
    obs = np.asarray(observations, dtype=float)
    f = as_features(features, obs.shape[0])
    adjusted = forecast_adjust(obs, point_model.predict(f))
    dirs, lengths = decompose_many(adjusted)
    keep = lengths > 0
    if not np.any(keep):
        raise NoTrainableDirectionsError("all observations coincide with their point estimates")
    return dirs[keep], lengths[keep], f[keep]


def train_qsnn(features, observations, point_model: PointModel, levels,
               hidden=(10,), activation="tanh", config: TrainConfig | None = None,
               ) -> QsnnModel:
    config = config or TrainConfig()
    levels = check_levels(levels)
    dirs, lengths, f = training_set(features, observations, point_model)
    inputs = np.ascontiguousarray(np.hstack([dirs, f]))
    rng = Rng(config.seed)
    sizes = [inputs.shape[1], *hidden, len(levels)]
    mlp = MlpModel.initialized(sizes, rng.derive("qsnn-init"), activation)
    opt = Adam(mlp.params, config.learning_rate, config.beta1, config.beta2, config.eps)
    shuffle = rng.derive("qsnn-batches")
    buffer = MlpModel(sizes, activation)
    curve = []
    for _ in range(config.epochs):
        epoch_loss = 0.0
        for idx in batches(len(lengths), config.batch_size, shuffle):
            loss, grad = qsnn_objective(mlp, inputs[idx], lengths[idx], levels, config.l2,
                                        buffer)
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise TrainingDivergedError("QSNN objective became non-finite")
            opt.step(grad)
            epoch_loss += loss
        curve.append(epoch_loss)
    return QsnnModel(mlp, levels, dirs.shape[1], f.shape[1], curve)


def predict_surface(model: QsnnModel, point_estimate, features, directions) -> QuantileSurfaceForecast:
    directions = np.asarray(directions, dtype=float)
    f = None
    if model.n_features:
        f = np.repeat(np.atleast_2d(np.asarray(features, dtype=float)), len(directions), axis=0)
    radii = model.predict_radii(directions, f)
    return QuantileSurfaceForecast(np.asarray(point_estimate, dtype=float), model.levels,
                                   directions, radii.T)


def predict_radius(model: QsnnModel, direction, features, level_index: int) -> float:
    if not 0 <= level_index < len(model.levels):
        raise IndexError(f"level index {level_index} out of range")
    f = None if not model.n_features else np.atleast_2d(np.asarray(features, dtype=float))
    return float(model.predict_radii(np.atleast_2d(direction), f)[0, level_index])
