"""Deterministic point estimators (first stage of the two-stage method)."""
from __future__ import annotations

import numpy as np

from ..numkit import Rng
from .mlp import MlpModel
from .optim import Adam, TrainConfig, TrainingDivergedError


def as_features(features, n: int) -> np.ndarray:
    if features is None:
        return np.zeros((n, 0))
    f = np.asarray(features, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] != n:
        raise ValueError(f"{f.shape[0]} feature rows for {n} observations")
    return f


class PointModel:
    """Maps features (n, M) to point estimates (n, K).

    ``kind`` is ``constant`` (unconditional mean), ``linear`` or ``mlp``.
    """

    def __init__(self, kind, n_features, n_targets, weights=None, bias=None, mlp=None):
        if kind not in ("constant", "linear", "mlp"):
            raise ValueError(f"unknown point model kind {kind!r}")
        self.kind = kind
        self.n_features = int(n_features)
        self.n_targets = int(n_targets)
        self.weights = None if weights is None else np.asarray(weights, dtype=float)
        self.bias = None if bias is None else np.asarray(bias, dtype=float)
        self.mlp = mlp

    def predict(self, features=None, n=None) -> np.ndarray:
        if features is None:
            features = np.zeros((1 if n is None else n, 0))
        f = np.atleast_2d(np.asarray(features, dtype=float))
        if self.n_features == 0:
            # an unconditional mean ignores whatever features come with the query
            return np.repeat(self.bias[None, :], f.shape[0], axis=0)
        if f.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {f.shape[1]}")
        if self.kind == "constant":
            return np.repeat(self.bias[None, :], f.shape[0], axis=0)
        if self.kind == "linear":
            return f @ self.weights + self.bias
        return self.mlp.forward(f)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n_features": self.n_features, "n_targets": self.n_targets}
        if self.kind == "mlp":
            d["mlp"] = self.mlp.to_dict()
        else:
            d["bias"] = [float(b) for b in self.bias]
            if self.kind == "linear":
                d["weights"] = [[float(w) for w in row] for row in self.weights]
        return d

    @classmethod
    def from_dict(cls, d) -> "PointModel":
        mlp = MlpModel.from_dict(d["mlp"]) if "mlp" in d else None
        return cls(d["kind"], d["n_features"], d["n_targets"],
                   weights=d.get("weights"), bias=d.get("bias"), mlp=mlp)


def fit_point_model(features, observations, kind=None, config: TrainConfig | None = None,
                    hidden=(10,)) -> PointModel:
    """Fit the point estimator.

    Without features this is the sample mean (the Gaussian maximum likelihood
    mean). With features ``kind`` selects ordinary least squares (default) or
    an MLP trained on mean squared Euclidean error.
    """
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[0] == 0:
        raise ValueError("need a nonempty (n, K) observation array")
    n, k = obs.shape
    f = as_features(features, n)
    m = f.shape[1]
    if m == 0 or kind == "constant":
        return PointModel("constant", m, k, bias=obs.mean(axis=0))
    kind = kind or "linear"
    if kind == "linear":
        design = np.hstack([f, np.ones((n, 1))])
        coef, *_ = np.linalg.lstsq(design, obs, rcond=None)
        return PointModel("linear", m, k, weights=coef[:-1], bias=coef[-1])
    if kind != "mlp":
        raise ValueError(f"unknown point model kind {kind!r}")
    config = config or TrainConfig(epochs=2000, learning_rate=0.01, l2=0.0)
    rng = Rng(config.seed).derive("point-mlp")
    mlp = MlpModel.initialized([m, *hidden, k], rng, "tanh")
    opt = Adam(mlp.params, config.learning_rate, config.beta1, config.beta2, config.eps)
    for _ in range(config.epochs):
        out, cache = mlp.forward_cache(f)
        resid = out - obs
        loss = float(np.sum(resid * resid)) / n + mlp.l2_penalty(config.l2)
        if not np.isfinite(loss):
            raise TrainingDivergedError("point model loss became non-finite")
        grad = mlp.backward(cache, 2.0 * resid / n) + mlp.l2_grad(config.l2)
        opt.step(grad)
    return PointModel("mlp", m, k, mlp=mlp)
