"""Adam optimizer and training configuration."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .. import kernels


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50000
    learning_rate: float = 0.1
    l2: float = 0.3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int | None = None  # None: full batch
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 coefficient must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch size must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class TrainingDivergedError(RuntimeError):
    pass


class Adam:
    """Bias-corrected Adam acting in place on a flat parameter vector."""

    def __init__(self, params: np.ndarray, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros_like(params)
        self.v = np.zeros_like(params)
        self.t = 0

    def step(self, grads: np.ndarray) -> None:
        self.t += 1
        kernels.adam_update(self.params, np.ascontiguousarray(grads, dtype=float),
                            self.m, self.v, self.t, self.lr,
                            self.beta1, self.beta2, self.eps)


def adam_step(params, grads, state: Adam, learning_rate=None):
    """Functional wrapper: one Adam update of ``params`` using ``state``."""
    if learning_rate is not None:
        state.lr = learning_rate
    state.params = params
    state.step(grads)
    return params


def batches(n: int, batch_size: int | None, rng):
    if batch_size is None or batch_size >= n:
        yield slice(None)
        return
    order = np.argsort(rng.uniform(size=n), kind="stable")
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
