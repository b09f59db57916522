"""Dense feed-forward networks with hand-written backpropagation.

All parameters live in one flat float64 vector; per-layer weight and bias
arrays are views into it, so an optimizer can update the whole model with a
single in-place operation.
"""
from __future__ import annotations

import math

import numpy as np

from ..numkit import Rng

ACTIVATIONS = ("tanh", "relu")


class MlpModel:
    """Feed-forward net: hidden layers use ``activation``, the output layer is linear.

    Weights are stored as (fan_in, fan_out) so a batch forward is ``x @ W + b``.
    """

    def __init__(self, sizes, activation="tanh", params=None):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError(f"invalid layer sizes {sizes}")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.sizes = sizes
        self.activation = activation
        self._shapes = []
        offset = 0
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            self._shapes.append((offset, fan_in, fan_out))
            offset += fan_in * fan_out + fan_out
        self.n_params = offset
        if params is None:
            params = np.zeros(offset)
        params = np.array(params, dtype=float)
        if params.shape != (offset,):
            raise ValueError(f"expected {offset} parameters, got {params.shape}")
        self.params = params
        self._bind()

    def _bind(self):
        self.weights = []
        self.biases = []
        mask = np.zeros(self.n_params, dtype=bool)
        for offset, fan_in, fan_out in self._shapes:
            nw = fan_in * fan_out
            self.weights.append(self.params[offset:offset + nw].reshape(fan_in, fan_out))
            self.biases.append(self.params[offset + nw:offset + nw + fan_out])
            mask[offset:offset + nw] = True
        self.weight_mask = mask

    @classmethod
    def initialized(cls, sizes, rng: Rng, activation="tanh"):
        """Glorot-uniform weights, zero biases."""
        model = cls(sizes, activation)
        for w in model.weights:
            limit = math.sqrt(6.0 / (w.shape[0] + w.shape[1]))
            w[...] = rng.uniform(-limit, limit, size=w.shape)
        return model

    def copy(self) -> "MlpModel":
        return MlpModel(self.sizes, self.activation, self.params.copy())

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]

    def _act(self, z):
        if self.activation == "tanh":
            return np.tanh(z)
        return np.maximum(z, 0.0)

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        a = np.atleast_2d(x)
        if a.shape[1] != self.n_in:
            raise ValueError(f"input has {a.shape[1]} features, network expects {self.n_in}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                a = self._act(a)
        return a[0] if single else a

    def forward_cache(self, x):
        """Forward pass returning (output, layer inputs) for :meth:`backward`."""
        a = np.atleast_2d(np.asarray(x, dtype=float))
        if a.shape[1] != self.n_in:
            raise ValueError(f"input has {a.shape[1]} features, network expects {self.n_in}")
        cache = [a]
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                a = self._act(a)
                cache.append(a)
        return a, cache

    def backward(self, cache, grad_out) -> np.ndarray:
        """Flat parameter gradient given dLoss/dOutput for the cached batch."""
        grad = np.zeros(self.n_params)
        delta = np.atleast_2d(np.asarray(grad_out, dtype=float))
        for i in range(len(self.weights) - 1, -1, -1):
            offset, fan_in, fan_out = self._shapes[i]
            a_in = cache[i]
            nw = fan_in * fan_out
            grad[offset:offset + nw] = (a_in.T @ delta).ravel()
            grad[offset + nw:offset + nw + fan_out] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ self.weights[i].T
                if self.activation == "tanh":
                    delta = delta * (1.0 - a_in * a_in)
                else:
                    delta = delta * (a_in > 0.0)
        return grad

    def l2_penalty(self, coef: float) -> float:
        """coef times the squared norm of all weights (biases excluded)."""
        w = self.params[self.weight_mask]
        return coef * float(np.dot(w, w))

    def l2_grad(self, coef: float) -> np.ndarray:
        return np.where(self.weight_mask, 2.0 * coef * self.params, 0.0)

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "activation": self.activation,
            "params": [float(p) for p in self.params],
        }

    @classmethod
    def from_dict(cls, d) -> "MlpModel":
        return cls(d["sizes"], d["activation"], np.array(d["params"], dtype=float))
