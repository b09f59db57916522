"""Gaussian baselines and their directional quantiles.

Squared Mahalanobis distances of a K-variate Gaussian are chi-square with K
degrees of freedom, so the tau-level set is an ellipse whose radius in
direction u is sqrt(chi2_inv(tau) / (u' inv(S) u)). Baselines are scored
through these level sets, which keeps them commensurable with quantile
surfaces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .directional import forecast_adjust
from .nets.mlp import MlpModel
from .nets.optim import Adam, TrainConfig, TrainingDivergedError
from .nets.point import PointModel, as_features
from .numkit import DecompositionError, Rng, chi2_cdf, chi2_inverse_cdf, inv2

LOG_2PI = math.log(2.0 * math.pi)


class SingularCovarianceError(DecompositionError):
    pass


@dataclass
class GaussianForecast:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.covariance = np.asarray(self.covariance, dtype=float)
        _check_cov(self.covariance)

    @property
    def precision(self) -> np.ndarray:
        return inv2(self.covariance)

    def to_dict(self) -> dict:
        return {"mean": [float(m) for m in self.mean],
                "covariance": [[float(c) for c in row] for row in self.covariance]}

    @classmethod
    def from_dict(cls, d) -> "GaussianForecast":
        return cls(d["mean"], d["covariance"])


def _check_cov(cov):
    cov = np.asarray(cov)
    if cov.shape[-2:] != (2, 2):
        raise ValueError("only 2x2 covariances are supported")
    det = cov[..., 0, 0] * cov[..., 1, 1] - cov[..., 0, 1] * cov[..., 1, 0]
    scale = (cov[..., 0, 0] + cov[..., 1, 1]) ** 2
    if np.any(~np.isfinite(det)) or np.any(det <= 1e-12 * scale) or np.any(cov[..., 0, 0] <= 0):
        raise SingularCovarianceError("covariance is singular or not positive definite")


def _quad_form(precision, v):
    """v' P v for stacked (…,2,2) precisions and (…,2) vectors."""
    return np.einsum("...i,...ij,...j->...", v, precision, v)


def _precisions(cov):
    cov = np.asarray(cov, dtype=float)
    _check_cov(cov)
    det = cov[..., 0, 0] * cov[..., 1, 1] - cov[..., 0, 1] * cov[..., 1, 0]
    p = np.empty_like(cov)
    p[..., 0, 0] = cov[..., 1, 1]
    p[..., 1, 1] = cov[..., 0, 0]
    p[..., 0, 1] = -cov[..., 0, 1]
    p[..., 1, 0] = -cov[..., 1, 0]
    return p / det[..., None, None]


def fit_unconditional(observations, point_model: PointModel, features=None) -> GaussianForecast:
    """Maximum likelihood covariance (1/N) of the forecast-adjusted observations.

    The mean is pinned to the point estimate, i.e. zero in adjusted space.
    """
    obs = np.asarray(observations, dtype=float)
    if obs.shape[0] < 3:
        raise ValueError("need at least 3 samples")
    f = as_features(features, obs.shape[0])
    resid = forecast_adjust(obs, point_model.predict(f))
    cov = resid.T @ resid / resid.shape[0]
    return GaussianForecast(np.zeros(obs.shape[1]), cov)


def mahalanobis(point, forecast: GaussianForecast):
    diff = np.asarray(point, dtype=float) - forecast.mean
    d2 = _quad_form(forecast.precision, diff)
    return np.sqrt(d2) if np.ndim(d2) else math.sqrt(float(d2))


def directional_quantiles(covariances, directions, taus) -> np.ndarray:
    """Radii (n, L) of the Gaussian tau-ellipses along each row's direction.

    ``covariances`` is (2,2) or (n,2,2), ``directions`` (n,2), ``taus`` (L,).
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    prec = _precisions(covariances)
    q = _quad_form(prec, directions)
    chi = np.atleast_1d(chi2_inverse_cdf(np.asarray(taus, dtype=float), directions.shape[1]))
    return np.sqrt(chi[None, :] / np.asarray(q)[..., None])


def gaussian_directional_quantile(forecast: GaussianForecast, direction, tau) -> float:
    return float(directional_quantiles(forecast.covariance, direction, [tau])[0, 0])


def gaussian_directional_cdf(forecast: GaussianForecast, direction, length) -> float:
    if length < 0:
        raise ValueError("length must be nonnegative")
    u = np.asarray(direction, dtype=float)
    q = float(_quad_form(forecast.precision, u))
    return chi2_cdf(length * length * q, u.shape[0])


# conditional baseline ----------------------------------------------------------


def decode_covariance(raw) -> np.ndarray:
    """Raw net outputs (log sd1, log sd2, atanh rho) -> covariance matrices (n,2,2)."""
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    s1 = np.exp(raw[:, 0])
    s2 = np.exp(raw[:, 1])
    rho = np.tanh(raw[:, 2])
    cov = np.empty((raw.shape[0], 2, 2))
    cov[:, 0, 0] = s1 * s1
    cov[:, 1, 1] = s2 * s2
    cov[:, 0, 1] = cov[:, 1, 0] = rho * s1 * s2
    return cov


def gaussian_nll(raw, residuals):
    """Mean zero-mean bivariate Gaussian NLL and its gradient w.r.t. the raw outputs."""
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    r = np.atleast_2d(np.asarray(residuals, dtype=float))
    n = r.shape[0]
    a1, a2 = raw[:, 0], raw[:, 1]
    rho = np.tanh(raw[:, 2])
    z1 = r[:, 0] * np.exp(-a1)
    z2 = r[:, 1] * np.exp(-a2)
    one_m = 1.0 - rho * rho
    quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_m
    nll = 0.5 * quad + a1 + a2 + 0.5 * np.log(one_m) + LOG_2PI
    grad = np.empty_like(raw)
    grad[:, 0] = 1.0 - z1 * (z1 - rho * z2) / one_m
    grad[:, 1] = 1.0 - z2 * (z2 - rho * z1) / one_m
    dquad_drho = (-2.0 * z1 * z2 * one_m + 2.0 * rho * (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2)) / (one_m * one_m)
    dnll_drho = 0.5 * dquad_drho - rho / one_m
    grad[:, 2] = dnll_drho * one_m
    return float(np.mean(nll)), grad / n


class CovarianceNet:
    """Network from features to a 2x2 covariance of the forecast-adjusted target."""

    def __init__(self, mlp: MlpModel):
        if mlp.n_out != 3:
            raise ValueError("covariance net needs exactly 3 outputs")
        self.mlp = mlp

    @property
    def n_features(self) -> int:
        return self.mlp.n_in

    def covariances(self, features) -> np.ndarray:
        f = np.asarray(features, dtype=float)
        f = f.reshape(-1, self.n_features) if f.ndim < 2 else f
        return decode_covariance(self.mlp.forward(f))

    def forecast(self, features, mean=None) -> GaussianForecast:
        cov = self.covariances(np.atleast_2d(features))[0]
        return GaussianForecast(np.zeros(2) if mean is None else mean, cov)

    def to_dict(self) -> dict:
        return {"mlp": self.mlp.to_dict()}

    @classmethod
    def from_dict(cls, d) -> "CovarianceNet":
        return cls(MlpModel.from_dict(d["mlp"]))


def covariance_objective(mlp: MlpModel, features, residuals, l2=0.0):
    out, cache = mlp.forward_cache(features)
    loss, g = gaussian_nll(out, residuals)
    return loss + mlp.l2_penalty(l2), mlp.backward(cache, g) + mlp.l2_grad(l2)


def fit_conditional(features, observations, point_model: PointModel, hidden=(10,),
                    activation="tanh", config: TrainConfig | None = None) -> CovarianceNet:
    """Train a covariance-only Gaussian network by minimising the mean NLL."""
    obs = np.asarray(observations, dtype=float)
    if obs.shape[0] == 0:
        raise ValueError("empty dataset")
    if obs.shape[1] != 2:
        raise ValueError("conditional Gaussian baseline supports 2-D targets only")
    f = as_features(features, obs.shape[0])
    if f.shape[1] == 0:
        raise ValueError("conditional baseline needs at least one feature")
    config = config or TrainConfig(epochs=5000, learning_rate=0.01, l2=0.0)
    resid = forecast_adjust(obs, point_model.predict(f))
    rng = Rng(config.seed).derive("covnet-init")
    mlp = MlpModel.initialized([f.shape[1], *hidden, 3], rng, activation)
    opt = Adam(mlp.params, config.learning_rate, config.beta1, config.beta2, config.eps)
    for _ in range(config.epochs):
        loss, grad = covariance_objective(mlp, f, resid, config.l2)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise TrainingDivergedError("conditional Gaussian NLL became non-finite")
        opt.step(grad)
    return CovarianceNet(mlp)
