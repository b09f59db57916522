"""Quantile surfaces for multivariate probabilistic forecasting.

A deterministic point estimate is combined with a neural network that
predicts, for every direction around it, the quantiles of the distance to the
observation. The package also provides reliability, sharpness and
directional CRPS evaluation plus Gaussian baselines.
"""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
