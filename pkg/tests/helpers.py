"""Shared oracles for the test suite."""
import numpy as np

from qsurface.metrics import DirectionalCdf


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` at flat ``x``."""
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        old = x[i]
        x[i] = old + h
        up = f(x)
        x[i] = old - h
        down = f(x)
        x[i] = old
        g[i] = (up - down) / (2 * h)
    return g


def max_rel_error(analytic, numeric):
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def pinball_reference(obs, pred, tau):
    """Pinball loss written as the textbook piecewise rule, one scalar at a time."""
    if obs >= pred:
        return tau * (obs - pred)
    return (1 - tau) * (pred - obs)


def quadrature_crps(cdf, obs, points=10**5):
    """Midpoint rule for the integral of (F(y) - 1{y >= obs})^2 on [0, max(obs, top)].

    The interval is cut at every anchor and at the observation, so each piece
    has a smooth (quadratic) integrand; points are shared in proportion to length.
    """
    top = max(obs, cdf.lengths[-1])
    cuts = np.unique(np.concatenate([[0.0, obs, top], cdf.lengths]))
    cuts = cuts[cuts <= top]
    total, span = 0.0, top - cuts[0]
    for a, b in zip(cuts[:-1], cuts[1:]):
        k = max(int(points * (b - a) / span), 1)
        y = a + (np.arange(k) + 0.5) * (b - a) / k
        total += np.sum((cdf(y) - (y >= obs)) ** 2) * (b - a) / k
    return total


def random_cdf(rng):
    n = int(rng.uniform(2, 12))
    lengths = np.concatenate([[0.0], np.cumsum(rng.exponential(1.0, size=n))])
    probs = np.concatenate([[0.0], np.sort(rng.uniform(size=n))])
    return DirectionalCdf(lengths, probs)
