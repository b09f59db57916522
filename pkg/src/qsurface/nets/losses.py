import numpy as np


def pinball_loss(observation, predicted, tau):
    """Quantile (pinball) loss.

    Underprediction costs ``tau`` per unit and overprediction ``1 - tau``,
    so the expected loss is minimised by the tau-quantile.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any((tau <= 0) | (tau >= 1)):
        raise ValueError("tau must lie in (0, 1)")
    diff = np.asarray(predicted, dtype=float) - np.asarray(observation, dtype=float)
    out = np.where(diff >= 0, (1.0 - tau) * diff, -tau * diff)
    return float(out) if out.ndim == 0 else out


def pinball_grad(observation, predicted, tau):
    """Subgradient with respect to the prediction; a tie uses the overprediction slope."""
    diff = np.asarray(predicted, dtype=float) - np.asarray(observation, dtype=float)
    tau = np.asarray(tau, dtype=float)
    return np.where(diff >= 0, 1.0 - tau, -tau)
