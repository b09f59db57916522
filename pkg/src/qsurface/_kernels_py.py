"""Pure numpy implementations of the hot kernels.

Signatures mirror the compiled ``_kernels_c`` module exactly; gradient
buffers are filled in place.
"""
import numpy as np

BACKEND = "python"


def qsnn_loss_grad(inputs, lengths, taus, w1, b1, w2, b2, l2, relu,
                   g_w1, g_b1, g_w2, g_b2):
    """Summed pinball loss of a one-hidden-layer multi-quantile net plus L2 on weights."""
    pre = inputs @ w1 + b1
    if relu:
        h = np.maximum(pre, 0.0)
        dact = (pre > 0.0).astype(float)
    else:
        h = np.tanh(pre)
        dact = 1.0 - h * h
    out = h @ w2 + b2
    diff = out - lengths[:, None]
    over = diff >= 0.0
    # overprediction weighs 1 - tau, underprediction tau; tie takes the overprediction branch
    g = np.where(over, 1.0 - taus, -taus)
    loss = float(np.sum(diff * g)) + l2 * (float(np.sum(w1 * w1)) + float(np.sum(w2 * w2)))
    g_w2[...] = h.T @ g + 2.0 * l2 * w2
    g_b2[...] = g.sum(axis=0)
    dh = (g @ w2.T) * dact
    g_w1[...] = inputs.T @ dh + 2.0 * l2 * w1
    g_b1[...] = dh.sum(axis=0)
    return loss


def adam_update(params, grads, m, v, step, lr, beta1, beta2, eps):
    m *= beta1
    m += (1.0 - beta1) * grads
    v *= beta2
    v += (1.0 - beta2) * grads * grads
    mhat = m / (1.0 - beta1 ** step)
    vhat = v / (1.0 - beta2 ** step)
    params -= lr * mhat / (np.sqrt(vhat) + eps)


def _segment_sq(width, p0, p1):
    return width * (p0 * p0 + p0 * p1 + p1 * p1) / 3.0


def crps_piecewise(xs, ps, obs):
    """CRPS of piecewise-linear CDFs closed by a jump to one at the last anchor.

    ``xs``/``ps`` are (N, A) anchor lengths and probabilities, ``obs`` the N
    observed lengths. Each linear segment is integrated exactly.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    obs = np.asarray(obs, dtype=float)
    total = np.zeros(obs.shape[0])
    for k in range(xs.shape[1] - 1):
        a, b = xs[:, k], xs[:, k + 1]
        p0, p1 = ps[:, k], ps[:, k + 1]
        width = b - a
        below = obs >= b
        above = obs <= a
        split = ~(below | above)
        seg = np.where(below, _segment_sq(width, p0, p1), 0.0)
        seg = np.where(above, _segment_sq(width, 1.0 - p0, 1.0 - p1), seg)
        if np.any(split):
            safe = np.where(split, width, 1.0)
            pm = p0 + (p1 - p0) * (obs - a) / safe
            left = _segment_sq(obs - a, p0, pm)
            right = _segment_sq(b - obs, 1.0 - pm, 1.0 - p1)
            seg = np.where(split, left + right, seg)
        total += seg
    last = xs[:, -1]
    total += np.where(obs > last, obs - last, 0.0)
    return total
