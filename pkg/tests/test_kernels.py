"""Both kernel backends compute the same numbers."""
import numpy as np
import pytest

from qsurface import _kernels_py, kernels
from qsurface.numkit import Rng

BACKENDS = kernels.backends()
IDS = [b.BACKEND for b in BACKENDS]


def net(seed, nin=2, nh=10, nl=11, n=50):
    rng = Rng(seed)
    w1 = rng.normal(size=(nin, nh))
    b1 = rng.normal(size=nh)
    w2 = rng.normal(size=(nh, nl))
    b2 = rng.normal(size=nl)
    x = rng.normal(size=(n, nin))
    r = rng.exponential(1.0, size=n)
    taus = np.sort(rng.uniform(0.05, 0.95, size=nl))
    return x, r, taus, w1, b1, w2, b2


def run_grad(mod, args, relu):
    x, r, taus, w1, b1, w2, b2 = args
    g = [np.empty_like(a) for a in (w1, b1, w2, b2)]
    loss = mod.qsnn_loss_grad(x, r, taus, w1, b1, w2, b2, 0.3, relu, *g)
    return loss, g


def test_selected_backend_is_listed():
    assert kernels.BACKEND in IDS


@pytest.mark.parametrize("relu", [False, True])
@pytest.mark.parametrize("mod", BACKENDS, ids=IDS)
def test_loss_grad_parity(mod, relu):
    args = net(1)
    ref_loss, ref_g = run_grad(_kernels_py, args, relu)
    loss, g = run_grad(mod, args, relu)
    assert loss == pytest.approx(ref_loss, rel=1e-12)
    for a, b in zip(g, ref_g):
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS, ids=IDS)
def test_grad_buffers_overwritten(mod):
    args = net(2)
    x, r, taus, w1, b1, w2, b2 = args
    g = [np.full_like(a, 99.0) for a in (w1, b1, w2, b2)]
    mod.qsnn_loss_grad(x, r, taus, w1, b1, w2, b2, 0.0, False, *g)
    _, ref = run_grad(_kernels_py, (x, r, taus, w1, b1, w2, b2), False)
    # l2 differs, so only compare bias gradients which carry no penalty
    np.testing.assert_allclose(g[1], ref[1], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS, ids=IDS)
def test_adam_parity(mod):
    rng = Rng(3)
    p0 = rng.normal(size=40)
    state = [p0.copy(), np.zeros(40), np.zeros(40)]
    ref = [p0.copy(), np.zeros(40), np.zeros(40)]
    for step in range(1, 20):
        g = rng.normal(size=40)
        mod.adam_update(state[0], g, state[1], state[2], step, 0.1, 0.9, 0.999, 1e-8)
        _kernels_py.adam_update(ref[0], g, ref[1], ref[2], step, 0.1, 0.9, 0.999, 1e-8)
    for a, b in zip(state, ref):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("mod", BACKENDS, ids=IDS)
def test_crps_parity(mod):
    rng = Rng(4)
    xs = np.cumsum(rng.exponential(1.0, size=(300, 8)), axis=1)
    xs[:, 0] = 0.0
    ps = np.sort(rng.uniform(size=(300, 8)), axis=1)
    ps[:, 0] = 0.0
    obs = rng.uniform(0, 12, size=300)
    np.testing.assert_allclose(mod.crps_piecewise(xs, ps, obs),
                               _kernels_py.crps_piecewise(xs, ps, obs), rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("mod", BACKENDS, ids=IDS)
def test_crps_zero_width_segment(mod):
    xs = np.array([[0.0, 1.0, 1.0, 2.0]])
    ps = np.array([[0.0, 0.3, 0.6, 0.9]])
    out = mod.crps_piecewise(xs, ps, np.array([1.0]))
    assert np.isfinite(out[0])
