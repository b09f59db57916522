"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--epochs N]

Times one QSNN objective+gradient evaluation, one Adam update and a batch of
directional CRPS evaluations on the synthetic-experiment problem size, then
a short end-to-end QSNN training run per backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qsurface import _kernels_py
from qsurface.kernels import backends
from qsurface.nets.mlp import MlpModel
from qsurface.numkit import Rng

LEVELS = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99])


def problem(n=1000, hidden=10, seed=0):
    rng = Rng(seed)
    y = rng.normal(size=(n, 2)) * np.sqrt([0.5, 2.0])
    lengths = np.linalg.norm(y, axis=1)
    dirs = np.ascontiguousarray(y / lengths[:, None])
    mlp = MlpModel.initialized([2, hidden, len(LEVELS)], rng)
    return dirs, lengths, mlp


def bench_kernel(mod, repeat=200):
    dirs, lengths, mlp = problem()
    buf = MlpModel(mlp.sizes)
    args = (dirs, lengths, LEVELS, mlp.weights[0], mlp.biases[0], mlp.weights[1], mlp.biases[1],
            0.3, False, buf.weights[0], buf.biases[0], buf.weights[1], buf.biases[1])
    t_grad = min(timeit.repeat(lambda: mod.qsnn_loss_grad(*args), number=repeat, repeat=3)) / repeat

    p = mlp.params.copy()
    g = np.ones_like(p)
    m, v = np.zeros_like(p), np.zeros_like(p)
    t_adam = min(timeit.repeat(lambda: mod.adam_update(p, g, m, v, 1, 1e-3, 0.9, 0.999, 1e-8),
                               number=repeat, repeat=3)) / repeat

    radii = np.sort(np.abs(np.random.default_rng(0).normal(size=(1000, len(LEVELS)))), axis=1)
    xs = np.ascontiguousarray(np.hstack([np.zeros((1000, 1)), radii]))
    ps = np.ascontiguousarray(np.broadcast_to(np.concatenate([[0.0], LEVELS]), xs.shape))
    t_crps = min(timeit.repeat(lambda: mod.crps_piecewise(xs, ps, lengths),
                               number=repeat, repeat=3)) / repeat
    return t_grad, t_adam, t_crps


def train_seconds(pure: bool, epochs: int) -> float:
    code = (
        "import time, numpy as np\n"
        "from qsurface.synthdata import gen_mgd\n"
        "from qsurface.numkit import Rng\n"
        "from qsurface.nets import fit_point_model, train_qsnn, TrainConfig\n"
        "y = gen_mgd(Rng(0), 1000); pm = fit_point_model(None, y)\n"
        "t = time.perf_counter()\n"
        f"train_qsnn(None, y, pm, {list(LEVELS)}, config=TrainConfig(epochs={epochs}))\n"
        "print(time.perf_counter() - t)\n"
    )
    env = dict(os.environ, QSURFACE_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--epochs", type=int, default=2000)
    args = ap.parse_args()
    mods = backends()
    print(f"{'backend':8s} {'grad [us]':>10s} {'adam [us]':>10s} {'crps [us]':>10s}")
    results = {}
    for mod in mods:
        t = bench_kernel(mod)
        results[mod.BACKEND] = t
        print(f"{mod.BACKEND:8s} " + " ".join(f"{x * 1e6:10.1f}" for x in t))
    if len(mods) > 1:
        py, c = results[_kernels_py.BACKEND], results["cython"]
        print("speedup  " + " ".join(f"{a / b:10.1f}" for a, b in zip(py, c)))
    print(f"\nQSNN training, {args.epochs} full-batch epochs on 1000 MGD samples:")
    for pure in (True, False) if len(mods) > 1 else (True,):
        label = "python" if pure else "cython"
        print(f"  {label:8s} {train_seconds(pure, args.epochs):7.2f} s")


if __name__ == "__main__":
    main()
