"""Acceptance suite: every criterion at its stated tolerance and full training budget.

Each test records one PASS/FAIL line, listed again in the terminal summary.
"""
import math
import subprocess
import sys
import time
from statistics import NormalDist

import numpy as np
import pytest

from helpers import central_diff, max_rel_error, quadrature_crps, random_cdf
from qsurface.directional import direction_grid, monte_carlo_volume, polygon_areas, star_member
from qsurface.gaussian import covariance_objective, directional_quantiles
from qsurface.harness.config import preset
from qsurface.harness.experiment import (
    QsnnForecaster,
    make_data,
    observation_directions,
    run_experiment,
)
from qsurface.metrics import DirectionalCdf, directional_crps, skill
from qsurface.nets import MlpModel, pinball_loss, qsnn_objective
from qsurface.numkit import Rng, chi2_inverse_cdf
from qsurface.synthdata import gen_mgd, gen_smd

pytestmark = pytest.mark.slow

MGD_SEEDS = (1, 2, 3)
SMD_MEAN = np.array([-3.0, 5.0]) / math.sqrt(2)


def timed_run(cfg):
    start = time.perf_counter()
    report = run_experiment(cfg)
    return report, time.perf_counter() - start


@pytest.fixture(scope="module")
def mgd_runs():
    return [timed_run(preset("mgd", seed=s)) for s in MGD_SEEDS]


@pytest.fixture(scope="module")
def smd_run():
    return timed_run(preset("smd", seed=1))[0]


@pytest.fixture(scope="module")
def cmgd_run():
    cfg = preset("cmgd", seed=1)
    return run_experiment(cfg), make_data(cfg)[1]


def test_1_skill_arithmetic(criterion):
    s = skill(0.046, 0.376)
    criterion(1, abs(s - 0.878) <= 0.001, f"skill(0.046, 0.376) = {s:.5f}")


def test_2_mgd_calibration(mgd_runs, criterion):
    freqs = np.array([r.scores["qsnn"].reliability.frequencies for r, _ in mgd_runs])
    levels = mgd_runs[0][0].scores["qsnn"].reliability.levels
    err = np.abs(freqs.mean(axis=0) - levels)
    worst_time = max(t for _, t in mgd_runs)
    criterion(2, bool(np.all(err <= 0.05)),
              f"max |coverage - tau| = {err.max():.4f} (seeds {MGD_SEEDS}); "
              f"slowest seed {worst_time:.0f} s")


def test_3_mgd_sharpness(mgd_runs, criterion):
    analytic = math.pi * math.sqrt(0.5 * 2.0) * chi2_inverse_cdf(0.9, 2)
    areas = []
    for report, _ in mgd_runs:
        curve = report.scores["qsnn"].sharpness
        idx = int(np.flatnonzero(np.isclose(curve.coverages, 0.9))[0])
        areas.append(curve.areas[idx])
    rel = abs(np.mean(areas) - analytic) / analytic
    criterion(3, rel <= 0.15,
              f"mean 0.9 area {np.mean(areas):.3f} vs {analytic:.3f} (rel {rel:.3f}); "
              f"per seed {', '.join(f'{a:.2f}' for a in areas)}")


def test_4_smd_calibration_and_baseline(smd_run, criterion):
    q = smd_run.scores["qsnn"].reliability
    g = smd_run.scores["gauss_uncond"].reliability
    err = np.abs(q.frequencies - q.levels)
    mid = (g.levels >= 0.2) & (g.levels <= 0.8)
    excess = g.frequencies[mid] - g.levels[mid]
    n_under = int(np.sum(excess >= 0.03))
    criterion(4, bool(np.all(err <= 0.05)) and n_under >= 3,
              f"QSNN max |coverage - tau| = {err.max():.4f}; Gaussian excess coverage at "
              f"0.2..0.8 = {np.round(excess, 3).tolist()} ({n_under} levels >= 0.03)")


def empirical_axis(n=10**6, wedges=72):
    """Direction of the largest empirical 0.99 length quantile of the SMD generator."""
    x = gen_smd(Rng(99), n) - SMD_MEAN
    ang = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * np.pi)
    r = np.linalg.norm(x, axis=1)
    idx = (ang / (2 * np.pi) * wedges).astype(int) % wedges
    q = np.array([np.quantile(r[idx == k], 0.99) for k in range(wedges)])
    return math.degrees((int(np.argmax(q)) + 0.5) * 2 * math.pi / wedges)


def angle_gap(a, b):
    return abs((a - b + 180.0) % 360.0 - 180.0)


def test_5_smd_skewness(smd_run, criterion):
    model = smd_run.models["qsnn"]
    grid = direction_grid(360)
    r99 = model.predict_radii(grid)[:, list(model.levels).index(0.99)]
    ratio = r99.max() / r99.min()
    at = math.degrees(math.atan2(*grid[int(np.argmax(r99))][::-1])) % 360
    oracle = empirical_axis()
    ok = ratio >= 2.0 and angle_gap(at, oracle) <= 30.0 and angle_gap(at, 135.0) <= 30.0
    criterion(5, ok, f"max/min 0.99 radius = {ratio:.2f}; max at {at:.0f} deg, "
                     f"generator oracle {oracle:.1f} deg, rotated exponential axis 135 deg")


def test_6_cmgd_conditional(cmgd_run, criterion):
    report, test = cmgd_run
    model = report.models["qsnn"]
    dirs, lengths = observation_directions(report.models["point"], test)
    radii = QsnnForecaster(model).radii(dirs, test.features)
    worst = []
    for c in (0.0, 1.0):
        sel = test.features[:, 0] == c
        cov = np.mean(radii[sel] >= lengths[sel, None], axis=0)
        worst.append(float(np.max(np.abs(cov - model.levels))))
    s = report.scores["qsnn"].skill
    criterion(6, max(worst) <= 0.07 and s > 0,
              f"per-condition max |coverage - tau| = {worst[0]:.4f}, {worst[1]:.4f}; "
              f"QSNN skill vs unconditional Gaussian {s:+.4f}")


def test_7_gradients(criterion):
    rng = Rng(7)
    worst = 0.0
    for trial in range(100):
        n_in = 2 + int(rng.uniform(0, 3))
        hidden = [int(rng.uniform(2, 11))]
        if trial % 4 == 3:
            hidden.append(int(rng.uniform(2, 6)))
        n_out = int(rng.uniform(1, 12))
        sizes = [n_in, *hidden, n_out]
        mlp = MlpModel.initialized(sizes, rng, "tanh")
        mlp.params += 0.3 * rng.normal(size=mlp.n_params)
        x = rng.normal(size=(5, n_in))
        r = rng.exponential(1.0, size=5)
        levels = np.sort(rng.uniform(0.01, 0.99, size=n_out))
        l2 = float(rng.uniform(0, 1))
        _, g = qsnn_objective(mlp, x, r, levels, l2)
        num = central_diff(lambda p: qsnn_objective(MlpModel(sizes, "tanh", p), x, r, levels, l2)[0],
                           mlp.params)
        worst = max(worst, max_rel_error(g, num))

        cov_sizes = [int(rng.uniform(1, 3)), int(rng.uniform(2, 11)), 3]
        cnet = MlpModel.initialized(cov_sizes, rng, "tanh")
        f = rng.normal(size=(6, cov_sizes[0]))
        res = 2.0 * rng.normal(size=(6, 2))
        _, g = covariance_objective(cnet, f, res)
        num = central_diff(lambda p: covariance_objective(MlpModel(cov_sizes, "tanh", p), f, res)[0],
                           cnet.params)
        worst = max(worst, max_rel_error(g, num))
    criterion(7, worst <= 1e-4, f"worst relative gradient error {worst:.2e} over 100 configurations")


def test_8_pinball_minimiser(criterion):
    z = Rng(8).normal(size=10**5)
    grid = np.arange(-3.0, 3.0 + 1e-9, 0.005)
    gaps = []
    for tau in (0.1, 0.5, 0.9):
        losses = [float(np.mean(pinball_loss(z, g, tau))) for g in grid]
        gaps.append(abs(grid[int(np.argmin(losses))] - NormalDist().inv_cdf(tau)))
    criterion(8, max(gaps) <= 0.02, f"|argmin - true quantile| = {np.round(gaps, 4).tolist()}")


def test_9_crps_oracle(criterion):
    rng = Rng(9)
    worst = 0.0
    for _ in range(100):
        cdf = random_cdf(rng)
        o = float(rng.uniform(0.0, 1.3 * cdf.lengths[-1]))
        worst = max(worst, abs(directional_crps(cdf, o) - quadrature_crps(cdf, o)))
    step = [directional_crps(DirectionalCdf.step(q), o) == abs(q - o)
            for q, o in [(2.0, 0.7), (2.0, 2.0), (1.5, 4.0), (0.0, 3.0)]]
    criterion(9, worst <= 1e-6 and all(step),
              f"worst |closed form - quadrature| = {worst:.2e}; step cases exact: {all(step)}")


def test_10_geometry(criterion):
    worst = max(abs(float(polygon_areas(np.ones(d), direction_grid(d))) - d / 2 * math.sin(2 * math.pi / d))
                for d in (3, 4, 5, 8, 36, 360, 1000, 3600))
    circle = abs(float(polygon_areas(np.ones(3600), direction_grid(3600))) - math.pi)
    grid = direction_grid(36)
    ang = np.arctan2(grid[:, 1], grid[:, 0])
    r = 1.5 + 0.8 * np.cos(3 * ang) + 0.3 * np.sin(ang)
    exact = float(polygon_areas(r, grid))
    n, lo, hi = 10**5, np.array([-3.0, -3.0]), np.array([3.0, 3.0])
    vol = monte_carlo_volume(star_member([0.0, 0.0], grid, r), lo, hi, n, Rng(10))
    box = float(np.prod(hi - lo))
    se = box * math.sqrt((exact / box) * (1 - exact / box) / n)
    ok = worst <= 1e-12 and circle <= 1e-5 and abs(vol - exact) <= 3 * se
    criterion(10, ok, f"regular polygon error {worst:.1e}; D=3600 vs pi {circle:.1e}; "
                      f"MC {vol:.4f} vs {exact:.4f} ({abs(vol - exact) / se:.2f} SE)")


def test_11_chi2_link(criterion):
    x = gen_mgd(Rng(11), 10**5)
    lengths = np.linalg.norm(x, axis=1)
    dirs = x / lengths[:, None]
    taus = (0.5, 0.9, 0.99)
    radii = directional_quantiles(np.diag([0.5, 2.0]), dirs, taus)
    cov = np.mean(lengths[:, None] <= radii, axis=0)
    q = chi2_inverse_cdf(0.9, 2)
    # 4.605170 is the six-decimal rounding of -2 ln 0.1 = 4.6051701860
    exact_ok = abs(q + 2 * math.log(0.1)) <= 1e-8 and round(q, 6) == 4.605170
    ok = bool(np.all(np.abs(cov - taus) <= 0.01)) and exact_ok
    criterion(11, ok, f"ellipse coverage {np.round(cov, 4).tolist()}; chi2_inv(0.9) = {q:.10f}")


def test_12_no_crossing(mgd_runs, smd_run, cmgd_run, criterion):
    rng = Rng(12)
    models = [mgd_runs[0][0].models["qsnn"], smd_run.models["qsnn"], cmgd_run[0].models["qsnn"]]
    bad, raw_crossings = 0, 0
    for model in models:
        ang = rng.uniform(0, 2 * np.pi, size=10**4)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        feats = rng.uniform(-2, 3, size=(10**4, model.n_features)) if model.n_features else None
        radii = model.predict_radii(dirs, feats)
        bad += int(np.sum(np.any(np.diff(radii, axis=1) < 0, axis=1)))
        raw_crossings += int(np.sum(np.any(np.diff(model.raw_heads(dirs, feats), axis=1) < 0, axis=1)))
    criterion(12, bad == 0, f"{bad} crossing inputs of 3 x 10^4 after sorting "
                            f"({raw_crossings} before sorting)")


def test_13_determinism(tmp_path, criterion):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        subprocess.run([sys.executable, "-m", "qsurface.harness.cli", "run", "--preset", "mgd",
                        "--seed", "7", "--out", str(out)], check=True, capture_output=True)
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    same = files == sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    diff = [str(f) for f in files if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    criterion(13, same and not diff and len(files) > 0,
              f"{len(files)} files compared, {len(diff)} differ {diff if diff else ''}".rstrip())
