"""Reliability, sharpness and directional CRPS for quantile-surface forecasts.

Every metric works on radii already evaluated at the quantity of interest:
``radii[i, l]`` is the level-l radius of sample i's forecast, taken in the
direction of sample i's own forecast-adjusted observation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .directional import QuantileSurfaceForecast, check_levels, polygon_areas


class MissingLevelError(KeyError):
    pass


@dataclass
class ReliabilityCurve:
    levels: np.ndarray
    frequencies: np.ndarray

    def rows(self):
        return [(float(t), float(v)) for t, v in zip(self.levels, self.frequencies)]


@dataclass
class SharpnessCurve:
    coverages: np.ndarray
    areas: np.ndarray

    def rows(self):
        return [(float(c), float(a)) for c, a in zip(self.coverages, self.areas)]


def _nonempty(lengths):
    lengths = np.asarray(lengths, dtype=float)
    if lengths.size == 0:
        raise ValueError("empty dataset")
    return lengths


def coverage(radii, lengths) -> float:
    """Fraction of observations with length <= predicted radius (boundary inside)."""
    lengths = _nonempty(lengths)
    return float(np.mean(np.asarray(radii, dtype=float) >= lengths))


def reliability_curve(radii, lengths, levels) -> ReliabilityCurve:
    levels = check_levels(levels)
    lengths = _nonempty(lengths)
    radii = np.asarray(radii, dtype=float)
    freq = np.mean(radii >= lengths[:, None], axis=0)
    return ReliabilityCurve(levels, freq)


def _level_index(levels, tau):
    hits = np.flatnonzero(np.isclose(levels, tau, rtol=0.0, atol=1e-9))
    if hits.size == 0:
        raise MissingLevelError(f"no trained level matches coverage {tau}")
    return int(hits[0])


def sharpness_curve(surfaces: list[QuantileSurfaceForecast], alphas) -> SharpnessCurve:
    """Mean polygon area of the (1 - alpha)-surfaces, per alpha.

    ``surfaces`` is a list of :class:`QuantileSurfaceForecast` on a common
    level set.
    """
    if not surfaces:
        raise ValueError("no surfaces")
    levels = surfaces[0].levels
    radii = np.stack([s.radii for s in surfaces])
    return sharpness_from_radii(radii, surfaces[0].directions, levels, alphas)


def sharpness_from_radii(radii, directions, levels, alphas) -> SharpnessCurve:
    """Same as :func:`sharpness_curve` for a radii array of shape (N, L, D)."""
    levels = np.asarray(levels, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if directions.shape[1] != 2:
        raise ValueError("exact sharpness is only available for 2-D surfaces")
    areas, covs = [], []
    for a in alphas:
        idx = _level_index(levels, 1.0 - a)
        covs.append(levels[idx])
        areas.append(float(np.mean(polygon_areas(radii[:, idx, :], directions))))
    return SharpnessCurve(np.array(covs), np.array(areas))


@dataclass
class DirectionalCdf:
    """Piecewise-linear CDF of a vector length, closed by a jump to one at the last anchor."""

    lengths: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.lengths.shape != self.probs.shape or self.lengths.size < 1:
            raise ValueError("anchor arrays must be nonempty and equally long")
        if np.any(np.diff(self.lengths) < 0):
            raise ValueError("anchor lengths must be nondecreasing")
        if np.any(np.diff(self.probs) < 0) or np.any((self.probs < 0) | (self.probs > 1)):
            raise ValueError("anchor probabilities must be nondecreasing within [0, 1]")

    @classmethod
    def step(cls, q: float) -> "DirectionalCdf":
        """Point mass at ``q``."""
        return cls(np.array([0.0, q]), np.array([0.0, 0.0]))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        top = self.lengths[-1]
        inner = np.interp(y, self.lengths, self.probs, left=0.0)
        out = np.where(y >= top, 1.0, inner)
        # left of the first anchor the CDF is zero
        out = np.where(y < self.lengths[0], 0.0, out)
        return float(out) if out.ndim == 0 else out


def build_directional_cdf(levels, radii) -> DirectionalCdf:
    """CDF through (0, 0) and (q_l, tau_l), jumping to one at the top quantile."""
    levels = check_levels(levels)
    radii = np.asarray(radii, dtype=float)
    if radii.shape != levels.shape:
        raise ValueError("need one radius per level")
    if np.any(np.diff(radii) < 0) or np.any(radii < 0):
        raise ValueError("radii must be nonnegative and nondecreasing across levels")
    return DirectionalCdf(np.concatenate([[0.0], radii]), np.concatenate([[0.0], levels]))


def directional_crps(cdf: DirectionalCdf, observed_length: float) -> float:
    if observed_length < 0:
        raise ValueError("observed length must be nonnegative")
    xs = cdf.lengths[None, :]
    ps = cdf.probs[None, :]
    if cdf.lengths[0] > 0:
        xs = np.concatenate([[[0.0]], xs], axis=1)
        ps = np.concatenate([[[0.0]], ps], axis=1)
    return float(kernels.crps_piecewise(xs, ps, np.array([float(observed_length)]))[0])


def crps_per_sample(radii, levels, lengths) -> np.ndarray:
    """Directional CRPS of each sample's quantile-based CDF (radii shape (N, L))."""
    levels = check_levels(levels)
    radii = np.asarray(radii, dtype=float)
    lengths = _nonempty(lengths)
    n = radii.shape[0]
    xs = np.hstack([np.zeros((n, 1)), radii])
    ps = np.broadcast_to(np.concatenate([[0.0], levels]), xs.shape)
    return kernels.crps_piecewise(np.ascontiguousarray(xs), np.ascontiguousarray(ps), lengths)


def average_directional_crps(radii, levels, lengths) -> float:
    return float(np.mean(crps_per_sample(radii, levels, lengths)))


def skill(eval_score: float, base_score: float) -> float:
    if not base_score > 0:
        raise ValueError("baseline score must be positive")
    return 1.0 - eval_score / base_score


# CSV tables ------------------------------------------------------------------


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_reliability_csv(path, curve: ReliabilityCurve):
    _write(path, ["level", "frequency"], curve.rows())


def write_sharpness_csv(path, curve: SharpnessCurve):
    _write(path, ["coverage", "mean_area"], curve.rows())


def write_crps_csv(path, directions, lengths, scores):
    angles = np.arctan2(directions[:, 1], directions[:, 0])
    rows = [(i, float(a), float(r), float(s))
            for i, (a, r, s) in enumerate(zip(angles, lengths, scores))]
    _write(path, ["sample_id", "direction_angle", "length", "crps"], rows)


def write_summary_csv(path, rows):
    """rows: (model, avg_crps, skill_vs_baseline) with skill possibly NaN for the baseline."""
    _write(path, ["model", "avg_crps", "skill_vs_baseline"], rows)


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


__all__ = [
    "DirectionalCdf",
    "MissingLevelError",
    "ReliabilityCurve",
    "SharpnessCurve",
    "average_directional_crps",
    "build_directional_cdf",
    "coverage",
    "crps_per_sample",
    "directional_crps",
    "reliability_curve",
    "sharpness_curve",
    "sharpness_from_radii",
    "skill",
    "write_crps_csv",
    "write_reliability_csv",
    "write_sharpness_csv",
    "write_summary_csv",
]
