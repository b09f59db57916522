"""Two-stage experiment pipeline: data, point model, QSNN and baselines, evaluation."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import metrics, persist, synthdata
from ..directional import decompose_many, direction_grid, forecast_adjust
from ..gaussian import (
    CovarianceNet,
    GaussianForecast,
    directional_quantiles,
    fit_conditional,
    fit_unconditional,
)
from ..nets.point import PointModel, fit_point_model
from ..nets.qsnn import QsnnModel, train_qsnn
from .config import ExperimentConfig

log = logging.getLogger(__name__)

BASELINE = "gauss_uncond"
MODEL_FILES = {
    "point": "point_model.json",
    "qsnn": "qsnn.json",
    "gauss_uncond": "gauss_uncond.json",
    "gauss_cond": "gauss_cond.json",
}
CONFIG_FILE = "config.txt"
REPORT_FILE = "report.json"
MANIFEST_FILE = "manifest.json"


class StageError(RuntimeError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# forecasters: anything with ``levels`` and ``radii(directions, features) -> (n, L)``


class QsnnForecaster:
    def __init__(self, model: QsnnModel):
        self.model = model
        self.levels = model.levels

    def radii(self, directions, features):
        return self.model.predict_radii(directions, features if self.model.n_features else None)


class GaussianForecaster:
    """Gaussian level-set radii; ``cov_fn(features) -> (n, 2, 2)``."""

    def __init__(self, cov_fn, levels):
        self.cov_fn = cov_fn
        self.levels = np.asarray(levels, dtype=float)

    def radii(self, directions, features):
        return directional_quantiles(self.cov_fn(features), directions, self.levels)


def unconditional_forecaster(g: GaussianForecast, levels):
    return GaussianForecaster(lambda f: np.broadcast_to(g.covariance, (len(f), 2, 2)), levels)


def conditional_forecaster(net: CovarianceNet, levels):
    return GaussianForecaster(net.covariances, levels)


def true_forecaster(kind: str, levels):
    return GaussianForecaster(lambda f: synthdata.true_covariances(kind, f), levels)


@dataclass
class ModelScores:
    reliability: metrics.ReliabilityCurve
    sharpness: metrics.SharpnessCurve
    crps: np.ndarray
    avg_crps: float
    skill: float | None = None


@dataclass
class EvaluationReport:
    config: ExperimentConfig
    angles: np.ndarray
    lengths: np.ndarray
    scores: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    models: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_text(),
            "seed": self.config.seed,
            "angles": [float(a) for a in self.angles],
            "lengths": [float(r) for r in self.lengths],
            "fits": self.fits,
            # the JSON is key-sorted, so the table order is kept explicitly
            "order": list(self.scores),
            "models": {
                name: {
                    "reliability": s.reliability.rows(),
                    "sharpness": s.sharpness.rows(),
                    "crps": [float(c) for c in s.crps],
                    "avg_crps": s.avg_crps,
                    "skill": s.skill,
                }
                for name, s in self.scores.items()
            },
        }

    @classmethod
    def from_dict(cls, d) -> "EvaluationReport":
        rep = cls(ExperimentConfig.from_text(d["config"]), np.array(d["angles"]),
                  np.array(d["lengths"]), fits=d.get("fits", {}))
        for name in d.get("order", sorted(d["models"])):
            m = d["models"][name]
            rel = np.array(m["reliability"], dtype=float).reshape(-1, 2)
            sh = np.array(m["sharpness"], dtype=float).reshape(-1, 2)
            rep.scores[name] = ModelScores(
                metrics.ReliabilityCurve(rel[:, 0], rel[:, 1]),
                metrics.SharpnessCurve(sh[:, 0], sh[:, 1]),
                np.array(m["crps"], dtype=float), m["avg_crps"], m["skill"])
        return rep


def _stage(name):
    def deco(fn):
        def wrapped(*a, **kw):
            try:
                return fn(*a, **kw)
            except StageError:
                raise
            except Exception as exc:  # noqa: BLE001 - re-raised with stage context
                raise StageError(name, exc) from exc
        wrapped.__name__ = fn.__name__
        wrapped.__doc__ = fn.__doc__
        return wrapped
    return deco


@_stage("data")
def make_data(config: ExperimentConfig):
    spec = synthdata.SyntheticSpec(config.kind, config.n_train, config.n_test, config.seed)
    return synthdata.train_test(spec)


@_stage("train")
def train_models(config: ExperimentConfig, train: synthdata.Dataset) -> dict:
    """Point model first, then QSNN and requested baselines on its residuals."""
    kind = None if config.point_kind == "auto" else config.point_kind
    point = fit_point_model(train.features, train.targets, kind=kind)
    models = {"point": point}
    log.info("training QSNN (%d epochs)", config.epochs)
    models["qsnn"] = train_qsnn(train.features, train.targets, point, config.levels,
                                hidden=config.hidden, activation=config.activation,
                                config=config.qsnn_train_config())
    if "gauss_uncond" in config.baselines:
        models["gauss_uncond"] = fit_unconditional(train.targets, point, train.features)
    if "gauss_cond" in config.baselines and train.features.shape[1] > 0:
        log.info("training conditional Gaussian (%d epochs)", config.cond_epochs)
        models["gauss_cond"] = fit_conditional(train.features, train.targets, point,
                                               hidden=config.cond_hidden,
                                               config=config.cond_train_config())
    return models


def forecasters(config: ExperimentConfig, models: dict) -> dict:
    out = {"qsnn": QsnnForecaster(models["qsnn"])}
    if "gauss_uncond" in models:
        out["gauss_uncond"] = unconditional_forecaster(models["gauss_uncond"], config.levels)
    if "gauss_cond" in models:
        out["gauss_cond"] = conditional_forecaster(models["gauss_cond"], config.levels)
    if "gauss_true" in config.baselines and config.kind in ("mgd", "cmgd"):
        out["gauss_true"] = true_forecaster(config.kind, config.levels)
    return out


def observation_directions(point: PointModel, test: synthdata.Dataset):
    """Directions and lengths of the forecast-adjusted test observations.

    An observation on the point estimate gets the first axis as direction;
    with length 0 it is covered by every surface.
    """
    adjusted = forecast_adjust(test.targets, point.predict(test.features))
    dirs, lengths = decompose_many(adjusted)
    zero = lengths == 0
    if np.any(zero):
        dirs[zero] = 0.0
        dirs[zero, 0] = 1.0
    return dirs, lengths


def surface_radii(fc, features, grid) -> np.ndarray:
    """Radii (N, L, D) of each test sample's surface on the direction grid."""
    n, d = features.shape[0], grid.shape[0]
    if features.shape[1] == 0:
        one = fc.radii(grid, np.zeros((d, 0))).T
        return np.broadcast_to(one, (n, *one.shape))
    uniq, inverse = np.unique(features, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    per = np.empty((uniq.shape[0], len(fc.levels), d))
    for u, row in enumerate(uniq):
        f = np.repeat(row[None, :], d, axis=0)
        per[u] = fc.radii(grid, f).T
    return per[inverse]


@_stage("evaluate")
def evaluate(config: ExperimentConfig, models: dict, test: synthdata.Dataset) -> EvaluationReport:
    point = models["point"]
    dirs, lengths = observation_directions(point, test)
    grid = direction_grid(config.directions)
    levels = np.asarray(config.levels)
    alphas = 1.0 - levels
    report = EvaluationReport(config, np.arctan2(dirs[:, 1], dirs[:, 0]), lengths)
    for name, fc in forecasters(config, models).items():
        radii = fc.radii(dirs, test.features)
        crps = metrics.crps_per_sample(radii, levels, lengths)
        report.scores[name] = ModelScores(
            metrics.reliability_curve(radii, lengths, levels),
            metrics.sharpness_from_radii(surface_radii(fc, test.features, grid), grid, levels, alphas),
            crps, float(np.mean(crps)))
    if BASELINE in report.scores:
        base = report.scores[BASELINE].avg_crps
        for s in report.scores.values():
            s.skill = metrics.skill(s.avg_crps, base)
    if "gauss_uncond" in models:
        report.fits["gauss_uncond"] = models["gauss_uncond"].to_dict()
    return report


def write_tables(report: EvaluationReport, out: Path) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    directions = np.column_stack([np.cos(report.angles), np.sin(report.angles)])
    summary = []
    for name, s in report.scores.items():
        p = out / f"reliability_{name}.csv"
        metrics.write_reliability_csv(p, s.reliability)
        written.append(p)
        p = out / f"sharpness_{name}.csv"
        metrics.write_sharpness_csv(p, s.sharpness)
        written.append(p)
        p = out / f"crps_{name}.csv"
        # angles are stored, so directions are rebuilt from them for a stable table
        metrics.write_crps_csv(p, directions, report.lengths, s.crps)
        written.append(p)
        summary.append((name, s.avg_crps, float("nan") if s.skill is None else s.skill))
    p = out / "summary.csv"
    metrics.write_summary_csv(p, summary)
    written.append(p)
    return written


def write_report(report: EvaluationReport, out: Path) -> list[Path]:
    out = Path(out)
    written = write_tables(report, out)
    p = out / REPORT_FILE
    p.write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n")
    written.append(p)
    return written


def load_report(path) -> EvaluationReport:
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_FILE
    return EvaluationReport.from_dict(json.loads(path.read_text()))


def save_models(models: dict, config: ExperimentConfig, out: Path) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fname in MODEL_FILES.items():
        if name in models:
            persist.save(models[name], out / fname)
            written.append(out / fname)
    (out / CONFIG_FILE).write_text(config.to_text())
    written.append(out / CONFIG_FILE)
    return written


def load_models(directory) -> tuple[dict, ExperimentConfig]:
    directory = Path(directory)
    cfg_path = directory / CONFIG_FILE
    if not cfg_path.is_file():
        raise FileNotFoundError(f"model directory {directory} has no {CONFIG_FILE}")
    config = ExperimentConfig.from_text(cfg_path.read_text())
    models = {}
    for name, fname in MODEL_FILES.items():
        p = directory / fname
        if p.is_file():
            models[name] = persist.load(p)
        elif name in ("point", "qsnn"):
            raise FileNotFoundError(f"model file not found: {p}")
    return models, config


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, config: ExperimentConfig, files) -> Path:
    out = Path(out)
    doc = {
        "schema_version": 1,
        "seed": config.seed,
        "config": config.to_text(),
        "artifacts": {Path(f).relative_to(out).as_posix(): sha256(f) for f in sorted(files)},
    }
    p = out / MANIFEST_FILE
    p.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return p


def run_experiment(config: ExperimentConfig, out=None) -> EvaluationReport:
    """Full pipeline; writes datasets, models, tables and manifest when ``out`` is given."""
    train, test = make_data(config)
    models = train_models(config, train)
    report = evaluate(config, models, test)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for name, ds in (("train", train), ("test", test)):
            p = out / f"dataset_{name}.csv"
            synthdata.write_csv(p, ds)
            files.append(p)
        files += save_models(models, config, out)
        files += write_report(report, out)
        write_manifest(out, config, files)
    report.models = models
    return report
