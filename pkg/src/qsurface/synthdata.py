"""Synthetic benchmark distributions: MGD, SMD and CMGD.

* MGD: zero-mean bivariate Gaussian, variances 0.5 and 2.
* SMD: (Normal(1, 3), Exponential(scale 4)) rotated 45 degrees counterclockwise.
* CMGD: zero-mean Gaussian whose diagonal covariance depends on a binary
  feature, diag(0.5, 7.5) for 0 and diag(5.0, 0.5) for 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .gaussian import directional_quantiles
from .numkit import Rng

KINDS = ("mgd", "smd", "cmgd")

MGD_COV = np.diag([0.5, 2.0])
CMGD_COVS = (np.diag([0.5, 7.5]), np.diag([5.0, 0.5]))
SMD_ANGLE = np.pi / 4


class UnsupportedKindError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    kind: str
    n_train: int = 1000
    n_test: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedKindError(f"unknown synthetic kind {self.kind!r}")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("sample counts must be >= 1")


@dataclass
class Dataset:
    features: np.ndarray  # (n, M), M may be 0
    targets: np.ndarray  # (n, K)

    def __len__(self):
        return self.targets.shape[0]


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def gen_mgd(rng: Rng, n: int) -> np.ndarray:
    z = rng.normal(size=(n, 2))
    return z * np.sqrt(np.diag(MGD_COV))


def smd_unrotated(rng: Rng, n: int) -> np.ndarray:
    first = 1.0 + 3.0 * rng.normal(size=n)
    second = rng.exponential(4.0, size=n)
    return np.column_stack([first, second])


def gen_smd(rng: Rng, n: int) -> np.ndarray:
    return smd_unrotated(rng, n) @ rotation(SMD_ANGLE).T


def gen_cmgd(rng: Rng, n: int) -> tuple[np.ndarray, np.ndarray]:
    if n % 2:
        raise ValueError("CMGD needs an even sample count (equal halves per condition)")
    cond = np.tile([0.0, 1.0], n // 2)
    sd = np.where(cond[:, None] == 0.0,
                  np.sqrt(np.diag(CMGD_COVS[0])), np.sqrt(np.diag(CMGD_COVS[1])))
    return cond[:, None], rng.normal(size=(n, 2)) * sd


def generate(kind: str, rng: Rng, n: int) -> Dataset:
    if kind == "mgd":
        return Dataset(np.zeros((n, 0)), gen_mgd(rng, n))
    if kind == "smd":
        return Dataset(np.zeros((n, 0)), gen_smd(rng, n))
    if kind == "cmgd":
        f, y = gen_cmgd(rng, n)
        return Dataset(f, y)
    raise UnsupportedKindError(f"unknown synthetic kind {kind!r}")


def train_test(spec: SyntheticSpec) -> tuple[Dataset, Dataset]:
    rng = Rng(spec.seed)
    train = generate(spec.kind, rng.derive("train"), spec.n_train)
    test = generate(spec.kind, rng.derive("test"), spec.n_test)
    return train, test


def true_covariances(kind: str, features) -> np.ndarray:
    """Generating covariance per sample, shape (n, 2, 2)."""
    f = np.asarray(features, dtype=float)
    n = f.shape[0]
    if kind == "mgd":
        return np.broadcast_to(MGD_COV, (n, 2, 2)).copy()
    if kind == "cmgd":
        cond = f.reshape(n, -1)[:, 0]
        return np.where((cond == 0.0)[:, None, None], CMGD_COVS[0], CMGD_COVS[1])
    raise UnsupportedKindError(f"no closed-form directional quantiles for {kind!r}")


def true_directional_quantile(kind: str, features, direction, tau) -> float:
    feats = np.zeros((1, 0)) if features is None else np.atleast_2d(np.asarray(features, dtype=float))
    cov = true_covariances(kind, feats)
    return float(directional_quantiles(cov, np.atleast_2d(direction), [tau])[0, 0])


def write_csv(target, dataset: Dataset) -> None:
    """Write feature columns x1.. then target columns y1.. to a path or open file."""
    if hasattr(target, "write"):
        _write_rows(target, dataset)
        return
    with open(target, "w", newline="") as fh:
        _write_rows(fh, dataset)


def _write_rows(fh, dataset: Dataset) -> None:
    m = dataset.features.shape[1]
    k = dataset.targets.shape[1]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{j + 1}" for j in range(m)] + [f"y{j + 1}" for j in range(k)])
    for row in np.hstack([dataset.features, dataset.targets]):
        w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty dataset file")
    header = rows[0]
    m = sum(1 for h in header if h.startswith("x"))
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return Dataset(data[:, :m], data[:, m:])
