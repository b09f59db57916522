"""Versioned JSON persistence for fitted models.

Floats are written with ``repr`` precision, so a load reproduces every
parameter bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

FORMAT = "qsurface-model"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def _registry():
    from .gaussian import CovarianceNet, GaussianForecast
    from .nets.point import PointModel
    from .nets.qsnn import QsnnModel

    return {
        "qsnn": QsnnModel,
        "point": PointModel,
        "covariance_net": CovarianceNet,
        "gaussian": GaussianForecast,
    }


def dumps(model) -> str:
    for name, cls in _registry().items():
        if isinstance(model, cls):
            doc = {"format": FORMAT, "version": VERSION, "type": name, "model": model.to_dict()}
            return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    raise TypeError(f"cannot persist {type(model).__name__}")


def loads(text: str):
    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ModelFormatError("not a qsurface model file")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model file version {doc.get('version')}")
    cls = _registry().get(doc.get("type"))
    if cls is None:
        raise ModelFormatError(f"unknown model type {doc.get('type')!r}")
    return cls.from_dict(doc["model"])


def save(model, path) -> None:
    Path(path).write_text(dumps(model))


def load(path):
    return loads(Path(path).read_text())
