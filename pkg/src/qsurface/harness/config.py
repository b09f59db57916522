"""Experiment configuration: presets and a flat ``key = value`` text format."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from ..directional import check_levels
from ..nets.optim import TrainConfig

SCHEMA_VERSION = 1

DEFAULT_LEVELS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)
FAST_EPOCHS = 5000
BASELINES = ("gauss_uncond", "gauss_cond", "gauss_true")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "mgd"
    n_train: int = 1000
    n_test: int = 1000
    seed: int = 0
    levels: tuple = DEFAULT_LEVELS
    hidden: tuple = (10,)
    activation: str = "tanh"
    epochs: int = 50000
    learning_rate: float = 0.1
    l2: float = 0.3
    batch_size: int | None = None
    directions: int = 360
    baselines: tuple = ("gauss_uncond",)
    cond_epochs: int = 5000
    cond_learning_rate: float = 0.01
    cond_hidden: tuple = (10,)
    point_kind: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(t) for t in self.levels))
        for name in ("hidden", "cond_hidden"):
            object.__setattr__(self, name, tuple(int(h) for h in getattr(self, name)))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        if self.kind not in ("mgd", "smd", "cmgd"):
            raise ConfigError(f"unknown dataset kind {self.kind!r}")
        try:
            check_levels(self.levels)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.directions < 3:
            raise ConfigError("directions must be >= 3")
        for b in self.baselines:
            if b not in BASELINES:
                raise ConfigError(f"unknown baseline {b!r}")
        if self.point_kind not in ("auto", "constant", "linear", "mlp"):
            raise ConfigError(f"unknown point model kind {self.point_kind!r}")

    def qsnn_train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, learning_rate=self.learning_rate, l2=self.l2,
                           batch_size=self.batch_size, seed=_sub_seed(self.seed, 1))

    def cond_train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.cond_epochs, learning_rate=self.cond_learning_rate,
                           l2=0.0, seed=_sub_seed(self.seed, 2))

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_text(self) -> str:
        lines = [f"schema_version = {SCHEMA_VERSION}"]
        for f in fields(self):
            lines.append(f"{f.name} = {_fmt(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        version = values.pop("schema_version", None)
        if version is None or int(version) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema version {version}")
        kinds = {f.name: f for f in fields(cls)}
        parsed = {}
        for key, val in values.items():
            if key not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            parsed[key] = _parse(key, val)
        return cls(**parsed)


def _sub_seed(seed: int, tag: int) -> int:
    # keeps the per-model streams distinct yet fully determined by the run seed
    return (seed * 1_000_003 + tag) % 2**63


_TUPLE_FLOAT = {"levels"}
_TUPLE_INT = {"hidden", "cond_hidden"}
_TUPLE_STR = {"baselines"}
_INT = {"n_train", "n_test", "seed", "epochs", "directions", "cond_epochs"}
_FLOAT = {"learning_rate", "l2", "cond_learning_rate"}


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(key, val):
    if key in _TUPLE_FLOAT:
        return tuple(float(x) for x in val.split(",") if x.strip())
    if key in _TUPLE_INT:
        return tuple(int(x) for x in val.split(",") if x.strip())
    if key in _TUPLE_STR:
        return tuple(x.strip() for x in val.split(",") if x.strip())
    if key in _INT:
        return int(val)
    if key in _FLOAT:
        return float(val)
    if key == "batch_size":
        return None if val.lower() == "none" else int(val)
    return val


PRESETS = {
    "mgd": ExperimentConfig(kind="mgd", baselines=("gauss_uncond", "gauss_true")),
    "smd": ExperimentConfig(kind="smd", baselines=("gauss_uncond",)),
    "cmgd": ExperimentConfig(kind="cmgd", baselines=("gauss_uncond", "gauss_cond", "gauss_true")),
}


def preset(name: str, fast: bool = False, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = PRESETS[name]
    if fast:
        cfg = replace(cfg, epochs=FAST_EPOCHS)
    return cfg.with_overrides(**overrides)
