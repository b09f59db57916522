"""Command line interface: ``qsurface {gen,train,eval,run,report}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .. import synthdata
from ..numkit import Rng
from .config import FAST_EPOCHS, ConfigError, ExperimentConfig, preset
from .experiment import (
    StageError,
    evaluate,
    load_models,
    load_report,
    make_data,
    run_experiment,
    save_models,
    train_models,
    write_manifest,
    write_report,
    write_tables,
)

OUT_ENV = "QSURFACE_OUT"


def _csv_floats(s):
    return tuple(float(x) for x in s.split(","))


def _csv_ints(s):
    return tuple(int(x) for x in s.split(","))


def _csv_strs(s):
    return tuple(x for x in s.split(",") if x)


def _add_config_flags(p):
    p.add_argument("--preset", choices=["mgd", "smd", "cmgd"], default=None)
    p.add_argument("--config", type=Path, help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--fast", action="store_true", help="5000 training epochs instead of 50000")
    p.add_argument("--n-train", dest="n_train", type=int)
    p.add_argument("--n-test", dest="n_test", type=int)
    p.add_argument("--levels", type=_csv_floats)
    p.add_argument("--hidden", type=_csv_ints)
    p.add_argument("--activation", choices=["tanh", "relu"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", dest="learning_rate", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--directions", type=int)
    p.add_argument("--baselines", type=_csv_strs)
    p.add_argument("--cond-epochs", dest="cond_epochs", type=int)
    p.add_argument("--cond-lr", dest="cond_learning_rate", type=float)
    p.add_argument("--point-kind", dest="point_kind",
                   choices=["auto", "constant", "linear", "mlp"])


_OVERRIDES = ("seed", "n_train", "n_test", "levels", "hidden", "activation", "epochs",
              "learning_rate", "l2", "batch_size", "directions", "baselines",
              "cond_epochs", "cond_learning_rate", "point_kind")


def config_from_args(args) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in _OVERRIDES}
    if args.config is not None:
        cfg = ExperimentConfig.from_text(args.config.read_text())
        if args.fast and overrides["epochs"] is None:
            overrides["epochs"] = FAST_EPOCHS
        return cfg.with_overrides(**overrides)
    return preset(args.preset or "mgd", fast=args.fast, **overrides)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV)
    if not out:
        raise SystemExit("error: no output directory (use --out or set QSURFACE_OUT)")
    return Path(out)


def cmd_gen(args) -> int:
    kind = args.preset or "mgd"
    n = args.n if args.n is not None else 1000
    ds = synthdata.generate(kind, Rng(args.seed if args.seed is not None else 0), n)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        synthdata.write_csv(args.out, ds)
    else:
        synthdata.write_csv(sys.stdout, ds)
    return 0


def cmd_train(args) -> int:
    cfg = config_from_args(args)
    out = _out_dir(args)
    if args.data:
        train = synthdata.read_csv(args.data)
    else:
        train, _ = make_data(cfg)
    models = train_models(cfg, train)
    save_models(models, cfg, out)
    return 0


def cmd_eval(args) -> int:
    models, cfg = load_models(args.models)
    if args.data:
        test = synthdata.read_csv(args.data)
    else:
        _, test = make_data(cfg)
    report = evaluate(cfg, models, test)
    out = _out_dir(args)
    files = write_report(report, out)
    write_manifest(out, cfg, files)
    _print_summary(report)
    return 0


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    report = run_experiment(cfg, _out_dir(args))
    _print_summary(report)
    return 0


def cmd_report(args) -> int:
    report = load_report(args.source)
    out = Path(args.out) if args.out else Path(args.source)
    write_tables(report, out)
    _print_summary(report)
    return 0


def _print_summary(report):
    for name, s in report.scores.items():
        skill = "" if s.skill is None else f"  skill={s.skill:+.4f}"
        print(f"{name:14s} avg_crps={s.avg_crps:.5f}{skill}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsurface", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset as CSV")
    p.add_argument("--preset", choices=["mgd", "smd", "cmgd"])
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit and persist point model, QSNN and baselines")
    _add_config_flags(p)
    p.add_argument("--data", type=Path, help="training CSV (generated from the preset if omitted)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score persisted models on a dataset")
    p.add_argument("--models", type=Path, required=True)
    p.add_argument("--data", type=Path, help="test CSV (generated from the stored config if omitted)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline: data, training, evaluation, report")
    _add_config_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="re-emit CSV tables from a persisted report")
    p.add_argument("--from", dest="source", type=Path, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, StageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
