"""Command-line entry point: train, evaluate, predict, inspect-data, vhs.

Configuration merges three layers, lowest priority first: built-in
defaults, a JSON config file (--config), then explicit flags. The dataset
root may also come from the CARDIONET_DATA environment variable when
--data is absent. Logs go to stderr, data and tables to stdout. Exit
codes: 0 success, 1 runtime failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .adam import AdamConfig
from .checkpoint import load_checkpoint
from .data import CLASS_NAMES, load_split, split_summary, vhs_to_class
from .errors import CheckpointError, DataError, UsageError
from .metrics import MetricsReport
from .network import CardioNetConfig
from .predict import FORMATS, predict_split
from .training import TrainConfig, evaluate_split, train

log = logging.getLogger(__name__)

ENV_DATA = "CARDIONET_DATA"

CONFIG_KEYS = {"data", "out", "epochs", "batch_size", "lr", "beta1", "beta2",
               "eps", "seed", "strict", "arch"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardionet",
        description="Train and run the cardiomegaly radiograph classifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run the training loop")
    _add_common(p_train)
    p_train.add_argument("--out", help="output directory for best.ckpt/history.csv/run.json")
    p_train.add_argument("--epochs", type=int, help="number of training epochs (default 50)")
    p_train.add_argument("--batch-size", type=int, help="samples per batch (default 32)")
    p_train.add_argument("--lr", type=float, help="Adam learning rate (default 0.001)")
    p_train.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("evaluate", help="score a checkpoint on a labeled split")
    _add_common(p_eval)
    p_eval.add_argument("--checkpoint", required=True, help="path to a .ckpt file")
    p_eval.add_argument("--split", choices=("train", "valid"), default="valid")
    p_eval.add_argument("--out", help="directory for evaluation.json (default: checkpoint dir)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_predict = sub.add_parser("predict", help="export test-split predictions as CSV")
    _add_common(p_predict)
    p_predict.add_argument("--checkpoint", required=True, help="path to a .ckpt file")
    p_predict.add_argument("--out", help="output directory for predictions.csv")
    p_predict.add_argument("--format", choices=FORMATS, default="full",
                           help="full: probabilities + index; names: class name only")
    p_predict.set_defaults(func=cmd_predict)

    p_inspect = sub.add_parser("inspect-data", help="report per-split per-class counts")
    _add_common(p_inspect)
    p_inspect.set_defaults(func=cmd_inspect_data)

    p_vhs = sub.add_parser("vhs", help="classify a vertebral heart scale score")
    p_vhs.add_argument("score", type=float)
    p_vhs.set_defaults(func=cmd_vhs)

    return parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data", help=f"dataset root (fallback: ${ENV_DATA})")
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--strict", action="store_true", default=None,
                     help="treat unusable dataset files as errors")


def load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"--config: file not found: {path}")
    try:
        values = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON in {path}: {exc}") from exc
    if not isinstance(values, dict):
        raise UsageError(f"--config: expected a JSON object in {path}")
    unknown = sorted(set(values) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"--config: unknown keys {unknown}; expected {sorted(CONFIG_KEYS)}")
    return values


def resolve_data_root(args, file_cfg: dict) -> Path:
    value = args.data or file_cfg.get("data") or os.environ.get(ENV_DATA)
    if not value:
        raise UsageError(f"--data: dataset root not given (flag, config file, or ${ENV_DATA})")
    root = Path(value)
    if not root.is_dir():
        raise UsageError(f"--data: path does not exist or is not a directory: {root}")
    return root


def resolve_train_config(args) -> TrainConfig:
    file_cfg = load_config_file(args.config)
    data_root = resolve_data_root(args, file_cfg)
    out = args.out or file_cfg.get("out")
    if not out:
        raise UsageError("--out: output directory not given")

    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return file_cfg.get(key, default)

    try:
        adam = AdamConfig(lr=pick(args.lr, "lr", 0.001),
                          beta1=file_cfg.get("beta1", 0.9),
                          beta2=file_cfg.get("beta2", 0.999),
                          eps=file_cfg.get("eps", 1e-8))
        arch = CardioNetConfig.from_dict(file_cfg["arch"]) if "arch" in file_cfg \
            else CardioNetConfig()
        return TrainConfig(
            data_root=data_root,
            out_dir=Path(out),
            epochs=pick(args.epochs, "epochs", 50),
            batch_size=pick(args.batch_size, "batch_size", 32),
            adam=adam,
            arch=arch,
            seed=pick(args.seed, "seed", 0),
            strict=pick(args.strict, "strict", False),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc


def cmd_train(args) -> int:
    cfg = resolve_train_config(args)
    log.info("training for %d epochs, batch size %d, lr %g, seed %d",
             cfg.epochs, cfg.batch_size, cfg.adam.lr, cfg.seed)

    def report(record):
        print(f"epoch {record.epoch}/{cfg.epochs} "
              f"train_loss={record.train_loss:.6f} "
              f"valid_loss={record.valid_loss:.6f} "
              f"({record.seconds:.1f}s)", flush=True)

    best, history = train(cfg, on_epoch=report)
    print(f"best epoch: {best.meta['epoch']} "
          f"(valid_loss={best.meta['valid_loss']:.6f})")
    print(f"artifacts written to {cfg.out_dir}")
    return 0


def cmd_evaluate(args) -> int:
    file_cfg = load_config_file(args.config)
    data_root = resolve_data_root(args, file_cfg)
    ckpt = load_checkpoint(args.checkpoint)
    split = load_split(data_root, args.split, strict=bool(args.strict),
                       image_size=ckpt.config.input_size)
    mean_loss, report = evaluate_split(ckpt, split)

    print(f"split: {args.split} ({report.num_samples} samples)")
    print(f"mean loss: {mean_loss:.6f}")
    print(f"accuracy: {report.accuracy:.4f}")
    print(_format_confusion(report))
    print(_format_per_class(report))

    out_dir = Path(args.out) if args.out else Path(args.checkpoint).resolve().parent
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "evaluation.json"
    payload = {"split": args.split, "mean_loss": mean_loss, **report.as_dict()}
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    log.info("wrote %s", report_path)
    return 0


def cmd_predict(args) -> int:
    file_cfg = load_config_file(args.config)
    data_root = resolve_data_root(args, file_cfg)
    out = args.out or file_cfg.get("out")
    if not out:
        raise UsageError("--out: output directory not given")
    ckpt = load_checkpoint(args.checkpoint)
    split = load_split(data_root, "test", strict=bool(args.strict),
                       image_size=ckpt.config.input_size)
    summary = predict_split(ckpt, split, Path(out) / "predictions.csv", fmt=args.format)

    print(f"wrote {summary.rows} predictions to {summary.out_path}")
    print("label mapping: " + ", ".join(f"{name}={idx}"
                                        for name, idx in summary.label_mapping.items()))
    for name in CLASS_NAMES:
        print(f"predicted {name}: {summary.class_counts[name]}")
    return 0


def cmd_inspect_data(args) -> int:
    file_cfg = load_config_file(args.config)
    data_root = resolve_data_root(args, file_cfg)
    strict = bool(args.strict)
    header = f"{'split':<8}{'total':>8}" + "".join(f"{name:>8}" for name in CLASS_NAMES)
    print(header)
    for role in ("train", "valid", "test"):
        try:
            split = load_split(data_root, role, strict=strict)
        except DataError as exc:
            print(f"{role:<8}{'-':>8}  ({exc})")
            continue
        if split.class_counts:
            counts = "".join(f"{split.class_counts[name]:>8}" for name in CLASS_NAMES)
        else:
            counts = "".join(f"{'-':>8}" for _ in CLASS_NAMES)
        print(f"{role:<8}{len(split):>8}{counts}")
        log.info("%s", split_summary(split))
    return 0


def cmd_vhs(args) -> int:
    try:
        label = vhs_to_class(args.score)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(label.name)
    return 0


def _format_confusion(report: MetricsReport) -> str:
    lines = ["confusion matrix (rows=true, cols=predicted):"]
    lines.append(" " * 10 + "".join(f"{name:>8}" for name in CLASS_NAMES))
    for name, row in zip(CLASS_NAMES, report.confusion):
        lines.append(f"{name:>10}" + "".join(f"{v:>8}" for v in row))
    return "\n".join(lines)


def _format_per_class(report: MetricsReport) -> str:
    lines = [f"{'class':>10}{'precision':>11}{'recall':>9}{'f1':>9}"]
    for name, m in zip(CLASS_NAMES, report.per_class):
        note = "" if m.precision_defined and m.recall_defined else "  (degenerate)"
        lines.append(f"{name:>10}{m.precision:>11.4f}{m.recall:>9.4f}{m.f1:>9.4f}{note}")
    return "\n".join(lines)


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, CheckpointError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
