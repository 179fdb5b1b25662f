"""Training loop: per-batch Adam steps, per-epoch validation, best-model pick.

The checkpoint retained is the one with the strictly lowest validation
loss seen so far (ties keep the earlier epoch). Epoch losses are
per-sample means, so the final partial batch is weighted correctly.
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .adam import Adam, AdamConfig
from .checkpoint import Checkpoint, save_checkpoint
from .data import DatasetSplit, load_split, make_batches
from .errors import DataError, UsageError
from .losses import softmax_cross_entropy
from .metrics import MetricsReport, compute_metrics
from .network import CardioNet, CardioNetConfig

log = logging.getLogger(__name__)

HISTORY_HEADER = "epoch,train_loss,valid_loss,seconds"


@dataclass
class TrainConfig:
    data_root: Path
    out_dir: Path
    epochs: int = 50
    batch_size: int = 32
    adam: AdamConfig = field(default_factory=AdamConfig)
    arch: CardioNetConfig = field(default_factory=CardioNetConfig)
    seed: int = 0
    strict: bool = False

    def __post_init__(self):
        self.data_root = Path(self.data_root)
        self.out_dir = Path(self.out_dir)
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    def as_dict(self) -> dict:
        return {
            "data": str(self.data_root),
            "out": str(self.out_dir),
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.adam.lr,
            "beta1": self.adam.beta1,
            "beta2": self.adam.beta2,
            "eps": self.adam.eps,
            "seed": self.seed,
            "strict": self.strict,
            "arch": self.arch.as_dict(),
        }


@dataclass
class EpochRecord:
    epoch: int  # 1-based
    train_loss: float
    valid_loss: float
    seconds: float


def train(cfg: TrainConfig, *,
          eval_hook: Callable[[CardioNet, int], float] | None = None,
          timer: Callable[[], float] = time.perf_counter,
          on_epoch: Callable[[EpochRecord], None] | None = None,
          ) -> tuple[Checkpoint, list[EpochRecord]]:
    """Run the full training loop and persist best.ckpt / history.csv / run.json.

    eval_hook, when given, replaces validation-split evaluation and must
    return the epoch's validation loss; used by tests to script the
    best-model selection. timer is injectable so the seconds column can be
    made deterministic.
    """
    train_split = load_split(cfg.data_root, "train", strict=cfg.strict,
                             image_size=cfg.arch.input_size)
    if len(train_split) == 0:
        raise DataError(f"train split at {cfg.data_root} is empty")
    valid_split = None
    if eval_hook is None:
        valid_split = load_split(cfg.data_root, "valid", strict=cfg.strict,
                                 image_size=cfg.arch.input_size)
        if len(valid_split) == 0:
            raise DataError(f"valid split at {cfg.data_root} is empty")

    model = CardioNet(cfg.arch, seed=cfg.seed)
    optimizer = Adam(model.parameters(), cfg.adam)

    best: Checkpoint | None = None
    best_loss = np.inf
    history: list[EpochRecord] = []

    for epoch in range(1, cfg.epochs + 1):
        started = timer()
        total_loss = 0.0
        for batch_index, batch in enumerate(
                make_batches(train_split, cfg.batch_size, seed=cfg.seed + epoch, shuffle=True)):
            logits, context = model.forward(batch.images, train=True)
            loss, grad_logits = softmax_cross_entropy(logits, batch.labels)
            if not np.isfinite(loss):
                raise DataError(
                    f"non-finite training loss at epoch {epoch}, batch {batch_index}")
            grads = model.backward(context, grad_logits)
            optimizer.step(grads)
            total_loss += loss * len(batch)
        train_loss = total_loss / len(train_split)

        if eval_hook is not None:
            valid_loss = float(eval_hook(model, epoch))
        else:
            valid_loss, _ = _evaluate_model(model, valid_split, cfg.batch_size)
        if not np.isfinite(valid_loss):
            raise DataError(f"non-finite validation loss at epoch {epoch}")

        record = EpochRecord(epoch=epoch, train_loss=train_loss,
                             valid_loss=valid_loss, seconds=timer() - started)
        history.append(record)
        if on_epoch is not None:
            on_epoch(record)

        if valid_loss < best_loss:
            best_loss = valid_loss
            best = Checkpoint.from_model(model, meta={
                "epoch": epoch,
                "train_loss": train_loss,
                "valid_loss": valid_loss,
                "seed": cfg.seed,
            })

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(best, cfg.out_dir / "best.ckpt")
    write_history_csv(cfg.out_dir / "history.csv", history)
    (cfg.out_dir / "run.json").write_text(
        json.dumps(cfg.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return best, history


def evaluate_split(ckpt: Checkpoint, split: DatasetSplit,
                   batch_size: int = 32) -> tuple[float, MetricsReport]:
    """Eval-mode forward over a labeled split: per-sample mean loss + metrics."""
    if len(split) == 0:
        raise DataError(f"{split.role} split is empty")
    if not split.labeled:
        raise UsageError(
            f"{split.role} split is unlabeled; use the predict command for test data")
    model = ckpt.build_model()
    return _evaluate_model(model, split, batch_size)


def _evaluate_model(model: CardioNet, split: DatasetSplit,
                    batch_size: int) -> tuple[float, MetricsReport]:
    total_loss = 0.0
    predicted = []
    actual = []
    for batch in make_batches(split, batch_size, shuffle=False):
        logits, _ = model.forward(batch.images, train=False)
        loss, _ = softmax_cross_entropy(logits, batch.labels)
        total_loss += loss * len(batch)
        predicted.append(logits.argmax(axis=1))
        actual.append(batch.labels)
    mean_loss = total_loss / len(split)
    report = compute_metrics(np.concatenate(predicted), np.concatenate(actual),
                             num_classes=model.config.num_classes)
    return mean_loss, report


def write_history_csv(path, history: list[EpochRecord]) -> None:
    lines = [HISTORY_HEADER]
    lines.extend(f"{r.epoch},{r.train_loss!r},{r.valid_loss!r},{r.seconds!r}"
                 for r in history)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
