"""Run a checkpoint over the unlabeled test split and export a CSV.

Schema: header ``image,label,prob_large,prob_normal,prob_small`` where
label is the integer class index (Large=0, Normal=1, Small=2, alphabetical
folder order) and probabilities carry 6 decimal places. The alternative
"names" format emits ``image,label`` with the class name instead. Rows are
sorted by image basename; files are UTF-8 with LF line endings.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint
from .data import CLASS_NAMES, DatasetSplit, make_batches
from .errors import DataError, ShapeError
from .losses import softmax

FULL_HEADER = "image,label,prob_large,prob_normal,prob_small"
NAMES_HEADER = "image,label"
FORMATS = ("full", "names")


@dataclass
class PredictionRow:
    image: str  # basename, no directory
    label: int
    label_name: str
    probabilities: tuple[float, float, float]


@dataclass
class PredictionSummary:
    rows: int
    class_counts: dict[str, int]
    label_mapping: dict[str, int]
    out_path: Path


def predict_split(ckpt: Checkpoint, split: DatasetSplit, out_path,
                  fmt: str = "full", batch_size: int = 32) -> PredictionSummary:
    """Predict every image of the split and write the CSV to out_path."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown prediction format {fmt!r}; expected one of {FORMATS}")
    if len(split) == 0:
        raise DataError(f"{split.role} split is empty")
    if split.image_size != ckpt.config.input_size:
        raise ShapeError(
            f"checkpoint expects {ckpt.config.input_size}px inputs but the split "
            f"was loaded at {split.image_size}px")

    model = ckpt.build_model()
    rows: list[PredictionRow] = []
    for batch in make_batches(split, batch_size, shuffle=False):
        logits, _ = model.forward(batch.images, train=False)
        probs = softmax(logits.astype(np.float64))
        classes = probs.argmax(axis=1)  # ties resolve to the lowest index
        for path, cls, p in zip(batch.paths, classes, probs):
            rows.append(PredictionRow(
                image=Path(path).name,
                label=int(cls),
                label_name=CLASS_NAMES[int(cls)],
                probabilities=(float(p[0]), float(p[1]), float(p[2]))))
    rows.sort(key=lambda r: r.image)

    lines = [FULL_HEADER if fmt == "full" else NAMES_HEADER]
    for row in rows:
        if fmt == "full":
            probs_text = ",".join(f"{p:.6f}" for p in row.probabilities)
            lines.append(f"{row.image},{row.label},{probs_text}")
        else:
            lines.append(f"{row.image},{row.label_name}")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    counts = {name: 0 for name in CLASS_NAMES}
    for row in rows:
        counts[row.label_name] += 1
    return PredictionSummary(
        rows=len(rows),
        class_counts=counts,
        label_mapping={name: i for i, name in enumerate(CLASS_NAMES)},
        out_path=out_path)
