"""Dataset ingestion, image decoding, bilinear resize, and batching.

Directory layout contract:

    <root>/train/{Large,Normal,Small}/*.{png,jpg}
    <root>/valid/{Large,Normal,Small}/*.{png,jpg}
    <root>/test/*.{png,jpg}

Files are sorted lexicographically by their path relative to the split
root before any shuffling, so runs are reproducible across file systems.
Decoded pixels are 8-bit channels divided by 255 into [0, 1]; grayscale
sources are replicated to 3 channels.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError, ShapeError

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
IMAGE_SIZE = 75


class ClassLabel(enum.IntEnum):
    """Heart-size classes; indices follow alphabetical folder order."""
    Large = 0
    Normal = 1
    Small = 2

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown class name {name!r}; expected one of "
                             f"{[m.name for m in cls]}") from None


CLASS_NAMES = tuple(label.name for label in ClassLabel)


def vhs_to_class(score: float) -> ClassLabel:
    """Map a vertebral heart scale score to its size class.

    Scores below 8.2 are small hearts, 8.2 through 10 inclusive are
    normal, and anything above 10 is large.
    """
    if not score > 0:
        raise ValueError(f"vhs score must be positive, got {score}")
    if score < 8.2:
        return ClassLabel.Small
    if score <= 10.0:
        return ClassLabel.Normal
    return ClassLabel.Large


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a (C, H, W) image, channels independent.

    Source coordinates use half-pixel centers, src = (dst + 0.5) * in/out - 0.5,
    clamped to the valid range. Interpolation is done in lerp form
    a + f * (b - a), which keeps constant images exactly constant.
    """
    if image.ndim != 3:
        raise ShapeError(f"resize_bilinear: expected (C, H, W), got {image.shape}")
    if out_h < 1 or out_w < 1:
        raise ValueError(f"resize_bilinear: target extents must be positive, got {out_h}x{out_w}")
    c, h, w = image.shape
    if h < 1 or w < 1:
        raise ShapeError(f"resize_bilinear: empty input {image.shape}")

    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0).astype(image.dtype)[None, :, None]
    fx = (xs - x0).astype(image.dtype)[None, None, :]

    top = image[:, y0[:, None], x0[None, :]]
    top = top + fx * (image[:, y0[:, None], x1[None, :]] - top)
    bottom = image[:, y1[:, None], x0[None, :]]
    bottom = bottom + fx * (image[:, y1[:, None], x1[None, :]] - bottom)
    return top + fy * (bottom - top)


def decode_image(path, size: int = IMAGE_SIZE) -> np.ndarray:
    """Decode, convert to 3-channel, scale to [0, 1], resize to size x size."""
    with Image.open(path) as img:
        rgb = img.convert("RGB")
        pixels = np.asarray(rgb, dtype=np.float32) / 255.0
    chw = np.ascontiguousarray(pixels.transpose(2, 0, 1))
    if chw.shape[1:] != (size, size):
        chw = resize_bilinear(chw, size, size)
    return np.clip(chw, 0.0, 1.0)


@dataclass
class Sample:
    path: Path
    label: ClassLabel | None = None

    def load_image(self, size: int = IMAGE_SIZE) -> np.ndarray:
        return decode_image(self.path, size)


@dataclass
class DatasetSplit:
    role: str  # train, valid, or test
    samples: list[Sample]
    class_counts: dict[str, int] = field(default_factory=dict)
    skipped: int = 0
    image_size: int = IMAGE_SIZE
    _images: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labeled(self) -> bool:
        return all(s.label is not None for s in self.samples)

    def labels(self) -> np.ndarray:
        if not self.labeled:
            raise DataError(f"{self.role} split has unlabeled samples")
        return np.array([int(s.label) for s in self.samples], dtype=np.int64)

    def images(self) -> np.ndarray:
        """Decode every sample once and cache the stacked (N,3,S,S) array."""
        if self._images is None:
            if not self.samples:
                raise DataError(f"{self.role} split is empty")
            self._images = np.stack([s.load_image(self.image_size) for s in self.samples])
        return self._images


@dataclass
class Batch:
    images: np.ndarray  # (n, 3, S, S) float32 in [0, 1]
    labels: np.ndarray | None  # (n,) int64, None for unlabeled splits
    paths: list[Path]

    def __len__(self) -> int:
        return self.images.shape[0]


def load_split(root, role: str, strict: bool = False,
               image_size: int = IMAGE_SIZE) -> DatasetSplit:
    """Scan one split directory into a DatasetSplit.

    train/valid expect Large/Normal/Small subdirectories; test is a flat
    directory of unlabeled images. Unreadable or unsupported files are
    skipped with a warning, or rejected outright in strict mode.
    """
    root = Path(root)
    if role not in ("train", "valid", "test"):
        raise ValueError(f"unknown split role {role!r}")
    split_dir = root / role
    if not split_dir.is_dir():
        raise DataError(f"split directory not found: {split_dir}")

    samples: list[Sample] = []
    counts = {name: 0 for name in CLASS_NAMES}
    skipped = 0

    if role == "test":
        candidates = [(p, None) for p in split_dir.iterdir() if p.is_file()]
    else:
        candidates = []
        for name in CLASS_NAMES:
            class_dir = split_dir / name
            if not class_dir.is_dir():
                raise DataError(f"class directory not found: {class_dir}")
            candidates.extend((p, ClassLabel.from_name(name))
                              for p in class_dir.iterdir() if p.is_file())

    candidates.sort(key=lambda item: item[0].relative_to(split_dir).as_posix())
    for path, label in candidates:
        if path.suffix.lower() not in IMAGE_SUFFIXES:
            skipped += 1
            _skip(strict, f"unsupported image container, skipping {path}")
            continue
        if not _decodable(path):
            skipped += 1
            _skip(strict, f"undecodable image, skipping {path}")
            continue
        samples.append(Sample(path=path, label=label))
        if label is not None:
            counts[label.name] += 1

    if skipped:
        log.warning("%s split: skipped %d unusable file(s)", role, skipped)
    if not samples:
        message = f"no samples found in {split_dir}"
        if strict:
            raise DataError(message)
        log.warning("%s", message)

    if role == "test":
        counts = {}
    return DatasetSplit(role=role, samples=samples, class_counts=counts,
                        skipped=skipped, image_size=image_size)


def make_batches(split: DatasetSplit, batch_size: int, seed: int = 0,
                 shuffle: bool = False) -> list[Batch]:
    """Partition a split into batches of batch_size, keeping the final partial.

    With shuffle, the order is a seeded deterministic permutation of the
    sorted file order; every sample appears exactly once either way.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = len(split)
    if n == 0:
        return []
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)

    images = split.images()
    labels = split.labels() if split.labeled else None
    batches = []
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        batches.append(Batch(
            images=images[idx],
            labels=None if labels is None else labels[idx],
            paths=[split.samples[i].path for i in idx]))
    return batches


def split_summary(split: DatasetSplit) -> str:
    """One-line per-class summary, always including the counts."""
    if split.class_counts:
        per_class = ", ".join(f"{name}={split.class_counts[name]}" for name in CLASS_NAMES)
        return f"{split.role}: {len(split)} samples ({per_class})"
    return f"{split.role}: {len(split)} samples (unlabeled)"


def _decodable(path: Path) -> bool:
    try:
        with Image.open(path) as img:
            img.size  # forces header parse without a full decode
        return True
    except (UnidentifiedImageError, OSError):
        return False


def _skip(strict: bool, message: str) -> None:
    if strict:
        raise DataError(message)
    log.warning("%s", message)
