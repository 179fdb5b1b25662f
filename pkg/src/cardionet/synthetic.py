"""Synthetic three-pattern dataset for smoke tests and capacity checks.

Each class is a bright square on a dark noisy background at a fixed
location: Large top-left, Normal centered, Small bottom-right. The
patterns are trivially separable, so a correctly wired network must be
able to memorize a handful of them.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .data import CLASS_NAMES, ClassLabel

PATTERN_CORNERS = {
    ClassLabel.Large: (0.0, 0.0),
    ClassLabel.Normal: (0.5, 0.5),
    ClassLabel.Small: (1.0, 1.0),
}


def pattern_image(label: ClassLabel, rng: np.random.Generator, size: int = 75) -> np.ndarray:
    """One (size, size, 3) uint8 image for the given class."""
    img = rng.uniform(0.0, 0.12, size=(size, size, 3))
    side = max(3, size // 3)
    fy, fx = PATTERN_CORNERS[label]
    top = int(round(fy * (size - side)))
    left = int(round(fx * (size - side)))
    img[top:top + side, left:left + side, :] = rng.uniform(0.85, 1.0, size=(side, side, 3))
    return (img * 255).astype(np.uint8)


def write_dataset(root, train_per_class: int = 10, valid_per_class: int = 2,
                  test_count: int = 6, seed: int = 0, size: int = 75) -> Path:
    """Write a train/valid/test tree of PNG pattern images under root."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    for role, per_class in (("train", train_per_class), ("valid", valid_per_class)):
        for name in CLASS_NAMES:
            class_dir = root / role / name
            class_dir.mkdir(parents=True, exist_ok=True)
            for i in range(per_class):
                pixels = pattern_image(ClassLabel.from_name(name), rng, size)
                Image.fromarray(pixels).save(class_dir / f"{name.lower()}_{i:03d}.png")
    test_dir = root / "test"
    test_dir.mkdir(parents=True, exist_ok=True)
    labels = list(ClassLabel)
    for i in range(test_count):
        pixels = pattern_image(labels[i % len(labels)], rng, size)
        Image.fromarray(pixels).save(test_dir / f"img_{i:03d}.png")
    return root
