"""CNN training and inference engine for canine cardiomegaly grading."""

from .adam import Adam, AdamConfig
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import (Batch, ClassLabel, DatasetSplit, Sample, load_split,
                   make_batches, resize_bilinear, vhs_to_class)
from .errors import CheckpointError, DataError, ShapeError, UsageError
from .losses import softmax, softmax_cross_entropy
from .metrics import ClassMetrics, MetricsReport, compute_metrics
from .network import CardioNet, CardioNetConfig
from .predict import predict_split
from .training import EpochRecord, TrainConfig, evaluate_split, train

__version__ = "0.1.0"

__all__ = [
    "Adam", "AdamConfig", "Batch", "CardioNet", "CardioNetConfig",
    "Checkpoint", "CheckpointError", "ClassLabel", "ClassMetrics",
    "DataError", "DatasetSplit", "EpochRecord", "MetricsReport", "Sample",
    "ShapeError", "TrainConfig", "UsageError", "compute_metrics",
    "evaluate_split", "load_checkpoint", "load_split", "make_batches",
    "predict_split", "resize_bilinear", "save_checkpoint", "softmax",
    "softmax_cross_entropy", "train", "vhs_to_class",
]
