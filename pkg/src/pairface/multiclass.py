"""Baseline: one two-layer net with C outputs and signed one-hot targets.

Targets are +1 at the true class and -1 elsewhere so that the binary and
multiclass systems share the same tanh/MSE loss family and differ only in
architecture.
"""

from dataclasses import dataclass

import numpy as np

from .mlp import (MlpParams, TrainConfig, DimensionMismatch, forward,
                  init_mlp, train)
from .pairwise import MissingClass, TooFewClasses
from .seeding import derive_seed


@dataclass
class MulticlassNet:
    num_classes: int
    net: MlpParams  # output_dim == num_classes


def train_multiclass(F: np.ndarray, y: np.ndarray, num_classes: int,
                     cfg: TrainConfig, hidden: int = 32) -> MulticlassNet:
    if num_classes < 2:
        raise TooFewClasses(f"need >= 2 classes, got {num_classes}")
    F = np.asarray(F, dtype=np.float64)
    y = np.asarray(y)
    missing = set(range(1, num_classes + 1)) - set(np.unique(y))
    if missing:
        raise MissingClass(f"classes absent from training set: {sorted(missing)}")

    T = -np.ones((len(y), num_classes))
    T[np.arange(len(y)), y - 1] = 1.0
    seed = derive_seed(cfg.seed, "multiclass")
    net0 = init_mlp(F.shape[1], hidden, num_classes, seed,
                    cfg.weight_init_scale)
    cfg_m = TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size,
                        cfg.weight_init_scale, seed, cfg.l2)
    return MulticlassNet(num_classes, train(net0, F, T, cfg_m).params)


def classify_multiclass(mc: MulticlassNet, x: np.ndarray) -> int:
    """Argmax over the C outputs; ties go to the lowest class index."""
    out = forward(mc.net, x)
    if out.ndim != 1:
        raise DimensionMismatch("classify takes a single feature vector")
    return int(np.argmax(out)) + 1


def classify_multiclass_batch(mc: MulticlassNet, F: np.ndarray):
    """Labels for every row of F, plus the number of argmax ties seen."""
    out = forward(mc.net, np.atleast_2d(F))
    labels = np.argmax(out, axis=1) + 1
    ties = int(np.sum(np.sum(out == out.max(axis=1, keepdims=True), axis=1) > 1))
    return labels, ties
