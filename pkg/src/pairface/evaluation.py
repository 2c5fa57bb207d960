"""Noise-robustness protocol: stratified k-fold cross-validation of the
pairwise and multiclass systems over a grid of Gaussian noise levels.

Per fold, PCA is fit on the training partition only (no leakage), train and
test are projected, and for each alpha one noise draw is shared by every
system, so the comparison is paired. All RNG streams derive from
(seed, fold, alpha index, ...), making the report independent of thread
count and schedule.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from .dataset import LabeledDataset
from .mlp import TrainConfig
from .multiclass import classify_multiclass_batch, train_multiclass
from .pairwise import classify_batch, train_pairwise
from .pca import dim_for_variance, fit_pca, project
from .seeding import derive_rng, derive_seed


class EvalError(Exception):
    pass


class ClassTooSmall(EvalError):
    pass


class TooFewValues(EvalError):
    pass


class ExperimentFailure(EvalError):
    """Raised mid-run; carries whatever rows completed before the failure."""

    def __init__(self, message, partial_report):
        super().__init__(message)
        self.partial_report = partial_report


@dataclass(frozen=True)
class NoiseSpec:
    alpha: float           # stddev of additive Gaussian noise per coordinate
    seed: int
    scope: str = "train_and_test"  # or "test_only"

    def __post_init__(self):
        if self.alpha < 0:
            raise EvalError(f"negative alpha {self.alpha}")
        if self.scope not in ("train_and_test", "test_only"):
            raise EvalError(f"bad noise scope {self.scope!r}")


def add_noise(features: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Fresh copy of features with iid N(0, alpha^2) added per coordinate."""
    features = np.asarray(features, dtype=np.float64)
    rng = derive_rng(spec.seed, "noise")
    return features + spec.alpha * rng.standard_normal(features.shape)


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray  # per-sample fold index in [1, k]


def stratified_kfold(y: Sequence[int], k: int, seed: int) -> FoldPlan:
    """Round-robin fold assignment after a seeded per-class shuffle."""
    y = np.asarray(y)
    if k < 2:
        raise EvalError(f"need k >= 2, got {k}")
    assignments = np.zeros(len(y), dtype=np.int64)
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0]
        if len(idx) < k:
            raise ClassTooSmall(
                f"class {c} has {len(idx)} samples, fewer than k={k}")
        rng = derive_rng(seed, "fold", int(c))
        idx = idx[rng.permutation(len(idx))]
        assignments[idx] = np.arange(len(idx)) % k + 1
    return FoldPlan(k, assignments)


def mean_and_two_sigma(values: Sequence[float]):
    """(mean, 2 * sample standard deviation) with the n-1 denominator."""
    values = list(values)
    if len(values) < 2:
        raise TooFewValues("need at least 2 values")
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, 2.0 * math.sqrt(var)


@dataclass
class ReportRow:
    system: str                 # "P" or "M"
    alpha: float
    fold_accuracies: List[float]
    mean: float
    two_sigma: float


@dataclass
class EvalReport:
    rows: List[ReportRow]
    metadata: dict = field(default_factory=dict)


@dataclass
class SystemSpec:
    """A trainable classifier plugged into the evaluation grid.

    train(F, y, C, seed) -> model; predict(model, F) -> (labels, n_ties).
    """
    name: str
    train: Callable
    predict: Callable


def pairwise_system(cfg: TrainConfig, hidden: int = 8,
                    hard_vote: bool = False, n_jobs: int = 1) -> SystemSpec:
    def train_fn(F, y, C, seed):
        c = TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size,
                        cfg.weight_init_scale, seed, cfg.l2)
        return train_pairwise(F, y, C, c, hidden=hidden, n_jobs=n_jobs)

    def predict_fn(model, F):
        return classify_batch(model, F, hard_vote=hard_vote)

    return SystemSpec("P", train_fn, predict_fn)


def multiclass_system(cfg: TrainConfig, hidden: int = 32) -> SystemSpec:
    def train_fn(F, y, C, seed):
        c = TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size,
                        cfg.weight_init_scale, seed, cfg.l2)
        return train_multiclass(F, y, C, c, hidden=hidden)

    def predict_fn(model, F):
        return classify_multiclass_batch(model, F)

    return SystemSpec("M", train_fn, predict_fn)


def run_experiment(data: LabeledDataset, systems: Sequence[SystemSpec],
                   alpha_grid: Sequence[float], k: int, m,
                   seed: int = 0, noise_scope: str = "train_and_test",
                   standardize: bool = True, pca_per_fold: bool = True,
                   nested_noise: bool = False) -> EvalReport:
    """Full grid evaluation; returns one row per (system, alpha).

    m is either a component count or ("var", fraction) to pick the smallest
    dimension reaching that explained-variance share per fit.
    """
    alpha_grid = list(alpha_grid)
    if not alpha_grid or any(a < 0 for a in alpha_grid):
        raise EvalError("alpha grid must be non-empty and non-negative")
    plan = stratified_kfold(data.y, k, seed)

    global_pca = None
    if not pca_per_fold:
        global_pca = _fit(data.X, m, standardize)

    acc = {(s.name, a): [None] * k for s in systems for a in alpha_grid}
    ties = 0
    try:
        for fold in range(1, k + 1):
            test_mask = plan.assignments == fold
            X_tr, y_tr = data.X[~test_mask], data.y[~test_mask]
            X_te, y_te = data.X[test_mask], data.y[test_mask]
            pca = global_pca or _fit(X_tr, m, standardize)
            F_tr = project(pca, X_tr)
            F_te = project(pca, X_te)
            if nested_noise:
                rng = derive_rng(seed, "noise", fold)
                unit_tr = rng.standard_normal(F_tr.shape)
                unit_te = rng.standard_normal(F_te.shape)
            for ai, alpha in enumerate(alpha_grid):
                if nested_noise:
                    noisy_tr = F_tr + alpha * unit_tr
                    noisy_te = F_te + alpha * unit_te
                else:
                    cell = derive_seed(seed, "cell", fold, ai)
                    noisy_tr = add_noise(
                        F_tr, NoiseSpec(alpha, derive_seed(cell, "train")))
                    noisy_te = add_noise(
                        F_te, NoiseSpec(alpha, derive_seed(cell, "test")))
                if noise_scope == "test_only":
                    noisy_tr = F_tr
                for sysspec in systems:
                    model = sysspec.train(noisy_tr, y_tr, data.num_classes,
                                          derive_seed(seed, "train", fold))
                    pred, n_ties = sysspec.predict(model, noisy_te)
                    ties += n_ties
                    acc[(sysspec.name, alpha)][fold - 1] = float(
                        np.mean(pred == y_te))
    except Exception as e:
        partial = _assemble(systems, alpha_grid, acc, k)
        partial.metadata["failure"] = f"{type(e).__name__}: {e}"
        raise ExperimentFailure(str(e), partial) from e

    report = _assemble(systems, alpha_grid, acc, k)
    report.metadata.update({
        "seed": seed, "folds": k, "alpha_grid": alpha_grid,
        "pca_dim": m if isinstance(m, int) else f"var>={m[1]}",
        "noise_scope": noise_scope, "standardize": standardize,
        "pca_per_fold": pca_per_fold, "nested_noise": nested_noise,
        "argmax_ties": ties,
        "systems": [s.name for s in systems],
    })
    return report


def _fit(X, m, standardize):
    if isinstance(m, tuple) and m[0] == "var":
        full = fit_pca(X, min(len(X) - 1, X.shape[1]), standardize)
        dim = dim_for_variance(full.eigenvalues, full.total_variance, m[1])
        return fit_pca(X, dim, standardize)
    return fit_pca(X, m, standardize)


def _assemble(systems, alpha_grid, acc, k):
    rows = []
    for sysspec in systems:
        for alpha in alpha_grid:
            folds = acc[(sysspec.name, alpha)]
            if any(a is None for a in folds):
                continue
            mean, two_sigma = mean_and_two_sigma(folds)
            rows.append(ReportRow(sysspec.name, alpha, folds, mean, two_sigma))
    return EvalReport(rows)
