"""One-vs-one ensemble: one binary net per class pair, combined by a fixed
+-1 weight matrix into per-class scores.

The binary net for pair (i, j), i < j, is trained to output +1 on class i
and -1 on class j. The combiner gives class c weight +1 on every pair where
c comes first and -1 where it comes second, so each pair net pushes exactly
one score up and one down and the C scores always sum to zero.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple

import numpy as np

from .mlp import (MlpParams, TrainConfig, DivergedToNonFinite,
                  DimensionMismatch, forward, init_mlp, mlp_from_dict,
                  mlp_to_dict, train)
from .seeding import derive_seed


class PairwiseError(Exception):
    pass


class TooFewClasses(PairwiseError):
    pass


class MissingClass(PairwiseError):
    pass


ENSEMBLE_FORMAT = "pairface-ensemble/1"


class ClassPair(NamedTuple):
    i: int
    j: int


def enumerate_pairs(num_classes: int) -> List[ClassPair]:
    """All (i, j) with 1 <= i < j <= C, lexicographic."""
    if num_classes < 2:
        raise TooFewClasses(f"need >= 2 classes, got {num_classes}")
    return [ClassPair(i, j)
            for i in range(1, num_classes + 1)
            for j in range(i + 1, num_classes + 1)]


def combiner_weights(num_classes: int) -> np.ndarray:
    """(C, C(C-1)/2) matrix over {-1, 0, +1}: +1 where the class is the
    pair's first member, -1 where it is the second."""
    pairs = enumerate_pairs(num_classes)
    W = np.zeros((num_classes, len(pairs)), dtype=np.int8)
    for p, (i, j) in enumerate(pairs):
        W[i - 1, p] = 1
        W[j - 1, p] = -1
    return W


@dataclass
class PairwiseEnsemble:
    num_classes: int
    pairs: List[ClassPair]
    nets: List[MlpParams]   # one binary net (o=1) per pair, same order
    weights: np.ndarray     # combiner_weights(num_classes)


def train_pairwise(F: np.ndarray, y: np.ndarray, num_classes: int,
                   cfg: TrainConfig, hidden: int = 8,
                   n_jobs: int = 1) -> PairwiseEnsemble:
    """Train all C(C-1)/2 binary nets on PCA features F with labels y.

    Each net sees only its two classes and owns an RNG stream derived from
    (cfg.seed, i, j), so results do not depend on n_jobs.
    """
    F = np.asarray(F, dtype=np.float64)
    y = np.asarray(y)
    present = set(np.unique(y))
    missing = set(range(1, num_classes + 1)) - present
    if missing:
        raise MissingClass(f"classes absent from training set: {sorted(missing)}")
    pairs = enumerate_pairs(num_classes)

    def fit_one(pair: ClassPair) -> MlpParams:
        i, j = pair
        mask = (y == i) | (y == j)
        Xp = F[mask]
        tp = np.where(y[mask] == i, 1.0, -1.0)[:, None]
        seed = derive_seed(cfg.seed, "pair", i, j)
        net0 = init_mlp(F.shape[1], hidden, 1, seed, cfg.weight_init_scale)
        cfg_p = TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size,
                            cfg.weight_init_scale, seed, cfg.l2)
        try:
            return train(net0, Xp, tp, cfg_p).params
        except DivergedToNonFinite as e:
            raise DivergedToNonFinite(f"pair ({i},{j}): {e}") from e

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            nets = list(pool.map(fit_one, pairs))
    else:
        nets = [fit_one(p) for p in pairs]
    return PairwiseEnsemble(num_classes, pairs, nets,
                            combiner_weights(num_classes))


def pair_outputs(ens: PairwiseEnsemble, x: np.ndarray,
                 hard_vote: bool = False) -> np.ndarray:
    """Raw binary-net outputs f_p(x); shape (P,) or (n, P)."""
    outs = [forward(net, x)[..., 0] for net in ens.nets]
    f = np.stack(outs, axis=-1)
    return np.sign(f) if hard_vote else f


def score(ens: PairwiseEnsemble, x: np.ndarray,
          hard_vote: bool = False) -> np.ndarray:
    """Per-class scores g_c = sum_p weights[c, p] * f_p(x)."""
    f = pair_outputs(ens, x, hard_vote)
    return f @ ens.weights.T.astype(np.float64)


def classify(ens: PairwiseEnsemble, x: np.ndarray,
             hard_vote: bool = False) -> int:
    """Predicted label: argmax of the scores, ties to the lowest index."""
    g = score(ens, x, hard_vote)
    if g.ndim != 1:
        raise DimensionMismatch("classify takes a single feature vector")
    return int(np.argmax(g)) + 1


def classify_batch(ens: PairwiseEnsemble, F: np.ndarray,
                   hard_vote: bool = False):
    """Labels for every row of F, plus the number of argmax ties seen."""
    g = score(ens, np.atleast_2d(F), hard_vote)
    labels = np.argmax(g, axis=1) + 1
    ties = int(np.sum(np.sum(g == g.max(axis=1, keepdims=True), axis=1) > 1))
    return labels, ties


def save_ensemble(ens: PairwiseEnsemble, path) -> None:
    doc = {
        "format": ENSEMBLE_FORMAT,
        "num_classes": ens.num_classes,
        "pairs": [list(p) for p in ens.pairs],
        "weights": ens.weights.tolist(),
        "nets": [mlp_to_dict(net) for net in ens.nets],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_ensemble(path) -> PairwiseEnsemble:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != ENSEMBLE_FORMAT:
        raise PairwiseError(f"unrecognized format {doc.get('format')!r}")
    return PairwiseEnsemble(
        doc["num_classes"],
        [ClassPair(*p) for p in doc["pairs"]],
        [mlp_from_dict(d) for d in doc["nets"]],
        np.array(doc["weights"], dtype=np.int8),
    )
