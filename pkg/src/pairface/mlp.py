"""Two-layer feed-forward network with tanh activations on both layers.

Targets live in [-1, 1]; the loss is mean squared error over batch and
output coordinates plus an optional l2 penalty on the weight matrices.
Training is plain (mini-)batch gradient descent: no momentum, no adaptive
steps, so there are no unstated optimizer degrees of freedom.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .seeding import derive_rng


class MlpError(Exception):
    pass


class DimensionMismatch(MlpError):
    pass


class EmptyBatch(MlpError):
    pass


class DivergedToNonFinite(MlpError):
    """A weight became NaN/Inf during training."""


MLP_FORMAT = "pairface-mlp/1"


@dataclass
class MlpParams:
    W1: np.ndarray  # (h, m)
    b1: np.ndarray  # (h,)
    W2: np.ndarray  # (o, h)
    b2: np.ndarray  # (o,)

    @property
    def input_dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.W1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.W2.shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(),
                         self.W2.copy(), self.b2.copy())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a))
                   for a in (self.W1, self.b1, self.W2, self.b2))


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 16   # 0 = full batch
    weight_init_scale: float | None = None  # None = per-layer 1/sqrt(fan_in)
    seed: int = 0
    l2: float = 1e-4

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise MlpError("learning_rate must be positive")
        if self.epochs < 1:
            raise MlpError("epochs must be >= 1")
        if self.l2 < 0:
            raise MlpError("l2 must be non-negative")


def init_mlp(input_dim: int, hidden_dim: int, output_dim: int, seed: int,
             scale: float | None = None) -> MlpParams:
    """Uniform [-scale, scale] weights, zero biases, deterministic in seed.

    scale=None selects the default 1/sqrt(fan_in) per layer.
    """
    if min(input_dim, hidden_dim, output_dim) < 1:
        raise MlpError("all dimensions must be >= 1")
    if scale is not None and scale < 0:
        raise MlpError("scale must be non-negative")
    rng = derive_rng(seed, "init")
    s1 = 1.0 / np.sqrt(input_dim) if scale is None else scale
    s2 = 1.0 / np.sqrt(hidden_dim) if scale is None else scale
    return MlpParams(
        W1=rng.uniform(-s1, s1, (hidden_dim, input_dim)),
        b1=np.zeros(hidden_dim),
        W2=rng.uniform(-s2, s2, (output_dim, hidden_dim)),
        b2=np.zeros(output_dim),
    )


def forward(net: MlpParams, x: np.ndarray) -> np.ndarray:
    """Evaluate the net on a single m-vector or an (n, m) batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.input_dim:
        raise DimensionMismatch(
            f"input dim {x.shape[-1]} != {net.input_dim}")
    h = np.tanh(x @ net.W1.T + net.b1)
    return np.tanh(h @ net.W2.T + net.b2)


def loss_and_gradient(net: MlpParams, X: np.ndarray, T: np.ndarray,
                      l2: float = 0.0):
    """MSE loss (mean over batch and outputs) + l2/2 * ||W||^2, with its
    exact analytic gradient in MlpParams shape."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    if len(X) == 0:
        raise EmptyBatch("empty batch")
    if X.shape[1] != net.input_dim or T.shape[1] != net.output_dim \
            or len(X) != len(T):
        raise DimensionMismatch(
            f"batch shapes {X.shape}, {T.shape} do not match net "
            f"({net.input_dim} -> {net.output_dim})")
    n, o = T.shape

    H = np.tanh(X @ net.W1.T + net.b1)
    Y = np.tanh(H @ net.W2.T + net.b2)
    err = Y - T
    loss = float(np.mean(err ** 2)) + 0.5 * l2 * (
        float(np.sum(net.W1 ** 2)) + float(np.sum(net.W2 ** 2)))

    delta2 = (2.0 / (n * o)) * err * (1.0 - Y ** 2)      # (n, o)
    gW2 = delta2.T @ H + l2 * net.W2
    gb2 = delta2.sum(axis=0)
    delta1 = (delta2 @ net.W2) * (1.0 - H ** 2)          # (n, h)
    gW1 = delta1.T @ X + l2 * net.W1
    gb1 = delta1.sum(axis=0)
    return loss, MlpParams(gW1, gb1, gW2, gb2)


@dataclass
class TrainResult:
    params: MlpParams
    loss_history: list = field(default_factory=list)  # mean batch loss per epoch


def train(net: MlpParams, X: np.ndarray, T: np.ndarray,
          cfg: TrainConfig) -> TrainResult:
    """Gradient-descent training with per-epoch reshuffling from cfg.seed."""
    X = np.asarray(X, dtype=np.float64)
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    if T.shape[0] != X.shape[0]:
        T = T.reshape(X.shape[0], -1)
    if len(X) == 0:
        raise EmptyBatch("empty training set")

    params = net.copy()
    lr = cfg.learning_rate
    rng = derive_rng(cfg.seed, "shuffle")
    n = len(X)
    bs = cfg.batch_size if cfg.batch_size > 0 else n
    history = []
    for epoch in range(cfg.epochs):
        if cfg.batch_size > 0:
            order = rng.permutation(n)
        else:
            order = np.arange(n)  # full batch: order is irrelevant
        epoch_losses = []
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            loss, g = loss_and_gradient(params, X[idx], T[idx], cfg.l2)
            params.W1 -= lr * g.W1
            params.b1 -= lr * g.b1
            params.W2 -= lr * g.W2
            params.b2 -= lr * g.b2
            epoch_losses.append(loss)
        history.append(float(np.mean(epoch_losses)))
        if not params.all_finite():
            raise DivergedToNonFinite(
                f"non-finite weights at epoch {epoch + 1} "
                f"(lr={lr}, batch={cfg.batch_size})")
    return TrainResult(params, history)


def save_mlp(net: MlpParams, path) -> None:
    doc = {"format": MLP_FORMAT, "W1": net.W1.tolist(), "b1": net.b1.tolist(),
           "W2": net.W2.tolist(), "b2": net.b2.tolist()}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_mlp(path) -> MlpParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != MLP_FORMAT:
        raise MlpError(f"unrecognized checkpoint format {doc.get('format')!r}")
    return MlpParams(*(np.array(doc[k]) for k in ("W1", "b1", "W2", "b2")))


def mlp_to_dict(net: MlpParams) -> dict:
    return {"W1": net.W1.tolist(), "b1": net.b1.tolist(),
            "W2": net.W2.tolist(), "b2": net.b2.tolist()}


def mlp_from_dict(doc: dict) -> MlpParams:
    return MlpParams(*(np.array(doc[k]) for k in ("W1", "b1", "W2", "b2")))
