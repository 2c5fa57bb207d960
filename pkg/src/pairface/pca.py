"""Principal-component representation of image vectors.

Components are the top-m eigenvectors of the training covariance; projected
coordinates are divided by sqrt(eigenvalue) so that every retained
coordinate has unit training variance. That standardization makes an
additive noise level directly comparable across components (a fixed sigma
would otherwise be negligible on the dominant components); it can be
disabled with standardize=False.

When d > n the eigendecomposition runs on the n x n Gram matrix instead of
the d x d covariance, which is what makes full-resolution face images
tractable.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class PcaError(Exception):
    pass


class RankDeficient(PcaError):
    """Fewer positive covariance eigenvalues than requested components."""


class DegenerateInput(PcaError):
    """All training rows identical."""


class DimensionMismatch(PcaError):
    pass


class OutOfRange(PcaError):
    pass


PCA_FORMAT = "pairface-pca/1"


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray              # (d,)
    components: np.ndarray        # (m, d), orthonormal rows
    eigenvalues: np.ndarray       # (m,) descending, >= 0
    component_scales: np.ndarray  # (m,) positive divisors
    total_variance: float         # trace of the training covariance

    @property
    def m(self) -> int:
        return self.components.shape[0]

    @property
    def d(self) -> int:
        return self.components.shape[1]


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Make each row's largest-magnitude entry positive (determinism)."""
    idx = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(len(components)), idx])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def fit_pca(X: np.ndarray, m: int, standardize: bool = True) -> PcaModel:
    """Fit the top-m principal components of the rows of X."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise PcaError("need at least 2 samples")
    if not 1 <= m <= min(n - 1, d):
        raise OutOfRange(f"m={m} not in [1, min(n-1, d)={min(n - 1, d)}]")

    mean = X.mean(axis=0)
    Xc = X - mean
    total_variance = float(np.sum(Xc * Xc) / (n - 1))
    if total_variance == 0.0:
        raise DegenerateInput("all training rows identical")

    if d > n:
        # Gram route: eigenvectors of Xc Xc^T lift to covariance eigenvectors
        gram = Xc @ Xc.T
        evals, evecs = np.linalg.eigh(gram)
        order = np.argsort(evals)[::-1]
        evals, evecs = evals[order], evecs[:, order]
        positive = evals > max(evals[0], 0.0) * 1e-12
        if np.count_nonzero(positive) < m:
            raise RankDeficient(
                f"rank {np.count_nonzero(positive)} < requested m={m}")
        top = evecs[:, :m] / np.sqrt(evals[:m])
        components = (Xc.T @ top).T            # orthonormal rows
        eigenvalues = evals[:m] / (n - 1)
    else:
        cov = (Xc.T @ Xc) / (n - 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        evals, evecs = evals[order], evecs[:, order]
        positive = evals > max(evals[0], 0.0) * 1e-12
        if np.count_nonzero(positive) < m:
            raise RankDeficient(
                f"rank {np.count_nonzero(positive)} < requested m={m}")
        components = evecs[:, :m].T
        eigenvalues = evals[:m]

    eigenvalues = np.clip(eigenvalues, 0.0, None)
    components = _fix_signs(components)
    if standardize:
        scales = np.where(eigenvalues > 0, np.sqrt(eigenvalues), 1.0)
    else:
        scales = np.ones(m)
    return PcaModel(mean, components, eigenvalues, scales, total_variance)


def project(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Map a d-vector (or an (n, d) matrix, row-wise) into feature space."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.d:
        raise DimensionMismatch(f"expected dim {model.d}, got {x.shape[-1]}")
    return (x - model.mean) @ model.components.T / model.component_scales


def reconstruct(model: PcaModel, coords: np.ndarray) -> np.ndarray:
    """Inverse of project (up to the discarded subspace)."""
    coords = np.asarray(coords, dtype=np.float64)
    return model.mean + (coords * model.component_scales) @ model.components


def explained_variance(model: PcaModel, k: int) -> float:
    """Fraction of total training variance captured by the first k components."""
    if not 1 <= k <= model.m:
        raise OutOfRange(f"k={k} not in [1, {model.m}]")
    return float(np.sum(model.eigenvalues[:k]) / model.total_variance)


def dim_for_variance(eigenvalues: np.ndarray, total_variance: float,
                     target: float) -> int:
    """Smallest k whose cumulative eigenvalue share reaches target."""
    frac = np.cumsum(eigenvalues) / total_variance
    hit = np.nonzero(frac >= target)[0]
    return int(hit[0]) + 1 if len(hit) else len(eigenvalues)


def save_pca(model: PcaModel, path) -> None:
    doc = {
        "format": PCA_FORMAT,
        "m": model.m,
        "d": model.d,
        "mean": model.mean.tolist(),
        "components": model.components.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "component_scales": model.component_scales.tolist(),
        "total_variance": model.total_variance,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_pca(path) -> PcaModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != PCA_FORMAT:
        raise PcaError(f"unrecognized model format {doc.get('format')!r}")
    return PcaModel(
        np.array(doc["mean"]),
        np.array(doc["components"]),
        np.array(doc["eigenvalues"]),
        np.array(doc["component_scales"]),
        float(doc["total_variance"]),
    )
