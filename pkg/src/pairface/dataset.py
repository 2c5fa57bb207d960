"""Dataset ingestion: ORL-style directory trees, CSV manifests, and
synthetic Gaussian-blob generators.

Labels are 1-based class indices in [1, C] throughout.
"""

import csv
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pgm import GrayImage, parse_pgm
from .seeding import derive_rng


class DatasetError(Exception):
    pass


class InconsistentImageSize(DatasetError):
    pass


class EmptyClassDirectory(DatasetError):
    pass


class IoFailure(DatasetError):
    pass


class BadSpread(DatasetError):
    pass


@dataclass
class LabeledDataset:
    X: np.ndarray  # (n, d) float64 sample vectors
    y: np.ndarray  # (n,) int labels in [1, num_classes]
    num_classes: int

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.y) != len(self.X):
            raise DatasetError("X must be (n, d) with one label per row")
        if len(self.y) and (self.y.min() < 1 or self.y.max() > self.num_classes):
            raise DatasetError("labels must lie in [1, num_classes]")

    @property
    def n_samples(self) -> int:
        return len(self.y)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def is_complete(self) -> bool:
        """True when every class in [1, C] has at least one sample."""
        return set(np.unique(self.y)) == set(range(1, self.num_classes + 1))


def flatten_normalize(img: GrayImage, subsample: int = 1) -> np.ndarray:
    """Row-major pixel vector scaled by maxval into [0, 1].

    subsample > 1 keeps every subsample-th pixel in each direction.
    """
    a = np.frombuffer(img.pixels, dtype=np.uint8).astype(np.float64)
    a = a.reshape(img.height, img.width)
    if subsample > 1:
        a = a[::subsample, ::subsample]
    return (a / img.maxval).ravel()


_CLASS_DIR = re.compile(r"^s(\d+)$")


def load_orl_dataset(root, subsample: int = 1) -> LabeledDataset:
    """Load an ORL-style tree: subdirectories s1..sC of PGM files.

    Samples are ordered lexicographically by directory name then file name,
    so repeated loads are identical.
    """
    root = Path(root)
    if not root.is_dir():
        raise IoFailure(f"not a directory: {root}")
    class_dirs = []
    for entry in sorted(root.iterdir()):
        m = _CLASS_DIR.match(entry.name)
        if entry.is_dir() and m:
            class_dirs.append((entry, int(m.group(1))))
    if not class_dirs:
        raise IoFailure(f"no s<k> class directories under {root}")

    num_classes = max(label for _, label in class_dirs)
    seen = {label for _, label in class_dirs}
    missing = set(range(1, num_classes + 1)) - seen
    if missing:
        raise IoFailure(f"missing class directories: s{sorted(missing)[0]}...")

    vectors, labels = [], []
    shape = None
    for entry, label in class_dirs:
        files = sorted(p for p in entry.iterdir() if p.suffix == ".pgm")
        if not files:
            raise EmptyClassDirectory(f"{entry} holds no .pgm files")
        for path in files:
            try:
                img = parse_pgm(path.read_bytes())
            except OSError as e:
                raise IoFailure(f"cannot read {path}: {e}") from e
            if shape is None:
                shape = (img.width, img.height)
            elif (img.width, img.height) != shape:
                raise InconsistentImageSize(
                    f"{path} is {img.width}x{img.height}, "
                    f"expected {shape[0]}x{shape[1]}")
            vectors.append(flatten_normalize(img, subsample))
            labels.append(label)
    return LabeledDataset(np.array(vectors), np.array(labels), num_classes)


def load_manifest(manifest_path, subsample: int = 1) -> LabeledDataset:
    """Load from a UTF-8 CSV with header `path,label`; paths are relative
    to the manifest's directory."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    vectors, labels = [], []
    shape = None
    try:
        with open(manifest_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or \
                    [f.strip() for f in reader.fieldnames] != ["path", "label"]:
                raise IoFailure(f"{manifest_path}: header must be `path,label`")
            for row in reader:
                path = base / row["path"]
                img = parse_pgm(path.read_bytes())
                if shape is None:
                    shape = (img.width, img.height)
                elif (img.width, img.height) != shape:
                    raise InconsistentImageSize(
                        f"{path} is {img.width}x{img.height}, expected {shape}")
                vectors.append(flatten_normalize(img, subsample))
                labels.append(int(row["label"]))
    except OSError as e:
        raise IoFailure(str(e)) from e
    if not labels:
        raise IoFailure(f"{manifest_path}: no rows")
    return LabeledDataset(np.array(vectors), np.array(labels), max(labels))


def make_synthetic(num_classes: int, n_per_class: int, centers, spread: float,
                   seed: int) -> LabeledDataset:
    """Isotropic Gaussian blobs, n_per_class samples around each center."""
    centers = np.asarray(centers, dtype=np.float64)
    if num_classes < 2 or n_per_class < 1:
        raise DatasetError("need num_classes >= 2 and n_per_class >= 1")
    if centers.shape[0] != num_classes:
        raise DatasetError("one center per class required")
    if spread < 0:
        raise BadSpread(f"negative spread {spread}")
    if len(np.unique(centers, axis=0)) != num_classes:
        warnings.warn("duplicate class centers", stacklevel=2)

    d = centers.shape[1]
    X = np.empty((num_classes * n_per_class, d))
    y = np.empty(num_classes * n_per_class, dtype=np.int64)
    for k in range(num_classes):
        rng = derive_rng(seed, "synthetic", k)
        rows = slice(k * n_per_class, (k + 1) * n_per_class)
        X[rows] = centers[k] + spread * rng.standard_normal((n_per_class, d))
        y[rows] = k + 1
    return LabeledDataset(X, y, num_classes)


def fig1_preset(seed: int = 0, n_per_class: int = 250,
                spread: float = 0.3) -> LabeledDataset:
    """Four well-separated 2-D blobs at (+-1, +-1)."""
    centers = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    return make_synthetic(4, n_per_class, centers, spread, seed)
