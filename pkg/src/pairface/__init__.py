"""Noise-robustness benchmark for pairwise vs. multiclass neural-network
face classifiers on PCA features."""

__version__ = "0.1.0"
