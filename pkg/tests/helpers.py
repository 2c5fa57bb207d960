"""Independent oracles shared by the tests.

Everything here is deliberately naive (explicit loops, textbook Jacobi
sweeps) so that it stays independent of the library code it checks.
"""

import math

import numpy as np


def jacobi_eigh(A, tol_factor=1e-14, max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns (eigenvalues, eigenvectors-as-columns) sorted descending.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    tol = tol_factor * max(np.trace(np.abs(A)), 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(A, -1) ** 2) * 2)
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
                V = V @ rot
    evals = np.diag(A).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], V[:, order]


def naive_mlp_forward(W1, b1, W2, b2, x):
    """Triple-loop tanh MLP evaluation on a single input vector."""
    h = []
    for r in range(len(W1)):
        acc = b1[r]
        for c in range(len(x)):
            acc += W1[r][c] * x[c]
        h.append(math.tanh(acc))
    out = []
    for r in range(len(W2)):
        acc = b2[r]
        for c in range(len(h)):
            acc += W2[r][c] * h[c]
        out.append(math.tanh(acc))
    return np.array(out)


def brute_mean_two_sigma(values):
    """Straight-line recomputation with the n-1 denominator."""
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, 2.0 * math.sqrt(var)


def random_gray_image(rng, max_side=12):
    from pairface.pgm import GrayImage
    w = int(rng.integers(1, max_side + 1))
    h = int(rng.integers(1, max_side + 1))
    maxval = int(rng.integers(1, 256))
    pixels = bytes(rng.integers(0, maxval + 1, size=w * h, dtype=np.uint8))
    return GrayImage(w, h, pixels, maxval)


def principal_angles(U, V):
    """Largest principal angle between the row spaces of U and V."""
    qu, _ = np.linalg.qr(U.T)
    qv, _ = np.linalg.qr(V.T)
    s = np.linalg.svd(qu.T @ qv, compute_uv=False)
    s = np.clip(s, -1.0, 1.0)
    return float(np.max(np.arccos(s)))
