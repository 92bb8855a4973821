"""Pure numpy kernel backend.

pairwise_sq_dists sorts each pair's squared per-dimension differences
before summing, so the value is independent of dimension order. The
compiled backend gets the same property from exactly rounded summation;
the two agree to within normal float64 roundoff, not bitwise.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance matrix, exactly symmetric, zero diagonal."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        diff = x[i + 1 :] - x[i]
        sq = diff * diff
        sq.sort(axis=1)  # canonical addend order
        s = sq.sum(axis=1)
        out[i, i + 1 :] = s
        out[i + 1 :, i] = s
    return out


def tsne_grad(
    y: np.ndarray,
    p: np.ndarray,
    want_kl: bool = False,
    min_prob: float = 1e-12,
) -> tuple[np.ndarray, float | None]:
    """Kullback-Leibler gradient of a 2-D Student-t embedding.

    y (N, 2) embedding, p (N, N) symmetric affinities with zero diagonal.
    Returns (grad, kl); kl is None unless requested.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    dx = y[:, 0][:, None] - y[:, 0][None, :]
    dy = y[:, 1][:, None] - y[:, 1][None, :]
    num = 1.0 / (1.0 + (dx * dx + dy * dy))
    np.fill_diagonal(num, 0.0)
    z = num.sum()
    q = np.maximum(num / z, min_prob)
    w = (p - q) * num
    wsum = w.sum(axis=1)
    grad = 4.0 * (wsum[:, None] * y - w @ y)
    kl = None
    if want_kl:
        kl = float(np.where(p > 0.0, p * (np.log(np.maximum(p, min_prob)) - np.log(q)), 0.0).sum())
    return grad, kl
