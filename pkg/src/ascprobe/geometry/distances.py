"""Pairwise Euclidean distances over the active kernel backend."""

from __future__ import annotations

import numpy as np

from . import kernels


def _check(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError(f"points must be 2-D, got shape {points.shape}")
    if not np.isfinite(points).all():
        raise ValueError("points must be finite")
    return points


def pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    """Squared distance matrix; value independent of dimension order."""
    return kernels.active_backend().pairwise_sq_dists(_check(points))


def pairwise_dists(points: np.ndarray) -> np.ndarray:
    return np.sqrt(pairwise_sq_dists(points))
