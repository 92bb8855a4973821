"""Generalized discrimination value.

A scalar summary of how well labeled points cluster by label. Each
dimension is z-scored (population std) and scaled by one half, constant
dimensions are dropped, and the score is

    gdv = (1 / sqrt(D_eff)) * (mean intra-class distance
                               - mean inter-class distance)

with the intra term averaged over classes, the inter term averaged over
unordered class pairs, and D_eff the surviving dimension count. More
negative means cleaner separation; well separated tight clusters
approach -1, unstructured data sits near 0.

The score is bitwise invariant under dimension permutation and label
renaming: the kernel backends make each pairwise distance independent
of dimension order, and every reduction over distances or class
aggregates here uses exactly rounded summation (math.fsum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AllDimensionsConstant, UndefinedIntraClass
from . import distances


@dataclass
class LabeledPointSet:
    points: np.ndarray  # (N, D) float64
    labels: np.ndarray  # (N,) integer class ids

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.points.ndim != 2:
            raise ValueError("points must be 2-D")
        if self.labels.shape != (self.points.shape[0],):
            raise ValueError("labels must be 1-D with one entry per point")


@dataclass
class GdvResult:
    gdv: float
    intra: list[float]  # per-class mean distances, by ascending class id
    inter: list[float]  # per-pair means, pairs (l, m) with l < m in that order
    d_eff: int
    dropped_dims: list[int]
    classes: list[int]


def zscore_half(points: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Z-score each dimension (population std) and halve; drop constant dims.

    Returns the transformed matrix over surviving dimensions and the
    indices of the dropped ones.
    """
    points = np.asarray(points, dtype=np.float64)
    # reduce along contiguous rows of the transpose: per-dimension moments
    # then depend only on that dimension's values, not on column order
    xt = np.ascontiguousarray(points.T)
    mu = xt.mean(axis=1)
    sigma = xt.std(axis=1)
    keep = sigma > 0.0
    dropped = [int(i) for i in np.flatnonzero(~keep)]
    z = 0.5 * (points[:, keep] - mu[keep]) / sigma[keep]
    return z, dropped


def _fsum(values: np.ndarray) -> float:
    return math.fsum(values.ravel().tolist())


def gdv(points: np.ndarray, labels: np.ndarray) -> GdvResult:
    ps = LabeledPointSet(points, labels)
    points, labels = ps.points, ps.labels
    if not np.isfinite(points).all():
        raise ValueError("points must be finite")
    classes = [int(c) for c in np.unique(labels)]
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    buckets = {c: np.flatnonzero(labels == c) for c in classes}
    for c, idx in buckets.items():
        if idx.size < 2:
            raise UndefinedIntraClass(
                f"class {c} has {idx.size} point(s); intra-class distance "
                "needs at least two"
            )

    z, dropped = zscore_half(points)
    d_eff = z.shape[1]
    if d_eff == 0:
        raise AllDimensionsConstant("every dimension is constant across points")

    dist = np.sqrt(distances.pairwise_sq_dists(z))

    intra: list[float] = []
    for c in classes:
        idx = buckets[c]
        block = dist[np.ix_(idx, idx)]
        iu = np.triu_indices(idx.size, k=1)
        intra.append(_fsum(block[iu]) / iu[0].size)

    inter: list[float] = []
    for a in range(len(classes)):
        for b in range(a + 1, len(classes)):
            block = dist[np.ix_(buckets[classes[a]], buckets[classes[b]])]
            inter.append(_fsum(block) / block.size)

    l = len(classes)
    mean_intra = math.fsum(intra) / l
    mean_inter = 2.0 * math.fsum(inter) / (l * (l - 1))
    value = (mean_intra - mean_inter) / math.sqrt(d_eff)
    return GdvResult(
        gdv=value,
        intra=intra,
        inter=inter,
        d_eff=d_eff,
        dropped_dims=dropped,
        classes=classes,
    )
