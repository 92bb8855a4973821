"""Classical (Torgerson) multidimensional scaling to two dimensions.

The squared distance matrix is double centered, B = -1/2 J D2 J, and the
embedding is read off the top two eigenpairs of B. For points that truly
live in a Euclidean space this reproduces their configuration up to
rotation, reflection, and translation.
"""

from __future__ import annotations

import numpy as np

from ..errors import EigenFailure
from . import distances
from .projection import ProjectionResult


def classical_mds_from_sq_dists(sq_dists: np.ndarray) -> ProjectionResult:
    d2 = np.asarray(sq_dists, dtype=np.float64)
    if d2.ndim != 2 or d2.shape[0] != d2.shape[1]:
        raise ValueError("squared distance matrix must be square")
    n = d2.shape[0]
    if n < 2:
        raise ValueError("need at least two points")

    # double centering; one mean vector serves rows and columns so B stays
    # exactly symmetric when D2 is
    rm = d2.mean(axis=1)
    b = -0.5 * (d2 - rm[:, None] - rm[None, :] + rm.mean())

    try:
        w, v = np.linalg.eigh(b)
    except np.linalg.LinAlgError as e:
        raise EigenFailure(f"eigendecomposition failed: {e}") from e

    top = w[[-1, -2]]
    vecs = v[:, [-1, -2]]
    coords = np.zeros((n, 2), dtype=np.float64)
    flagged = False
    for k in range(2):
        if top[k] > 0.0:
            coords[:, k] = vecs[:, k] * np.sqrt(top[k])
        else:
            flagged = True  # degenerate or non-Euclidean axis, left at zero
    # canonical sign: first nonzero loading on each axis is positive
    for k in range(2):
        nz = np.flatnonzero(coords[:, k])
        if nz.size and coords[nz[0], k] < 0.0:
            coords[:, k] = -coords[:, k]
    positive_mass = float(w[w > 0.0].sum())
    used_mass = float(top[top > 0.0].sum())
    residual = 1.0 - used_mass / positive_mass if positive_mass > 0.0 else 0.0
    return ProjectionResult(
        coords=coords,
        method="classical_mds",
        eigenvalues=top.copy(),
        negative_eigenvalues=flagged,
        residual=residual,
    )


def classical_mds(points: np.ndarray) -> ProjectionResult:
    return classical_mds_from_sq_dists(distances.pairwise_sq_dists(points))
