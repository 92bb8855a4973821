"""Shared result type for 2-D projection methods."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ProjectionResult:
    """2-D embedding plus method-specific diagnostics.

    eigenvalues and negative_eigenvalues are populated by classical MDS;
    kl_divergence and kl_history by t-SNE.
    """

    coords: np.ndarray  # (N, 2) float64
    method: str
    eigenvalues: np.ndarray | None = None
    negative_eigenvalues: bool = False
    residual: float | None = None  # spectral mass outside the two used axes
    kl_divergence: float | None = None
    kl_history: list[tuple[int, float]] = field(default_factory=list)
    iterations: int | None = None
