"""Cluster geometry: discrimination scoring and 2-D projections."""

from .distances import pairwise_dists, pairwise_sq_dists
from .gdv import GdvResult, LabeledPointSet, gdv, zscore_half
from .kernels import backend_name, load_backend, set_backend
from .mds import classical_mds, classical_mds_from_sq_dists
from .projection import ProjectionResult
from .tsne import TsneConfig, perplexity_calibration, tsne

__all__ = [
    "GdvResult",
    "LabeledPointSet",
    "ProjectionResult",
    "TsneConfig",
    "backend_name",
    "classical_mds",
    "classical_mds_from_sq_dists",
    "gdv",
    "load_backend",
    "pairwise_dists",
    "pairwise_sq_dists",
    "perplexity_calibration",
    "set_backend",
    "tsne",
    "zscore_half",
]
