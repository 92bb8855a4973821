"""t-SNE to two dimensions, written against the standard formulation.

Per-point Gaussian bandwidths are calibrated by bisection so every
conditional distribution hits the target perplexity, affinities are
symmetrized and floored, and the embedding follows gradient descent
with momentum and an early exaggeration phase. The Kullback-Leibler
divergence against the plain (un-exaggerated) affinities is recorded at
fixed checkpoints after exaggeration lifts, and once more at the end.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import CalibrationFailure, NonFiniteGradient, PerplexityTooHigh
from . import distances, kernels
from .projection import ProjectionResult


@dataclass
class TsneConfig:
    perplexity: float = 100.0
    n_iter: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch_iter: int = 250
    init_scale: float = 1e-4
    seed: int = 0
    entropy_tol: float = 1e-5
    max_bisection_iter: int = 100
    kl_checkpoint_every: int = 50
    min_prob: float = 1e-12


def perplexity_calibration(
    sq_dists: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_iter: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-point bandwidths matching a target perplexity.

    Returns (cond_p, betas): cond_p[i, j] = p(j | i) with zero diagonal,
    betas[i] = 1 / (2 sigma_i^2). Bisection on beta runs until the row
    entropy (nats) is within tol of log(perplexity). Rows that do not
    converge keep the best beta seen and raise a CalibrationFailure
    warning with the row count.
    """
    sq_dists = np.asarray(sq_dists, dtype=np.float64)
    n = sq_dists.shape[0]
    if sq_dists.shape != (n, n):
        raise ValueError("squared distance matrix must be square")
    if perplexity < 1.0:
        raise ValueError(f"perplexity must be >= 1, got {perplexity}")
    if perplexity > n - 1:
        raise PerplexityTooHigh(
            f"perplexity {perplexity} exceeds the {n - 1} available neighbors"
        )
    target = math.log(perplexity)
    cond_p = np.zeros((n, n), dtype=np.float64)
    betas = np.empty(n, dtype=np.float64)
    others = np.arange(n)
    failed = 0
    for i in range(n):
        idx = others[others != i]
        d2 = sq_dists[i, idx]
        d2 = d2 - d2.min()  # shift cancels in p; keeps exp well scaled
        beta = 1.0
        beta_lo = -math.inf
        beta_hi = math.inf
        best = None  # (abs entropy gap, weights, weight sum, beta)
        converged = False
        for _ in range(max_iter):
            w = np.exp(-beta * d2)
            sw = w.sum()  # >= 1: the shifted minimum contributes exp(0)
            h = math.log(sw) + beta * float((d2 * w).sum()) / sw
            gap = h - target
            if best is None or abs(gap) < best[0]:
                best = (abs(gap), w, sw, beta)
            if abs(gap) < tol:
                converged = True
                break
            if gap > 0.0:  # entropy too high, sharpen
                beta_lo = beta
                beta = beta * 2.0 if math.isinf(beta_hi) else (beta + beta_hi) / 2.0
            else:
                beta_hi = beta
                beta = beta / 2.0 if math.isinf(beta_lo) else (beta + beta_lo) / 2.0
        if not converged:
            failed += 1
        _, w, sw, beta = best
        cond_p[i, idx] = w / sw
        betas[i] = beta
    if failed:
        warnings.warn(
            CalibrationFailure(
                f"{failed} of {n} rows missed the entropy target; "
                "best bandwidths kept"
            )
        )
    return cond_p, betas


def _symmetrize(cond_p: np.ndarray, min_prob: float) -> np.ndarray:
    n = cond_p.shape[0]
    p = (cond_p + cond_p.T) / (2.0 * n)
    p = np.maximum(p, min_prob)
    np.fill_diagonal(p, 0.0)
    return p


def tsne(points: np.ndarray, config: TsneConfig | None = None) -> ProjectionResult:
    config = config or TsneConfig()
    sq = distances.pairwise_sq_dists(points)
    n = sq.shape[0]
    cond_p, _ = perplexity_calibration(
        sq, config.perplexity, config.entropy_tol, config.max_bisection_iter
    )
    p = _symmetrize(cond_p, config.min_prob)

    backend = kernels.active_backend()
    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, config.init_scale, size=(n, 2))
    velocity = np.zeros_like(y)
    history: list[tuple[int, float]] = []
    for it in range(config.n_iter):
        exaggerating = it < config.exaggeration_iters
        p_eff = p * config.early_exaggeration if exaggerating else p
        if it == config.exaggeration_iters:
            velocity[:] = 0.0  # the objective just changed; carried velocity is stale
        want_kl = (
            not exaggerating
            and (it - config.exaggeration_iters) % config.kl_checkpoint_every == 0
        )
        grad, kl = backend.tsne_grad(y, p_eff, want_kl=want_kl, min_prob=config.min_prob)
        if want_kl:
            history.append((it, float(kl)))
        momentum = (
            config.initial_momentum
            if it < config.momentum_switch_iter
            else config.final_momentum
        )
        velocity = momentum * velocity - config.learning_rate * grad
        y = y + velocity
        y = y - y.mean(axis=0)
        if not np.isfinite(y).all():
            raise NonFiniteGradient(f"embedding became non-finite at iteration {it}")

    _, kl = backend.tsne_grad(y, p, want_kl=True, min_prob=config.min_prob)
    history.append((config.n_iter, float(kl)))
    return ProjectionResult(
        coords=y,
        method="tsne",
        kl_divergence=float(kl),
        kl_history=history,
        iterations=config.n_iter,
    )
